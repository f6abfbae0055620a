#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cse/error.hpp"

namespace cse {

// Arms are identified by their index in [0, n).
using ArmId = std::size_t;

// Saturating binomial coefficient; returns UINT64_MAX on overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// A set of 2..k arms pulled jointly. Stored sorted so that equal sets compare
// and hash equal regardless of how they were constructed.
class QuerySet {
 public:
  QuerySet() = default;
  explicit QuerySet(std::vector<ArmId> arms);
  QuerySet(std::initializer_list<ArmId> arms) : QuerySet(std::vector<ArmId>(arms)) {}

  // Throws kInvalidDimension unless every arm is < n and size() <= k.
  void validate_for(std::size_t n, std::size_t k) const;

  std::size_t size() const noexcept { return arms_.size(); }
  std::span<const ArmId> arms() const noexcept { return arms_; }
  ArmId operator[](std::size_t pos) const { return arms_[pos]; }
  bool contains(ArmId arm) const noexcept;
  // Position of `arm` inside the set; throws kDomain if absent.
  std::size_t position(ArmId arm) const;

  std::string to_string() const;  // "0,3,7"
  static QuerySet parse(std::string_view text);

  auto begin() const noexcept { return arms_.begin(); }
  auto end() const noexcept { return arms_.end(); }

  friend auto operator<=>(const QuerySet&, const QuerySet&) = default;
  friend bool operator==(const QuerySet&, const QuerySet&) = default;

 private:
  std::vector<ArmId> arms_;
};

struct QuerySetHash {
  std::size_t operator()(const QuerySet& q) const noexcept;
};

// Lazy lexicographic stream of all size-k subsets of [0, n), optionally
// restricted to those containing one arm.
class QuerySetRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = QuerySet;
    using difference_type = std::ptrdiff_t;
    using pointer = const QuerySet*;
    using reference = const QuerySet&;

    iterator() = default;
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

   private:
    friend class QuerySetRange;
    iterator(std::size_t n, std::size_t k, std::optional<ArmId> containing);
    bool advance();
    void refresh();

    std::size_t n_ = 0;
    std::size_t k_ = 0;
    std::optional<ArmId> containing_;
    std::vector<ArmId> combo_;
    QuerySet current_;
    bool done_ = true;
  };

  QuerySetRange(std::size_t n, std::size_t k, std::optional<ArmId> containing);

  iterator begin() const { return iterator(n_, k_, containing_); }
  iterator end() const { return iterator(); }
  // C(n,k), or C(n-1,k-1) with `containing`.
  std::uint64_t count() const;

 private:
  std::size_t n_;
  std::size_t k_;
  std::optional<ArmId> containing_;
};

// Throws kInvalidDimension unless 2 <= k <= n (and containing < n).
QuerySetRange enumerate_query_sets(std::size_t n, std::size_t k,
                                   std::optional<ArmId> containing = std::nullopt);

// Visits every query set of size 2..k (the family Q_{<=k}), smallest sizes first.
void for_each_query_set_upto(std::size_t n, std::size_t k,
                             const std::function<void(const QuerySet&)>& fn,
                             std::optional<ArmId> containing = std::nullopt);
std::uint64_t count_query_sets_upto(std::size_t n, std::size_t k);

enum class ObservationKind { kReal, kWinner, kRank };

// Per-arm feedback aligned with the pulled QuerySet.
struct ObservationVector {
  ObservationKind kind = ObservationKind::kReal;
  std::vector<double> values;

  // Throws kDomain if the values violate the kind's domain.
  void validate() const;
};

// Non-increasing convergence envelope gamma(t), t >= 1.
class RateFunction {
 public:
  enum class Kind { kPowerLaw, kReciprocal, kTable };

  static RateFunction power_law(double scale, double exponent);
  static RateFunction reciprocal(double amplitude);
  // gamma(t) = values[t-1]; beyond the table the last value persists.
  static RateFunction table(std::vector<double> values);

  double operator()(std::uint64_t t) const;

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }
  double exponent() const noexcept { return exponent_; }
  const std::vector<double>& values() const noexcept { return table_; }

  std::string describe() const;

 private:
  RateFunction() = default;
  Kind kind_ = Kind::kReciprocal;
  double scale_ = 1.0;
  double exponent_ = 1.0;
  std::vector<double> table_;
};

inline constexpr std::uint64_t kDefaultRateHorizon = 1'000'000'000ULL;
// Relative slack applied to gamma(t) <= alpha so that thresholds derived from
// differences of limits still land on the intended grid point.
inline constexpr double kRateSlack = 1e-12;

bool rate_at_most(double value, double alpha);

// Smallest t >= 1 with rate(t) <= alpha.
std::uint64_t rate_inverse(const RateFunction& rate, double alpha,
                           std::uint64_t horizon = kDefaultRateHorizon);

// Ground-truth limits S_{i|Q} together with the envelope gamma that governs
// how fast statistics approach them.
class LimitProfile {
 public:
  using Table = std::map<QuerySet, std::vector<double>>;
  using LimitFn = std::function<double(const QuerySet&, ArmId)>;

  static LimitProfile from_table(std::size_t n, std::size_t k, Table table, RateFunction rate);
  static LimitProfile generative(std::size_t n, std::size_t k, LimitFn fn, RateFunction rate);

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  const RateFunction& rate() const noexcept { return rate_; }

  double limit(const QuerySet& q, ArmId arm) const;
  std::vector<double> limits(const QuerySet& q) const;

  bool has_table() const noexcept { return table_ != nullptr; }
  const Table& table() const;

  // True when every set of size 2..k can be listed cheaply.
  bool enumerable() const;

  std::optional<ArmId> declared_gcw() const noexcept { return declared_gcw_; }
  LimitProfile with_declared_gcw(ArmId arm) const;
  LimitProfile with_rate(RateFunction rate) const;

 private:
  LimitProfile(std::size_t n, std::size_t k, RateFunction rate) : n_(n), k_(k), rate_(std::move(rate)) {}

  std::size_t n_ = 0;
  std::size_t k_ = 0;
  RateFunction rate_;
  std::shared_ptr<const Table> table_;
  std::shared_ptr<const LimitFn> fn_;
  std::optional<ArmId> declared_gcw_;
};

inline constexpr std::uint64_t kEnumerationLimit = 200'000;

// Values sorted in non-increasing order: result[l-1] is S_{(l)|Q}.
std::vector<double> order_statistics(std::span<const double> values);

// f: set size -> number of arms kept. 1 <= f(x) <= x-1.
class EliminationPolicy {
 public:
  enum class Kind { kWinnerStays, kRejectWorst, kHalving, kCustom };

  static EliminationPolicy winner_stays() { return EliminationPolicy(Kind::kWinnerStays, {}); }
  static EliminationPolicy reject_worst() { return EliminationPolicy(Kind::kRejectWorst, {}); }
  static EliminationPolicy halving() { return EliminationPolicy(Kind::kHalving, {}); }
  // keep[x] is f(x) for x = 2..keep.size()-1; entries 0 and 1 are ignored.
  static EliminationPolicy custom(std::vector<std::size_t> keep);

  std::size_t operator()(std::size_t set_size) const;
  Kind kind() const noexcept { return kind_; }

 private:
  EliminationPolicy(Kind kind, std::vector<std::size_t> keep) : kind_(kind), keep_(std::move(keep)) {}
  Kind kind_;
  std::vector<std::size_t> keep_;
};

enum class Variant { kCsws, kCsr, kCsh, kRoundRobin, kCustom };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

// (R, P_1..P_R, f) parameterising one elimination run.
class Schedule {
 public:
  Schedule(Variant name, std::vector<std::uint64_t> partitions, EliminationPolicy policy);

  Variant name() const noexcept { return name_; }
  std::size_t rounds() const noexcept { return partitions_.size(); }
  const std::vector<std::uint64_t>& partitions() const noexcept { return partitions_; }
  // P_r for 1-based r; rounds past R reuse P_R.
  std::uint64_t partitions_at(std::size_t round) const;
  std::uint64_t max_partitions() const { return partitions_.front(); }
  const EliminationPolicy& policy() const noexcept { return policy_; }

  // floor(B / (P_r * R)).
  std::uint64_t round_budget(std::uint64_t budget, std::size_t round) const;

 private:
  Variant name_;
  std::vector<std::uint64_t> partitions_;
  EliminationPolicy policy_;
};

}  // namespace cse
