#include "cse/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cse {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDimension: return "invalid-dimension";
    case ErrorCode::kHorizonExceeded: return "horizon-exceeded";
    case ErrorCode::kNoData: return "no-data";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kBudgetExhausted: return "budget-exhausted";
    case ErrorCode::kInvalidProfile: return "invalid-profile";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kParameter: return "parameter";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

__extension__ using Wide = unsigned __int128;

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  Wide result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(result);
}

// ---------------------------------------------------------------- QuerySet

QuerySet::QuerySet(std::vector<ArmId> arms) : arms_(std::move(arms)) {
  std::sort(arms_.begin(), arms_.end());
  if (std::adjacent_find(arms_.begin(), arms_.end()) != arms_.end()) {
    throw Error(ErrorCode::kInvalidDimension, "query set has duplicate arms");
  }
  if (arms_.size() < 2) {
    throw Error(ErrorCode::kInvalidDimension, "query set needs at least 2 arms");
  }
}

void QuerySet::validate_for(std::size_t n, std::size_t k) const {
  if (arms_.size() > k) {
    throw Error(ErrorCode::kInvalidDimension,
                "query set " + to_string() + " larger than k=" + std::to_string(k));
  }
  if (!arms_.empty() && arms_.back() >= n) {
    throw Error(ErrorCode::kInvalidDimension,
                "query set " + to_string() + " has arm >= n=" + std::to_string(n));
  }
}

bool QuerySet::contains(ArmId arm) const noexcept {
  return std::binary_search(arms_.begin(), arms_.end(), arm);
}

std::size_t QuerySet::position(ArmId arm) const {
  auto it = std::lower_bound(arms_.begin(), arms_.end(), arm);
  if (it == arms_.end() || *it != arm) {
    throw Error(ErrorCode::kDomain, "arm " + std::to_string(arm) + " not in " + to_string());
  }
  return static_cast<std::size_t>(it - arms_.begin());
}

std::string QuerySet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(arms_[i]);
  }
  return out;
}

QuerySet QuerySet::parse(std::string_view text) {
  std::vector<ArmId> arms;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto token = text.substr(pos, comma - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    ArmId value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
      throw Error(ErrorCode::kParse, "bad query set '" + std::string(text) + "'");
    }
    arms.push_back(value);
    pos = comma + 1;
  }
  return QuerySet(std::move(arms));
}

std::size_t QuerySetHash::operator()(const QuerySet& q) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (ArmId a : q) {
    h ^= a + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

// ---------------------------------------------------------------- enumeration

QuerySetRange::iterator::iterator(std::size_t n, std::size_t k, std::optional<ArmId> containing)
    : n_(n), k_(k), containing_(containing), done_(false) {
  combo_.resize(k_);
  std::iota(combo_.begin(), combo_.end(), ArmId{0});
  if (containing_ && !std::binary_search(combo_.begin(), combo_.end(), *containing_)) {
    if (!advance()) return;
  }
  refresh();
}

bool QuerySetRange::iterator::advance() {
  for (;;) {
    // Standard lexicographic successor of a k-combination of [0, n).
    std::size_t i = k_;
    while (i > 0 && combo_[i - 1] == n_ - k_ + (i - 1)) --i;
    if (i == 0) {
      done_ = true;
      return false;
    }
    ++combo_[i - 1];
    for (std::size_t j = i; j < k_; ++j) combo_[j] = combo_[j - 1] + 1;
    if (!containing_ || std::binary_search(combo_.begin(), combo_.end(), *containing_)) return true;
  }
}

void QuerySetRange::iterator::refresh() { current_ = QuerySet(combo_); }

QuerySetRange::iterator& QuerySetRange::iterator::operator++() {
  if (!done_ && advance()) refresh();
  return *this;
}

QuerySetRange::QuerySetRange(std::size_t n, std::size_t k, std::optional<ArmId> containing)
    : n_(n), k_(k), containing_(containing) {}

std::uint64_t QuerySetRange::count() const {
  return containing_ ? binomial(n_ - 1, k_ - 1) : binomial(n_, k_);
}

QuerySetRange enumerate_query_sets(std::size_t n, std::size_t k, std::optional<ArmId> containing) {
  if (k < 2 || k > n) {
    throw Error(ErrorCode::kInvalidDimension,
                "need 2 <= k <= n, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  if (containing && *containing >= n) {
    throw Error(ErrorCode::kInvalidDimension, "arm out of range");
  }
  return QuerySetRange(n, k, containing);
}

void for_each_query_set_upto(std::size_t n, std::size_t k,
                             const std::function<void(const QuerySet&)>& fn,
                             std::optional<ArmId> containing) {
  if (k < 2 || k > n) {
    throw Error(ErrorCode::kInvalidDimension,
                "need 2 <= k <= n, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  for (std::size_t size = 2; size <= k; ++size) {
    for (const auto& q : enumerate_query_sets(n, size, containing)) fn(q);
  }
}

std::uint64_t count_query_sets_upto(std::size_t n, std::size_t k) {
  std::uint64_t total = 0;
  for (std::size_t size = 2; size <= k; ++size) {
    auto c = binomial(n, size);
    if (c == std::numeric_limits<std::uint64_t>::max() || total + c < total) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total += c;
  }
  return total;
}

// ---------------------------------------------------------------- observations

void ObservationVector::validate() const {
  switch (kind) {
    case ObservationKind::kReal:
      for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::kDomain, "non-finite reward");
      }
      break;
    case ObservationKind::kWinner: {
      std::size_t ones = 0;
      for (double v : values) {
        if (v == 1.0) {
          ++ones;
        } else if (v != 0.0) {
          throw Error(ErrorCode::kDomain, "winner indicator must be 0 or 1");
        }
      }
      if (ones != 1) throw Error(ErrorCode::kDomain, "winner vector needs exactly one 1");
      break;
    }
    case ObservationKind::kRank: {
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != static_cast<double>(i + 1)) {
          throw Error(ErrorCode::kDomain, "rank vector must be a permutation of 1..|Q|");
        }
      }
      break;
    }
  }
}

// ---------------------------------------------------------------- rates

RateFunction RateFunction::power_law(double scale, double exponent) {
  if (!(scale > 0.0) || !(exponent > 0.0) || !std::isfinite(scale) || !std::isfinite(exponent)) {
    throw Error(ErrorCode::kParameter, "power-law rate needs positive scale and exponent");
  }
  RateFunction r;
  r.kind_ = Kind::kPowerLaw;
  r.scale_ = scale;
  r.exponent_ = exponent;
  return r;
}

RateFunction RateFunction::reciprocal(double amplitude) {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorCode::kParameter, "reciprocal rate needs a positive amplitude");
  }
  RateFunction r;
  r.kind_ = Kind::kReciprocal;
  r.scale_ = amplitude;
  r.exponent_ = 1.0;
  return r;
}

RateFunction RateFunction::table(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kParameter, "rate table is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorCode::kParameter, "rate table entries must be finite and >= 0");
    }
    if (i > 0 && values[i] > values[i - 1]) {
      throw Error(ErrorCode::kParameter, "rate table must be non-increasing");
    }
  }
  RateFunction r;
  r.kind_ = Kind::kTable;
  r.table_ = std::move(values);
  return r;
}

double RateFunction::operator()(std::uint64_t t) const {
  if (t == 0) throw Error(ErrorCode::kDomain, "rate evaluated at t=0");
  switch (kind_) {
    case Kind::kPowerLaw:
      return scale_ * std::pow(static_cast<double>(t), -exponent_);
    case Kind::kReciprocal:
      return scale_ / static_cast<double>(t);
    case Kind::kTable:
      return t <= table_.size() ? table_[t - 1] : table_.back();
  }
  return 0.0;
}

std::string RateFunction::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::kPowerLaw: out << scale_ << "*t^-" << exponent_; break;
    case Kind::kReciprocal: out << scale_ << "/t"; break;
    case Kind::kTable: out << "table[" << table_.size() << "]"; break;
  }
  return out.str();
}

bool rate_at_most(double value, double alpha) {
  return value <= alpha + kRateSlack * std::abs(alpha);
}

std::uint64_t rate_inverse(const RateFunction& rate, double alpha, std::uint64_t horizon) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::kDomain, "rate_inverse needs alpha > 0");

  if (rate.kind() == RateFunction::Kind::kTable) {
    const auto& v = rate.values();
    // First table index whose value is within alpha; the table is sorted descending.
    auto it = std::find_if(v.begin(), v.end(), [&](double x) { return rate_at_most(x, alpha); });
    if (it == v.end()) {
      throw Error(ErrorCode::kHorizonExceeded,
                  "table rate never drops to " + std::to_string(alpha));
    }
    auto t = static_cast<std::uint64_t>(it - v.begin()) + 1;
    if (t > horizon) throw Error(ErrorCode::kHorizonExceeded, "rate inverse beyond horizon");
    return t;
  }

  // (c/alpha)^(1/p) for power laws; reciprocal is the p = 1 case.
  double estimate = std::pow(rate.scale() / alpha, 1.0 / rate.exponent());
  if (!std::isfinite(estimate) || estimate > static_cast<double>(horizon) + 1.0) {
    throw Error(ErrorCode::kHorizonExceeded, "rate inverse beyond horizon");
  }
  auto t = static_cast<std::uint64_t>(std::max(1.0, std::ceil(estimate)));
  // The closed form can be off by one after rounding; settle on the exact answer.
  while (t > 1 && rate_at_most(rate(t - 1), alpha)) --t;
  while (!rate_at_most(rate(t), alpha)) {
    ++t;
    if (t > horizon) throw Error(ErrorCode::kHorizonExceeded, "rate inverse beyond horizon");
  }
  if (t > horizon) throw Error(ErrorCode::kHorizonExceeded, "rate inverse beyond horizon");
  return t;
}

// ---------------------------------------------------------------- LimitProfile

LimitProfile LimitProfile::from_table(std::size_t n, std::size_t k, Table table, RateFunction rate) {
  if (k < 2 || k > n) throw Error(ErrorCode::kInvalidDimension, "need 2 <= k <= n");
  for (const auto& [q, values] : table) {
    q.validate_for(n, k);
    if (values.size() != q.size()) {
      throw Error(ErrorCode::kInvalidProfile, "set " + q.to_string() + " needs one limit per arm");
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidProfile, "non-finite limit");
    }
  }
  LimitProfile p(n, k, std::move(rate));
  p.table_ = std::make_shared<const Table>(std::move(table));
  return p;
}

LimitProfile LimitProfile::generative(std::size_t n, std::size_t k, LimitFn fn, RateFunction rate) {
  if (k < 2 || k > n) throw Error(ErrorCode::kInvalidDimension, "need 2 <= k <= n");
  if (!fn) throw Error(ErrorCode::kParameter, "generative profile needs a limit function");
  LimitProfile p(n, k, std::move(rate));
  p.fn_ = std::make_shared<const LimitFn>(std::move(fn));
  return p;
}

double LimitProfile::limit(const QuerySet& q, ArmId arm) const {
  if (table_) {
    auto it = table_->find(q);
    if (it == table_->end()) {
      throw Error(ErrorCode::kInvalidProfile, "no limits stored for set " + q.to_string());
    }
    return it->second[q.position(arm)];
  }
  if (!q.contains(arm)) throw Error(ErrorCode::kDomain, "arm not in set");
  return (*fn_)(q, arm);
}

std::vector<double> LimitProfile::limits(const QuerySet& q) const {
  if (table_) {
    auto it = table_->find(q);
    if (it == table_->end()) {
      throw Error(ErrorCode::kInvalidProfile, "no limits stored for set " + q.to_string());
    }
    return it->second;
  }
  std::vector<double> out;
  out.reserve(q.size());
  for (ArmId a : q) out.push_back((*fn_)(q, a));
  return out;
}

const LimitProfile::Table& LimitProfile::table() const {
  if (!table_) throw Error(ErrorCode::kUnsupported, "profile has no explicit table");
  return *table_;
}

bool LimitProfile::enumerable() const {
  return has_table() || count_query_sets_upto(n_, k_) <= kEnumerationLimit;
}

LimitProfile LimitProfile::with_declared_gcw(ArmId arm) const {
  if (arm >= n_) throw Error(ErrorCode::kInvalidDimension, "declared GCW out of range");
  LimitProfile copy = *this;
  copy.declared_gcw_ = arm;
  return copy;
}

LimitProfile LimitProfile::with_rate(RateFunction rate) const {
  LimitProfile copy = *this;
  copy.rate_ = std::move(rate);
  return copy;
}

std::vector<double> order_statistics(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return sorted;
}

// ---------------------------------------------------------------- policies and schedules

EliminationPolicy EliminationPolicy::custom(std::vector<std::size_t> keep) {
  for (std::size_t x = 2; x < keep.size(); ++x) {
    if (keep[x] < 1 || keep[x] > x - 1) {
      throw Error(ErrorCode::kParameter, "custom policy needs 1 <= f(x) <= x-1, violated at x=" +
                                             std::to_string(x));
    }
  }
  if (keep.size() < 3) throw Error(ErrorCode::kParameter, "custom policy must define f(2)");
  return EliminationPolicy(Kind::kCustom, std::move(keep));
}

std::size_t EliminationPolicy::operator()(std::size_t set_size) const {
  if (set_size < 2) throw Error(ErrorCode::kDomain, "policy defined for set sizes >= 2");
  switch (kind_) {
    case Kind::kWinnerStays: return 1;
    case Kind::kRejectWorst: return set_size - 1;
    case Kind::kHalving: return (set_size + 1) / 2;
    case Kind::kCustom:
      if (set_size >= keep_.size()) {
        throw Error(ErrorCode::kDomain, "custom policy undefined for size " + std::to_string(set_size));
      }
      return keep_[set_size];
  }
  return 1;
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kCsws: return "csws";
    case Variant::kCsr: return "csr";
    case Variant::kCsh: return "csh";
    case Variant::kRoundRobin: return "rr";
    case Variant::kCustom: return "custom";
  }
  return "custom";
}

Variant parse_variant(std::string_view text) {
  std::string lower(text);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "csws") return Variant::kCsws;
  if (lower == "csr") return Variant::kCsr;
  if (lower == "csh") return Variant::kCsh;
  if (lower == "rr" || lower == "roundrobin" || lower == "round-robin") return Variant::kRoundRobin;
  if (lower == "custom") return Variant::kCustom;
  throw Error(ErrorCode::kParse, "unknown variant '" + std::string(text) + "'");
}

Schedule::Schedule(Variant name, std::vector<std::uint64_t> partitions, EliminationPolicy policy)
    : name_(name), partitions_(std::move(partitions)), policy_(std::move(policy)) {
  if (partitions_.empty()) throw Error(ErrorCode::kParameter, "schedule needs R >= 1");
  for (std::size_t r = 0; r < partitions_.size(); ++r) {
    if (partitions_[r] < 1) throw Error(ErrorCode::kParameter, "schedule needs P_r >= 1");
    if (r > 0 && partitions_[r] > partitions_[r - 1]) {
      throw Error(ErrorCode::kParameter, "schedule partitions must be non-increasing");
    }
  }
}

std::uint64_t Schedule::partitions_at(std::size_t round) const {
  if (round == 0) throw Error(ErrorCode::kDomain, "rounds are 1-based");
  return partitions_[std::min(round, partitions_.size()) - 1];
}

std::uint64_t Schedule::round_budget(std::uint64_t budget, std::size_t round) const {
  return budget / (partitions_at(round) * partitions_.size());
}

}  // namespace cse
