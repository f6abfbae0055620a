#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cse/core.hpp"

namespace cse {

// r in the r-transform statistic.
struct Transform {
  enum class Kind { kIdentity, kClip, kIndicator };
  Kind kind = Kind::kIdentity;
  double lo = 0.0;  // clip lower bound, or the indicator threshold
  double hi = 0.0;  // clip upper bound

  static Transform identity() { return {}; }
  static Transform clip(double lo, double hi);
  // 1{x >= threshold}
  static Transform indicator(double threshold);

  double operator()(double x) const;
  std::string describe() const;
};

enum class StatisticKind { kEmpiricalMean, kWinnerFrequency, kRTransform, kMedian, kPowerMean };

struct Statistic {
  StatisticKind kind = StatisticKind::kEmpiricalMean;
  Transform transform;  // kRTransform only
  double q = 1.0;       // kPowerMean only

  static Statistic empirical_mean() { return {}; }
  static Statistic winner_frequency() { return {StatisticKind::kWinnerFrequency, {}, 1.0}; }
  static Statistic r_transform(Transform r) { return {StatisticKind::kRTransform, r, 1.0}; }
  static Statistic median() { return {StatisticKind::kMedian, {}, 1.0}; }
  static Statistic power_mean(double q);

  // "mean", "winner", "median", "power:2", "clip:0:1", "indicator:0.5", "identity"
  static Statistic parse(std::string_view text);
  std::string name() const;
};

// Aggregate of every observation of one query set, per member arm.
class StatisticState {
 public:
  StatisticState(Statistic statistic, std::size_t set_size);

  // Throws kInvalidDimension on a length mismatch and kDomain on values the
  // statistic cannot take.
  void update(const ObservationVector& obs);

  // s_{i|Q}(t) in set order. Throws kNoData when t == 0.
  std::vector<double> values() const;
  double value(std::size_t pos) const;

  std::uint64_t t() const noexcept { return t_; }
  std::size_t size() const noexcept { return size_; }
  const Statistic& statistic() const noexcept { return statistic_; }

 private:
  Statistic statistic_;
  std::size_t size_;
  std::uint64_t t_ = 0;
  std::vector<double> sums_;                 // mean, r-transform, power-mean
  std::vector<std::uint64_t> wins_;          // winner-frequency
  std::vector<std::vector<double>> sorted_;  // median
};

// From-scratch recomputation over a whole stream; shares no state with StatisticState.
std::vector<double> batch_statistic(const Statistic& statistic,
                                    std::span<const ObservationVector> stream);

using StateMap = std::map<QuerySet, StatisticState>;

// Average of s_{arm|Q} over observed sets Q containing arm. kNoData if none.
double empirical_borda(const StateMap& states, ArmId arm);

// empirical_borda for arms 0..n-1 in one pass; unobserved arms get -infinity.
std::vector<double> borda_scores(const StateMap& states, std::size_t n);

}  // namespace cse
