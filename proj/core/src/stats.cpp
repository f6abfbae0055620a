#include "cse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cse {

namespace {

bool is_integer(double q) { return std::floor(q) == q; }

double power_term(double x, double q) {
  if (x < 0.0 && !is_integer(q)) {
    throw Error(ErrorCode::kDomain, "power-mean with fractional q needs non-negative samples");
  }
  return std::pow(x, q);
}

double power_root(double mean, double q) {
  if (q == 1.0) return mean;
  return mean >= 0.0 ? std::pow(mean, 1.0 / q) : -std::pow(-mean, 1.0 / q);
}

double parse_double(std::string_view text) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "bad number '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::kParse, "bad number '" + s + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    auto next = text.find(sep, pos);
    out.push_back(text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double median_of_sorted(const std::vector<double>& v) {
  auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_winner(const ObservationVector& obs) {
  std::size_t ones = 0;
  for (double v : obs.values) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      throw Error(ErrorCode::kDomain, "winner-frequency needs 0/1 entries");
    }
  }
  if (ones != 1) throw Error(ErrorCode::kDomain, "winner-frequency needs exactly one winner");
}

}  // namespace

Transform Transform::clip(double lo, double hi) {
  if (!(lo <= hi)) throw Error(ErrorCode::kParameter, "clip needs lo <= hi");
  return {Kind::kClip, lo, hi};
}

Transform Transform::indicator(double threshold) { return {Kind::kIndicator, threshold, 0.0}; }

double Transform::operator()(double x) const {
  switch (kind) {
    case Kind::kIdentity: return x;
    case Kind::kClip: return std::clamp(x, lo, hi);
    case Kind::kIndicator: return x >= lo ? 1.0 : 0.0;
  }
  return x;
}

std::string Transform::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::kIdentity: out << "identity"; break;
    case Kind::kClip: out << "clip:" << lo << ':' << hi; break;
    case Kind::kIndicator: out << "indicator:" << lo; break;
  }
  return out.str();
}

Statistic Statistic::power_mean(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw Error(ErrorCode::kParameter, "power-mean needs q >= 1");
  return {StatisticKind::kPowerMean, {}, q};
}

Statistic Statistic::parse(std::string_view text) {
  auto parts = split(text, ':');
  auto head = parts[0];
  if (head == "mean" || head == "empirical-mean") {
    if (parts.size() == 1) return empirical_mean();
  } else if (head == "winner" || head == "winner-frequency") {
    if (parts.size() == 1) return winner_frequency();
  } else if (head == "median") {
    if (parts.size() == 1) return median();
  } else if (head == "power" || head == "power-mean") {
    if (parts.size() == 2) return power_mean(parse_double(parts[1]));
  } else if (head == "identity") {
    if (parts.size() == 1) return r_transform(Transform::identity());
  } else if (head == "clip") {
    if (parts.size() == 3) return r_transform(Transform::clip(parse_double(parts[1]), parse_double(parts[2])));
  } else if (head == "indicator") {
    if (parts.size() == 2) return r_transform(Transform::indicator(parse_double(parts[1])));
  }
  throw Error(ErrorCode::kParse, "unknown statistic '" + std::string(text) + "'");
}

std::string Statistic::name() const {
  switch (kind) {
    case StatisticKind::kEmpiricalMean: return "mean";
    case StatisticKind::kWinnerFrequency: return "winner";
    case StatisticKind::kRTransform: return transform.describe();
    case StatisticKind::kMedian: return "median";
    case StatisticKind::kPowerMean: {
      std::ostringstream out;
      out << "power:" << q;
      return out.str();
    }
  }
  return "mean";
}

StatisticState::StatisticState(Statistic statistic, std::size_t set_size)
    : statistic_(statistic), size_(set_size) {
  if (set_size == 0) throw Error(ErrorCode::kInvalidDimension, "statistic over an empty set");
  switch (statistic_.kind) {
    case StatisticKind::kWinnerFrequency: wins_.assign(size_, 0); break;
    case StatisticKind::kMedian: sorted_.assign(size_, {}); break;
    default: sums_.assign(size_, 0.0); break;
  }
}

void StatisticState::update(const ObservationVector& obs) {
  if (obs.values.size() != size_) {
    throw Error(ErrorCode::kInvalidDimension, "observation has " + std::to_string(obs.values.size()) +
                                                  " entries, set has " + std::to_string(size_));
  }
  for (double v : obs.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kDomain, "non-finite observation");
  }
  switch (statistic_.kind) {
    case StatisticKind::kEmpiricalMean:
      for (std::size_t i = 0; i < size_; ++i) sums_[i] += obs.values[i];
      break;
    case StatisticKind::kRTransform:
      for (std::size_t i = 0; i < size_; ++i) sums_[i] += statistic_.transform(obs.values[i]);
      break;
    case StatisticKind::kPowerMean: {
      std::vector<double> terms(size_);
      for (std::size_t i = 0; i < size_; ++i) terms[i] = power_term(obs.values[i], statistic_.q);
      for (std::size_t i = 0; i < size_; ++i) sums_[i] += terms[i];
      break;
    }
    case StatisticKind::kWinnerFrequency:
      check_winner(obs);
      for (std::size_t i = 0; i < size_; ++i) wins_[i] += obs.values[i] == 1.0 ? 1 : 0;
      break;
    case StatisticKind::kMedian:
      for (std::size_t i = 0; i < size_; ++i) {
        auto& s = sorted_[i];
        s.insert(std::upper_bound(s.begin(), s.end(), obs.values[i]), obs.values[i]);
      }
      break;
  }
  ++t_;
}

double StatisticState::value(std::size_t pos) const {
  if (t_ == 0) throw Error(ErrorCode::kNoData, "statistic read before any update");
  if (pos >= size_) throw Error(ErrorCode::kInvalidDimension, "position out of range");
  const auto t = static_cast<double>(t_);
  switch (statistic_.kind) {
    case StatisticKind::kEmpiricalMean:
    case StatisticKind::kRTransform: return sums_[pos] / t;
    case StatisticKind::kPowerMean: return power_root(sums_[pos] / t, statistic_.q);
    case StatisticKind::kWinnerFrequency: return static_cast<double>(wins_[pos]) / t;
    case StatisticKind::kMedian: return median_of_sorted(sorted_[pos]);
  }
  return 0.0;
}

std::vector<double> StatisticState::values() const {
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = value(i);
  return out;
}

std::vector<double> batch_statistic(const Statistic& statistic,
                                    std::span<const ObservationVector> stream) {
  if (stream.empty()) throw Error(ErrorCode::kNoData, "empty stream");
  const std::size_t m = stream.front().values.size();
  for (const auto& obs : stream) {
    if (obs.values.size() != m) throw Error(ErrorCode::kInvalidDimension, "ragged stream");
    if (statistic.kind == StatisticKind::kWinnerFrequency) check_winner(obs);
  }
  const auto t = static_cast<double>(stream.size());
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> column;
    column.reserve(stream.size());
    for (const auto& obs : stream) column.push_back(obs.values[i]);
    switch (statistic.kind) {
      case StatisticKind::kEmpiricalMean: {
        double sum = 0.0;
        for (double x : column) sum += x;
        out[i] = sum / t;
        break;
      }
      case StatisticKind::kRTransform: {
        double sum = 0.0;
        for (double x : column) sum += statistic.transform(x);
        out[i] = sum / t;
        break;
      }
      case StatisticKind::kPowerMean: {
        double sum = 0.0;
        for (double x : column) sum += power_term(x, statistic.q);
        out[i] = power_root(sum / t, statistic.q);
        break;
      }
      case StatisticKind::kWinnerFrequency: {
        auto wins = std::count(column.begin(), column.end(), 1.0);
        out[i] = static_cast<double>(wins) / t;
        break;
      }
      case StatisticKind::kMedian:
        std::sort(column.begin(), column.end());
        out[i] = median_of_sorted(column);
        break;
    }
  }
  return out;
}

double empirical_borda(const StateMap& states, ArmId arm) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [q, state] : states) {
    if (state.t() == 0 || !q.contains(arm)) continue;
    sum += state.value(q.position(arm));
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kNoData, "arm " + std::to_string(arm) + " never observed");
  return sum / static_cast<double>(count);
}

std::vector<double> borda_scores(const StateMap& states, std::size_t n) {
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (const auto& [q, state] : states) {
    if (state.t() == 0) continue;
    for (std::size_t p = 0; p < q.size(); ++p) {
      if (q[p] >= n) throw Error(ErrorCode::kInvalidDimension, "state for arm beyond n");
      sum[q[p]] += state.value(p);
      ++count[q[p]];
    }
  }
  std::vector<double> out(n, -std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < n; ++a) {
    if (count[a] > 0) out[a] = sum[a] / static_cast<double>(count[a]);
  }
  return out;
}

}  // namespace cse
