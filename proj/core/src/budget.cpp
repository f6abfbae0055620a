#include "cse/budget.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "cse/oracle.hpp"

namespace cse {

using boost::multiprecision::cpp_int;

namespace {

std::uint64_t saturate(const cpp_int& v) {
  if (v > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  return v.convert_to<std::uint64_t>();
}

std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) { return saturate(cpp_int(a) * b); }

ArmId require_gcw(const LimitProfile& profile) {
  auto gcw = find_gcw(profile);
  if (!gcw) throw Error(ErrorCode::kInvalidProfile, "profile has no generalized Condorcet winner");
  return *gcw;
}

std::vector<double> sorted_desc(const LimitProfile& profile, const QuerySet& q) {
  auto v = profile.limits(q);
  return order_statistics(v);
}

}  // namespace

std::uint64_t sufficient_budget_z(const Schedule& schedule, const LimitProfile& profile,
                                  const std::vector<TraceStep>& trace, ArmId best) {
  std::uint64_t worst = 0;
  for (const auto& step : trace) {
    const auto& q = step.set;
    auto values = profile.limits(q);
    const auto pos = q.position(best);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i != pos && values[i] >= values[pos]) {
        throw Error(ErrorCode::kInvalidProfile, "arm " + std::to_string(best) + " is not on top of " + q.to_string());
      }
    }
    const std::size_t keep = schedule.policy()(q.size());
    const auto sorted = order_statistics(values);
    const double gap = values[pos] - sorted[keep];
    const std::uint64_t need = rate_inverse(profile.rate(), gap / 2.0);
    worst = std::max(worst, mul_sat(schedule.partitions_at(step.round), need));
  }
  return mul_sat(schedule.rounds(), worst);
}

std::uint64_t sufficient_budget_z(const Schedule& schedule, const LimitProfile& profile, ArmId best) {
  return sufficient_budget_z(schedule, profile, partition_trace(schedule, profile, best), best);
}

std::uint64_t sufficient_budget_table(Variant variant, std::size_t n, std::size_t k, const LimitProfile& profile) {
  const Schedule schedule = schedule_for(variant, n, k);
  const ArmId best = require_gcw(profile);
  std::uint64_t gap_term = 0;
  for (const auto& q : profile_sets(profile)) {
    if (!q.contains(best)) continue;
    auto values = profile.limits(q);
    const double top = values[q.position(best)];
    std::uint64_t term = 0;
    switch (variant) {
      case Variant::kCsws:
      case Variant::kCsr: {
        bool first = true;
        for (std::size_t i = 0; i < q.size(); ++i) {
          if (q[i] == best) continue;
          auto t = rate_inverse(profile.rate(), (top - values[i]) / 2.0);
          if (first) {
            term = t;
            first = false;
          } else {
            term = variant == Variant::kCsws ? std::max(term, t) : std::min(term, t);
          }
        }
        break;
      }
      case Variant::kCsh: {
        const auto sorted = order_statistics(values);
        term = rate_inverse(profile.rate(), (top - sorted[q.size() / 2]) / 2.0);
        break;
      }
      default:
        throw Error(ErrorCode::kParameter, "table budget defined for csws, csr and csh");
    }
    gap_term = std::max(gap_term, term);
  }
  const std::uint64_t blocks = (n + k - 1) / k;
  return mul_sat(mul_sat(blocks, schedule.rounds()), gap_term);
}

std::uint64_t round_robin_budget_z(const LimitProfile& profile) {
  auto report = find_gbw_gcopew(profile);
  if (report.gbw_set.size() != 1) throw Error(ErrorCode::kInvalidProfile, "Borda winner is not unique");
  const ArmId winner = report.gbw_set.front();
  std::uint64_t need = 1;
  for (ArmId a = 0; a < profile.n(); ++a) {
    if (a == winner) continue;
    const double gap = report.borda_scores[winner] - report.borda_scores[a];
    need = std::max(need, rate_inverse(profile.rate(), gap / 2.0));
  }
  return mul_sat(binomial(profile.n(), profile.k()), need);
}

std::uint64_t lower_bound_threshold(const LimitProfile& profile, const std::vector<QuerySet>* family) {
  const auto sets = family ? *family : profile_sets(profile);
  if (sets.empty()) throw Error(ErrorCode::kInvalidProfile, "no sets to bound over");
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (const auto& q : sets) {
    auto sorted = sorted_desc(profile, q);
    if (!(sorted[0] > sorted[1])) {
      throw Error(ErrorCode::kInvalidProfile, "tie at the top of " + q.to_string());
    }
    best = std::min(best, rate_inverse(profile.rate(), (sorted.front() - sorted.back()) / 2.0));
  }
  return best;
}

std::uint64_t lower_bound_gcw(const LimitProfile& profile, const std::vector<QuerySet>* family) {
  const std::uint64_t blocks = (profile.n() + profile.k() - 1) / profile.k();
  return mul_sat(blocks, lower_bound_threshold(profile, family));
}

double lower_bound_gbw_constant(std::size_t n, std::size_t k, std::uint64_t threshold) {
  return 0.25 * static_cast<double>(binomial(n - 1, k - 1)) * static_cast<double>(threshold);
}

Setting parse_setting(std::string_view text) {
  if (text == "reward") return Setting::kReward;
  if (text == "preference") return Setting::kPreference;
  throw Error(ErrorCode::kParse, "unknown setting '" + std::string(text) + "'");
}

std::uint64_t stochastic_constant(Setting setting, double delta, double epsilon, std::size_t k,
                                  std::size_t rounds, double sigma) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kParameter, "need 0 < delta < 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorCode::kParameter, "need epsilon > 0");
  if (rounds < 1) throw Error(ErrorCode::kParameter, "need R >= 1");
  using std::numbers::e;
  using std::numbers::pi;
  double value = 0.0;
  if (setting == Setting::kPreference) {
    const double a = 32.0 * std::sqrt(2.0 * static_cast<double>(rounds) / (3.0 * delta)) * pi / (epsilon * epsilon);
    value = (32.0 / (epsilon * epsilon)) * (std::log(a * e) + std::log(std::log(a)));
  } else {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::kParameter, "reward setting needs sigma > 0");
    if (k < 2) throw Error(ErrorCode::kParameter, "need k >= 2");
    const double c = std::pow(1.0 + std::sqrt(0.5), 2);
    const double x = std::pow(10.0 * static_cast<double>(k) * static_cast<double>(rounds), 2.0 / 3.0);
    const double d = std::pow(delta, 2.0 / 3.0);
    const double l = std::log(1.5);
    const double s2 = sigma * sigma;
    const double eps2 = epsilon * epsilon;
    const double inner = 72.0 * x * c * s2 / (d * eps2 * l);
    value = (48.0 * c * s2 / eps2) * std::log((2.0 * x / (d * l)) * std::log(inner));
  }
  if (!std::isfinite(value) || value < 0.0) throw Error(ErrorCode::kParameter, "constant undefined for these inputs");
  return static_cast<std::uint64_t>(std::ceil(value)) + 1;
}

std::uint64_t stochastic_total_budget(Setting setting, double delta, double epsilon, const Schedule& schedule,
                                      std::size_t k, double sigma) {
  auto c = stochastic_constant(setting, delta, epsilon, k, schedule.rounds(), sigma);
  return mul_sat(mul_sat(c, schedule.rounds()), schedule.max_partitions());
}

std::uint64_t max_query_sets(Variant variant, std::size_t n, std::size_t k) {
  if (k < 2 || k > n) throw Error(ErrorCode::kInvalidDimension, "need 2 <= k <= n");
  if (variant == Variant::kRoundRobin) return binomial(n, k);
  const Schedule schedule = schedule_for(variant, n, k);
  const std::size_t rounds = schedule.rounds();
  cpp_int kr = 1;
  cpp_int k1r = 1;
  cpp_int two_r = 1;
  for (std::size_t r = 0; r < rounds; ++r) {
    kr *= k;
    k1r *= (k - 1);
    two_r *= 2;
  }
  cpp_int extra;
  switch (variant) {
    case Variant::kCsws: extra = cpp_int(n) * (kr - 1) / (kr * (k - 1)); break;
    case Variant::kCsr: extra = cpp_int(n) * (kr - k1r) / kr; break;
    case Variant::kCsh: extra = cpp_int(2 * n) * (two_r - 1) / (cpp_int(k) * two_r); break;
    default: throw Error(ErrorCode::kParameter, "no query-set bound for this variant");
  }
  cpp_int listed = 0;
  for (auto p : schedule.partitions()) listed += p;
  return saturate(std::max(cpp_int(rounds) + extra, listed));
}

std::uint64_t scheduled_pulls(const Schedule& schedule, std::uint64_t budget) {
  cpp_int total = 0;
  for (std::size_t r = 1; r <= schedule.rounds(); ++r) {
    total += cpp_int(schedule.partitions_at(r)) * schedule.round_budget(budget, r);
  }
  return saturate(total);
}

BudgetReport budget_report(Variant variant, std::size_t n, std::size_t k, std::optional<std::uint64_t> budget,
                           const LimitProfile* profile) {
  BudgetReport report;
  report.variant = variant;
  report.n = n;
  report.k = k;
  report.budget = budget;
  report.max_query_sets = max_query_sets(variant, n, k);
  if (variant == Variant::kRoundRobin) {
    report.rounds = 1;
    report.partitions = {binomial(n, k)};
    if (budget) report.per_round = {*budget / binomial(n, k)};
    if (profile) report.z = round_robin_budget_z(*profile);
    return report;
  }
  const Schedule schedule = schedule_for(variant, n, k);
  report.rounds = schedule.rounds();
  report.partitions = schedule.partitions();
  if (budget) {
    for (std::size_t r = 1; r <= schedule.rounds(); ++r) report.per_round.push_back(schedule.round_budget(*budget, r));
  }
  if (profile) {
    if (profile->n() != n || profile->k() != k) {
      throw Error(ErrorCode::kInvalidDimension, "profile dimensions differ from --n/--k");
    }
    const ArmId best = require_gcw(*profile);
    report.z = sufficient_budget_z(schedule, *profile, best);
    report.z_table = sufficient_budget_table(variant, n, k, *profile);
    report.lower_bound = lower_bound_gcw(*profile);
    report.lower_bound_gbw = lower_bound_gbw_constant(n, k, lower_bound_threshold(*profile));
  }
  return report;
}

std::string to_json(const BudgetReport& report, int indent) {
  nlohmann::json j;
  j["variant"] = std::string(to_string(report.variant));
  j["n"] = report.n;
  j["k"] = report.k;
  j["R"] = report.rounds;
  j["P"] = report.partitions;
  if (report.budget) {
    j["B"] = *report.budget;
    j["b"] = report.per_round;
  }
  j["max_query_sets"] = report.max_query_sets;
  if (report.z) j["z"] = *report.z;
  if (report.z_table) j["z_table"] = *report.z_table;
  if (report.lower_bound) j["lower_bound_gcw"] = *report.lower_bound;
  if (report.lower_bound_gbw) j["lower_bound_gbw_constant"] = *report.lower_bound_gbw;
  return j.dump(indent);
}

std::string to_text(const BudgetReport& report) {
  auto join = [](const std::vector<std::uint64_t>& v) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << ')';
    return out.str();
  };
  std::ostringstream out;
  auto row = [&](const std::string& key, const std::string& value) {
    out << key << std::string(key.size() < 18 ? 18 - key.size() : 1, ' ') << value << '\n';
  };
  row("variant", std::string(to_string(report.variant)));
  row("n", std::to_string(report.n));
  row("k", std::to_string(report.k));
  row("R", std::to_string(report.rounds));
  row("P", join(report.partitions));
  if (report.budget) {
    row("B", std::to_string(*report.budget));
    row("b", join(report.per_round));
  }
  row("max_query_sets", std::to_string(report.max_query_sets));
  if (report.z) row("z", std::to_string(*report.z));
  if (report.z_table) row("z_table", std::to_string(*report.z_table));
  if (report.lower_bound) row("lower_bound_gcw", std::to_string(*report.lower_bound));
  if (report.lower_bound_gbw) {
    std::ostringstream v;
    v << *report.lower_bound_gbw;
    row("lower_bound_gbw", v.str());
  }
  return out.str();
}

}  // namespace cse
