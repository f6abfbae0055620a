#include "cse/instances.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cse/budget.hpp"
#include "cse/oracle.hpp"

namespace cse {

namespace {

std::size_t unique_top(const std::vector<double>& v, const QuerySet& q) {
  std::size_t top = 0;
  for (std::size_t p = 1; p < v.size(); ++p) {
    if (v[p] > v[top]) top = p;
  }
  for (std::size_t p = 0; p < v.size(); ++p) {
    if (p != top && v[p] == v[top]) throw Error(ErrorCode::kPrecondition, "tie at the top of " + q.to_string());
  }
  return top;
}

EnvironmentSpec deterministic_base(std::size_t n, std::size_t k) {
  EnvironmentSpec spec;
  spec.kind = EnvKind::kDeterministic;
  spec.n = n;
  spec.k = k;
  spec.force_gcw = false;
  return spec;
}

}  // namespace

NecessityInstance make_necessity_instance(const LimitProfile& limits, double amplitude) {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw Error(ErrorCode::kParameter, "need A > 0");
  LimitProfile::Table table;
  for (const auto& q : profile_sets(limits)) {
    auto v = limits.limits(q);
    const std::size_t top = unique_top(v, q);
    for (std::size_t p = 0; p < v.size(); ++p) {
      if (p == top) continue;
      const double half = (v[top] - v[p]) / 2.0;
      if (half > amplitude * (1.0 + kRateSlack)) {
        std::ostringstream msg;
        msg << "half-gap " << half << " on " << q.to_string() << " exceeds A = " << amplitude;
        throw Error(ErrorCode::kParameter, msg.str());
      }
      const double m = std::max(1.0, std::round(amplitude / half));
      v[p] = v[top] - 2.0 * amplitude / m;
    }
    table.emplace(q, std::move(v));
  }
  const auto rate = RateFunction::reciprocal(amplitude);
  auto snapped = LimitProfile::from_table(limits.n(), limits.k(), table, rate);

  NecessityInstance out{deterministic_base(limits.n(), limits.k()), snapped, amplitude};
  auto& d = out.spec.deterministic;
  d.limits = std::move(table);
  d.beta = rate;
  d.rate = rate;
  d.sign_rule = DeterministicSpec::SignRule::kArgmaxDown;
  if (auto gcw = find_gcw(snapped)) {
    d.declared_gcw = *gcw;
    out.limits = snapped.with_declared_gcw(*gcw);
  }
  return out;
}

LimitProfile random_necessity_limits(std::size_t n, std::size_t k, std::uint64_t seed, double amplitude) {
  constexpr std::size_t kMinSteps = 3;
  constexpr std::size_t kMaxSteps = 30;
  if (k - 1 > kMaxSteps - kMinSteps + 1) throw Error(ErrorCode::kParameter, "k too large for the step grid");
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> top_dist(0.2, 0.6);
  std::vector<std::size_t> steps;
  for (std::size_t m = kMinSteps; m <= kMaxSteps; ++m) steps.push_back(m);

  LimitProfile::Table table;
  for_each_query_set_upto(n, k, [&](const QuerySet& q) {
    std::vector<double> v(q.size());
    if (q.contains(0)) {
      std::shuffle(steps.begin(), steps.end(), rng);
      for (std::size_t p = 0; p < q.size(); ++p) {
        v[p] = q[p] == 0 ? 1.0 : 1.0 - 2.0 * amplitude / static_cast<double>(steps[p - 1]);
      }
    } else {
      const double top = top_dist(rng);
      std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
      const std::size_t winner = pick(rng);
      for (std::size_t p = 0; p < q.size(); ++p) v[p] = p == winner ? top : top - 2.0 * amplitude;
    }
    table.emplace(q, std::move(v));
  });
  return LimitProfile::from_table(n, k, std::move(table), RateFunction::reciprocal(amplitude)).with_declared_gcw(0);
}

LowerBoundFamily make_gcw_lowerbound_instance(const LimitProfile& limits) {
  const auto sets = profile_sets(limits);
  for (const auto& q : sets) {
    auto sorted = order_statistics(limits.limits(q));
    if (!(sorted[0] > sorted[1])) throw Error(ErrorCode::kPrecondition, "tie at the top of " + q.to_string());
  }
  LowerBoundFamily family;
  family.b_prime = lower_bound_threshold(limits, &sets);

  LimitProfile::Table early;
  LimitProfile::Table base;
  for (const auto& q : sets) {
    auto sorted = order_statistics(limits.limits(q));
    early.emplace(q, std::vector<double>(q.size(), (sorted.front() + sorted.back()) / 2.0));
    base.emplace(q, sorted);
  }

  const std::size_t n = limits.n();
  for (ArmId l = 0; l < n; ++l) {
    LimitProfile::Table table = base;
    if (l > 0) {
      for (auto& [q, v] : table) {
        if (!q.contains(l)) continue;
        std::swap(v[0], v[q.position(l)]);
      }
    }
    EnvironmentSpec spec = deterministic_base(n, limits.k());
    auto& d = spec.deterministic;
    d.limits = std::move(table);
    d.early = early;
    d.switch_at = family.b_prime;
    d.rate = limits.rate();
    d.sign_rule = DeterministicSpec::SignRule::kNone;
    d.declared_gcw = l;
    family.swapped.push_back(std::move(spec));
  }
  family.base = family.swapped.front();
  return family;
}

RoundRobinInstance random_round_robin_instance(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed ^ 0x5252ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> pass_dist(2, 6);
  for (;;) {
    LimitProfile::Table table;
    for (const auto& q : enumerate_query_sets(n, k)) {
      std::vector<double> v(q.size());
      for (auto& x : v) x = unit(rng);
      table.emplace(q, std::move(v));
    }
    auto profile = LimitProfile::from_table(n, k, table, RateFunction::reciprocal(1.0));
    auto report = find_gbw_gcopew(profile);
    if (report.gbw_set.size() != 1) continue;
    const ArmId winner = report.gbw_set.front();
    double half = std::numeric_limits<double>::infinity();
    for (ArmId a = 0; a < n; ++a) {
      if (a != winner) half = std::min(half, (report.borda_scores[winner] - report.borda_scores[a]) / 2.0);
    }
    if (half < 1e-6) continue;

    const std::uint64_t g = pass_dist(rng);
    const double amplitude = half * (static_cast<double>(g) - 0.5);
    const auto rate = RateFunction::reciprocal(amplitude);

    RoundRobinInstance out{deterministic_base(n, k), profile.with_rate(rate), winner, g};
    out.spec.best_arm = winner;
    auto& d = out.spec.deterministic;
    d.limits = table;
    d.beta = rate;
    d.rate = rate;
    d.sign_rule = DeterministicSpec::SignRule::kTable;
    for (const auto& [q, v] : table) {
      std::vector<int> signs(q.size(), 1);
      if (q.contains(winner)) signs[q.position(winner)] = -1;
      d.signs.emplace(q, std::move(signs));
    }
    return out;
  }
}

MembershipReport check_membership(const EnvironmentSpec& spec, const LimitProfile& reference,
                                  std::uint64_t horizon) {
  if (spec.kind != EnvKind::kDeterministic) throw Error(ErrorCode::kUnsupported, "membership needs a deterministic spec");
  MembershipReport report;
  auto fail = [&](const std::string& what) {
    if (report.violations++ == 0) report.first_violation = what;
  };
  const auto& rate = reference.rate();
  for (const auto& q : profile_sets(reference)) {
    auto want = order_statistics(reference.limits(q));
    std::vector<double> lims(q.size());
    for (std::size_t p = 0; p < q.size(); ++p) lims[p] = trajectory_limit(spec, q, p);
    auto got = order_statistics(lims);
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (std::abs(want[i] - got[i]) > 1e-12 * std::max(1.0, std::abs(want[i]))) {
        fail("limits of " + q.to_string() + " are not a permutation of the reference");
        break;
      }
    }
    for (std::uint64_t t = 1; t <= horizon; ++t) {
      const double g = rate(t);
      for (std::size_t p = 0; p < q.size(); ++p) {
        ++report.checked;
        const double dev = std::abs(trajectory_value(spec, q, p, t) - lims[p]);
        if (dev > g + 1e-12 * std::max(1.0, std::abs(lims[p]))) {
          std::ostringstream msg;
          msg << "set " << q.to_string() << " arm " << q[p] << " t=" << t << " deviation " << dev << " > " << g;
          fail(msg.str());
        }
      }
    }
  }
  return report;
}

}  // namespace cse
