#include "cse/verify.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "cse/algo.hpp"
#include "cse/budget.hpp"
#include "cse/env.hpp"
#include "cse/instances.hpp"
#include "cse/oracle.hpp"

namespace cse {

namespace {

constexpr std::size_t kNecessityN[] = {6, 9, 12};
constexpr std::size_t kNecessityK[] = {2, 3};
constexpr Variant kVariants[] = {Variant::kCsws, Variant::kCsr, Variant::kCsh};

std::string instance_name(const char* prefix, std::size_t i, std::size_t n, std::size_t k) {
  std::ostringstream out;
  out << prefix << i << "(n=" << n << ",k=" << k << ")";
  return out.str();
}

RunRecord run_sorted(const EnvironmentSpec& spec, Variant variant, std::uint64_t budget) {
  auto env = make_environment(spec);
  env->set_budget_cap(budget);
  RunConfig config;
  config.budget = budget;
  config.schedule = schedule_for(variant, spec.n, spec.k);
  config.statistic = Statistic::empirical_mean();
  config.partition_order = PartitionOrder::kSorted;
  config.tie_break = TieBreak::kLowestIndex;
  return run_cse(config, *env);
}

// Largest gamma^{-1}(half-gap) to the set maximum over every set and member.
std::uint64_t max_set_threshold(const LimitProfile& profile) {
  std::uint64_t worst = 1;
  for (const auto& q : profile_sets(profile)) {
    auto v = profile.limits(q);
    const double top = *std::max_element(v.begin(), v.end());
    for (double x : v) {
      if (x < top) worst = std::max(worst, rate_inverse(profile.rate(), (top - x) / 2.0));
    }
  }
  return worst;
}

LimitProfile random_strict_table(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LimitProfile::Table table;
  for_each_query_set_upto(n, k, [&](const QuerySet& q) {
    std::vector<double> v(q.size());
    for (;;) {
      for (auto& x : v) x = unit(rng);
      auto s = order_statistics(v);
      if (s.front() - s[1] >= 0.01 && s.front() - s.back() >= 0.2) break;
    }
    table.emplace(q, std::move(v));
  });
  return LimitProfile::from_table(n, k, std::move(table), RateFunction::power_law(1.0, 0.5));
}

BoundaryCase membership_case(const std::string& instance, const EnvironmentSpec& spec, const LimitProfile& reference,
                             std::uint64_t horizon) {
  BoundaryCase c;
  c.suite = "membership";
  c.variant = "-";
  c.instance = instance;
  c.budget = horizon;
  c.expected_success = true;
  auto report = check_membership(spec, reference, horizon);
  c.observed_success = report.ok();
  if (!report.ok()) c.note = report.first_violation;
  return c;
}

}  // namespace

std::size_t SuiteResult::failures() const {
  return static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(), [](const auto& c) { return !c.pass(); }));
}

SuiteResult verify_necessity_boundary(std::size_t instances, std::uint64_t seed) {
  SuiteResult result;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = kNecessityN[i % 3];
    const std::size_t k = kNecessityK[(i / 3) % 2];
    const auto limits = random_necessity_limits(n, k, splitmix64(seed * 1000 + i), kNecessityAmplitude);
    const auto inst = make_necessity_instance(limits, kNecessityAmplitude);
    const ArmId best = 0;
    for (Variant v : kVariants) {
      const auto schedule = schedule_for(v, n, k);
      const std::uint64_t z = sufficient_budget_z(schedule, inst.limits, best);
      for (int side : {+1, -1}) {
        BoundaryCase c;
        c.suite = "necessity";
        c.variant = std::string(to_string(v));
        c.instance = instance_name("nec", i, n, k);
        c.threshold = z;
        c.budget = side > 0 ? z + 1 : z - 1;
        c.expected_success = side > 0;
        c.best_arm = best;
        auto record = run_sorted(inst.spec, v, c.budget);
        c.returned_arm = record.returned_arm;
        c.observed_success = record.returned_arm == best;
        if (record.has_flag("budget_exhausted")) c.note = "budget exhausted";
        if (record.pulls_used > c.budget) c.note = "pulls exceed budget";
        result.cases.push_back(std::move(c));
      }
    }
  }
  return result;
}

SuiteResult verify_round_robin_boundary(std::size_t instances, std::uint64_t seed) {
  constexpr std::size_t kN[] = {4, 5, 6};
  constexpr std::size_t kK[] = {2, 3};
  SuiteResult result;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = kN[i % 3];
    const std::size_t k = kK[(i / 3) % 2];
    const auto inst = random_round_robin_instance(n, k, splitmix64(seed * 2000 + i));
    const std::uint64_t sets = binomial(n, k);
    const std::uint64_t z = round_robin_budget_z(inst.limits);
    for (std::uint64_t passes : {inst.passes - 1, inst.passes, inst.passes + 1}) {
      BoundaryCase c;
      c.suite = "round-robin";
      c.variant = "rr";
      c.instance = instance_name("rr", i, n, k);
      c.threshold = z;
      c.budget = passes * sets;
      c.expected_success = c.budget >= z;
      c.best_arm = inst.borda_winner;
      auto env = make_environment(inst.spec);
      env->set_budget_cap(c.budget);
      auto record = run_round_robin(c.budget, n, k, *env, Statistic::empirical_mean(), PartitionOrder::kSorted, 0);
      c.returned_arm = record.returned_arm;
      c.observed_success = record.returned_arm == inst.borda_winner;
      if (z != sets * inst.passes) c.note = "z_RR differs from C(n,k)*g";
      result.cases.push_back(std::move(c));
    }
  }
  return result;
}

SuiteResult verify_membership(std::uint64_t seed) {
  SuiteResult result;
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t n = kNecessityN[i % 3];
    const std::size_t k = kNecessityK[(i / 3) % 2];
    const auto limits = random_necessity_limits(n, k, splitmix64(seed * 1000 + i), kNecessityAmplitude);
    const auto inst = make_necessity_instance(limits, kNecessityAmplitude);
    result.cases.push_back(membership_case(instance_name("nec", i, n, k), inst.spec, inst.limits,
                                           10 * max_set_threshold(inst.limits)));
  }
  for (std::size_t i = 0; i < 10; ++i) {
    const std::size_t n = 4 + i % 3;
    const std::size_t k = 2 + (i / 3) % 2;
    const auto inst = random_round_robin_instance(n, k, splitmix64(seed * 2000 + i));
    result.cases.push_back(membership_case(instance_name("rr", i, n, k), inst.spec, inst.limits,
                                           10 * round_robin_budget_z(inst.limits) / binomial(n, k)));
  }
  std::mt19937_64 rng(splitmix64(seed ^ 0x1B0ULL));
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t n = 3 + i % 4;
    const std::size_t k = std::min<std::size_t>(n, 2 + i % 2);
    const auto limits = random_strict_table(n, k, rng);
    const auto family = make_gcw_lowerbound_instance(limits);
    for (std::size_t l = 0; l < family.swapped.size(); ++l) {
      std::ostringstream name;
      name << "lb" << i << "(n=" << n << ",k=" << k << ",l=" << l << ")";
      result.cases.push_back(membership_case(name.str(), family.swapped[l], limits, 10 * family.b_prime));
    }
  }
  return result;
}

std::string to_text(const SuiteResult& result) {
  std::ostringstream out;
  for (const auto& c : result.cases) {
    out << (c.pass() ? "PASS" : "FAIL") << "  " << c.suite << ' ' << c.variant << ' ' << c.instance
        << " B=" << c.budget;
    if (c.suite != "membership") {
      out << " z=" << c.threshold << " expected=" << (c.expected_success ? "success" : "failure")
          << " observed=" << (c.observed_success ? "success" : "failure") << " returned=" << c.returned_arm
          << " best=" << c.best_arm;
    }
    if (!c.note.empty()) out << " (" << c.note << ')';
    out << '\n';
  }
  out << result.cases.size() - result.failures() << '/' << result.cases.size() << " cases passed\n";
  return out.str();
}

}  // namespace cse
