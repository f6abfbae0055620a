#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "cse/budget.hpp"
#include "cse/instances.hpp"
#include "cse/oracle.hpp"

using namespace cse;
using boost::multiprecision::cpp_rational;

namespace {

// Rational-arithmetic oracles, written against the formulas rather than the
// loops in the library.
std::uint64_t ceil_rational(const cpp_rational& x) {
  boost::multiprecision::cpp_int num = boost::multiprecision::numerator(x);
  boost::multiprecision::cpp_int den = boost::multiprecision::denominator(x);
  boost::multiprecision::cpp_int q = num / den;
  if (q * den < num) ++q;
  return q.convert_to<std::uint64_t>();
}

std::vector<std::uint64_t> csws_oracle(std::size_t n, std::size_t k) {
  std::size_t e = 0;
  while (boost::multiprecision::pow(boost::multiprecision::cpp_int(k), static_cast<unsigned>(e)) < n) ++e;
  std::vector<std::uint64_t> p;
  for (std::size_t r = 1; r <= e + 1; ++r) {
    p.push_back(ceil_rational(cpp_rational(n) /
                              boost::multiprecision::pow(boost::multiprecision::cpp_int(k), static_cast<unsigned>(r))));
  }
  return p;
}

std::vector<std::uint64_t> csr_oracle(std::size_t n, std::size_t k) {
  const cpp_rational shrink(k - 1, k);
  cpp_rational x(n);
  std::size_t m = 0;
  while (x > 1) {
    x *= shrink;
    ++m;
  }
  std::vector<std::uint64_t> p;
  cpp_rational scale(n, k);
  for (std::size_t r = 1; r <= m + k - 1; ++r) {
    p.push_back(ceil_rational(scale));
    scale *= shrink;
  }
  return p;
}

std::vector<std::uint64_t> csh_oracle(std::size_t n, std::size_t k) {
  const std::size_t rounds = std::bit_width(n - 1) + std::bit_width(k - 1);
  std::vector<std::uint64_t> p;
  for (std::size_t r = 1; r <= rounds; ++r) {
    p.push_back(ceil_rational(cpp_rational(n, k) / boost::multiprecision::pow(boost::multiprecision::cpp_int(2),
                                                                               static_cast<unsigned>(r - 1))));
  }
  return p;
}

std::uint64_t scan_inverse(const std::function<double(std::uint64_t)>& g, double alpha) {
  std::uint64_t t = 1;
  while (g(t) > alpha * (1 + 1e-12)) ++t;
  return t;
}

LimitProfile pair_profile(double a, double b, RateFunction rate) {
  return LimitProfile::from_table(2, 2, {{QuerySet{0, 1}, {a, b}}}, std::move(rate));
}

LimitProfile borda_example(RateFunction rate) {
  return LimitProfile::from_table(
      3, 2, {{QuerySet{0, 1}, {0.8, 0.2}}, {QuerySet{0, 2}, {0.9, 0.1}}, {QuerySet{1, 2}, {0.6, 0.4}}},
      std::move(rate));
}

// Arm 0 sits `gap` above every other arm, which all share the value 0.
LimitProfile uniform_gap(std::size_t n, std::size_t k, double gap) {
  return LimitProfile::generative(
      n, k, [gap](const QuerySet&, ArmId a) { return a == 0 ? gap : 0.0; }, RateFunction::power_law(1.0, 0.5));
}

}  // namespace

TEST_SUITE("budget") {
  TEST_CASE("schedule examples") {
    auto csws = schedule_for(Variant::kCsws, 20, 4);
    CHECK(csws.partitions() == std::vector<std::uint64_t>{5, 2, 1, 1});
    auto csr = schedule_for(Variant::kCsr, 8, 2);
    CHECK(csr.partitions() == std::vector<std::uint64_t>{4, 2, 1, 1});
    auto csh = schedule_for(Variant::kCsh, 16, 4);
    CHECK(csh.partitions() == std::vector<std::uint64_t>{4, 2, 1, 1, 1, 1});
    CHECK(csws.round_budget(500, 1) == 25);
    CHECK(csws.round_budget(500, 2) == 62);
  }

  TEST_CASE("schedules match rational oracles up to n=200, k=20") {
    for (std::size_t n = 2; n <= 200; ++n) {
      for (std::size_t k = 2; k <= std::min<std::size_t>(n, 20); ++k) {
        INFO("n=" << n << " k=" << k);
        REQUIRE(schedule_for(Variant::kCsws, n, k).partitions() == csws_oracle(n, k));
        REQUIRE(schedule_for(Variant::kCsr, n, k).partitions() == csr_oracle(n, k));
        const auto csh = schedule_for(Variant::kCsh, n, k).partitions();
        const auto closed = csh_oracle(n, k);
        if (k % 2 == 0) {
          REQUIRE(csh == closed);
        } else {
          REQUIRE(csh.size() >= closed.size());
          for (std::size_t r = 0; r < closed.size(); ++r) REQUIRE(csh[r] >= closed[r]);
        }
      }
    }
  }

  TEST_CASE("schedules cover the realized runs") {
    for (std::size_t n = 2; n <= 120; ++n) {
      for (std::size_t k = 2; k <= std::min<std::size_t>(n, 12); ++k) {
        for (Variant v : {Variant::kCsws, Variant::kCsr, Variant::kCsh}) {
          const auto schedule = schedule_for(v, n, k);
          const auto realized = realized_partitions(n, k, schedule.policy());
          INFO(to_string(v) << " n=" << n << " k=" << k);
          REQUIRE(realized.size() <= schedule.rounds());
          for (std::size_t r = 0; r < realized.size(); ++r) REQUIRE(realized[r] <= schedule.partitions()[r]);
          std::uint64_t listed = 0;
          for (auto p : schedule.partitions()) listed += p;
          REQUIRE(max_query_sets(v, n, k) >= listed);
        }
      }
    }
  }

  TEST_CASE("scheduled pulls never exceed the budget") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 3000; ++trial) {
      const std::size_t n = 2 + rng() % 300;
      const std::size_t k = 2 + rng() % std::min<std::size_t>(n - 1, 30);
      const std::uint64_t budget = 1 + rng() % 100000;
      for (Variant v : {Variant::kCsws, Variant::kCsr, Variant::kCsh}) {
        CHECK(scheduled_pulls(schedule_for(v, n, k), budget) <= budget);
      }
    }
  }

  TEST_CASE("z on one partition") {
    Schedule single(Variant::kCustom, {1}, EliminationPolicy::winner_stays());
    auto profile = pair_profile(0.8, 0.4, RateFunction::power_law(1.0, 0.5));
    CHECK(sufficient_budget_z(single, profile, 0) == 25);
    auto instant = pair_profile(0.8, 0.4, RateFunction::table({0.0}));
    auto csws = schedule_for(Variant::kCsws, 20, 4);
    CHECK(sufficient_budget_z(single, instant, 0) == 1);
    auto table = LimitProfile::generative(
        20, 4, [](const QuerySet& q, ArmId a) { return a == 0 ? 1.0 : 0.1 * static_cast<double>(q.size() - q.position(a)) / 10; },
        RateFunction::table({0.0}));
    CHECK(sufficient_budget_z(csws, table, 0) == 4 * 5);
  }

  TEST_CASE("z on the two-arm necessity instance") {
    auto inst = make_necessity_instance(pair_profile(0.8, 0.2, RateFunction::reciprocal(0.6)), 0.6);
    Schedule single(Variant::kCustom, {1}, EliminationPolicy::winner_stays());
    CHECK(sufficient_budget_z(single, inst.limits, 0) == 2);
    CHECK(scan_inverse([](std::uint64_t t) { return 0.6 / static_cast<double>(t); }, 0.3) == 2);
  }

  TEST_CASE("z rejects a best arm that is not on top") {
    auto profile = pair_profile(0.4, 0.8, RateFunction::reciprocal(1.0));
    Schedule single(Variant::kCustom, {1}, EliminationPolicy::winner_stays());
    std::vector<TraceStep> trace{{1, QuerySet{0, 1}}};
    CHECK_THROWS_AS(sufficient_budget_z(single, profile, trace, 0), Error);
  }

  TEST_CASE("RoundRobin z") {
    CHECK(round_robin_budget_z(borda_example(RateFunction::reciprocal(0.6))) == 9);
    CHECK(round_robin_budget_z(borda_example(RateFunction::table({0.0}))) == 3);
    auto tied = LimitProfile::from_table(
        3, 2, {{QuerySet{0, 1}, {0.5, 0.5}}, {QuerySet{0, 2}, {0.5, 0.5}}, {QuerySet{1, 2}, {0.5, 0.5}}},
        RateFunction::reciprocal(1.0));
    CHECK_THROWS_AS(round_robin_budget_z(tied), Error);
  }

  TEST_CASE("GCW lower bound") {
    auto profile = LimitProfile::generative(
        20, 4, [](const QuerySet& q, ArmId a) { return a == q[0] ? 0.4 : 0.0; }, RateFunction::power_law(1.0, 0.5));
    CHECK(lower_bound_threshold(profile) == 25);
    CHECK(lower_bound_gcw(profile) == 125);
    auto square = LimitProfile::from_table(3, 3,
                                           {{QuerySet{0, 1}, {0.9, 0.5}},
                                            {QuerySet{0, 2}, {0.9, 0.1}},
                                            {QuerySet{1, 2}, {0.5, 0.1}},
                                            {QuerySet{0, 1, 2}, {0.9, 0.5, 0.1}}},
                                           RateFunction::power_law(1.0, 0.5));
    CHECK(lower_bound_gcw(square) == lower_bound_threshold(square));
    CHECK(lower_bound_gbw_constant(6, 3, 8) == doctest::Approx(0.25 * 10 * 8));
    auto tie = pair_profile(0.5, 0.5, RateFunction::reciprocal(1.0));
    CHECK_THROWS_AS(lower_bound_threshold(tie), Error);
  }

  TEST_CASE("uniform gaps factor out") {
    for (Variant v : {Variant::kCsws, Variant::kCsr, Variant::kCsh}) {
      for (auto [n, k] : {std::pair<std::size_t, std::size_t>{8, 2}, {9, 3}, {12, 4}}) {
        const auto profile = uniform_gap(n, k, 0.2);
        const std::uint64_t blocks = (n + k - 1) / k;
        CHECK(sufficient_budget_table(v, n, k, profile) == blocks * schedule_for(v, n, k).rounds() * 100);
      }
    }
  }

  TEST_CASE("k=2 gives the same table budget for CSWS and CSH") {
    for (std::size_t n : {3, 7, 16, 33}) {
      auto inst = make_necessity_instance(random_necessity_limits(n, 2, n), 0.45);
      CHECK(sufficient_budget_table(Variant::kCsws, n, 2, inst.limits) ==
            sufficient_budget_table(Variant::kCsh, n, 2, inst.limits));
    }
  }

  TEST_CASE("trace z never exceeds the table form") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const std::size_t n = 5 + seed % 6;
      const std::size_t k = 2 + seed % 3;
      auto limits = random_necessity_limits(n, k, seed);
      for (Variant v : {Variant::kCsws, Variant::kCsr, Variant::kCsh}) {
        CHECK(sufficient_budget_z(schedule_for(v, n, k), limits, 0) <= sufficient_budget_table(v, n, k, limits));
      }
    }
  }

  TEST_CASE("z monotonicity") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 4 + trial % 5;
      const std::size_t k = std::min<std::size_t>(n, 2 + static_cast<std::size_t>(trial % 3));
      LimitProfile::Table table, wider;
      for_each_query_set_upto(n, k, [&](const QuerySet& q) {
        std::vector<double> v(q.size());
        for (auto& x : v) x = 0.8 * unit(rng);
        if (q.contains(0)) v[q.position(0)] = 0.9;
        auto w = v;
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (q[i] != 0) w[i] -= 0.1 * unit(rng);
        }
        table.emplace(q, v);
        wider.emplace(q, w);
      });
      for (Variant var : {Variant::kCsws, Variant::kCsr, Variant::kCsh}) {
        const auto schedule = schedule_for(var, n, k);
        auto base = LimitProfile::from_table(n, k, table, RateFunction::reciprocal(0.3));
        const auto trace = partition_trace(schedule, base, 0);
        const auto z = sufficient_budget_z(schedule, base, trace, 0);
        CHECK(sufficient_budget_z(schedule, LimitProfile::from_table(n, k, wider, RateFunction::reciprocal(0.3)), trace,
                                  0) <= z);
        CHECK(sufficient_budget_z(schedule, base.with_rate(RateFunction::reciprocal(0.5)), trace, 0) >= z);
        CHECK(sufficient_budget_z(schedule, base.with_rate(RateFunction::power_law(1.0, 0.5)), trace, 0) >= z);
      }
    }
  }

  TEST_CASE("stochastic constants") {
    const auto pref = stochastic_constant(Setting::kPreference, 0.1, 0.1, 2, 4);
    CHECK(pref >= 45576);
    CHECK(pref <= 45578);
    // Independent long double evaluation of the preference closed form.
    const long double pi = std::numbers::pi_v<long double>;
    const long double a = 32.0L * std::sqrt(2.0L * 4 / (3.0L * 0.1L)) * pi / 0.01L;
    const long double ref = (32.0L / 0.01L) * (std::log(a * std::numbers::e_v<long double>) + std::log(std::log(a)));
    CHECK(pref == static_cast<std::uint64_t>(std::ceil(ref)) + 1);
    const auto halved = stochastic_constant(Setting::kPreference, 0.1, 0.05, 2, 4);
    CHECK(static_cast<double>(halved) >= 4.0 * static_cast<double>(pref));

    const auto reward = stochastic_constant(Setting::kReward, 0.1, 0.1, 2, 4, 0.2);
    CHECK(reward == 4783);
    CHECK(stochastic_constant(Setting::kReward, 0.1, 0.1, 4, 7, 1.0) == 135255);
    CHECK_THROWS_AS(stochastic_constant(Setting::kReward, 0.1, 0.1, 2, 4, 0.0), Error);
    CHECK_THROWS_AS(stochastic_constant(Setting::kPreference, 1.0, 0.1, 2, 4), Error);
    CHECK_THROWS_AS(stochastic_constant(Setting::kPreference, 0.1, 0.0, 2, 4), Error);

    auto schedule = schedule_for(Variant::kCsws, 20, 4);
    CHECK(stochastic_total_budget(Setting::kPreference, 0.1, 0.1, schedule, 4) == pref * 4 * 5);
  }

  TEST_CASE("max query sets") {
    CHECK(max_query_sets(Variant::kRoundRobin, 6, 3) == 20);
    CHECK(max_query_sets(Variant::kCsws, 20, 4) >= 9);
    CHECK(max_query_sets(Variant::kCsh, 16, 4) >= 10);
    CHECK_THROWS_AS(max_query_sets(Variant::kCsws, 3, 4), Error);
  }

  TEST_CASE("setting names") {
    CHECK(parse_setting("reward") == Setting::kReward);
    CHECK(parse_setting("preference") == Setting::kPreference);
    CHECK_THROWS_AS(parse_setting("other"), Error);
  }

  TEST_CASE("budget report") {
    auto report = budget_report(Variant::kCsws, 20, 4, 500);
    CHECK(report.rounds == 4);
    CHECK(report.per_round == std::vector<std::uint64_t>{25, 62, 125, 125});
    CHECK_FALSE(report.z.has_value());
    auto text = to_text(report);
    CHECK(text.find("(5,2,1,1)") != std::string::npos);
    CHECK(text.find("(25,62,125,125)") != std::string::npos);
    auto json = nlohmann::json::parse(to_json(report));
    CHECK(json["R"] == 4);
    CHECK(json["P"] == nlohmann::json::array({5, 2, 1, 1}));

    auto rr = budget_report(Variant::kRoundRobin, 6, 3, std::nullopt);
    CHECK(rr.max_query_sets == 20);
    CHECK(rr.partitions == std::vector<std::uint64_t>{20});

    auto limits = random_necessity_limits(6, 2, 1);
    auto full = budget_report(Variant::kCsr, 6, 2, 1000, &limits);
    REQUIRE(full.z.has_value());
    CHECK(*full.z == sufficient_budget_z(schedule_for(Variant::kCsr, 6, 2), limits, 0));
    CHECK(full.lower_bound.has_value());
  }
}
