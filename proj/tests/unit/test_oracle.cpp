#include <doctest.h>

#include "cse/env.hpp"
#include "cse/oracle.hpp"

using namespace cse;

namespace {

LimitProfile pairs(std::size_t n, const std::function<std::pair<double, double>(ArmId, ArmId)>& fn) {
  LimitProfile::Table table;
  for (const auto& q : enumerate_query_sets(n, 2)) {
    auto [a, b] = fn(q[0], q[1]);
    table.emplace(q, std::vector<double>{a, b});
  }
  return LimitProfile::from_table(n, 2, table, RateFunction::reciprocal(1.0));
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("three arms with a clear winner") {
    auto profile = pairs(3, [](ArmId a, ArmId) { return a == 0 ? std::pair{0.7, 0.3} : std::pair{0.6, 0.4}; });
    CHECK(find_gcw(profile) == ArmId{0});
    CHECK(dominates_everywhere(profile, 0));
    CHECK_FALSE(dominates_everywhere(profile, 1));
  }

  TEST_CASE("a cycle has no winner") {
    auto profile = LimitProfile::from_table(
        3, 2, {{QuerySet{0, 1}, {0.6, 0.4}}, {QuerySet{1, 2}, {0.6, 0.4}}, {QuerySet{0, 2}, {0.4, 0.6}}},
        RateFunction::reciprocal(1.0));
    CHECK_FALSE(find_gcw(profile).has_value());
    auto report = find_gbw_gcopew(profile);
    CHECK(report.gbw_set.size() == 3);
  }

  TEST_CASE("Borda and Copeland scores") {
    auto profile = LimitProfile::from_table(
        3, 2, {{QuerySet{0, 1}, {0.8, 0.2}}, {QuerySet{0, 2}, {0.9, 0.1}}, {QuerySet{1, 2}, {0.6, 0.4}}},
        RateFunction::reciprocal(1.0));
    auto report = find_gbw_gcopew(profile);
    CHECK(report.borda_scores[0] == doctest::Approx(0.85));
    CHECK(report.borda_scores[1] == doctest::Approx(0.4));
    CHECK(report.borda_scores[2] == doctest::Approx(0.25));
    CHECK(report.copeland_scores == std::vector<double>{1.0, 0.5, 0.0});
    CHECK(report.gbw_set == std::vector<ArmId>{0});
    CHECK(report.gcopew_set == std::vector<ArmId>{0});
    CHECK(report.gcw == ArmId{0});
  }

  TEST_CASE("all-equal limits") {
    auto profile = pairs(4, [](ArmId, ArmId) { return std::pair{0.5, 0.5}; });
    CHECK_FALSE(find_gcw(profile).has_value());
    auto report = find_gbw_gcopew(profile);
    CHECK(report.gbw_set.size() == 4);
    CHECK(report.gcopew_set.size() == 4);
  }

  TEST_CASE("the Borda winner can differ from the GCW") {
    auto profile = pairs(6, [](ArmId a, ArmId) {
      if (a == 0) return std::pair{0.51, 0.49};
      if (a == 1) return std::pair{0.9, 0.1};
      return std::pair{0.6, 0.4};
    });
    auto report = find_gbw_gcopew(profile);
    CHECK(report.gcw == ArmId{0});
    CHECK(report.gbw_set == std::vector<ArmId>{1});
  }

  TEST_CASE("generative profiles") {
    auto dominant = LimitProfile::generative(
        50, 3, [](const QuerySet&, ArmId a) { return a == 7 ? 1.0 : 0.1 * static_cast<double>(a % 5); },
        RateFunction::reciprocal(1.0));
    CHECK(find_gcw(dominant) == ArmId{7});
    auto big = LimitProfile::generative(
        400, 4, [](const QuerySet&, ArmId a) { return a == 7 ? 1.0 : 0.0; }, RateFunction::reciprocal(1.0));
    CHECK_FALSE(big.enumerable());
    CHECK_FALSE(find_gcw(big).has_value());
    CHECK(find_gcw(big.with_declared_gcw(7)) == ArmId{7});
    CHECK_FALSE(find_gcw(big.with_declared_gcw(3)).has_value());
    CHECK_THROWS_AS(profile_sets(big), Error);
    CHECK_THROWS_AS(find_gbw_gcopew(big), Error);
  }

  TEST_CASE("exhaustive and sampled checks agree on generated environments") {
    for (std::size_t n = 3; n <= 8; ++n) {
      for (std::size_t k = 2; k <= std::min<std::size_t>(n, 4); ++k) {
        EnvironmentSpec spec;
        spec.n = n;
        spec.k = k;
        spec.seed = n * 31 + k;
        auto profile = make_environment(spec)->latent_limits();
        auto exact = find_gcw(profile);
        REQUIRE(exact.has_value());
        CHECK(*exact == designated_best(spec));
        auto lazy = LimitProfile::generative(
            n, k, [&profile](const QuerySet& q, ArmId a) { return profile.limit(q, a); }, profile.rate());
        CHECK(find_gcw(lazy) == exact);
      }
    }
  }
}
