#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "cse/core.hpp"

using namespace cse;

namespace {

// Linear scan, independent of the closed forms in rate_inverse.
std::uint64_t scan_inverse(const RateFunction& rate, double alpha) {
  for (std::uint64_t t = 1;; ++t) {
    if (rate(t) <= alpha * (1.0 + 1e-12)) return t;
  }
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("query sets are canonical") {
    QuerySet a{3, 1, 2};
    QuerySet b{2, 3, 1};
    CHECK(a == b);
    CHECK(a.to_string() == "1,2,3");
    CHECK(QuerySetHash{}(a) == QuerySetHash{}(b));
    CHECK(a.position(3) == 2);
    CHECK_THROWS_AS(QuerySet({1, 1}), Error);
    CHECK_THROWS_AS(a.position(7), Error);
    CHECK(QuerySet::parse("4,0") == QuerySet{0, 4});
  }

  TEST_CASE("canonical under every permutation") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<ArmId> arms{0, 2, 5, 7, 9};
      arms.resize(2 + trial % 4);
      const QuerySet ref(arms);
      std::shuffle(arms.begin(), arms.end(), rng);
      CHECK(QuerySet(arms) == ref);
    }
  }

  TEST_CASE("validate_for") {
    QuerySet q{0, 5};
    CHECK_NOTHROW(q.validate_for(6, 2));
    CHECK_THROWS_AS(q.validate_for(5, 2), Error);
    CHECK_THROWS_AS(QuerySet({0, 1, 2}).validate_for(6, 2), Error);
  }

  TEST_CASE("enumerate pairs of three arms") {
    std::vector<QuerySet> got;
    for (const auto& q : enumerate_query_sets(3, 2)) got.push_back(q);
    REQUIRE(got.size() == 3);
    CHECK(got[0] == QuerySet{0, 1});
    CHECK(got[1] == QuerySet{0, 2});
    CHECK(got[2] == QuerySet{1, 2});
  }

  TEST_CASE("enumerate with a fixed member") {
    std::vector<QuerySet> got;
    for (const auto& q : enumerate_query_sets(4, 2, 0)) got.push_back(q);
    REQUIRE(got.size() == 3);
    CHECK(got[0] == QuerySet{0, 1});
    CHECK(got[2] == QuerySet{0, 3});
    CHECK(enumerate_query_sets(4, 2, 0).count() == 3);
  }

  TEST_CASE("enumerate five choose three") {
    std::size_t count = 0;
    for ([[maybe_unused]] const auto& q : enumerate_query_sets(5, 3)) ++count;
    CHECK(count == 10);
  }

  TEST_CASE("enumeration errors") {
    CHECK_THROWS_AS(enumerate_query_sets(5, 1), Error);
    CHECK_THROWS_AS(enumerate_query_sets(3, 4), Error);
  }

  TEST_CASE("enumeration matches a powerset filter") {
    for (std::size_t n = 2; n <= 8; ++n) {
      for (std::size_t k = 2; k <= n; ++k) {
        std::set<QuerySet> brute;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
          if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
          std::vector<ArmId> arms;
          for (ArmId a = 0; a < n; ++a) {
            if (mask & (1u << a)) arms.push_back(a);
          }
          brute.insert(QuerySet(arms));
        }
        std::vector<QuerySet> listed;
        for (const auto& q : enumerate_query_sets(n, k)) listed.push_back(q);
        CHECK(std::is_sorted(listed.begin(), listed.end()));
        CHECK(std::set<QuerySet>(listed.begin(), listed.end()) == brute);
        CHECK(listed.size() == brute.size());
        CHECK(listed.size() == binomial(n, k));

        std::size_t upto = 0;
        for_each_query_set_upto(n, k, [&](const QuerySet& q) {
          CHECK(q.size() >= 2);
          CHECK(q.size() <= k);
          ++upto;
        });
        CHECK(upto == count_query_sets_upto(n, k));
      }
    }
  }

  TEST_CASE("binomial saturates") {
    CHECK(binomial(6, 3) == 20);
    CHECK(binomial(50, 2) == 1225);
    CHECK(binomial(3, 4) == 0);
    CHECK(binomial(200, 100) == UINT64_MAX);
  }

  TEST_CASE("observation domains") {
    CHECK_NOTHROW((ObservationVector{ObservationKind::kWinner, {0, 1, 0}}).validate());
    CHECK_THROWS_AS((ObservationVector{ObservationKind::kWinner, {1, 1}}).validate(), Error);
    CHECK_NOTHROW((ObservationVector{ObservationKind::kRank, {2, 1, 3}}).validate());
    CHECK_THROWS_AS((ObservationVector{ObservationKind::kRank, {1, 1}}).validate(), Error);
    CHECK_THROWS_AS((ObservationVector{ObservationKind::kReal, {NAN}}).validate(), Error);
  }

  TEST_CASE("rate_inverse examples") {
    const auto root = RateFunction::power_law(1.0, 0.5);
    CHECK(rate_inverse(root, 0.2) == 25);
    CHECK(rate_inverse(root, 1.0) == 1);
    CHECK(rate_inverse(RateFunction::reciprocal(0.6), 0.05) == 12);
    CHECK(rate_inverse(root, 0.3) == 12);
  }

  TEST_CASE("rate_inverse on tables and horizons") {
    const auto table = RateFunction::table({0.9, 0.5, 0.5, 0.1});
    CHECK(table(10) == doctest::Approx(0.1));
    CHECK(rate_inverse(table, 0.5) == 2);
    CHECK(rate_inverse(table, 0.1) == 4);
    CHECK_THROWS_AS(rate_inverse(table, 0.05), Error);
    CHECK_THROWS_AS(rate_inverse(RateFunction::power_law(1.0, 0.5), 1e-6, 1000), Error);
    CHECK_THROWS_AS(rate_inverse(RateFunction::reciprocal(1.0), 0.0), Error);
    CHECK_THROWS_AS(RateFunction::table({0.1, 0.2}), Error);
  }

  TEST_CASE("rate_inverse is the smallest admissible t") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> scale(0.1, 3.0);
    std::uniform_real_distribution<double> exponent(0.25, 2.0);
    std::uniform_real_distribution<double> alpha(0.01, 1.0);
    for (int i = 0; i < 500; ++i) {
      const auto rate = i % 2 ? RateFunction::power_law(scale(rng), exponent(rng)) : RateFunction::reciprocal(scale(rng));
      const double a = alpha(rng);
      const auto t = rate_inverse(rate, a);
      CHECK(rate_at_most(rate(t), a));
      if (t > 1) CHECK_FALSE(rate_at_most(rate(t - 1), a));
      if (t < 100000) CHECK(t == scan_inverse(rate, a));
    }
  }

  TEST_CASE("rates are non-increasing") {
    for (const auto& rate : {RateFunction::power_law(2.0, 0.5), RateFunction::reciprocal(0.6),
                             RateFunction::table({1.0, 0.4, 0.4, 0.2})}) {
      for (std::uint64_t t = 1; t < 200; ++t) CHECK(rate(t + 1) <= rate(t));
    }
    CHECK(RateFunction::power_law(1.0, 0.5)(1'000'000) < 1e-2);
  }

  TEST_CASE("limit profiles") {
    LimitProfile::Table table{{QuerySet{0, 1}, {0.8, 0.2}}};
    auto p = LimitProfile::from_table(2, 2, table, RateFunction::reciprocal(1.0));
    CHECK(p.limit(QuerySet{0, 1}, 0) == 0.8);
    CHECK(p.has_table());
    CHECK_THROWS_AS(p.limits(QuerySet{0, 1, 2}), Error);
    LimitProfile::Table bad{{QuerySet{0, 1}, {0.8}}};
    CHECK_THROWS_AS(LimitProfile::from_table(2, 2, bad, RateFunction::reciprocal(1.0)), Error);

    auto g = LimitProfile::generative(
        40, 5, [](const QuerySet&, ArmId a) { return 1.0 / (1.0 + static_cast<double>(a)); },
        RateFunction::reciprocal(1.0));
    CHECK(g.limit(QuerySet{3, 9}, 3) == doctest::Approx(0.25));
    CHECK_FALSE(g.enumerable());
    CHECK(g.with_declared_gcw(0).declared_gcw() == 0u);
  }

  TEST_CASE("order statistics") {
    std::vector<double> v{0.2, 0.9, 0.5};
    auto s = order_statistics(v);
    CHECK(s == std::vector<double>{0.9, 0.5, 0.2});
  }

  TEST_CASE("elimination policies") {
    CHECK(EliminationPolicy::winner_stays()(4) == 1);
    CHECK(EliminationPolicy::reject_worst()(4) == 3);
    CHECK(EliminationPolicy::halving()(5) == 3);
    CHECK(EliminationPolicy::halving()(2) == 1);
    CHECK_THROWS_AS(EliminationPolicy::custom({0, 0, 2}), Error);
    CHECK(EliminationPolicy::custom({0, 0, 1, 2})(3) == 2);
    for (std::size_t x = 2; x <= 20; ++x) {
      for (const auto& f : {EliminationPolicy::winner_stays(), EliminationPolicy::reject_worst(),
                            EliminationPolicy::halving()}) {
        CHECK(f(x) >= 1);
        CHECK(f(x) <= x - 1);
      }
    }
  }

  TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(Schedule(Variant::kCustom, {}, EliminationPolicy::halving()), Error);
    CHECK_THROWS_AS(Schedule(Variant::kCustom, {1, 2}, EliminationPolicy::halving()), Error);
    CHECK_THROWS_AS(Schedule(Variant::kCustom, {0}, EliminationPolicy::halving()), Error);
    Schedule s(Variant::kCustom, {4, 2, 1}, EliminationPolicy::halving());
    CHECK(s.partitions_at(1) == 4);
    CHECK(s.partitions_at(7) == 1);
    CHECK(s.round_budget(100, 1) == 8);
  }

  TEST_CASE("variant names") {
    CHECK(parse_variant("csws") == Variant::kCsws);
    CHECK(parse_variant("rr") == Variant::kRoundRobin);
    CHECK(to_string(Variant::kCsh) == "csh");
    CHECK_THROWS_AS(parse_variant("nope"), Error);
  }
}
