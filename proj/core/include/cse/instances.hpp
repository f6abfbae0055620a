#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cse/core.hpp"
#include "cse/env.hpp"

namespace cse {

// Deterministic instance whose statistics approach the limits at exactly the
// rate beta(t) = A/t, with the per-set argmax approaching from below.
struct NecessityInstance {
  EnvironmentSpec spec;
  LimitProfile limits;  // snapped to the A/m grid, rate = A/t
  double amplitude = 0.0;
};

// Snaps each half-gap (S_top - S_j)/2 to the nearest A/m, m >= 1.
// kPrecondition on a tie at the top of some set, kParameter if a half-gap exceeds A.
NecessityInstance make_necessity_instance(const LimitProfile& limits, double amplitude);

// Random table over all sets of size 2..k with arm 0 as GCW. Sets holding arm 0
// use half-gaps A/m with distinct m in [3, 30]; the rest use a half-gap of A.
LimitProfile random_necessity_limits(std::size_t n, std::size_t k, std::uint64_t seed, double amplitude = 0.45);

// Base instance s and the swapped instances s^l of the GCW lower-bound argument.
// Up to t < b_prime every arm of Q reports (S_(1) + S_(|Q|))/2; afterwards the
// sorted limits are dealt out by ascending arm index. In s^l arm l takes S_(1)
// on every set containing it.
struct LowerBoundFamily {
  std::uint64_t b_prime = 0;
  EnvironmentSpec base;
  std::vector<EnvironmentSpec> swapped;  // swapped[l] is s^l; swapped[0] equals base
};

// kPrecondition if some set has S_(1) == S_(2).
LowerBoundFamily make_gcw_lowerbound_instance(const LimitProfile& limits);

// RoundRobin instance on size-k sets: the Borda winner approaches from below and
// every other arm from above at rate A/t, with A chosen so that z_RR = C(n,k)*g.
struct RoundRobinInstance {
  EnvironmentSpec spec;
  LimitProfile limits;
  ArmId borda_winner = 0;
  std::uint64_t passes = 0;  // g
};

RoundRobinInstance random_round_robin_instance(std::size_t n, std::size_t k, std::uint64_t seed);

struct MembershipReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string first_violation;

  bool ok() const { return violations == 0; }
};

// Checks that every set's limits in `spec` are a permutation of those in
// `reference`, and that |s(t) - S'| <= gamma(t) for t = 1..horizon with gamma
// the reference rate.
MembershipReport check_membership(const EnvironmentSpec& spec, const LimitProfile& reference,
                                  std::uint64_t horizon);

}  // namespace cse
