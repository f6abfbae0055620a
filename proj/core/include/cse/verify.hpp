#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cse/core.hpp"

namespace cse {

struct BoundaryCase {
  std::string suite;
  std::string variant;
  std::string instance;
  std::uint64_t budget = 0;
  std::uint64_t threshold = 0;  // z or z_RR
  bool expected_success = false;
  bool observed_success = false;
  ArmId returned_arm = 0;
  ArmId best_arm = 0;
  std::string note;

  bool pass() const { return expected_success == observed_success && note.empty(); }
};

struct SuiteResult {
  std::vector<BoundaryCase> cases;

  std::size_t failures() const;
  bool ok() const { return failures() == 0 && !cases.empty(); }
};

inline constexpr double kNecessityAmplitude = 0.45;

// CSWS, CSR and CSH on `instances` necessity instances cycling n in {6,9,12},
// k in {2,3}; success expected at z+1 and failure at z-1.
SuiteResult verify_necessity_boundary(std::size_t instances = 20, std::uint64_t seed = 1);

// RoundRobin at B = C(n,k)*(g-1), C(n,k)*g, C(n,k)*(g+1) on instances with
// n in {4,5,6}, k in {2,3}; success expected iff B >= z_RR.
SuiteResult verify_round_robin_boundary(std::size_t instances = 10, std::uint64_t seed = 1);

// Membership of every generated adversarial instance (necessity, RoundRobin and
// the lower-bound family) over t = 1..10*threshold.
SuiteResult verify_membership(std::uint64_t seed = 1);

std::string to_text(const SuiteResult& result);

}  // namespace cse
