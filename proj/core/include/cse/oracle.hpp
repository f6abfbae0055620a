#pragma once

#include <optional>
#include <vector>

#include "cse/core.hpp"

namespace cse {

struct WinnerReport {
  std::optional<ArmId> gcw;
  std::vector<ArmId> gbw_set;
  std::vector<ArmId> gcopew_set;
  std::vector<double> borda_scores;
  std::vector<double> copeland_scores;
};

inline constexpr std::size_t kGcwSampleSize = 1000;

// Sets the profile is defined on: the table keys, or every set of size 2..k.
// kUnsupported when neither is available.
std::vector<QuerySet> profile_sets(const LimitProfile& profile);

// True when `arm` strictly beats every other member of every set containing it.
bool dominates_everywhere(const LimitProfile& profile, ArmId arm);

// Exhaustive on enumerable profiles; generative ones only confirm the declared
// arm on kGcwSampleSize sampled sets.
std::optional<ArmId> find_gcw(const LimitProfile& profile, std::uint64_t sample_seed = 0);

// Scores over the size-k sets. kUnsupported if those cannot be enumerated.
WinnerReport find_gbw_gcopew(const LimitProfile& profile);

}  // namespace cse
