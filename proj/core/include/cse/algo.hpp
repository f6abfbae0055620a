#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cse/core.hpp"
#include "cse/env.hpp"
#include "cse/stats.hpp"

namespace cse {

enum class PartitionOrder { kShuffle, kSorted };
enum class TieBreak { kLowestIndex, kSeededRandom };

PartitionOrder parse_partition_order(std::string_view text);
TieBreak parse_tie_break(std::string_view text);

// Statistics closer than this (relative to max(1, |value|)) rank as equal and
// fall through to the tie rule.
inline constexpr double kTieTolerance = 1e-9;

// Blocks played in each round of a run on n arms; the active-set sizes do not
// depend on the partition order.
std::vector<std::uint64_t> realized_partitions(std::size_t n, std::size_t k, const EliminationPolicy& policy);

// CSWS, CSR or CSH schedule for (n, k). CSH with odd k takes the larger of the
// closed form and realized_partitions per round. Throws kInvalidDimension unless 2 <= k <= n.
Schedule schedule_for(Variant variant, std::size_t n, std::size_t k);

struct RunConfig {
  std::uint64_t budget = 1;
  Schedule schedule = schedule_for(Variant::kCsws, 2, 2);
  Statistic statistic;
  PartitionOrder partition_order = PartitionOrder::kShuffle;
  TieBreak tie_break = TieBreak::kLowestIndex;
  std::uint64_t seed = 0;  // partition shuffles and random tie breaks
};

struct RoundLog {
  std::size_t round = 0;  // 1-based, counting second-loop rounds too
  bool second_loop = false;
  std::uint64_t pulls_per_set = 0;
  std::vector<QuerySet> blocks;
  std::vector<ArmId> carried;  // remainder moved on unplayed
  std::vector<ArmId> survivors;
};

struct RunRecord {
  ArmId returned_arm = 0;
  std::uint64_t pulls_used = 0;
  std::size_t distinct_query_sets = 0;
  std::size_t rounds_executed = 0;
  std::vector<RoundLog> rounds;
  double simulated_wallclock = 0.0;
  std::vector<std::string> flags;

  bool has_flag(std::string_view flag) const;
  void add_flag(std::string flag);
};

// Pulls `arms` b times and keeps the `keep` arms with the largest statistic.
// With b = 0 the tie rule alone decides.
std::vector<ArmId> arm_elimination(const std::vector<ArmId>& arms, std::uint64_t b, std::size_t keep,
                                   Environment& env, const Statistic& statistic, TieBreak tie_break,
                                   std::mt19937_64& rng);

// Orders positions 0..values.size()-1 best first under the tolerance and tie rule.
std::vector<std::size_t> rank_positions(const std::vector<double>& values, const std::vector<ArmId>& arms,
                                        TieBreak tie_break, std::mt19937_64& rng);

RunRecord run_cse(const RunConfig& config, Environment& env);

struct TraceStep {
  std::size_t round = 0;
  QuerySet set;  // the block that holds i* in this round
};

// Sorted-mode run of the elimination structure with the limits standing in for
// statistics; lists the blocks i* meets. Stops early if i* would be dropped.
std::vector<TraceStep> partition_trace(const Schedule& schedule, const LimitProfile& profile, ArmId best);

RunRecord run_round_robin(std::uint64_t budget, std::size_t n, std::size_t k, Environment& env,
                          const Statistic& statistic, PartitionOrder order, std::uint64_t seed);

RunRecord run_sh_baseline(std::uint64_t budget, std::size_t n, Environment& env);

}  // namespace cse
