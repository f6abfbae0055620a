#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cse/algo.hpp"
#include "cse/core.hpp"

namespace cse {

// R * max_r P_r * gamma^{-1}(Delta_{(f(|Q_r|)+1)|Q_r} / 2) over the blocks Q_r that
// hold `best`. kInvalidProfile if `best` is not strictly on top of every block.
std::uint64_t sufficient_budget_z(const Schedule& schedule, const LimitProfile& profile,
                                  const std::vector<TraceStep>& trace, ArmId best);

// Same quantity with the trace taken from a sorted-mode dry run.
std::uint64_t sufficient_budget_z(const Schedule& schedule, const LimitProfile& profile, ArmId best);

// Closed-form per-variant sufficient budgets, ceil(n/k) * R * (gap term).
std::uint64_t sufficient_budget_table(Variant variant, std::size_t n, std::size_t k,
                                      const LimitProfile& profile);

// C(n,k) * max_rho gamma^{-1}((S^B_{i_B} - S^B_rho) / 2). kInvalidProfile on a Borda tie.
std::uint64_t round_robin_budget_z(const LimitProfile& profile);

// min over sets and members of gamma^{-1}((S_(1) - S_(|Q|)) / 2).
std::uint64_t lower_bound_threshold(const LimitProfile& profile,
                                    const std::vector<QuerySet>* family = nullptr);

// ceil(n/k) * lower_bound_threshold.
std::uint64_t lower_bound_gcw(const LimitProfile& profile, const std::vector<QuerySet>* family = nullptr);

// 1/4 * C(n-1, k-1) * threshold, the concrete constant behind the
// Omega(C(n-1,k-1)) bounds for Borda and Copeland winners.
double lower_bound_gbw_constant(std::size_t n, std::size_t k, std::uint64_t threshold);

enum class Setting { kReward, kPreference };

Setting parse_setting(std::string_view text);

// Per-partition pull count for the high-probability guarantees.
std::uint64_t stochastic_constant(Setting setting, double delta, double epsilon, std::size_t k,
                                  std::size_t rounds, double sigma = 0.0);

// stochastic_constant * R * max_r P_r.
std::uint64_t stochastic_total_budget(Setting setting, double delta, double epsilon, const Schedule& schedule,
                                      std::size_t k, double sigma = 0.0);

// Closed-form upper bound on distinct query sets, floored, and never below
// sum_r P_r. RoundRobin gives C(n,k).
std::uint64_t max_query_sets(Variant variant, std::size_t n, std::size_t k);

// sum_r P_r * floor(B / (P_r R)).
std::uint64_t scheduled_pulls(const Schedule& schedule, std::uint64_t budget);

struct BudgetReport {
  Variant variant = Variant::kCsws;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t rounds = 0;
  std::vector<std::uint64_t> partitions;
  std::optional<std::uint64_t> budget;
  std::vector<std::uint64_t> per_round;  // b_r for `budget`
  std::uint64_t max_query_sets = 0;
  std::optional<std::uint64_t> z;
  std::optional<std::uint64_t> z_table;
  std::optional<std::uint64_t> lower_bound;
  std::optional<double> lower_bound_gbw;
};

// Gap-dependent fields are filled only when a profile is supplied.
BudgetReport budget_report(Variant variant, std::size_t n, std::size_t k, std::optional<std::uint64_t> budget,
                           const LimitProfile* profile = nullptr);

std::string to_json(const BudgetReport& report, int indent = 2);
std::string to_text(const BudgetReport& report);

}  // namespace cse
