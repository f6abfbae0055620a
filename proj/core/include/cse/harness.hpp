#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cse/algo.hpp"
#include "cse/env.hpp"
#include "cse/stats.hpp"

namespace cse {

// "csws", "csr", "csh", "rr" or "sh".
struct ExperimentGrid {
  EnvironmentSpec env;  // n, k and seed are overwritten per run
  std::vector<std::string> algorithms;
  std::vector<std::size_t> n_values;
  std::vector<std::size_t> k_values;
  std::vector<std::uint64_t> budgets;
  std::size_t repetitions = 100;
  std::uint64_t base_seed = 0;
  std::optional<Statistic> statistic;  // defaults to winner frequency for winner feedback, mean otherwise
  PartitionOrder partition_order = PartitionOrder::kShuffle;
  TieBreak tie_break = TieBreak::kLowestIndex;
  std::string output;

  void validate() const;
};

ExperimentGrid grid_from_json(const std::string& text);
std::string to_json(const ExperimentGrid& grid, int indent = 2);

struct GridCell {
  std::string algorithm;
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t budget = 0;
};

// Cells in (algorithm, n, k, B) order; combinations with k > n are skipped.
std::vector<GridCell> grid_cells(const ExperimentGrid& grid);

// Injective in (cell, repetition) for cell, repetition < 2^32.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t cell, std::uint64_t repetition);

struct ResultRow {
  std::string algo;
  std::string statistic;
  std::string env;
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  ArmId returned_arm = 0;
  ArmId true_best = 0;
  int success = 0;
  std::uint64_t pulls_used = 0;
  std::size_t distinct_query_sets = 0;
  double simulated_wallclock = 0.0;
  std::vector<std::string> flags;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

// One run on `spec` (n, k, seed already set). Errors end up in the flags.
ResultRow run_single(const std::string& algorithm, const EnvironmentSpec& spec, std::uint64_t budget,
                     const Statistic& statistic, PartitionOrder order, TieBreak tie_break);

Statistic default_statistic(const EnvironmentSpec& spec);

// Worker count: `requested` (0 = hardware concurrency) capped by CSE_WORKERS.
std::size_t worker_count(std::size_t requested = 0);

// Rows in (cell, repetition) order regardless of scheduling.
std::vector<ResultRow> run_grid(const ExperimentGrid& grid, std::size_t workers = 0);

inline constexpr const char* kCsvHeader =
    "algo,statistic,env,n,k,B,seed,returned_arm,true_best,success,pulls_used,distinct_query_sets,"
    "simulated_wallclock,flags";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& in);

struct WilsonInterval {
  double lower = 0.0;
  double upper = 0.0;
};

inline constexpr double kWilsonZ = 1.959964;

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = kWilsonZ);

struct CellSummary {
  std::string algo;
  std::string env;
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t budget = 0;
  std::size_t runs = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  WilsonInterval ci;
  double mean_wallclock = 0.0;
  double sd_wallclock = 0.0;
  double mean_pulls = 0.0;
};

// Grouped by (algo, env, n, k, B) in first-seen order.
std::vector<CellSummary> summarize(const std::vector<ResultRow>& rows);

void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells);
std::string summary_text(const std::vector<CellSummary>& cells);

}  // namespace cse
