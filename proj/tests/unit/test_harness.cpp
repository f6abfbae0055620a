#include <doctest.h>

#include <cstdlib>
#include <set>
#include <sstream>

#include "cse/harness.hpp"

using namespace cse;

namespace {

ExperimentGrid easy_grid() {
  ExperimentGrid grid;
  grid.env.kind = EnvKind::kGaussian;
  grid.env.epsilon = 5.0;
  grid.algorithms = {"csws", "csr", "csh", "rr"};
  grid.n_values = {6, 9};
  grid.k_values = {2, 3};
  grid.budgets = {300};
  grid.repetitions = 5;
  grid.base_seed = 42;
  return grid;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("a dominant arm is always found") {
    auto rows = run_grid(easy_grid(), 2);
    CHECK(rows.size() == 4 * 2 * 2 * 5);
    for (const auto& r : rows) {
      CHECK(r.success == 1);
      CHECK(r.pulls_used <= r.budget);
    }
    auto cells = summarize(rows);
    CHECK(cells.size() == 16);
    for (const auto& c : cells) CHECK(c.success_rate == 1.0);
  }

  TEST_CASE("output does not depend on the worker count") {
    auto grid = easy_grid();
    grid.env.epsilon = 0.05;
    std::ostringstream one, many;
    write_csv(one, run_grid(grid, 1));
    write_csv(many, run_grid(grid, 4));
    CHECK(one.str() == many.str());
  }

  TEST_CASE("cells skip k > n") {
    ExperimentGrid grid = easy_grid();
    grid.n_values = {2, 3};
    grid.k_values = {2, 3};
    auto cells = grid_cells(grid);
    CHECK(cells.size() == 4 * 3);
    CHECK(cells.front().algorithm == "csws");
    CHECK(cells.front().n == 2);
  }

  TEST_CASE("seeds are injective") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t cell = 0; cell < 50; ++cell) {
      for (std::uint64_t rep = 0; rep < 200; ++rep) seen.insert(derive_seed(7, cell, rep));
    }
    CHECK(seen.size() == 50 * 200);
  }

  TEST_CASE("CSV round trip") {
    auto grid = easy_grid();
    grid.algorithms = {"csws", "sh"};
    grid.env.kind = EnvKind::kRace;
    grid.repetitions = 3;
    auto rows = run_grid(grid, 1);
    std::ostringstream out;
    write_csv(out, rows);
    std::istringstream in(out.str());
    auto back = read_csv(in);
    CHECK(back == rows);
    CHECK(out.str().rfind(kCsvHeader, 0) == 0);
    std::istringstream bad("algo,statistic\n");
    CHECK_THROWS_AS(read_csv(bad), Error);
  }

  TEST_CASE("successive halving gets k times the budget") {
    EnvironmentSpec spec;
    spec.kind = EnvKind::kRace;
    spec.n = 8;
    spec.k = 4;
    spec.seed = 3;
    auto row = run_single("sh", spec, 100, Statistic::winner_frequency(), PartitionOrder::kShuffle,
                          TieBreak::kLowestIndex);
    CHECK(std::find(row.flags.begin(), row.flags.end(), "sh_inflated_budget") != row.flags.end());
    CHECK(row.pulls_used <= 400);
    CHECK(row.pulls_used > 100);
  }

  TEST_CASE("errors become flags") {
    EnvironmentSpec spec;
    spec.n = 6;
    spec.k = 2;
    auto row = run_single("sh", spec, 100, Statistic::empirical_mean(), PartitionOrder::kShuffle,
                          TieBreak::kLowestIndex);
    CHECK(row.success == 0);
    REQUIRE(row.flags.size() == 1);
    CHECK(row.flags.front().rfind("error_", 0) == 0);
    CHECK_THROWS_AS(run_single("nope", spec, 100, Statistic::empirical_mean(), PartitionOrder::kShuffle,
                               TieBreak::kLowestIndex),
                    Error);
  }

  TEST_CASE("default statistic") {
    EnvironmentSpec spec;
    CHECK(default_statistic(spec).kind == StatisticKind::kEmpiricalMean);
    spec.winner_feedback = true;
    CHECK(default_statistic(spec).kind == StatisticKind::kWinnerFrequency);
    spec.kind = EnvKind::kCategorical;
    spec.winner_feedback = false;
    CHECK(default_statistic(spec).kind == StatisticKind::kWinnerFrequency);
  }

  TEST_CASE("Wilson interval") {
    auto all = wilson_interval(100, 100);
    CHECK(all.lower == doctest::Approx(0.963).epsilon(0.001));
    CHECK(all.upper == doctest::Approx(1.0));
    auto none = wilson_interval(0, 100);
    CHECK(none.lower == doctest::Approx(0.0));
    auto half = wilson_interval(50, 100);
    CHECK(half.lower < 0.5);
    CHECK(half.upper > 0.5);
    CHECK(half.lower + half.upper == doctest::Approx(1.0));
  }

  TEST_CASE("summaries") {
    std::vector<ResultRow> rows;
    for (int i = 0; i < 4; ++i) {
      ResultRow r;
      r.algo = "csws";
      r.env = "gaussian";
      r.n = 6;
      r.k = 2;
      r.budget = 10;
      r.success = i % 2;
      r.simulated_wallclock = static_cast<double>(i);
      r.pulls_used = 10;
      rows.push_back(r);
    }
    auto cells = summarize(rows);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].runs == 4);
    CHECK(cells[0].success_rate == 0.5);
    CHECK(cells[0].mean_wallclock == doctest::Approx(1.5));
    CHECK(cells[0].mean_pulls == doctest::Approx(10.0));
    std::ostringstream csv;
    write_summary_csv(csv, cells);
    CHECK(csv.str().find("csws") != std::string::npos);
    CHECK(summary_text(cells).find("0.5") != std::string::npos);
  }

  TEST_CASE("grid JSON") {
    auto grid = grid_from_json(
        R"({"env":"categorical","algorithms":["csws","rr"],"n":[6],"k":[2,3],"B":[50],"repetitions":3,"seed":5})");
    CHECK(grid.env.kind == EnvKind::kCategorical);
    CHECK(grid.repetitions == 3);
    CHECK(grid.base_seed == 5);
    auto again = grid_from_json(to_json(grid));
    CHECK(to_json(again) == to_json(grid));
    CHECK_THROWS_AS(grid_from_json("{}"), Error);
    CHECK_THROWS_AS(grid_from_json(R"({"env":"gaussian","algorithms":["x"],"n":[6],"k":[2],"B":[5]})"), Error);
  }

  TEST_CASE("worker count honours the cap") {
    setenv("CSE_WORKERS", "1", 1);
    CHECK(worker_count(8) == 1);
    unsetenv("CSE_WORKERS");
    CHECK(worker_count(3) == 3);
  }
}
