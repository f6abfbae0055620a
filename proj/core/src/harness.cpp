#include "cse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

namespace cse {

namespace {

using nlohmann::json;

bool is_cse(const std::string& algorithm) {
  return algorithm == "csws" || algorithm == "csr" || algorithm == "csh";
}

void check_algorithm(const std::string& algorithm) {
  if (!is_cse(algorithm) && algorithm != "rr" && algorithm != "sh") {
    throw Error(ErrorCode::kParse, "unknown algorithm '" + algorithm + "'");
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_unsigned(const std::string& text, const char* field) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    throw Error(ErrorCode::kParse, std::string("bad ") + field + " '" + text + "'");
  }
  return static_cast<T>(v);
}

double parse_real(const std::string& text, const char* field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorCode::kParse, std::string("bad ") + field + " '" + text + "'");
  return v;
}

std::string flag_for(ErrorCode code) {
  std::string s(to_string(code));
  return "error_" + s;
}

}  // namespace

void ExperimentGrid::validate() const {
  if (repetitions < 1) throw Error(ErrorCode::kParameter, "repetitions must be >= 1");
  if (algorithms.empty() || n_values.empty() || k_values.empty() || budgets.empty()) {
    throw Error(ErrorCode::kParameter, "grid needs algorithms, n, k and B values");
  }
  for (const auto& a : algorithms) check_algorithm(a);
  for (auto b : budgets) {
    if (b < 1) throw Error(ErrorCode::kParameter, "budgets must be >= 1");
  }
  if (grid_cells(*this).empty()) throw Error(ErrorCode::kParameter, "grid has no cell with k <= n");
}

ExperimentGrid grid_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("grid JSON: ") + e.what());
  }
  ExperimentGrid grid;
  try {
    grid.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    grid.n_values = j.at("n").get<std::vector<std::size_t>>();
    grid.k_values = j.at("k").get<std::vector<std::size_t>>();
    grid.budgets = j.at("B").get<std::vector<std::uint64_t>>();
    grid.repetitions = j.value("repetitions", std::size_t{100});
    grid.base_seed = j.value("seed", std::uint64_t{0});
    if (j.contains("statistic")) grid.statistic = Statistic::parse(j["statistic"].get<std::string>());
    if (j.contains("partition_order")) {
      grid.partition_order = parse_partition_order(j["partition_order"].get<std::string>());
    }
    if (j.contains("tie_break")) grid.tie_break = parse_tie_break(j["tie_break"].get<std::string>());
    grid.output = j.value("output", std::string());
    json env = j.at("env");
    if (env.is_string()) env = json{{"kind", env.get<std::string>()}};
    if (!env.contains("n")) env["n"] = std::max<std::size_t>(grid.n_values.front(), 2);
    if (!env.contains("k")) env["k"] = std::min<std::size_t>(2, env["n"].get<std::size_t>());
    grid.env = environment_from_json(env.dump());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("grid JSON: ") + e.what());
  }
  grid.validate();
  return grid;
}

std::string to_json(const ExperimentGrid& grid, int indent) {
  json j;
  j["env"] = json::parse(to_json(grid.env, -1));
  j["algorithms"] = grid.algorithms;
  j["n"] = grid.n_values;
  j["k"] = grid.k_values;
  j["B"] = grid.budgets;
  j["repetitions"] = grid.repetitions;
  j["seed"] = grid.base_seed;
  if (grid.statistic) j["statistic"] = grid.statistic->name();
  j["partition_order"] = grid.partition_order == PartitionOrder::kSorted ? "sorted" : "shuffle";
  j["tie_break"] = grid.tie_break == TieBreak::kLowestIndex ? "lowest-index" : "seeded-random";
  if (!grid.output.empty()) j["output"] = grid.output;
  return j.dump(indent);
}

std::vector<GridCell> grid_cells(const ExperimentGrid& grid) {
  std::vector<GridCell> cells;
  for (const auto& a : grid.algorithms) {
    for (auto n : grid.n_values) {
      for (auto k : grid.k_values) {
        if (k < 2 || k > n) continue;
        for (auto b : grid.budgets) cells.push_back({a, n, k, b});
      }
    }
  }
  return cells;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t cell, std::uint64_t repetition) {
  return splitmix64(base_seed + ((cell << 32) | (repetition & 0xFFFFFFFFULL)));
}

Statistic default_statistic(const EnvironmentSpec& spec) {
  const bool winner = spec.kind == EnvKind::kCategorical || spec.kind == EnvKind::kRace ||
                      (spec.kind == EnvKind::kGaussian && spec.winner_feedback);
  return winner ? Statistic::winner_frequency() : Statistic::empirical_mean();
}

ResultRow run_single(const std::string& algorithm, const EnvironmentSpec& spec, std::uint64_t budget,
                     const Statistic& statistic, PartitionOrder order, TieBreak tie_break) {
  check_algorithm(algorithm);
  ResultRow row;
  row.algo = algorithm;
  row.statistic = algorithm == "sh" ? "runtime" : statistic.name();
  row.env = std::string(to_string(spec.kind));
  row.n = spec.n;
  row.k = spec.k;
  row.budget = budget;
  row.seed = spec.seed;
  try {
    auto env = make_environment(spec);
    row.true_best = env->true_best();
    RunRecord record;
    if (is_cse(algorithm)) {
      env->set_budget_cap(budget);
      RunConfig config;
      config.budget = budget;
      config.schedule = schedule_for(parse_variant(algorithm), spec.n, spec.k);
      config.statistic = statistic;
      config.partition_order = order;
      config.tie_break = tie_break;
      config.seed = spec.seed;
      record = run_cse(config, *env);
    } else if (algorithm == "rr") {
      env->set_budget_cap(budget);
      record = run_round_robin(budget, spec.n, spec.k, *env, statistic, order, spec.seed);
    } else {
      const std::uint64_t inflated = budget * spec.k;
      env->set_budget_cap(inflated);
      record = run_sh_baseline(inflated, spec.n, *env);
      record.add_flag("sh_inflated_budget");
    }
    row.returned_arm = record.returned_arm;
    row.pulls_used = record.pulls_used;
    row.distinct_query_sets = record.distinct_query_sets;
    row.simulated_wallclock = record.simulated_wallclock;
    row.flags = record.flags;
    row.success = row.returned_arm == row.true_best && !record.has_flag("budget_exhausted") ? 1 : 0;
  } catch (const Error& e) {
    row.flags.push_back(flag_for(e.code()));
    row.success = 0;
  }
  return row;
}

std::size_t worker_count(std::size_t requested) {
  std::size_t workers = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("CSE_WORKERS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(cap, &end, 10);
    if (end != cap && *end == '\0' && v > 0) workers = std::min<std::size_t>(workers, v);
  }
  return std::max<std::size_t>(1, workers);
}

std::vector<ResultRow> run_grid(const ExperimentGrid& grid, std::size_t workers) {
  grid.validate();
  const auto cells = grid_cells(grid);
  const std::size_t reps = grid.repetitions;
  const std::size_t total = cells.size() * reps;
  const Statistic statistic = grid.statistic ? *grid.statistic : default_statistic(grid.env);
  std::vector<ResultRow> rows(total);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const auto& cell = cells[i / reps];
      EnvironmentSpec spec = grid.env;
      spec.n = cell.n;
      spec.k = cell.k;
      spec.seed = derive_seed(grid.base_seed, i / reps, i % reps);
      if (spec.best_arm && *spec.best_arm >= spec.n) spec.best_arm.reset();
      if (spec.borda_arm && *spec.borda_arm >= spec.n) spec.borda_arm.reset();
      if (!spec.runtimes.empty() && spec.runtimes.size() != spec.n) spec.runtimes.clear();
      rows[i] = run_single(cell.algorithm, spec, cell.budget, statistic, grid.partition_order, grid.tie_break);
    }
  };

  const std::size_t count = std::min(worker_count(workers), std::max<std::size_t>(total, 1));
  if (count <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    std::string flags;
    for (std::size_t i = 0; i < r.flags.size(); ++i) flags += (i ? "|" : "") + r.flags[i];
    out << r.algo << ',' << r.statistic << ',' << r.env << ',' << r.n << ',' << r.k << ',' << r.budget << ','
        << r.seed << ',' << r.returned_arm << ',' << r.true_best << ',' << r.success << ',' << r.pulls_used << ','
        << r.distinct_query_sets << ',' << format_double(r.simulated_wallclock) << ',' << flags << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw Error(ErrorCode::kParse, "unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 14) throw Error(ErrorCode::kParse, "CSV row needs 14 fields: " + line);
    ResultRow r;
    r.algo = f[0];
    r.statistic = f[1];
    r.env = f[2];
    r.n = parse_unsigned<std::size_t>(f[3], "n");
    r.k = parse_unsigned<std::size_t>(f[4], "k");
    r.budget = parse_unsigned<std::uint64_t>(f[5], "B");
    r.seed = parse_unsigned<std::uint64_t>(f[6], "seed");
    r.returned_arm = parse_unsigned<ArmId>(f[7], "returned_arm");
    r.true_best = parse_unsigned<ArmId>(f[8], "true_best");
    r.success = parse_unsigned<int>(f[9], "success");
    if (r.success > 1) throw Error(ErrorCode::kParse, "success must be 0 or 1");
    r.pulls_used = parse_unsigned<std::uint64_t>(f[10], "pulls_used");
    r.distinct_query_sets = parse_unsigned<std::size_t>(f[11], "distinct_query_sets");
    r.simulated_wallclock = parse_real(f[12], "simulated_wallclock");
    if (!f[13].empty()) r.flags = split(f[13], '|');
    rows.push_back(std::move(r));
  }
  return rows;
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw Error(ErrorCode::kNoData, "no trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = p + z2 / (2.0 * n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, (centre - half) / denom), std::min(1.0, (centre + half) / denom)};
}

std::vector<CellSummary> summarize(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::size_t, std::size_t, std::uint64_t>;
  std::map<Key, std::size_t> index;
  std::vector<CellSummary> cells;
  std::vector<std::vector<double>> clocks;
  for (const auto& r : rows) {
    Key key{r.algo, r.env, r.n, r.k, r.budget};
    auto [it, fresh] = index.emplace(key, cells.size());
    if (fresh) {
      CellSummary c;
      c.algo = r.algo;
      c.env = r.env;
      c.n = r.n;
      c.k = r.k;
      c.budget = r.budget;
      cells.push_back(c);
      clocks.emplace_back();
    }
    auto& c = cells[it->second];
    ++c.runs;
    c.successes += static_cast<std::size_t>(r.success);
    c.mean_pulls += static_cast<double>(r.pulls_used);
    clocks[it->second].push_back(r.simulated_wallclock);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& c = cells[i];
    const double runs = static_cast<double>(c.runs);
    c.success_rate = static_cast<double>(c.successes) / runs;
    c.ci = wilson_interval(c.successes, c.runs);
    c.mean_pulls /= runs;
    double sum = 0.0;
    for (double x : clocks[i]) sum += x;
    c.mean_wallclock = sum / runs;
    double ss = 0.0;
    for (double x : clocks[i]) ss += (x - c.mean_wallclock) * (x - c.mean_wallclock);
    c.sd_wallclock = c.runs > 1 ? std::sqrt(ss / (runs - 1.0)) : 0.0;
  }
  return cells;
}

void write_summary_csv(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << "algo,env,n,k,B,runs,successes,success_rate,ci_lower,ci_upper,mean_wallclock,sd_wallclock,mean_pulls\n";
  for (const auto& c : cells) {
    out << c.algo << ',' << c.env << ',' << c.n << ',' << c.k << ',' << c.budget << ',' << c.runs << ','
        << c.successes << ',' << format_double(c.success_rate) << ',' << format_double(c.ci.lower) << ','
        << format_double(c.ci.upper) << ',' << format_double(c.mean_wallclock) << ','
        << format_double(c.sd_wallclock) << ',' << format_double(c.mean_pulls) << '\n';
  }
}

std::string summary_text(const std::vector<CellSummary>& cells) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-6s %-13s %5s %3s %7s %5s %7s %17s %14s\n", "algo", "env", "n", "k", "B", "runs",
                "success", "95% CI", "wallclock");
  out << buf;
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%-6s %-13s %5zu %3zu %7llu %5zu %7.3f  [%.3f, %.3f] %14.4f\n", c.algo.c_str(),
                  c.env.c_str(), c.n, c.k, static_cast<unsigned long long>(c.budget), c.runs, c.success_rate,
                  c.ci.lower, c.ci.upper, c.mean_wallclock);
    out << buf;
  }
  return out.str();
}

}  // namespace cse
