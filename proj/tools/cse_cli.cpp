#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cse/budget.hpp"
#include "cse/env.hpp"
#include "cse/harness.hpp"
#include "cse/instances.hpp"
#include "cse/verify.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cse::Error(cse::ErrorCode::kParse, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw cse::Error(cse::ErrorCode::kParse, "cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------- budget

struct BudgetArgs {
  std::string variant = "csws";
  std::size_t n = 0;
  std::size_t k = 0;
  std::optional<std::uint64_t> budget;
  std::string profile;
  bool gaps = false;
  std::string setting;
  double delta = 0.1;
  double epsilon = 0.1;
  double sigma = 0.0;
  std::string format = "text";
  std::string output;
};

int cmd_budget(const BudgetArgs& a) {
  const auto variant = cse::parse_variant(a.variant);
  if (a.gaps && a.profile.empty()) {
    throw cse::Error(cse::ErrorCode::kParameter,
                     "--gaps needs --profile: z, z_table, lower_bound_gcw and lower_bound_gbw depend on the limits");
  }
  std::optional<cse::LimitProfile> profile;
  if (!a.profile.empty()) {
    auto spec = cse::environment_from_json(read_file(a.profile));
    profile = cse::make_environment(spec)->latent_limits();
  }
  auto report = cse::budget_report(variant, a.n, a.k, a.budget, profile ? &*profile : nullptr);

  std::optional<std::uint64_t> constant;
  std::optional<std::uint64_t> total;
  if (!a.setting.empty()) {
    if (variant == cse::Variant::kRoundRobin) {
      throw cse::Error(cse::ErrorCode::kParameter, "--setting applies to csws, csr and csh");
    }
    const auto setting = cse::parse_setting(a.setting);
    const auto schedule = cse::schedule_for(variant, a.n, a.k);
    constant = cse::stochastic_constant(setting, a.delta, a.epsilon, a.k, schedule.rounds(), a.sigma);
    total = cse::stochastic_total_budget(setting, a.delta, a.epsilon, schedule, a.k, a.sigma);
  }

  if (a.format == "json") {
    auto j = json::parse(cse::to_json(report, -1));
    if (constant) {
      j["stochastic"] = {{"setting", a.setting}, {"delta", a.delta}, {"epsilon", a.epsilon},
                         {"per_partition", *constant}, {"total", *total}};
      if (a.setting == "reward") j["stochastic"]["sigma"] = a.sigma;
    }
    emit(j.dump(2) + "\n", a.output);
  } else if (a.format == "text") {
    std::string text = cse::to_text(report);
    if (constant) {
      text += "per_partition     " + std::to_string(*constant) + "\n";
      text += "stochastic_total  " + std::to_string(*total) + "\n";
    }
    emit(text, a.output);
  } else {
    throw cse::Error(cse::ErrorCode::kParameter, "budget supports --format text or json");
  }
  return 0;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string kind = "gaussian";
  std::string instance;
  std::size_t n = 6;
  std::size_t k = 2;
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  bool distinct_gbw = false;
  bool winner_feedback = false;
  std::size_t swap = 0;
  double amplitude = cse::kNecessityAmplitude;
  std::string output;
};

int cmd_gen(const GenArgs& a) {
  cse::EnvironmentSpec spec;
  if (a.instance.empty()) {
    spec.kind = cse::parse_env_kind(a.kind);
    spec.n = a.n;
    spec.k = a.k;
    spec.seed = a.seed;
    spec.epsilon = a.epsilon;
    spec.force_distinct_gbw = a.distinct_gbw;
    spec.winner_feedback = a.winner_feedback;
    if (spec.kind == cse::EnvKind::kDeterministic) {
      throw cse::Error(cse::ErrorCode::kParameter, "deterministic specs come from --instance");
    }
    spec.validate();
  } else if (a.instance == "necessity") {
    spec = cse::make_necessity_instance(cse::random_necessity_limits(a.n, a.k, a.seed, a.amplitude), a.amplitude).spec;
  } else if (a.instance == "round-robin") {
    spec = cse::random_round_robin_instance(a.n, a.k, a.seed).spec;
  } else if (a.instance == "lower-bound") {
    auto base = cse::make_necessity_instance(cse::random_necessity_limits(a.n, a.k, a.seed, a.amplitude), a.amplitude);
    auto family = cse::make_gcw_lowerbound_instance(base.limits.with_rate(cse::RateFunction::power_law(1.0, 0.5)));
    if (a.swap >= family.swapped.size()) throw cse::Error(cse::ErrorCode::kParameter, "--swap out of range");
    spec = family.swapped[a.swap];
  } else {
    throw cse::Error(cse::ErrorCode::kParse, "unknown instance '" + a.instance + "'");
  }
  emit(cse::to_json(spec) + "\n", a.output);
  return 0;
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string config;
  std::string env;
  std::vector<std::string> algorithms;
  std::vector<std::size_t> n;
  std::vector<std::size_t> k;
  std::vector<std::uint64_t> budgets;
  std::optional<std::size_t> repetitions;
  std::optional<std::uint64_t> seed;
  std::string statistic;
  std::string order;
  std::size_t workers = 0;
  std::string format = "csv";
  std::string output;
};

int cmd_run(const RunArgs& a) {
  cse::ExperimentGrid grid;
  if (!a.config.empty()) {
    grid = cse::grid_from_json(read_file(a.config));
  } else {
    if (a.env.empty()) throw cse::Error(cse::ErrorCode::kParameter, "run needs --config or --env");
    grid.algorithms = {"csws", "csr", "csh", "rr"};
  }
  if (!a.env.empty()) {
    std::string text = a.env;
    if (text.find('{') == std::string::npos) {
      try {
        cse::parse_env_kind(text);
        text = json{{"kind", text}, {"n", 2}, {"k", 2}}.dump();
      } catch (const cse::Error&) {
        text = read_file(a.env);
      }
    }
    grid.env = cse::environment_from_json(text);
  }
  if (!a.algorithms.empty()) grid.algorithms = a.algorithms;
  if (!a.n.empty()) grid.n_values = a.n;
  if (!a.k.empty()) grid.k_values = a.k;
  if (!a.budgets.empty()) grid.budgets = a.budgets;
  if (a.repetitions) grid.repetitions = *a.repetitions;
  if (a.seed) grid.base_seed = *a.seed;
  if (!a.statistic.empty()) grid.statistic = cse::Statistic::parse(a.statistic);
  if (!a.order.empty()) grid.partition_order = cse::parse_partition_order(a.order);
  grid.validate();

  auto rows = cse::run_grid(grid, a.workers);
  std::string output = a.output.empty() ? grid.output : a.output;
  std::ostringstream out;
  if (a.format == "csv") {
    cse::write_csv(out, rows);
  } else if (a.format == "text") {
    out << cse::summary_text(cse::summarize(rows));
  } else if (a.format == "json") {
    json j = json::array();
    for (const auto& c : cse::summarize(rows)) {
      j.push_back({{"algo", c.algo}, {"env", c.env}, {"n", c.n}, {"k", c.k}, {"B", c.budget}, {"runs", c.runs},
                   {"successes", c.successes}, {"success_rate", c.success_rate}, {"ci_lower", c.ci.lower},
                   {"ci_upper", c.ci.upper}, {"mean_wallclock", c.mean_wallclock}});
    }
    out << j.dump(2) << '\n';
  } else {
    throw cse::Error(cse::ErrorCode::kParameter, "unknown format '" + a.format + "'");
  }
  emit(out.str(), output);
  return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 1;
  std::string format = "text";
};

int cmd_verify(const VerifyArgs& a) {
  cse::SuiteResult all;
  auto add = [&](const cse::SuiteResult& r) { all.cases.insert(all.cases.end(), r.cases.begin(), r.cases.end()); };
  if (a.suite == "all" || a.suite == "necessity") add(cse::verify_necessity_boundary(20, a.seed));
  if (a.suite == "all" || a.suite == "rr") add(cse::verify_round_robin_boundary(10, a.seed));
  if (a.suite == "all" || a.suite == "membership") add(cse::verify_membership(a.seed));
  if (all.cases.empty()) throw cse::Error(cse::ErrorCode::kParameter, "unknown suite '" + a.suite + "'");
  if (a.format == "json") {
    json j = json::array();
    for (const auto& c : all.cases) {
      j.push_back({{"suite", c.suite}, {"variant", c.variant}, {"instance", c.instance}, {"B", c.budget},
                   {"threshold", c.threshold}, {"expected", c.expected_success ? "success" : "failure"},
                   {"observed", c.observed_success ? "success" : "failure"}, {"returned", c.returned_arm},
                   {"best", c.best_arm}, {"pass", c.pass()}});
    }
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << cse::to_text(all);
  }
  return all.ok() ? 0 : 1;
}

// ---------------------------------------------------------------- summarize

struct SummarizeArgs {
  std::string input = "-";
  std::string format = "text";
  std::string output;
};

int cmd_summarize(const SummarizeArgs& a) {
  std::vector<cse::ResultRow> rows;
  if (a.input == "-") {
    rows = cse::read_csv(std::cin);
  } else {
    std::ifstream in(a.input);
    if (!in) throw cse::Error(cse::ErrorCode::kParse, "cannot open " + a.input);
    rows = cse::read_csv(in);
  }
  if (rows.empty()) throw cse::Error(cse::ErrorCode::kNoData, "no rows to summarize");
  auto cells = cse::summarize(rows);
  std::ostringstream out;
  if (a.format == "csv") {
    cse::write_summary_csv(out, cells);
  } else if (a.format == "text") {
    out << cse::summary_text(cells);
  } else {
    throw cse::Error(cse::ErrorCode::kParameter, "summarize supports --format text or csv");
  }
  emit(out.str(), a.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatorial successive elimination for budgeted best-arm identification"};
  app.require_subcommand(1);
  int status = 0;

  BudgetArgs budget;
  auto* b = app.add_subcommand("budget", "Schedules, per-round budgets, sufficient budgets and bounds");
  b->add_option("--variant", budget.variant, "csws, csr, csh or rr")->capture_default_str();
  b->add_option("--n", budget.n, "Number of arms")->required();
  b->add_option("--k", budget.k, "Maximum query-set size")->required();
  b->add_option("--B", budget.budget, "Total budget for b_r");
  b->add_option("--profile", budget.profile, "Environment JSON whose limits feed the gap-dependent fields");
  b->add_flag("--gaps", budget.gaps, "Require the gap-dependent fields");
  b->add_option("--setting", budget.setting, "reward or preference: add the stochastic sufficiency constant");
  b->add_option("--delta", budget.delta, "Failure probability")->capture_default_str();
  b->add_option("--epsilon", budget.epsilon, "Gap to the winner")->capture_default_str();
  b->add_option("--sigma", budget.sigma, "Sub-Gaussian parameter (reward)")->capture_default_str();
  b->add_option("--format", budget.format, "text or json")->capture_default_str();
  b->add_option("-o,--output", budget.output, "Output path (stdout if empty)");
  b->callback([&] { status = cmd_budget(budget); });

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Write an environment spec as JSON");
  g->add_option("--kind", gen.kind, "gaussian, categorical or race")->capture_default_str();
  g->add_option("--instance", gen.instance, "necessity, round-robin or lower-bound (deterministic)");
  g->add_option("--n", gen.n, "Number of arms")->capture_default_str();
  g->add_option("--k", gen.k, "Maximum query-set size")->capture_default_str();
  g->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  g->add_option("--epsilon", gen.epsilon, "GCW gap")->capture_default_str();
  g->add_flag("--distinct-gbw", gen.distinct_gbw, "Force a Borda winner other than the GCW");
  g->add_flag("--winner-feedback", gen.winner_feedback, "Gaussian: report the argmax only");
  g->add_option("--swap", gen.swap, "lower-bound: which swapped instance s^l")->capture_default_str();
  g->add_option("--amplitude", gen.amplitude, "necessity: beta(t) = A/t")->capture_default_str();
  g->add_option("-o,--output", gen.output, "Output path (stdout if empty)");
  g->callback([&] { status = cmd_gen(gen); });

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run an experiment grid and emit result rows");
  r->add_option("--config", run.config, "Grid JSON");
  r->add_option("--env", run.env, "Environment kind, JSON text or JSON path");
  r->add_option("--algo", run.algorithms, "csws, csr, csh, rr, sh (repeatable)");
  r->add_option("--n", run.n, "Arm counts");
  r->add_option("--k", run.k, "Subset sizes");
  r->add_option("--B", run.budgets, "Budgets");
  r->add_option("--reps", run.repetitions, "Repetitions per cell (default 100)");
  r->add_option("--seed", run.seed, "Base seed (default 0)");
  r->add_option("--statistic", run.statistic, "mean, winner, median, power:q, clip:a:b, indicator:x");
  r->add_option("--order", run.order, "shuffle or sorted");
  r->add_option("--workers", run.workers, "Worker threads, 0 = all cores (CSE_WORKERS caps)")->capture_default_str();
  r->add_option("--format", run.format, "csv, text or json")->capture_default_str();
  r->add_option("-o,--output", run.output, "Output path (stdout if empty)");
  r->callback([&] { status = cmd_run(run); });

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Deterministic budget-boundary and membership suites");
  v->add_option("--suite", verify.suite, "all, necessity, rr or membership")->capture_default_str();
  v->add_option("--seed", verify.seed, "Instance seed")->capture_default_str();
  v->add_option("--format", verify.format, "text or json")->capture_default_str();
  v->callback([&] { status = cmd_verify(verify); });

  SummarizeArgs summarize;
  auto* s = app.add_subcommand("summarize", "Success rates with Wilson intervals from a result CSV");
  s->add_option("input", summarize.input, "Result CSV, - for stdin")->capture_default_str();
  s->add_option("--format", summarize.format, "text or csv")->capture_default_str();
  s->add_option("-o,--output", summarize.output, "Output path (stdout if empty)");
  s->callback([&] { status = cmd_summarize(summarize); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const cse::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
