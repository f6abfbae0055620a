#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "cse/core.hpp"

namespace cse {

enum class EnvKind { kGaussian, kCategorical, kRace, kDeterministic };

std::string_view to_string(EnvKind kind);
EnvKind parse_env_kind(std::string_view text);

// Log-normal runtime: exp(location + scale * Z).
struct RuntimeLaw {
  double location = 0.0;
  double scale = 1.0;

  double expected() const;
};

// Statistic trajectories s_{i|Q}(t) fed directly to the learner:
//   t <  switch_at : early(Q, i)
//   t >= switch_at : limit(Q, i) + sign(Q, i) * beta(t)
struct DeterministicSpec {
  enum class SignRule { kNone, kArgmaxDown, kTable };

  std::optional<LimitProfile::Table> limits;  // explicit limits, or
  std::vector<double> arm_values;             // S_{i|Q} = arm_values[i] on every Q
  std::optional<RateFunction> beta;           // none means beta = 0
  RateFunction rate = RateFunction::reciprocal(1.0);  // envelope reported by latent_limits
  SignRule sign_rule = SignRule::kArgmaxDown;
  std::map<QuerySet, std::vector<int>> signs;  // kTable
  std::optional<LimitProfile::Table> early;
  std::uint64_t switch_at = 1;
  std::optional<ArmId> declared_gcw;
};

struct EnvironmentSpec {
  EnvKind kind = EnvKind::kGaussian;
  std::size_t n = 2;
  std::size_t k = 2;
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  bool force_gcw = true;
  bool force_distinct_gbw = false;
  std::optional<ArmId> best_arm;   // i*, drawn from the seed when absent
  std::optional<ArmId> borda_arm;  // i_B* for force_distinct_gbw
  bool winner_feedback = false;    // gaussian: report the argmax as a one-hot vector
  std::vector<RuntimeLaw> runtimes;  // race: drawn from the seed when empty
  DeterministicSpec deterministic;

  void validate() const;
};

struct PullLedger {
  std::uint64_t total_pulls = 0;
  std::uint64_t single_pulls = 0;
  std::unordered_map<QuerySet, std::uint64_t, QuerySetHash> counts;
  double simulated_wallclock = 0.0;

  std::uint64_t count(const QuerySet& q) const;
  std::size_t distinct_sets() const { return counts.size(); }
};

class Environment {
 public:
  explicit Environment(EnvironmentSpec spec);
  virtual ~Environment() = default;
  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  // Throws kBudgetExhausted once the cap is reached.
  ObservationVector pull(const QuerySet& q);
  // Raw runtime of one arm; race environments only.
  double pull_single(ArmId arm);

  void set_budget_cap(std::optional<std::uint64_t> cap) { cap_ = cap; }
  const PullLedger& ledger() const noexcept { return ledger_; }
  const EnvironmentSpec& spec() const noexcept { return spec_; }
  std::size_t n() const noexcept { return spec_.n; }
  std::size_t k() const noexcept { return spec_.k; }

  virtual ObservationKind feedback() const = 0;
  virtual LimitProfile latent_limits() const = 0;
  // The arm a run should return: the GCW, or the fastest arm in expectation for races.
  virtual ArmId true_best() const = 0;
  virtual bool supports_singletons() const { return false; }

 protected:
  virtual ObservationVector observe(const QuerySet& q, std::uint64_t t) = 0;
  virtual double observe_single(ArmId arm);
  void add_wallclock(double seconds) { ledger_.simulated_wallclock += seconds; }

  EnvironmentSpec spec_;
  std::mt19937_64 rng_;

 private:
  void charge();

  PullLedger ledger_;
  std::optional<std::uint64_t> cap_;
};

std::unique_ptr<Environment> make_environment(const EnvironmentSpec& spec);

// s_{i|Q}(t) and its limit for a deterministic spec; pos indexes into q.
double trajectory_value(const EnvironmentSpec& spec, const QuerySet& q, std::size_t pos, std::uint64_t t);
double trajectory_limit(const EnvironmentSpec& spec, const QuerySet& q, std::size_t pos);

// Arms i* and i_B* as the environment will pick them.
ArmId designated_best(const EnvironmentSpec& spec);
ArmId designated_borda(const EnvironmentSpec& spec);

// Deterministic per-(seed, Q, tag) uniform in [0, 1).
double hashed_uniform(std::uint64_t seed, const QuerySet& q, std::uint64_t tag);
std::uint64_t splitmix64(std::uint64_t x);

// Win probabilities of each arm in a log-normal race over `laws`.
std::vector<double> race_win_probabilities(const std::vector<RuntimeLaw>& laws);

// JSON round-trip; the schema is described in docs/environment.md.
std::string to_json(const EnvironmentSpec& spec, int indent = 2);
EnvironmentSpec environment_from_json(const std::string& text);

}  // namespace cse
