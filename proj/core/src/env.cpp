#include "cse/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cse {

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::kGaussian: return "gaussian";
    case EnvKind::kCategorical: return "categorical";
    case EnvKind::kRace: return "race";
    case EnvKind::kDeterministic: return "deterministic";
  }
  return "gaussian";
}

EnvKind parse_env_kind(std::string_view text) {
  if (text == "gaussian" || text == "gaussian-subset" || text == "reward") return EnvKind::kGaussian;
  if (text == "categorical" || text == "categorical-preference" || text == "preference") {
    return EnvKind::kCategorical;
  }
  if (text == "race" || text == "censored-race") return EnvKind::kRace;
  if (text == "deterministic" || text == "deterministic-sequence") return EnvKind::kDeterministic;
  throw Error(ErrorCode::kParse, "unknown environment kind '" + std::string(text) + "'");
}

double RuntimeLaw::expected() const { return std::exp(location + 0.5 * scale * scale); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double hashed_uniform(std::uint64_t seed, const QuerySet& q, std::uint64_t tag) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(tag + 0x51ed270b27f9ULL));
  for (ArmId a : q) h = splitmix64(h ^ (a + 0x2545f4914f6cdd1dULL));
  h = splitmix64(h ^ q.size());
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

namespace {

constexpr std::uint64_t kBestTag = 0xb357ULL;
constexpr std::uint64_t kBordaTag = 0xb0dAULL;
constexpr std::uint64_t kNoiseTag = 0x7015eULL;
constexpr std::uint64_t kRaceTag = 0x7ACEULL;

std::uint64_t pick(std::uint64_t seed, std::uint64_t tag, std::uint64_t range) {
  return splitmix64(seed ^ splitmix64(tag)) % range;
}

std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

double max_except(const std::vector<double>& v, std::size_t skip) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != skip) m = std::max(m, v[i]);
  }
  return m;
}

// Forced means: i* beats the rest of its set by epsilon, and with the Borda
// forcing i_B* beats the rest by 2 epsilon on sets that exclude i*.
std::vector<double> gaussian_means(const EnvironmentSpec& spec, const QuerySet& q) {
  std::vector<double> mu(q.size());
  for (std::size_t p = 0; p < q.size(); ++p) mu[p] = hashed_uniform(spec.seed, q, 2 * q[p]);
  const ArmId best = designated_best(spec);
  if (spec.force_gcw && q.contains(best)) {
    auto p = q.position(best);
    mu[p] = max_except(mu, p) + spec.epsilon;
  } else if (spec.force_distinct_gbw && q.contains(designated_borda(spec))) {
    auto p = q.position(designated_borda(spec));
    mu[p] = max_except(mu, p) + 2.0 * spec.epsilon;
  }
  return mu;
}

std::vector<double> gaussian_sigmas(const EnvironmentSpec& spec, const QuerySet& q) {
  std::vector<double> sigma(q.size());
  for (std::size_t p = 0; p < q.size(); ++p) {
    sigma[p] = 0.05 + 0.15 * hashed_uniform(spec.seed, q, 2 * q[p] + 1);
  }
  return sigma;
}

std::vector<double> categorical_probs(const EnvironmentSpec& spec, const QuerySet& q) {
  std::vector<double> w(q.size());
  for (std::size_t p = 0; p < q.size(); ++p) w[p] = 0.05 + 0.95 * hashed_uniform(spec.seed, q, q[p]);

  std::optional<std::size_t> forced;
  double lift = 0.0;
  const ArmId best = designated_best(spec);
  if (spec.force_gcw && q.contains(best)) {
    forced = q.position(best);
    lift = spec.epsilon;
  } else if (spec.force_distinct_gbw && q.contains(designated_borda(spec))) {
    forced = q.position(designated_borda(spec));
    lift = 2.0 * spec.epsilon;
  }

  std::vector<double> p(q.size());
  if (!forced) {
    double total = 0.0;
    for (double x : w) total += x;
    for (std::size_t i = 0; i < w.size(); ++i) p[i] = w[i] / total;
    return p;
  }
  const double top = max_except(w, *forced);
  double rest = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i != *forced) rest += w[i];
  }
  const double c = (1.0 - lift) / (rest + top);
  for (std::size_t i = 0; i < w.size(); ++i) p[i] = c * w[i];
  p[*forced] = c * top + lift;
  return p;
}

std::vector<RuntimeLaw> race_laws(const EnvironmentSpec& spec) {
  if (!spec.runtimes.empty()) return spec.runtimes;
  std::mt19937_64 gen(splitmix64(spec.seed ^ kRaceTag));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RuntimeLaw> laws(spec.n);
  for (auto& law : laws) {
    law.location = 2.0 * u(gen);
    law.scale = 0.5 + 0.5 * u(gen);
  }
  return laws;
}

// ---------------------------------------------------------------- gaussian

class GaussianEnvironment final : public Environment {
 public:
  explicit GaussianEnvironment(EnvironmentSpec spec) : Environment(std::move(spec)) {}

  ObservationKind feedback() const override {
    return spec_.winner_feedback ? ObservationKind::kWinner : ObservationKind::kReal;
  }

  LimitProfile latent_limits() const override {
    EnvironmentSpec copy = spec_;
    auto fn = [copy](const QuerySet& q, ArmId arm) { return gaussian_means(copy, q)[q.position(arm)]; };
    auto profile = LimitProfile::generative(spec_.n, spec_.k, fn, RateFunction::power_law(1.0, 0.5));
    return spec_.force_gcw ? profile.with_declared_gcw(designated_best(spec_)) : profile;
  }

  ArmId true_best() const override { return designated_best(spec_); }

 protected:
  ObservationVector observe(const QuerySet& q, std::uint64_t) override {
    auto it = cache_.find(q);
    if (it == cache_.end()) {
      it = cache_.emplace(q, std::make_pair(gaussian_means(spec_, q), gaussian_sigmas(spec_, q))).first;
    }
    const auto& [mu, sigma] = it->second;
    ObservationVector obs;
    obs.values.resize(q.size());
    for (std::size_t p = 0; p < q.size(); ++p) obs.values[p] = mu[p] + sigma[p] * normal_(rng_);
    if (spec_.winner_feedback) {
      auto w = argmax_lowest(obs.values);
      std::fill(obs.values.begin(), obs.values.end(), 0.0);
      obs.values[w] = 1.0;
      obs.kind = ObservationKind::kWinner;
    }
    return obs;
  }

 private:
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::unordered_map<QuerySet, std::pair<std::vector<double>, std::vector<double>>, QuerySetHash> cache_;
};

// ---------------------------------------------------------------- categorical

class CategoricalEnvironment final : public Environment {
 public:
  explicit CategoricalEnvironment(EnvironmentSpec spec) : Environment(std::move(spec)) {}

  ObservationKind feedback() const override { return ObservationKind::kWinner; }

  LimitProfile latent_limits() const override {
    EnvironmentSpec copy = spec_;
    auto fn = [copy](const QuerySet& q, ArmId arm) { return categorical_probs(copy, q)[q.position(arm)]; };
    auto profile = LimitProfile::generative(spec_.n, spec_.k, fn, RateFunction::power_law(1.0, 0.5));
    return spec_.force_gcw ? profile.with_declared_gcw(designated_best(spec_)) : profile;
  }

  ArmId true_best() const override { return designated_best(spec_); }

 protected:
  ObservationVector observe(const QuerySet& q, std::uint64_t) override {
    auto it = cache_.find(q);
    if (it == cache_.end()) it = cache_.emplace(q, categorical_probs(spec_, q)).first;
    const auto& p = it->second;
    double r = uniform_(rng_);
    std::size_t winner = p.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (r < acc) {
        winner = i;
        break;
      }
    }
    ObservationVector obs{ObservationKind::kWinner, std::vector<double>(q.size(), 0.0)};
    obs.values[winner] = 1.0;
    return obs;
  }

 private:
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::unordered_map<QuerySet, std::vector<double>, QuerySetHash> cache_;
};

// ---------------------------------------------------------------- race

class RaceEnvironment final : public Environment {
 public:
  explicit RaceEnvironment(EnvironmentSpec spec) : Environment(std::move(spec)), laws_(race_laws(spec_)) {}

  ObservationKind feedback() const override { return ObservationKind::kWinner; }
  bool supports_singletons() const override { return true; }

  LimitProfile latent_limits() const override {
    auto laws = laws_;
    auto fn = [laws](const QuerySet& q, ArmId arm) {
      std::vector<RuntimeLaw> sub;
      for (ArmId a : q) sub.push_back(laws[a]);
      return race_win_probabilities(sub)[q.position(arm)];
    };
    return LimitProfile::generative(spec_.n, spec_.k, fn, RateFunction::power_law(1.0, 0.5));
  }

  ArmId true_best() const override {
    ArmId best = 0;
    for (ArmId a = 1; a < laws_.size(); ++a) {
      if (laws_[a].expected() < laws_[best].expected()) best = a;
    }
    return best;
  }

 protected:
  ObservationVector observe(const QuerySet& q, std::uint64_t) override {
    std::size_t winner = 0;
    double fastest = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < q.size(); ++p) {
      double runtime = sample(q[p]);
      if (runtime < fastest) {
        fastest = runtime;
        winner = p;
      }
    }
    wallclock(fastest);
    ObservationVector obs{ObservationKind::kWinner, std::vector<double>(q.size(), 0.0)};
    obs.values[winner] = 1.0;
    return obs;
  }

  double observe_single(ArmId arm) override {
    double runtime = sample(arm);
    wallclock(runtime);
    return runtime;
  }

 private:
  double sample(ArmId arm) {
    const auto& law = laws_[arm];
    if (law.scale == 0.0) return std::exp(law.location);
    return std::exp(law.location + law.scale * normal_(rng_));
  }
  void wallclock(double seconds) { add_wallclock(seconds); }

  std::vector<RuntimeLaw> laws_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// ---------------------------------------------------------------- deterministic

class DeterministicEnvironment final : public Environment {
 public:
  explicit DeterministicEnvironment(EnvironmentSpec spec) : Environment(std::move(spec)) {}

  ObservationKind feedback() const override { return ObservationKind::kReal; }

  LimitProfile latent_limits() const override {
    const auto& d = spec_.deterministic;
    LimitProfile profile = d.limits
        ? LimitProfile::from_table(spec_.n, spec_.k, *d.limits, d.rate)
        : LimitProfile::generative(
              spec_.n, spec_.k,
              [values = d.arm_values](const QuerySet&, ArmId arm) { return values[arm]; }, d.rate);
    if (auto gcw = declared()) return profile.with_declared_gcw(*gcw);
    return profile;
  }

  ArmId true_best() const override {
    if (spec_.best_arm) return *spec_.best_arm;
    if (auto gcw = declared()) return *gcw;
    const auto& d = spec_.deterministic;
    if (!d.arm_values.empty()) return argmax_lowest(d.arm_values);
    // Strict dominator over the stored table.
    for (ArmId a = 0; a < spec_.n; ++a) {
      bool dominates = true;
      bool seen = false;
      for (const auto& [q, v] : *d.limits) {
        if (!q.contains(a)) continue;
        seen = true;
        auto p = q.position(a);
        if (max_except(v, p) >= v[p]) {
          dominates = false;
          break;
        }
      }
      if (seen && dominates) return a;
    }
    throw Error(ErrorCode::kInvalidProfile, "deterministic instance has no winner");
  }

 protected:
  ObservationVector observe(const QuerySet& q, std::uint64_t t) override {
    ObservationVector obs{ObservationKind::kReal, std::vector<double>(q.size())};
    for (std::size_t p = 0; p < q.size(); ++p) {
      double now = trajectory_value(spec_, q, p, t);
      obs.values[p] = t == 1 ? now : static_cast<double>(t) * now -
                                         static_cast<double>(t - 1) * trajectory_value(spec_, q, p, t - 1);
    }
    return obs;
  }

 private:
  std::optional<ArmId> declared() const { return spec_.deterministic.declared_gcw; }
};

}  // namespace

// ---------------------------------------------------------------- base

namespace {

const std::vector<double>& table_row(const LimitProfile::Table& table, const QuerySet& q) {
  auto it = table.find(q);
  if (it == table.end()) throw Error(ErrorCode::kInvalidProfile, "no entry for set " + q.to_string());
  return it->second;
}

double trajectory_sign(const EnvironmentSpec& spec, const QuerySet& q, std::size_t pos) {
  const auto& d = spec.deterministic;
  switch (d.sign_rule) {
    case DeterministicSpec::SignRule::kNone: return 0.0;
    case DeterministicSpec::SignRule::kTable: {
      auto it = d.signs.find(q);
      if (it == d.signs.end()) return 0.0;
      return static_cast<double>(it->second[pos]);
    }
    case DeterministicSpec::SignRule::kArgmaxDown: {
      std::vector<double> v(q.size());
      for (std::size_t p = 0; p < q.size(); ++p) v[p] = trajectory_limit(spec, q, p);
      return argmax_lowest(v) == pos ? -1.0 : 1.0;
    }
  }
  return 0.0;
}

}  // namespace

double trajectory_limit(const EnvironmentSpec& spec, const QuerySet& q, std::size_t pos) {
  const auto& d = spec.deterministic;
  if (d.limits) return table_row(*d.limits, q)[pos];
  return d.arm_values.at(q[pos]);
}

double trajectory_value(const EnvironmentSpec& spec, const QuerySet& q, std::size_t pos, std::uint64_t t) {
  const auto& d = spec.deterministic;
  if (t < d.switch_at && d.early) return table_row(*d.early, q)[pos];
  double lim = trajectory_limit(spec, q, pos);
  if (!d.beta) return lim;
  return lim + trajectory_sign(spec, q, pos) * (*d.beta)(t);
}

std::uint64_t PullLedger::count(const QuerySet& q) const {
  auto it = counts.find(q);
  return it == counts.end() ? 0 : it->second;
}

void EnvironmentSpec::validate() const {
  if (n < 2) throw Error(ErrorCode::kInvalidDimension, "need n >= 2");
  if (k < 2 || k > n) throw Error(ErrorCode::kInvalidDimension, "need 2 <= k <= n");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorCode::kParameter, "need epsilon > 0");
  if (best_arm && *best_arm >= n) throw Error(ErrorCode::kInvalidDimension, "best_arm out of range");
  if (borda_arm && *borda_arm >= n) throw Error(ErrorCode::kInvalidDimension, "borda_arm out of range");
  if (force_distinct_gbw && designated_best(*this) == designated_borda(*this)) {
    throw Error(ErrorCode::kParameter, "best_arm and borda_arm must differ");
  }
  if (kind == EnvKind::kCategorical) {
    double lift = force_distinct_gbw ? 2.0 * epsilon : epsilon;
    if (lift >= 1.0) throw Error(ErrorCode::kParameter, "categorical forcing needs epsilon < 1 (2 epsilon < 1 with Borda forcing)");
  }
  if (kind == EnvKind::kRace && !runtimes.empty()) {
    if (runtimes.size() != n) throw Error(ErrorCode::kInvalidDimension, "need one runtime law per arm");
    for (const auto& law : runtimes) {
      if (!(law.scale >= 0.0) || !std::isfinite(law.location)) {
        throw Error(ErrorCode::kParameter, "runtime law needs finite location and scale >= 0");
      }
    }
  }
  if (kind == EnvKind::kDeterministic) {
    const auto& d = deterministic;
    if (!d.limits && d.arm_values.size() != n) {
      throw Error(ErrorCode::kInvalidProfile, "deterministic instance needs limits or n arm_values");
    }
    if (d.limits) {
      for (const auto& [q, v] : *d.limits) {
        q.validate_for(n, k);
        if (v.size() != q.size()) throw Error(ErrorCode::kInvalidProfile, "limit row size mismatch");
      }
    }
    if (d.early) {
      for (const auto& [q, v] : *d.early) {
        if (v.size() != q.size()) throw Error(ErrorCode::kInvalidProfile, "early row size mismatch");
      }
    }
    for (const auto& [q, v] : d.signs) {
      if (v.size() != q.size()) throw Error(ErrorCode::kInvalidProfile, "sign row size mismatch");
    }
    if (d.declared_gcw && *d.declared_gcw >= n) throw Error(ErrorCode::kInvalidDimension, "declared_gcw out of range");
  }
}

ArmId designated_best(const EnvironmentSpec& spec) {
  if (spec.best_arm) return *spec.best_arm;
  return static_cast<ArmId>(pick(spec.seed, kBestTag, spec.n));
}

ArmId designated_borda(const EnvironmentSpec& spec) {
  if (spec.borda_arm) return *spec.borda_arm;
  // Uniform over the n-1 arms other than i*.
  auto best = designated_best(spec);
  auto r = static_cast<ArmId>(pick(spec.seed, kBordaTag, spec.n - 1));
  return r >= best ? r + 1 : r;
}

Environment::Environment(EnvironmentSpec spec)
    : spec_(std::move(spec)), rng_(splitmix64(spec_.seed ^ kNoiseTag)) {
  spec_.validate();
}

void Environment::charge() {
  if (cap_ && ledger_.total_pulls >= *cap_) {
    throw Error(ErrorCode::kBudgetExhausted, "budget cap of " + std::to_string(*cap_) + " pulls reached");
  }
}

ObservationVector Environment::pull(const QuerySet& q) {
  q.validate_for(spec_.n, spec_.k);
  charge();
  auto t = ++ledger_.counts[q];
  ++ledger_.total_pulls;
  return observe(q, t);
}

double Environment::pull_single(ArmId arm) {
  if (!supports_singletons()) {
    throw Error(ErrorCode::kUnsupported, std::string(to_string(spec_.kind)) + " environment has no singleton pulls");
  }
  if (arm >= spec_.n) throw Error(ErrorCode::kInvalidDimension, "arm out of range");
  charge();
  ++ledger_.total_pulls;
  ++ledger_.single_pulls;
  return observe_single(arm);
}

double Environment::observe_single(ArmId) {
  throw Error(ErrorCode::kUnsupported, "singleton pulls unsupported");
}

std::unique_ptr<Environment> make_environment(const EnvironmentSpec& spec) {
  switch (spec.kind) {
    case EnvKind::kGaussian: return std::make_unique<GaussianEnvironment>(spec);
    case EnvKind::kCategorical: return std::make_unique<CategoricalEnvironment>(spec);
    case EnvKind::kRace: return std::make_unique<RaceEnvironment>(spec);
    case EnvKind::kDeterministic: return std::make_unique<DeterministicEnvironment>(spec);
  }
  throw Error(ErrorCode::kParameter, "unknown environment kind");
}

// P(arm i is fastest) = integral over y = log runtime of
//   phi_i(y) * prod_{j != i} (1 - Phi_j(y)),
// evaluated with composite Simpson on a window covering every law.
std::vector<double> race_win_probabilities(const std::vector<RuntimeLaw>& laws) {
  const std::size_t m = laws.size();
  std::vector<double> out(m, 0.0);
  if (m == 0) return out;

  // Point masses (scale 0) first: the smallest constant wins outright unless a
  // continuous law can undercut it, which is handled by integrating up to it.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any_continuous = false;
  double point_min = std::numeric_limits<double>::infinity();
  std::size_t point_arm = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (laws[i].scale == 0.0) {
      if (laws[i].location < point_min) {
        point_min = laws[i].location;
        point_arm = i;
      }
    } else {
      any_continuous = true;
      lo = std::min(lo, laws[i].location - 12.0 * laws[i].scale);
      hi = std::max(hi, laws[i].location + 12.0 * laws[i].scale);
    }
  }
  if (!any_continuous) {
    out[point_arm] = 1.0;
    return out;
  }
  hi = std::min(hi, point_min);

  auto cdf = [&](std::size_t j, double y) {
    return 0.5 * std::erfc(-(y - laws[j].location) / (laws[j].scale * std::numbers::sqrt2));
  };
  auto pdf = [&](std::size_t j, double y) {
    double z = (y - laws[j].location) / laws[j].scale;
    return std::exp(-0.5 * z * z) / (laws[j].scale * std::sqrt(2.0 * std::numbers::pi));
  };

  if (hi > lo) {
    constexpr int kIntervals = 4000;
    const double h = (hi - lo) / kIntervals;
    for (int s = 0; s <= kIntervals; ++s) {
      const double y = lo + s * h;
      const double w = (s == 0 || s == kIntervals) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (laws[i].scale == 0.0) continue;
        double survive = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
          if (j != i && laws[j].scale > 0.0) survive *= 1.0 - cdf(j, y);
        }
        out[i] += w * pdf(i, y) * survive;
      }
    }
    for (double& v : out) v *= h / 3.0;
  }
  if (point_arm < m) {
    double survive = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (laws[j].scale > 0.0) survive *= 1.0 - cdf(j, point_min);
    }
    out[point_arm] = survive;
  }
  return out;
}

}  // namespace cse
