#include "cse/algo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include <boost/multiprecision/cpp_int.hpp>

namespace cse {

using boost::multiprecision::cpp_int;

namespace {

std::size_t ceil_log(std::uint64_t base, std::uint64_t n) {
  std::size_t e = 0;
  cpp_int power = 1;
  while (power < n) {
    power *= base;
    ++e;
  }
  return e;
}

std::uint64_t ceil_div(const cpp_int& num, const cpp_int& den) {
  cpp_int q = (num + den - 1) / den;
  return q.convert_to<std::uint64_t>();
}

std::vector<ArmId> iota_arms(std::size_t n) {
  std::vector<ArmId> arms(n);
  std::iota(arms.begin(), arms.end(), ArmId{0});
  return arms;
}

bool same_value(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

PartitionOrder parse_partition_order(std::string_view text) {
  if (text == "shuffle" || text == "seeded-shuffle") return PartitionOrder::kShuffle;
  if (text == "sorted") return PartitionOrder::kSorted;
  throw Error(ErrorCode::kParse, "unknown partition order '" + std::string(text) + "'");
}

TieBreak parse_tie_break(std::string_view text) {
  if (text == "lowest" || text == "lowest-index") return TieBreak::kLowestIndex;
  if (text == "random" || text == "seeded-random") return TieBreak::kSeededRandom;
  throw Error(ErrorCode::kParse, "unknown tie break '" + std::string(text) + "'");
}

std::vector<std::uint64_t> realized_partitions(std::size_t n, std::size_t k, const EliminationPolicy& policy) {
  if (k < 2 || k > n) throw Error(ErrorCode::kInvalidDimension, "need 2 <= k <= n");
  std::vector<std::uint64_t> out;
  std::size_t active = n;
  while (active >= k) {
    const std::size_t blocks = active / k;
    out.push_back(blocks);
    active = blocks * policy(k) + active % k;
  }
  while (active > 1) {
    out.push_back(1);
    active = policy(active);
  }
  return out;
}

Schedule schedule_for(Variant variant, std::size_t n, std::size_t k) {
  if (k < 2 || k > n) {
    throw Error(ErrorCode::kInvalidDimension,
                "need 2 <= k <= n, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  std::vector<std::uint64_t> p;
  switch (variant) {
    case Variant::kCsws: {
      const std::size_t rounds = ceil_log(k, n) + 1;
      cpp_int power = 1;
      for (std::size_t r = 1; r <= rounds; ++r) {
        power *= k;
        p.push_back(ceil_div(n, power));
      }
      return Schedule(variant, std::move(p), EliminationPolicy::winner_stays());
    }
    case Variant::kCsr: {
      // Smallest m with n (k-1)^m <= k^m.
      std::size_t m = 0;
      cpp_int lhs = n;
      cpp_int rhs = 1;
      while (lhs > rhs) {
        lhs *= (k - 1);
        rhs *= k;
        ++m;
      }
      const std::size_t rounds = m + k - 1;
      cpp_int num = n;
      cpp_int den = k;
      for (std::size_t r = 1; r <= rounds; ++r) {
        p.push_back(ceil_div(num, den));
        num *= (k - 1);
        den *= k;
      }
      return Schedule(variant, std::move(p), EliminationPolicy::reject_worst());
    }
    case Variant::kCsh: {
      const std::size_t rounds = ceil_log(2, n) + ceil_log(2, k);
      cpp_int den = k;
      for (std::size_t r = 1; r <= rounds; ++r) {
        p.push_back(ceil_div(n, den));
        den *= 2;
      }
      // With odd k, ceil(k/2) keeps more than half of each block and the
      // closed forms undercount; raise them to the realized counts.
      auto realized = realized_partitions(n, k, EliminationPolicy::halving());
      if (realized.size() > p.size()) p.resize(realized.size(), 1);
      for (std::size_t r = 0; r < realized.size(); ++r) p[r] = std::max(p[r], realized[r]);
      return Schedule(variant, std::move(p), EliminationPolicy::halving());
    }
    default:
      throw Error(ErrorCode::kParameter, "no closed-form schedule for " + std::string(to_string(variant)));
  }
}

bool RunRecord::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

void RunRecord::add_flag(std::string flag) {
  if (!has_flag(flag)) flags.push_back(std::move(flag));
}

std::vector<std::size_t> rank_positions(const std::vector<double>& values, const std::vector<ArmId>& arms,
                                        TieBreak tie_break, std::mt19937_64& rng) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  std::vector<std::size_t> ranked;
  ranked.reserve(order.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && same_value(values[order[start]], values[order[end]])) ++end;
    std::vector<std::size_t> group(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));
    if (tie_break == TieBreak::kLowestIndex) {
      std::sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) { return arms[a] < arms[b]; });
    } else {
      std::sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) { return arms[a] < arms[b]; });
      std::shuffle(group.begin(), group.end(), rng);
    }
    ranked.insert(ranked.end(), group.begin(), group.end());
    start = end;
  }
  return ranked;
}

std::vector<ArmId> arm_elimination(const std::vector<ArmId>& arms, std::uint64_t b, std::size_t keep,
                                   Environment& env, const Statistic& statistic, TieBreak tie_break,
                                   std::mt19937_64& rng) {
  if (arms.size() < 2) throw Error(ErrorCode::kInvalidDimension, "elimination needs at least 2 arms");
  if (keep < 1 || keep >= arms.size()) throw Error(ErrorCode::kParameter, "elimination must keep 1..|A|-1 arms");

  QuerySet q(arms);
  std::vector<ArmId> sorted(q.begin(), q.end());
  std::vector<double> values(sorted.size(), 0.0);
  if (b > 0) {
    StatisticState state(statistic, q.size());
    for (std::uint64_t t = 0; t < b; ++t) state.update(env.pull(q));
    values = state.values();
  }
  auto ranked = rank_positions(values, sorted, tie_break, rng);
  std::vector<ArmId> kept;
  kept.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) kept.push_back(sorted[ranked[i]]);
  std::sort(kept.begin(), kept.end());
  return kept;
}

RunRecord run_cse(const RunConfig& config, Environment& env) {
  const std::size_t n = env.n();
  const std::size_t k = env.k();
  const Schedule& schedule = config.schedule;
  const std::size_t rounds_total = schedule.rounds();
  if (config.budget < 1) throw Error(ErrorCode::kParameter, "budget must be >= 1");

  std::mt19937_64 rng(splitmix64(config.seed ^ 0xC5EULL));
  RunRecord record;
  std::vector<ArmId> active = iota_arms(n);
  std::size_t r = 1;

  auto finish = [&] {
    record.pulls_used = env.ledger().total_pulls;
    record.distinct_query_sets = env.ledger().distinct_sets();
    record.simulated_wallclock = env.ledger().simulated_wallclock;
    record.rounds_executed = record.rounds.size();
  };

  try {
    while (active.size() >= k) {
      RoundLog log;
      log.round = r;
      log.pulls_per_set = schedule.round_budget(config.budget, r);
      if (log.pulls_per_set == 0) record.add_flag("zero_budget_round");

      std::vector<ArmId> order = active;
      if (config.partition_order == PartitionOrder::kShuffle) std::shuffle(order.begin(), order.end(), rng);
      const std::size_t full = order.size() / k;
      std::vector<ArmId> next;
      for (std::size_t j = 0; j < full; ++j) {
        std::vector<ArmId> block(order.begin() + static_cast<std::ptrdiff_t>(j * k),
                                 order.begin() + static_cast<std::ptrdiff_t>((j + 1) * k));
        log.blocks.emplace_back(block);
        auto kept = arm_elimination(block, log.pulls_per_set, schedule.policy()(k), env, config.statistic,
                                    config.tie_break, rng);
        next.insert(next.end(), kept.begin(), kept.end());
      }
      log.carried.assign(order.begin() + static_cast<std::ptrdiff_t>(full * k), order.end());
      next.insert(next.end(), log.carried.begin(), log.carried.end());
      std::sort(next.begin(), next.end());
      active = next;
      log.survivors = active;
      record.rounds.push_back(std::move(log));
      ++r;
    }
    while (active.size() > 1) {
      RoundLog log;
      log.round = r;
      log.second_loop = true;
      log.pulls_per_set = schedule.round_budget(config.budget, std::min(r, rounds_total));
      if (log.pulls_per_set == 0) record.add_flag("zero_budget_round");
      log.blocks.emplace_back(active);
      active = arm_elimination(active, log.pulls_per_set, schedule.policy()(active.size()), env,
                               config.statistic, config.tie_break, rng);
      log.survivors = active;
      record.rounds.push_back(std::move(log));
      ++r;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBudgetExhausted) throw;
    record.add_flag("budget_exhausted");
  }
  record.returned_arm = active.front();
  finish();
  return record;
}

std::vector<TraceStep> partition_trace(const Schedule& schedule, const LimitProfile& profile, ArmId best) {
  const std::size_t n = profile.n();
  const std::size_t k = profile.k();
  if (best >= n) throw Error(ErrorCode::kInvalidDimension, "best arm out of range");
  std::mt19937_64 unused(0);
  std::vector<TraceStep> trace;
  std::vector<ArmId> active = iota_arms(n);
  std::size_t r = 1;

  auto reduce = [&](const std::vector<ArmId>& block, std::size_t keep) {
    QuerySet q(block);
    std::vector<ArmId> sorted(q.begin(), q.end());
    auto ranked = rank_positions(profile.limits(q), sorted, TieBreak::kLowestIndex, unused);
    std::vector<ArmId> kept;
    for (std::size_t i = 0; i < keep; ++i) kept.push_back(sorted[ranked[i]]);
    if (q.contains(best)) trace.push_back({r, q});
    return kept;
  };
  auto alive = [&](const std::vector<ArmId>& arms) {
    return std::find(arms.begin(), arms.end(), best) != arms.end();
  };

  while (active.size() >= k) {
    const std::size_t full = active.size() / k;
    std::vector<ArmId> next;
    for (std::size_t j = 0; j < full; ++j) {
      std::vector<ArmId> block(active.begin() + static_cast<std::ptrdiff_t>(j * k),
                               active.begin() + static_cast<std::ptrdiff_t>((j + 1) * k));
      auto kept = reduce(block, schedule.policy()(k));
      next.insert(next.end(), kept.begin(), kept.end());
    }
    next.insert(next.end(), active.begin() + static_cast<std::ptrdiff_t>(full * k), active.end());
    std::sort(next.begin(), next.end());
    active = next;
    if (!alive(active)) return trace;
    ++r;
  }
  while (active.size() > 1) {
    active = reduce(active, schedule.policy()(active.size()));
    if (!alive(active)) return trace;
    ++r;
  }
  return trace;
}

// ---------------------------------------------------------------- RoundRobin

namespace {

constexpr std::uint64_t kMaterializeLimit = 1'000'000;

QuerySet random_subset(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  // Floyd's algorithm.
  std::vector<ArmId> chosen;
  chosen.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    ArmId t = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  return QuerySet(std::move(chosen));
}

}  // namespace

RunRecord run_round_robin(std::uint64_t budget, std::size_t n, std::size_t k, Environment& env,
                          const Statistic& statistic, PartitionOrder order, std::uint64_t seed) {
  if (budget < 1) throw Error(ErrorCode::kParameter, "budget must be >= 1");
  if (k < 2 || k > n) throw Error(ErrorCode::kInvalidDimension, "need 2 <= k <= n");
  const std::uint64_t total = binomial(n, k);
  std::mt19937_64 rng(splitmix64(seed ^ 0x4242ULL));
  RunRecord record;
  StateMap states;

  auto play = [&](const QuerySet& q) {
    auto it = states.find(q);
    if (it == states.end()) it = states.emplace(q, StatisticState(statistic, q.size())).first;
    it->second.update(env.pull(q));
  };

  try {
    if (order == PartitionOrder::kSorted) {
      auto range = enumerate_query_sets(n, k);
      auto it = range.begin();
      for (std::uint64_t i = 0; i < budget; ++i) {
        if (it == range.end()) it = range.begin();
        play(*it);
        ++it;
      }
    } else {
      const std::uint64_t needed = std::min<std::uint64_t>(budget, total);
      std::vector<QuerySet> cycle;
      if (total <= kMaterializeLimit && needed * 2 > total) {
        for (const auto& q : enumerate_query_sets(n, k)) cycle.push_back(q);
        std::shuffle(cycle.begin(), cycle.end(), rng);
      } else {
        // Few sets needed relative to C(n,k): sample without replacement.
        std::unordered_set<QuerySet, QuerySetHash> seen;
        cycle.reserve(needed);
        while (cycle.size() < needed) {
          auto q = random_subset(n, k, rng);
          if (seen.insert(q).second) cycle.push_back(std::move(q));
        }
      }
      for (std::uint64_t i = 0; i < budget; ++i) play(cycle[i % cycle.size()]);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBudgetExhausted) throw;
    record.add_flag("budget_exhausted");
  }

  std::mt19937_64 unused(0);
  auto ranked = rank_positions(borda_scores(states, n), iota_arms(n), TieBreak::kLowestIndex, unused);
  record.returned_arm = ranked.front();
  if (states.size() < total) record.add_flag("partial_coverage");
  record.pulls_used = env.ledger().total_pulls;
  record.distinct_query_sets = env.ledger().distinct_sets();
  record.simulated_wallclock = env.ledger().simulated_wallclock;
  record.rounds_executed = 0;
  return record;
}

// ---------------------------------------------------------------- Successive Halving

RunRecord run_sh_baseline(std::uint64_t budget, std::size_t n, Environment& env) {
  if (!env.supports_singletons()) {
    throw Error(ErrorCode::kUnsupported,
                "successive halving needs singleton pulls; " + std::string(to_string(env.spec().kind)) +
                    " environments have none");
  }
  if (n < 2) throw Error(ErrorCode::kInvalidDimension, "need n >= 2");
  RunRecord record;
  std::vector<ArmId> survivors = iota_arms(n);
  const std::size_t rounds = ceil_log(2, n);
  std::unordered_set<ArmId> touched;
  std::mt19937_64 unused(0);

  try {
    for (std::size_t r = 1; r <= rounds && survivors.size() > 1; ++r) {
      RoundLog log;
      log.round = r;
      log.pulls_per_set = budget / (survivors.size() * rounds);
      std::vector<double> score(survivors.size(), 0.0);
      if (log.pulls_per_set == 0) {
        record.add_flag("zero_budget_round");
      } else {
        for (std::size_t i = 0; i < survivors.size(); ++i) {
          double sum = 0.0;
          for (std::uint64_t t = 0; t < log.pulls_per_set; ++t) sum += env.pull_single(survivors[i]);
          touched.insert(survivors[i]);
          // Lower runtime is better; negate so the ranking helper can sort descending.
          score[i] = -sum / static_cast<double>(log.pulls_per_set);
        }
      }
      auto ranked = rank_positions(score, survivors, TieBreak::kLowestIndex, unused);
      std::vector<ArmId> next;
      for (std::size_t i = 0; i < (survivors.size() + 1) / 2; ++i) next.push_back(survivors[ranked[i]]);
      std::sort(next.begin(), next.end());
      survivors = next;
      log.survivors = survivors;
      record.rounds.push_back(std::move(log));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBudgetExhausted) throw;
    record.add_flag("budget_exhausted");
  }
  record.returned_arm = survivors.front();
  record.pulls_used = env.ledger().total_pulls;
  record.distinct_query_sets = touched.size();
  record.simulated_wallclock = env.ledger().simulated_wallclock;
  record.rounds_executed = record.rounds.size();
  return record;
}

}  // namespace cse
