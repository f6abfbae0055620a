#include "cse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cse/env.hpp"

namespace cse {

namespace {

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

bool strictly_top(const std::vector<double>& v, std::size_t pos) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != pos && v[i] >= v[pos]) return false;
  }
  return true;
}

std::vector<ArmId> argmax_set(const std::vector<double>& scores) {
  std::vector<ArmId> out;
  if (scores.empty()) return out;
  double best = *std::max_element(scores.begin(), scores.end());
  for (ArmId a = 0; a < scores.size(); ++a) {
    if (close(scores[a], best)) out.push_back(a);
  }
  return out;
}

QuerySet sample_set_with(std::size_t n, std::size_t k, ArmId arm, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size_dist(2, k);
  std::size_t size = size_dist(rng);
  std::vector<ArmId> others;
  others.reserve(n - 1);
  for (ArmId a = 0; a < n; ++a) {
    if (a != arm) others.push_back(a);
  }
  for (std::size_t i = 0; i + 1 < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, others.size() - 1);
    std::swap(others[i], others[pick(rng)]);
  }
  std::vector<ArmId> chosen(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(size - 1));
  chosen.push_back(arm);
  return QuerySet(std::move(chosen));
}

}  // namespace

std::vector<QuerySet> profile_sets(const LimitProfile& profile) {
  std::vector<QuerySet> sets;
  if (profile.has_table()) {
    for (const auto& [q, values] : profile.table()) sets.push_back(q);
    return sets;
  }
  if (!profile.enumerable()) throw Error(ErrorCode::kUnsupported, "profile too large to enumerate");
  for_each_query_set_upto(profile.n(), profile.k(), [&](const QuerySet& q) { sets.push_back(q); });
  return sets;
}

bool dominates_everywhere(const LimitProfile& profile, ArmId arm) {
  for (const auto& q : profile_sets(profile)) {
    if (!q.contains(arm)) continue;
    if (!strictly_top(profile.limits(q), q.position(arm))) return false;
  }
  return true;
}

std::optional<ArmId> find_gcw(const LimitProfile& profile, std::uint64_t sample_seed) {
  const std::size_t n = profile.n();
  if (profile.has_table() || profile.enumerable()) {
    std::vector<bool> candidate(n, true);
    std::vector<bool> seen(n, false);
    for (const auto& q : profile_sets(profile)) {
      auto v = profile.limits(q);
      for (std::size_t p = 0; p < q.size(); ++p) {
        seen[q[p]] = true;
        if (candidate[q[p]] && !strictly_top(v, p)) candidate[q[p]] = false;
      }
    }
    for (ArmId a = 0; a < n; ++a) {
      if (candidate[a] && seen[a]) return a;
    }
    return std::nullopt;
  }
  auto declared = profile.declared_gcw();
  if (!declared) return std::nullopt;
  std::mt19937_64 rng(splitmix64(sample_seed ^ 0x6C3ULL));
  for (std::size_t i = 0; i < kGcwSampleSize; ++i) {
    auto q = sample_set_with(n, profile.k(), *declared, rng);
    if (!strictly_top(profile.limits(q), q.position(*declared))) return std::nullopt;
  }
  return declared;
}

WinnerReport find_gbw_gcopew(const LimitProfile& profile) {
  const std::size_t n = profile.n();
  const std::size_t k = profile.k();
  std::vector<QuerySet> sets;
  if (profile.has_table()) {
    for (const auto& [q, values] : profile.table()) {
      if (q.size() == k) sets.push_back(q);
    }
    if (sets.size() != binomial(n, k)) {
      throw Error(ErrorCode::kInvalidProfile, "table lacks some size-k sets");
    }
  } else {
    if (binomial(n, k) > kEnumerationLimit) throw Error(ErrorCode::kUnsupported, "too many size-k sets");
    for (const auto& q : enumerate_query_sets(n, k)) sets.push_back(q);
  }

  WinnerReport report;
  std::vector<double> borda(n, 0.0);
  std::vector<double> wins(n, 0.0);
  std::vector<double> count(n, 0.0);
  for (const auto& q : sets) {
    auto v = profile.limits(q);
    double top = *std::max_element(v.begin(), v.end());
    for (std::size_t p = 0; p < q.size(); ++p) {
      borda[q[p]] += v[p];
      count[q[p]] += 1.0;
      if (v[p] == top) wins[q[p]] += 1.0;
    }
  }
  for (ArmId a = 0; a < n; ++a) {
    borda[a] /= count[a];
    wins[a] /= count[a];
  }
  report.borda_scores = borda;
  report.copeland_scores = wins;
  report.gbw_set = argmax_set(borda);
  report.gcopew_set = argmax_set(wins);
  report.gcw = find_gcw(profile);
  return report;
}

}  // namespace cse
