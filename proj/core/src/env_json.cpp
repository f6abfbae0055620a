#include <json.hpp>

#include "cse/env.hpp"

namespace cse {

namespace {

using nlohmann::json;

json rate_to_json(const RateFunction& rate) {
  switch (rate.kind()) {
    case RateFunction::Kind::kPowerLaw:
      return {{"kind", "power-law"}, {"scale", rate.scale()}, {"exponent", rate.exponent()}};
    case RateFunction::Kind::kReciprocal:
      return {{"kind", "reciprocal"}, {"amplitude", rate.scale()}};
    case RateFunction::Kind::kTable:
      return {{"kind", "table"}, {"values", rate.values()}};
  }
  return {};
}

RateFunction rate_from_json(const json& j) {
  auto kind = j.at("kind").get<std::string>();
  if (kind == "power-law") return RateFunction::power_law(j.at("scale").get<double>(), j.at("exponent").get<double>());
  if (kind == "reciprocal") return RateFunction::reciprocal(j.at("amplitude").get<double>());
  if (kind == "table") return RateFunction::table(j.at("values").get<std::vector<double>>());
  throw Error(ErrorCode::kParse, "unknown rate kind '" + kind + "'");
}

ArmId parse_arm(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorCode::kParse, "bad arm key '" + text + "'");
  return static_cast<ArmId>(v);
}

// {"0,1": {"0": 0.8, "1": 0.2}, ...}
template <typename T>
json table_to_json(const std::map<QuerySet, std::vector<T>>& table) {
  json out = json::object();
  for (const auto& [q, row] : table) {
    json inner = json::object();
    for (std::size_t p = 0; p < q.size(); ++p) inner[std::to_string(q[p])] = row[p];
    out[q.to_string()] = inner;
  }
  return out;
}

template <typename T>
std::map<QuerySet, std::vector<T>> table_from_json(const json& j) {
  std::map<QuerySet, std::vector<T>> out;
  for (const auto& [key, inner] : j.items()) {
    auto q = QuerySet::parse(key);
    std::vector<T> row(q.size());
    std::vector<bool> seen(q.size(), false);
    for (const auto& [arm_key, value] : inner.items()) {
      auto p = q.position(parse_arm(arm_key));
      row[p] = value.template get<T>();
      seen[p] = true;
    }
    for (bool s : seen) {
      if (!s) throw Error(ErrorCode::kParse, "set " + key + " is missing an arm entry");
    }
    out.emplace(std::move(q), std::move(row));
  }
  return out;
}

std::string_view sign_rule_name(DeterministicSpec::SignRule rule) {
  switch (rule) {
    case DeterministicSpec::SignRule::kNone: return "none";
    case DeterministicSpec::SignRule::kArgmaxDown: return "argmax-down";
    case DeterministicSpec::SignRule::kTable: return "table";
  }
  return "none";
}

DeterministicSpec::SignRule parse_sign_rule(const std::string& text) {
  if (text == "none") return DeterministicSpec::SignRule::kNone;
  if (text == "argmax-down") return DeterministicSpec::SignRule::kArgmaxDown;
  if (text == "table") return DeterministicSpec::SignRule::kTable;
  throw Error(ErrorCode::kParse, "unknown sign rule '" + text + "'");
}

}  // namespace

std::string to_json(const EnvironmentSpec& spec, int indent) {
  json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["n"] = spec.n;
  j["k"] = spec.k;
  j["seed"] = spec.seed;
  j["epsilon"] = spec.epsilon;
  j["force_gcw"] = spec.force_gcw;
  j["force_distinct_gbw"] = spec.force_distinct_gbw;
  if (spec.best_arm) j["best_arm"] = *spec.best_arm;
  if (spec.borda_arm) j["borda_arm"] = *spec.borda_arm;
  j["winner_feedback"] = spec.winner_feedback;
  if (!spec.runtimes.empty()) {
    json laws = json::array();
    for (const auto& law : spec.runtimes) laws.push_back({{"location", law.location}, {"scale", law.scale}});
    j["runtimes"] = laws;
  }
  if (spec.kind == EnvKind::kDeterministic) {
    const auto& d = spec.deterministic;
    json dj;
    if (d.limits) dj["limits"] = table_to_json(*d.limits);
    if (!d.arm_values.empty()) dj["arm_values"] = d.arm_values;
    if (d.beta) dj["beta"] = rate_to_json(*d.beta);
    dj["rate"] = rate_to_json(d.rate);
    dj["sign_rule"] = std::string(sign_rule_name(d.sign_rule));
    if (!d.signs.empty()) dj["signs"] = table_to_json(d.signs);
    if (d.early) dj["early"] = table_to_json(*d.early);
    dj["switch_at"] = d.switch_at;
    if (d.declared_gcw) dj["declared_gcw"] = *d.declared_gcw;
    j["deterministic"] = dj;
  }
  return j.dump(indent);
}

EnvironmentSpec environment_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("environment JSON: ") + e.what());
  }
  EnvironmentSpec spec;
  try {
    spec.kind = parse_env_kind(j.at("kind").get<std::string>());
    spec.n = j.at("n").get<std::size_t>();
    spec.k = j.at("k").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.epsilon = j.value("epsilon", 0.1);
    spec.force_gcw = j.value("force_gcw", true);
    spec.force_distinct_gbw = j.value("force_distinct_gbw", false);
    if (j.contains("best_arm")) spec.best_arm = j["best_arm"].get<ArmId>();
    if (j.contains("borda_arm")) spec.borda_arm = j["borda_arm"].get<ArmId>();
    spec.winner_feedback = j.value("winner_feedback", false);
    if (j.contains("runtimes")) {
      for (const auto& law : j["runtimes"]) {
        spec.runtimes.push_back({law.at("location").get<double>(), law.at("scale").get<double>()});
      }
    }
    if (j.contains("deterministic")) {
      const auto& dj = j["deterministic"];
      auto& d = spec.deterministic;
      if (dj.contains("limits")) d.limits = table_from_json<double>(dj["limits"]);
      if (dj.contains("arm_values")) d.arm_values = dj["arm_values"].get<std::vector<double>>();
      if (dj.contains("beta")) d.beta = rate_from_json(dj["beta"]);
      if (dj.contains("rate")) d.rate = rate_from_json(dj["rate"]);
      if (dj.contains("sign_rule")) d.sign_rule = parse_sign_rule(dj["sign_rule"].get<std::string>());
      if (dj.contains("signs")) d.signs = table_from_json<int>(dj["signs"]);
      if (dj.contains("early")) d.early = table_from_json<double>(dj["early"]);
      d.switch_at = dj.value("switch_at", std::uint64_t{1});
      if (dj.contains("declared_gcw")) d.declared_gcw = dj["declared_gcw"].get<ArmId>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("environment JSON: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace cse
