#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "setsem/concrete.hpp"
#include "setsem/domain.hpp"
#include "setsem/grammar.hpp"
#include "setsem/triples.hpp"

namespace setsem {

using json = nlohmann::json;

inline json state_to_json(const DomainConfig& cfg, const State& s) {
  json h = json::object();
  for (size_t i = 0; i < cfg.tracked_vars.size(); ++i) h[cfg.tracked_vars[i]] = s.var(i);
  return json{{"h", h}, {"e_t", s.et()}, {"b_t", s.bt()}};
}

inline State state_from_json(const DomainConfig& cfg, const json& j) {
  State s = State::canonical(cfg);
  if (!j.is_object()) throw InputError("state: expected an object");
  if (j.contains("h")) {
    for (auto it = j["h"].begin(); it != j["h"].end(); ++it) {
      int v = it.value().get<int>();
      if (v < cfg.lo || v > cfg.hi)
        throw InputError("state: value " + std::to_string(v) + " out of range");
      s = s.with_var(cfg.var_index(it.key()), v);
    }
  }
  if (j.contains("e_t")) {
    int v = j["e_t"].get<int>();
    if (v < cfg.lo || v > cfg.hi) throw InputError("state: e_t out of range");
    s = s.with_et(v);
  }
  if (j.contains("b_t")) s = s.with_bt(j["b_t"].get<bool>());
  return s;
}

inline json vstate_to_json(const DomainConfig& cfg, const VState& v) {
  json a = json::array();
  for (const auto& s : v) a.push_back(state_to_json(cfg, s));
  return a;
}

inline json dvstate_to_json(const DomainConfig& cfg, const DVState& v) {
  if (!v.diverges) return vstate_to_json(cfg, v.entries);
  return json{{"entries", vstate_to_json(cfg, v.entries)}, {"diverges", true}};
}

inline DVState dvstate_from_json(const DomainConfig& cfg, const json& j) {
  DVState out;
  const json* entries = &j;
  if (j.is_object()) {
    if (!j.contains("entries")) throw InputError("vector-state: missing entries");
    entries = &j["entries"];
    out.diverges = j.value("diverges", false);
  }
  if (!entries->is_array()) throw InputError("vector-state: expected an array");
  for (const auto& e : *entries) out.entries.push_back(state_from_json(cfg, e));
  return out;
}

inline json caps_to_json(const Caps& c) {
  return json{{"max_vector_len", c.max_vector_len},
              {"max_trace_len", c.max_trace_len},
              {"max_table_entries", c.max_table_entries},
              {"max_enum_terms", c.max_enum_terms},
              {"max_states", c.max_states},
              {"step_budget", c.step_budget}};
}

inline json config_to_json(const DomainConfig& cfg) {
  return json{{"lo", cfg.lo},
              {"hi", cfg.hi},
              {"tracked_vars", cfg.tracked_vars},
              {"caps", caps_to_json(cfg.caps)}};
}

inline DomainConfig config_from_json(const json& j) {
  DomainConfig cfg;
  if (j.contains("lo")) cfg.lo = j["lo"].get<int>();
  if (j.contains("hi")) cfg.hi = j["hi"].get<int>();
  if (j.contains("tracked_vars"))
    cfg.tracked_vars = j["tracked_vars"].get<std::vector<std::string>>();
  if (j.contains("caps")) {
    const json& c = j["caps"];
    if (c.contains("max_vector_len")) cfg.caps.max_vector_len = c["max_vector_len"].get<size_t>();
    if (c.contains("max_trace_len")) cfg.caps.max_trace_len = c["max_trace_len"].get<size_t>();
    if (c.contains("max_table_entries"))
      cfg.caps.max_table_entries = c["max_table_entries"].get<size_t>();
    if (c.contains("max_enum_terms")) cfg.caps.max_enum_terms = c["max_enum_terms"].get<size_t>();
    if (c.contains("max_states")) cfg.caps.max_states = c["max_states"].get<size_t>();
    if (c.contains("step_budget")) cfg.caps.step_budget = c["step_budget"].get<long long>();
  }
  return cfg;
}

inline Pred pred_from_json(const DomainConfig& cfg, const json& j) {
  if (j.is_string()) return Pred::pointwise(j.get<std::string>());
  if (j.is_object() && j.contains("formula")) {
    std::optional<size_t> len;
    if (j.contains("len")) len = j["len"].get<size_t>();
    return Pred::pointwise(j["formula"].get<std::string>(), len);
  }
  if (j.is_object() && j.contains("vectors")) {
    std::set<DVState> xs;
    for (const auto& v : j["vectors"]) xs.insert(dvstate_from_json(cfg, v));
    return Pred::make_explicit(std::move(xs));
  }
  throw InputError("predicate: expected a formula string, {formula[,len]} or {vectors}");
}

// FNV-1a over the canonical config rendering; stable across runs.
inline std::string config_digest(const DomainConfig& cfg) {
  std::string s = config_to_json(cfg).dump();
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json load_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace setsem
