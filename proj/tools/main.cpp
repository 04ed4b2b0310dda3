// Command-line front end: grammars, configs, predicates and engines wired
// into reproducible runs with machine-readable output.
//
// Exit codes: 0 success/holds, 1 violated/unrealizable-negative/witness,
// 2 input error, 3 resource cap exceeded.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "setsem/json_io.hpp"
#include "setsem/replicate.hpp"

namespace fs = std::filesystem;
using namespace setsem;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string engine = "compositional";
  size_t depth = 10;
  bool json_output = true;  // output is always JSON; flag kept for symmetry
};

void collect_formula_vars(const FormulaPtr& f, std::set<std::string>& out) {
  if (!f) return;
  switch (f->kind) {
    case Formula::Cmp:
      for (const std::string* w : {&f->lhs, &f->rhs})
        if (*w != "e_t" && !detail::is_integer(*w)) out.insert(*w);
      break;
    case Formula::Parity:
      if (f->lhs != "e_t") out.insert(f->lhs);
      break;
    default:
      break;
  }
  for (const auto& k : f->kids) collect_formula_vars(k, out);
}

void collect_json_state_vars(const json& j, std::set<std::string>& out) {
  if (j.is_object()) {
    if (j.contains("h") && j["h"].is_object())
      for (auto it = j["h"].begin(); it != j["h"].end(); ++it) out.insert(it.key());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "h") collect_json_state_vars(it.value(), out);
  } else if (j.is_array()) {
    for (const auto& e : j) collect_json_state_vars(e, out);
  }
}

// The default domain tracks the grammar's variables plus anything mentioned
// by predicates or input files; an explicit config wins.
DomainConfig load_config(const GlobalOpts& g, const std::set<std::string>& needed) {
  DomainConfig cfg;
  if (!g.config_path.empty()) cfg = config_from_json(load_json(g.config_path));
  if (cfg.tracked_vars.empty()) {
    cfg.tracked_vars.assign(needed.begin(), needed.end());
    if (cfg.tracked_vars.empty()) cfg.tracked_vars = {"x"};
  }
  cfg.check();
  return cfg;
}

struct GrammarRef {
  Rtg grammar;
  std::string nonterminal;
};

GrammarRef load_grammar_ref(const std::string& spec, const fs::path& relative_to = {}) {
  std::string path = spec, nt;
  auto hash = spec.rfind('#');
  if (hash != std::string::npos) {
    path = spec.substr(0, hash);
    nt = spec.substr(hash + 1);
  }
  fs::path p = path;
  if (!relative_to.empty() && p.is_relative() && !fs::exists(p)) p = relative_to / p;
  Rtg g = parse_grammar(read_file(p.string()));
  if (nt.empty()) nt = g.start;
  if (!g.declared(nt)) throw InputError("nonterminal '" + nt + "' is not declared");
  require_valid(g);
  return {std::move(g), std::move(nt)};
}

void emit(const std::string& command, const DomainConfig& cfg, json result, json counters,
          std::chrono::steady_clock::time_point t0) {
  json report = {{"command", command},
                 {"config_digest", config_digest(cfg)},
                 {"result", std::move(result)},
                 {"counters", std::move(counters)}};
  std::cout << report.dump(2) << "\n";
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "# wall_s " << secs << "\n";
}

EngineChoice engine_choice(const GlobalOpts& g) {
  if (g.engine == "compositional") return EngineChoice{true, g.depth};
  if (g.engine == "oracle") return EngineChoice::oracle(g.depth);
  throw InputError("unknown engine '" + g.engine + "' (compositional or oracle)");
}

int cmd_enumerate(const GlobalOpts& g, const std::string& gref, size_t depth) {
  auto t0 = std::chrono::steady_clock::now();
  auto [grammar, nt] = load_grammar_ref(gref);
  DomainConfig cfg = load_config(g, grammar_vars(grammar, nt));
  auto terms = enumerate_terms(grammar, nt, depth, cfg.caps.max_enum_terms);
  json list = json::array();
  for (const auto& t : terms) list.push_back(pretty(t));
  emit("enumerate", cfg, {{"nonterminal", nt}, {"depth", depth}, {"terms", list}},
       {{"term_count", terms.size()}}, t0);
  return 0;
}

int cmd_semantics(const GlobalOpts& g, const std::string& gref, const std::string& input_path,
                  const std::string& mode) {
  auto t0 = std::chrono::steady_clock::now();
  auto [grammar, nt] = load_grammar_ref(gref);
  json inputs_json = input_path.empty() ? json::array() : load_json(input_path);
  std::set<std::string> needed = grammar_vars(grammar, nt);
  collect_json_state_vars(inputs_json, needed);
  DomainConfig cfg = load_config(g, needed);
  EngineChoice ec = engine_choice(g);
  json result = {{"nonterminal", nt}, {"mode", mode}};
  json counters = json::object();

  if (mode == "agnostic-yellow" || mode == "agnostic-green") {
    std::set<State> inputs;
    for (const auto& e : inputs_json) inputs.insert(state_from_json(cfg, e));
    GreenStates r;
    if (ec.compositional) {
      AgnosticEngine engine(grammar, cfg);
      r.states = engine.eval(nt, inputs);
      counters["table_entries"] = engine.table_entries();
      counters["recomputations"] = engine.recomputations();
    } else {
      r = oracle_agnostic(grammar, nt, ec.depth, inputs,
                          mode == "agnostic-green" ? AgMode::Green : AgMode::Yellow, cfg);
      counters["enumerated_terms"] =
          enumerate_terms(grammar, nt, ec.depth, cfg.caps.max_enum_terms).size();
    }
    json outs = json::array();
    for (const auto& s : r.states) outs.push_back(state_to_json(cfg, s));
    result["outputs"] = outs;
    if (mode == "agnostic-green") result["diverges"] = r.diverges;
  } else if (mode == "vector-yellow") {
    std::set<VState> inputs;
    for (const auto& e : inputs_json) {
      DVState v = dvstate_from_json(cfg, e);
      if (v.diverges) throw InputError("vector-yellow inputs must be marker-free");
      inputs.insert(v.entries);
    }
    std::set<VState> outs;
    if (ec.compositional) {
      VectorEngine engine(grammar, cfg);
      outs = engine.eval(nt, inputs);
      counters["table_entries"] = engine.table_entries();
      counters["recomputations"] = engine.recomputations();
      counters["traces_explored"] = engine.traces_explored();
    } else {
      outs = oracle_vector(grammar, nt, ec.depth, inputs, cfg);
      counters["enumerated_terms"] =
          enumerate_terms(grammar, nt, ec.depth, cfg.caps.max_enum_terms).size();
    }
    json arr = json::array();
    for (const auto& u : outs) arr.push_back(vstate_to_json(cfg, u));
    result["outputs"] = arr;
  } else if (mode == "vector-green") {
    std::set<DVState> inputs;
    for (const auto& e : inputs_json) inputs.insert(dvstate_from_json(cfg, e));
    std::set<DVState> outs;
    if (ec.compositional) {
      VectorEngineGreen engine(grammar, cfg);
      outs = engine.eval(nt, inputs);
      counters["table_entries"] = engine.table_entries();
      counters["recomputations"] = engine.recomputations();
      counters["traces_explored"] = engine.traces_explored();
    } else {
      outs = oracle_vector_green(grammar, nt, ec.depth, inputs, cfg);
      counters["enumerated_terms"] =
          enumerate_terms(grammar, nt, ec.depth, cfg.caps.max_enum_terms).size();
    }
    json arr = json::array();
    for (const auto& u : outs) arr.push_back(dvstate_to_json(cfg, u));
    result["outputs"] = arr;
  } else {
    throw InputError("unknown mode '" + mode + "'");
  }
  emit("semantics", cfg, result, counters, t0);
  return 0;
}

int cmd_check(const GlobalOpts& g, const std::string& triple_path) {
  auto t0 = std::chrono::steady_clock::now();
  json tj = load_json(triple_path);
  for (const char* field : {"pre", "grammar", "post"})
    if (!tj.contains(field)) throw InputError(std::string("triple file: missing '") + field + "'");

  auto gr = load_grammar_ref(tj["grammar"].get<std::string>(), fs::path(triple_path).parent_path());
  std::set<std::string> needed = grammar_vars(gr.grammar, gr.nonterminal);
  // predicate variables join the tracked set
  for (const char* field : {"pre", "post"}) {
    const json& p = tj[field];
    if (p.is_string()) collect_formula_vars(parse_formula(p.get<std::string>()), needed);
    if (p.is_object() && p.contains("formula"))
      collect_formula_vars(parse_formula(p["formula"].get<std::string>()), needed);
    if (p.is_object() && p.contains("vectors")) collect_json_state_vars(p["vectors"], needed);
  }
  DomainConfig cfg = load_config(g, needed);

  Triple t;
  t.grammar = gr.grammar;
  t.nonterminal = gr.nonterminal;
  t.pre = pred_from_json(cfg, tj["pre"]);
  t.post = pred_from_json(cfg, tj["post"]);
  std::string mode = tj.value("mode", "vector-yellow");
  if (mode == "agnostic-yellow") t.mode = TripleMode::AgnosticYellow;
  else if (mode == "agnostic-green") t.mode = TripleMode::AgnosticGreen;
  else if (mode == "vector-yellow") t.mode = TripleMode::VectorYellow;
  else if (mode == "vector-green") t.mode = TripleMode::VectorGreen;
  else throw InputError("triple file: unknown mode '" + mode + "'");
  std::string engine = tj.value("engine", g.engine);
  size_t depth = tj.value("depth", g.depth);
  if (engine == "compositional") t.engine = EngineChoice{true, depth};
  else if (engine == "oracle") t.engine = EngineChoice::oracle(depth);
  else throw InputError("triple file: unknown engine '" + engine + "'");

  Verdict v = check_triple(t, cfg);
  json result = {{"mode", mode}, {"engine", engine}, {"holds", v.holds}};
  if (!v.holds) {
    result["witness_input"] = dvstate_to_json(cfg, *v.witness_input);
    result["witness_output"] = dvstate_to_json(cfg, *v.witness_output);
  }
  emit("check", cfg, result, json::object(), t0);
  return v.holds ? 0 : 1;
}

int cmd_pbe(const GlobalOpts& g, const std::string& gref, const std::string& examples_path) {
  auto t0 = std::chrono::steady_clock::now();
  auto [grammar, nt] = load_grammar_ref(gref);
  json ej = load_json(examples_path);
  std::set<std::string> needed = grammar_vars(grammar, nt);
  collect_json_state_vars(ej, needed);
  DomainConfig cfg = load_config(g, needed);
  std::vector<std::pair<State, State>> examples;
  if (!ej.is_array()) throw InputError("examples file: expected an array of [in, out] pairs");
  for (const auto& pair : ej) {
    if (!pair.is_array() || pair.size() != 2)
      throw InputError("examples file: each element must be an [in, out] pair");
    examples.push_back({state_from_json(cfg, pair[0]), state_from_json(cfg, pair[1])});
  }
  auto verdict = pbe_unrealizable(grammar, nt, examples, cfg, engine_choice(g));
  emit("pbe", cfg,
       {{"nonterminal", nt},
        {"examples", examples.size()},
        {"unrealizable", verdict.unrealizable}},
       json::object(), t0);
  return verdict.unrealizable ? 0 : 1;
}

int cmd_gadget(const GlobalOpts& g, const std::string& gref, const std::string& vectors_path,
               const std::string& counter) {
  auto t0 = std::chrono::steady_clock::now();
  auto [grammar, nt] = load_grammar_ref(gref);
  json vj = load_json(vectors_path);
  if (!vj.contains("v") || !vj.contains("u"))
    throw InputError("vectors file: expected an object with 'v' and 'u'");
  std::set<std::string> needed = grammar_vars(grammar, nt);
  needed.insert(counter);
  collect_json_state_vars(vj, needed);
  DomainConfig cfg = load_config(g, needed);
  VState v = dvstate_from_json(cfg, vj["v"]).entries;
  VState u = dvstate_from_json(cfg, vj["u"]).entries;
  Rtg gadget = build_gadget_wvu(grammar, nt, v, u, counter, cfg);
  auto chk = gadget_iff_check(grammar, nt, v, u, counter, cfg, g.depth);
  emit("gadget", cfg,
       {{"grammar_text", grammar_to_text(gadget)},
        {"counter", counter},
        {"target_counter_value", v.size() + 1},
        {"vector_member", chk.vector_member},
        {"gadget_accepts", chk.gadget_accepts},
        {"iff_holds", chk.vector_member == chk.gadget_accepts}},
       json::object(), t0);
  return 0;
}

int cmd_granularity(const GlobalOpts& g, const std::string& fine, const std::string& coarse,
                    const std::vector<std::string>& members) {
  auto t0 = std::chrono::steady_clock::now();
  auto fk = semantics_from_name(fine);
  auto ck = semantics_from_name(coarse);
  if (!fk || !ck) throw InputError("unknown semantics name (agnostic-yellow, agnostic-green, aware, vector-yellow, vector-green)");
  if (members.size() < 2) throw InputError("granularity: need at least two family members");
  std::vector<std::pair<Rtg, std::string>> family;
  std::set<std::string> needed;
  for (const auto& m : members) {
    auto gr = load_grammar_ref(m);
    for (const auto& v : grammar_vars(gr.grammar, gr.nonterminal)) needed.insert(v);
    family.push_back({std::move(gr.grammar), std::move(gr.nonterminal)});
  }
  DomainConfig cfg = load_config(g, needed);
  Probe probe = default_probe(cfg);
  auto r = refines_on_family(family, {*fk, g.depth}, {*ck, g.depth}, probe, cfg);
  json result = {{"fine", fine}, {"coarse", coarse}, {"ok", r.ok}};
  if (!r.ok) {
    result["witness"] = {members[r.witness_i], members[r.witness_j]};
    result["meaning"] = "fine-equal but coarse-unequal: the coarse semantics is not a "
                        "function of the fine one on this family";
  } else {
    result["meaning"] = "no counterexample on this family (not a proof)";
  }
  emit("granularity", cfg, result, json::object(), t0);
  return r.ok ? 0 : 1;
}

int cmd_replicate(const std::string& suite, bool all) {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> names;
  if (all) {
    names = replicate_suite_names();
  } else {
    auto known = replicate_suite_names();
    if (std::find(known.begin(), known.end(), suite) == known.end())
      throw InputError("unknown replication suite '" + suite + "'");
    names = {suite};
  }
  DomainConfig cfg;  // suites embed their own domains; digest the defaults
  cfg.tracked_vars = {"x"};
  bool all_pass = true;
  json suites = json::array();
  for (const auto& name : names) {
    SuiteResult r = replicate_suite(name);
    json checks = json::array();
    for (const auto& [what, ok] : r.checks) checks.push_back({{"check", what}, {"pass", ok}});
    suites.push_back(
        {{"suite", r.suite}, {"pass", r.pass}, {"checks", checks}, {"details", r.details}});
    std::cerr << "# suite " << r.suite << (r.pass ? " PASS " : " FAIL ") << r.seconds << "s\n";
    all_pass = all_pass && r.pass;
  }
  emit("replicate", cfg, {{"pass", all_pass}, {"suites", suites}}, json::object(), t0);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantics of inductively defined sets of programs over finite domains"};
  app.require_subcommand(0, 1);
  app.fallthrough();  // global flags may follow the subcommand
  GlobalOpts g;
  bool print_config = false;
  app.add_option("--config", g.config_path, "domain configuration JSON file");
  app.add_option("--engine", g.engine, "compositional or oracle");
  app.add_option("--depth", g.depth, "enumeration depth for oracle engines");
  app.add_flag("--json", g.json_output, "emit JSON (the default and only format)");
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");

  std::string gref, input_path, mode = "vector-yellow", triple_path, examples_path;
  std::string vectors_path, counter = "j", fine, coarse, suite;
  std::vector<std::string> members;
  size_t enum_depth = 5;
  bool all_suites = false;

  auto* enumerate = app.add_subcommand("enumerate", "list the terms of a nonterminal up to a depth");
  enumerate->add_option("grammar", gref, "grammar file, optionally path#NONTERMINAL")->required();
  enumerate->add_option("--depth", enum_depth, "maximum derivation depth");

  auto* semantics = app.add_subcommand("semantics", "evaluate a set-of-programs semantics");
  semantics->add_option("grammar", gref)->required();
  semantics->add_option("--input", input_path, "JSON file with input states or vectors");
  semantics->add_option("--mode", mode,
                        "agnostic-yellow, agnostic-green, vector-yellow or vector-green");

  auto* check = app.add_subcommand("check", "check an unrealizability triple");
  check->add_option("triple", triple_path, "triple JSON file")->required();

  auto* pbe = app.add_subcommand("pbe", "check a programming-by-example spec for unrealizability");
  pbe->add_option("grammar", gref)->required();
  pbe->add_option("--examples", examples_path, "JSON array of [input, output] state pairs")
      ->required();

  auto* gadget = app.add_subcommand("gadget", "build the replay-loop gadget for (v, u)");
  gadget->add_option("grammar", gref)->required();
  gadget->add_option("--vectors", vectors_path, "JSON object with 'v' and 'u'")->required();
  gadget->add_option("--counter", counter, "fresh counter variable");

  auto* gran = app.add_subcommand("granularity", "pairwise refinement check on a family");
  gran->add_option("--fine", fine)->required();
  gran->add_option("--coarse", coarse)->required();
  gran->add_option("--member", members, "grammar reference path#NONTERMINAL (repeat)")
      ->required();

  auto* rep = app.add_subcommand("replicate", "run a named replication suite");
  rep->add_option("--suite", suite, "suite name");
  rep->add_flag("--all", all_suites, "run every suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_config) {
      DomainConfig cfg;
      if (!g.config_path.empty()) cfg = config_from_json(load_json(g.config_path));
      if (cfg.tracked_vars.empty()) cfg.tracked_vars = {"x"};
      std::cout << config_to_json(cfg).dump(2) << "\n";
      return 0;
    }
    if (enumerate->parsed()) return cmd_enumerate(g, gref, enum_depth);
    if (semantics->parsed()) return cmd_semantics(g, gref, input_path, mode);
    if (check->parsed()) return cmd_check(g, triple_path);
    if (pbe->parsed()) return cmd_pbe(g, gref, examples_path);
    if (gadget->parsed()) return cmd_gadget(g, gref, vectors_path, counter);
    if (gran->parsed()) return cmd_granularity(g, fine, coarse, members);
    if (rep->parsed()) {
      if (!all_suites && suite.empty()) throw InputError("replicate: --suite NAME or --all");
      return cmd_replicate(suite, all_suites);
    }
    std::cout << app.help() << "\n";
    return 0;
  } catch (const ResourceLimit& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
