#pragma once

#include <chrono>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "setsem/granularity.hpp"
#include "setsem/json_io.hpp"
#include "setsem/loopfree.hpp"
#include "setsem/triples.hpp"
#include "setsem/vector_agnostic.hpp"
#include "setsem/vector_aware.hpp"

namespace setsem {

// One replication suite per acceptance check; each runs with fixed built-in
// inputs and seeds so reruns are byte-identical.
struct SuiteResult {
  std::string suite;
  bool pass = true;
  double seconds = 0.0;
  std::vector<std::pair<std::string, bool>> checks;
  json details = json::object();

  void check(const std::string& name, bool ok) {
    checks.push_back({name, ok});
    pass = pass && ok;
  }
};

namespace replication {

inline DomainConfig make_cfg(int lo, int hi, std::vector<std::string> vars) {
  DomainConfig c;
  c.lo = lo;
  c.hi = hi;
  c.tracked_vars = std::move(vars);
  return c;
}

inline State stx(const DomainConfig& c, int x) { return State::canonical(c).with_var(0, x); }

inline std::set<int> x_projection(const DomainConfig& c, const std::set<State>& states) {
  std::set<int> out;
  for (const auto& s : states) out.insert(s.var(c.var_index("x")));
  return out;
}

// ---- criterion 1: the loop counterexample -------------------------------

inline SuiteResult suite_noncompositionality() {
  SuiteResult r;
  r.suite = "noncompositionality";
  DomainConfig c = make_cfg(0, 8, {"x"});
  auto rep = noncompositionality_witness(c);
  r.check("guard sets agree on every state", rep.guards_agree_everywhere);
  r.check("loop outputs differ", rep.loops_differ);
  std::set<State> w1want, w2want;
  for (const auto& s : enumerate_states(c, {"x"})) {
    int x = s.var(0);
    if (x == 0 || x == 1) w1want.insert(s);
    if (x == 0 || x == 2) w2want.insert(s);
  }
  r.check("W1 from x=0 is exactly {x in {0,1}}", rep.w1_outputs == w1want);
  r.check("W2 from x=0 is exactly {x in {0,2}}", rep.w2_outputs == w2want);
  r.details["w1_x_values"] = x_projection(c, rep.w1_outputs);
  r.details["w2_x_values"] = x_projection(c, rep.w2_outputs);
  return r;
}

// ---- criterion 2: the evenness triple ------------------------------------

inline Rtg example1_grammar() {
  return parse_grammar(
      "nonterm W : Stmt;\nnonterm E : Exp;\nstart W;\n"
      "W ::= while x < <E> do { x := x + 1 };\n"
      "E ::= 0 | <E> + (1 + 1);\n");
}

inline SuiteResult suite_evenness() {
  SuiteResult r;
  r.suite = "evenness";
  DomainConfig c = make_cfg(0, 8, {"x"});
  Triple t;
  t.grammar = example1_grammar();
  t.nonterminal = "W";
  t.pre = Pred::pointwise("x == 0", 1);
  t.post = Pred::pointwise("x % 2 == 0");
  t.mode = TripleMode::VectorYellow;

  t.engine = EngineChoice::oracle(12);
  r.check("holds under the enumeration oracle", check_triple(t, c).holds);
  // the bound expressions saturate at the clamp, so depth 12 already covers
  // every behavior; a deeper run must agree
  t.engine = EngineChoice::oracle(13);
  r.check("oracle verdict is saturated in depth", check_triple(t, c).holds);
  t.engine = EngineChoice{};
  r.check("holds under the compositional vector engine", check_triple(t, c).holds);

  std::set<int> outs_engine, outs_oracle;
  VectorEngine engine(t.grammar, c);
  for (const auto& s : enumerate_states(c, {"x"})) {
    if (s.var(0) != 0) continue;
    for (const auto& u : engine.eval("W", {VState{s}})) outs_engine.insert(u[0].var(0));
    for (const auto& u : oracle_vector(t.grammar, "W", 12, {VState{s}}, c))
      outs_oracle.insert(u[0].var(0));
  }
  std::set<int> want = {0, 2, 4, 6, 8};
  r.check("exact output set {0,2,4,6,8} (engine)", outs_engine == want);
  r.check("exact output set {0,2,4,6,8} (oracle)", outs_oracle == want);
  r.details["outputs"] = outs_engine;
  return r;
}

// ---- criterion 3: the vector-semantics worked examples -------------------

inline SuiteResult suite_fig6() {
  SuiteResult r;
  r.suite = "fig6";
  DomainConfig c = make_cfg(0, 16, {"x"});
  Rtg two = parse_grammar(
      "nonterm S : Stmt;\nstart S;\n"
      "S ::= x := x + (1 + 1) | x := x + (1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1);\n");
  VState v24 = {stx(c, 2), stx(c, 4)};
  std::set<VState> want = {{stx(c, 4), stx(c, 6)}, {stx(c, 12), stx(c, 14)}};
  r.check("{x+2, x+10} on [2,4] = {[4,6],[12,14]} (engine)",
          eval_vector(two, "S", {v24}, c) == want);
  r.check("{x+2, x+10} on [2,4] = {[4,6],[12,14]} (oracle)",
          oracle_vector(two, "S", 12, {v24}, c) == want);

  Rtg countdown =
      parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= while x < 1 + 1 do { x := x - 1 };\n");
  r.check("countdown on [2,4] = {[2,4]}",
          eval_vector(countdown, "S", {v24}, c) == std::set<VState>{v24});
  VState v241 = {stx(c, 2), stx(c, 4), stx(c, 1)};
  r.check("countdown on [2,4,1] = {} (engine)", eval_vector(countdown, "S", {v241}, c).empty());
  r.check("countdown on [2,4,1] = {} (oracle)",
          oracle_vector(countdown, "S", 12, {v241}, c).empty());
  return r;
}

// ---- criterion 4: engines equal oracles on random grammars ---------------

inline Rtg random_finite_grammar(std::mt19937& rng, bool allow_while) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  const char* exps[] = {"0", "1", "x", "x + 1", "x - 1", "1 + 1", "x + <E>", "<E> - 1"};
  const char* bexps[] = {"t", "f", "x == 0", "x < 1 + 1", "!(x == 1)", "x == <E>", "x < <E>"};
  const char* plain[] = {"x := <E>", "x := <E> ; x := x + 1",
                         "if <B> then { x := <E> } else { x := 0 }", "x := x + 1",
                         "x := <E> ; x := <E>"};
  const char* loops[] = {"while <B> do { x := x + 1 }",
                         "while <B> do { x := <E> }",
                         "while x < <E> do { x := x + 1 }",
                         "while <B> do { x := x - 1 }",
                         "x := <E> ; while <B> do { x := x + 1 }",
                         "if <B> then { while <B> do { x := x + 1 } } else { x := <E> }",
                         "while <B> do { if <B> then { x := x + 1 } else { x := x - 1 } }"};
  std::string s_rule;
  int n_alts = 1 + pick(2);
  for (int i = 0; i < n_alts; ++i) {
    if (i) s_rule += " | ";
    s_rule += (allow_while && pick(2)) ? loops[pick(7)] : plain[pick(5)];
  }
  auto alts = [&](const char* const* pool, int pool_n, int count) {
    std::string out;
    for (int i = 0; i < count; ++i) {
      if (i) out += " | ";
      out += pool[pick(pool_n)];
    }
    return out;
  };
  std::string src = "nonterm S : Stmt; nonterm E : Exp; nonterm B : BExp;\nstart S;\n";
  src += "S ::= " + s_rule + ";\n";
  src += "E ::= " + alts(exps, 6, 1 + pick(3)) + ";\n";  // hole-free subset
  src += "B ::= " + alts(bexps, 5, 1 + pick(2)) + ";\n";
  return parse_grammar(src);
}

inline SuiteResult suite_engine_equivalence() {
  SuiteResult r;
  r.suite = "engine-equivalence";
  DomainConfig c = make_cfg(0, 3, {"x"});
  std::mt19937 rng(20250810);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto rand_state = [&] {
    return State::canonical(c).with_var(0, pick(4)).with_et(pick(4)).with_bt(pick(2) == 1);
  };
  size_t loopfree_trials = 0, loopy_trials = 0, mismatches = 0, skipped = 0;
  auto all_states = enumerate_states(c, {"x"});
  while (loopfree_trials + loopy_trials < 210) {
    bool allow_while = loopfree_trials >= 70;
    Rtg g = random_finite_grammar(rng, allow_while);
    auto programs = enumerate_terms(g, "S", 64, 20'000);
    if (programs.size() > 50 || programs.empty()) {
      ++skipped;
      continue;
    }
    (allow_while ? loopy_trials : loopfree_trials) += 1;
    if (!allow_while) {
      AgnosticEngine engine(g, c);
      for (const auto& s : all_states) {
        auto got = engine.eval("S", {s});
        auto want = oracle_agnostic(g, "S", 64, {s}, AgMode::Yellow, c).states;
        if (got != want) ++mismatches;
      }
    }
    VectorEngine yellow(g, c);
    VectorEngineGreen green(g, c);
    for (int probe = 0; probe < 2; ++probe) {
      VState v;
      size_t len = 1 + pick(2);
      for (size_t i = 0; i < len; ++i) v.push_back(rand_state());
      if (yellow.eval("S", {v}) != oracle_vector(g, "S", 64, {v}, c)) ++mismatches;
      DVState dvv{v, pick(3) == 0};
      if (green.eval("S", {dvv}) != oracle_vector_green(g, "S", 64, {dvv}, c)) ++mismatches;
    }
  }
  r.details["loopfree_grammars"] = loopfree_trials;
  r.details["loopy_grammars"] = loopy_trials;
  r.details["regenerated"] = skipped;
  r.details["mismatches"] = mismatches;
  r.check("zero mismatches across 210 grammars", mismatches == 0);
  return r;
}

// ---- criterion 5: the divergence pipeline --------------------------------

inline SuiteResult suite_reduce() {
  SuiteResult r;
  r.suite = "reduce";
  DomainConfig c = make_cfg(0, 8, {"x"});
  Rtg two_loops = parse_grammar(
      "nonterm S : Stmt;\nstart S;\n"
      "S ::= while x == 1 do { x := x } | while x == 1 + 1 do { x := x };\n");
  VState v12 = {stx(c, 1), stx(c, 2)};
  RawDVector r1, r2;
  r1.entries = {std::nullopt, stx(c, 2)};
  r2.entries = {stx(c, 1), std::nullopt};
  auto raw = bad_lift(two_loops, "S", 8, v12, c);
  r.check("naive lift leaves markers in place", raw == std::set<RawDVector>{r1, r2});
  auto tr = truncate(raw);
  r.check("truncate cuts at the first marker",
          tr == std::set<DVState>{dv({}, true), dv({stx(c, 1)}, true)});
  r.check("reduce keeps the shortest occluder", reduce(tr) == std::set<DVState>{dv({}, true)});
  r.check("engine agrees with the pipeline",
          eval_vector_green(two_loops, "S", {dv(v12)}, c) == std::set<DVState>{dv({}, true)});

  std::set<DVState> v1 = {dv({stx(c, 1)}, true), dv({stx(c, 1), stx(c, 2)}, true),
                          dv({stx(c, 2)}, true), dv({stx(c, 1), stx(c, 2)})};
  std::set<DVState> v1want = {dv({stx(c, 1)}, true), dv({stx(c, 2)}, true),
                              dv({stx(c, 1), stx(c, 2)})};
  r.check("appendix reduction example", reduce(v1) == v1want);

  std::mt19937 rng(5150);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  size_t bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::set<DVState> xs;
    int count = 1 + pick(6);
    for (int i = 0; i < count; ++i) {
      DVState d;
      int len = pick(4);
      for (int j = 0; j < len; ++j) d.entries.push_back(stx(c, pick(3)));
      d.diverges = pick(2) == 1;
      xs.insert(d);
    }
    auto red = reduce(xs);
    if (reduce(red) != red) ++bad;
    for (const auto& u : red) {
      if (!xs.count(u)) ++bad;
      bool prefix_of_input = false;
      for (const auto& x : xs)
        if (dv_prefix(u, x)) prefix_of_input = true;
      if (!prefix_of_input) ++bad;
    }
    for (const auto& a : red)
      for (const auto& b : red)
        if (!(a == b) && occludes(a, b) && a.entries.size() < b.entries.size()) ++bad;
  }
  r.details["random_sets"] = 10000;
  r.check("reduce idempotence and prefix properties on random sets", bad == 0);
  return r;
}

// ---- criterion 6: the replay-loop gadget ---------------------------------

inline SuiteResult suite_gadget() {
  SuiteResult r;
  r.suite = "gadget";
  DomainConfig c = make_cfg(0, 6, {"x", "j"});
  std::mt19937 rng(606);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  const char* bodies[] = {"x := x + 1", "x := x - 1", "x := 0",
                          "x := x",     "x := x + 1 + 1", "x := 1",
                          "if x == 0 then { x := 1 } else { x := x + 1 }",
                          "while x < 1 + 1 do { x := x + 1 }",
                          "while t do { x := x }",
                          "if x < 1 + 1 + 1 then { x := x + 1 } else { x := 0 }"};
  size_t mismatches = 0, members = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::string rule = bodies[pick(10)];
    int extra = pick(3);
    for (int i = 0; i < extra; ++i) rule += std::string(" | ") + bodies[pick(10)];
    Rtg g = parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= " + rule + ";\n");
    if (enumerate_terms(g, "S", 12).size() > 10) continue;
    size_t len = 1 + pick(3);
    VState v, u;
    for (size_t i = 0; i < len; ++i) {
      v.push_back(stx(c, pick(7)));
      // bias u towards actual outputs half of the time, so both directions
      // of the iff get exercised
      u.push_back(stx(c, pick(7)));
    }
    if (pick(2)) {
      auto outs = oracle_vector(g, "S", 12, {v}, c);
      if (!outs.empty()) {
        size_t skip = pick(static_cast<int>(outs.size()));
        auto it = outs.begin();
        std::advance(it, skip);
        u = *it;
      }
    }
    auto chk = gadget_iff_check(g, "S", v, u, "j", c, 12);
    if (chk.vector_member != chk.gadget_accepts) ++mismatches;
    if (chk.vector_member) ++members;
  }
  r.details["positive_instances"] = members;
  r.details["mismatches"] = mismatches;
  r.check("gadget iff-property on 100 random instances", mismatches == 0);
  r.check("both directions exercised", members >= 10);
  return r;
}

// ---- criterion 7: granularity witnesses and vector invariants ------------

inline SuiteResult suite_granularity() {
  SuiteResult r;
  r.suite = "granularity";
  DomainConfig c = make_cfg(0, 8, {"x"});
  Probe p = default_probe(c);
  Rtg s1 = parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= x := 1 | x := 1 + 1;\n");
  Rtg s2 = parse_grammar(
      "nonterm S : Stmt;\nstart S;\n"
      "S ::= if x == 0 then { x := 1 } else { x := 1 + 1 }"
      " | if !(x == 0) then { x := 1 } else { x := 1 + 1 };\n");
  Rtg empty;
  empty.nonterminals = {{"S", Sort::Stmt}};
  empty.start = "S";
  Rtg divg = parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= while t do x := x;\n");

  std::vector<std::pair<Rtg, std::string>> fam1 = {{s1, "S"}, {s2, "S"}};
  auto w1 = refines_on_family(fam1, {SemanticsKind::AgnosticYellow, 8},
                              {SemanticsKind::Aware, 8}, p, c);
  r.check("witness (S1,S2) for agnostic-yellow vs aware",
          !w1.ok && w1.witness_i == 0 && w1.witness_j == 1);

  std::vector<std::pair<Rtg, std::string>> fam2 = {{empty, "S"}, {divg, "S"}};
  auto w2 = refines_on_family(fam2, {SemanticsKind::AgnosticYellow, 8},
                              {SemanticsKind::AgnosticGreen, 8}, p, c);
  r.check("witness (empty, diverging) for agnostic-yellow vs agnostic-green",
          !w2.ok && w2.witness_i == 0 && w2.witness_j == 1);

  DomainConfig c3 = make_cfg(0, 3, {"x"});
  std::mt19937 rng(777);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  size_t failures = 0;
  auto states3 = enumerate_states(c3, {"x"});
  for (int q = 0; q < 1000; ++q) {
    Rtg g = random_finite_grammar(rng, true);
    VectorEngine engine(g, c3);
    State s = states3[pick(static_cast<int>(states3.size()))];
    // projection
    std::set<State> proj;
    for (const auto& u : engine.eval("S", {VState{s}})) proj.insert(u[0]);
    if (proj != oracle_agnostic(g, "S", 64, {s}, AgMode::Yellow, c3).states) ++failures;
    // duplication
    std::set<VState> wantdup;
    for (const auto& u : engine.eval("S", {VState{s}})) wantdup.insert({u[0], u[0]});
    if (engine.eval("S", {VState{s, s}}) != wantdup) ++failures;
  }
  r.details["random_queries"] = 1000;
  r.details["failures"] = failures;
  r.check("projection and duplication invariants", failures == 0);
  return r;
}

// ---- criterion 8: programming-by-example ---------------------------------

inline SuiteResult suite_pbe() {
  SuiteResult r;
  r.suite = "pbe";
  DomainConfig c = make_cfg(0, 16, {"x"});
  Rtg g = parse_grammar(
      "nonterm S : Stmt;\nstart S;\n"
      "S ::= x := x + (1 + 1) | x := x + (1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1);\n");
  std::vector<std::pair<State, State>> crossed = {{stx(c, 2), stx(c, 4)}, {stx(c, 4), stx(c, 14)}};
  std::vector<std::pair<State, State>> consistent = {{stx(c, 2), stx(c, 4)},
                                                     {stx(c, 4), stx(c, 6)}};
  r.check("crossed pairing unrealizable (engine)",
          pbe_unrealizable(g, "S", crossed, c).unrealizable);
  r.check("crossed pairing unrealizable (oracle)",
          pbe_unrealizable(g, "S", crossed, c, EngineChoice::oracle(12)).unrealizable);
  r.check("consistent pairing realizable (engine)",
          !pbe_unrealizable(g, "S", consistent, c).unrealizable);
  r.check("consistent pairing realizable (oracle)",
          !pbe_unrealizable(g, "S", consistent, c, EngineChoice::oracle(12)).unrealizable);
  return r;
}

// ---- criterion 9: determinism ---------------------------------------------

inline json determinism_payload() {
  // A representative batch covering every engine; returns the full payload.
  json out = json::object();
  DomainConfig c = make_cfg(0, 8, {"x"});
  Rtg g = example1_grammar();
  json terms = json::array();
  for (const auto& t : enumerate_terms(g, "W", 6)) terms.push_back(pretty(t));
  out["enumerate"] = terms;
  VectorEngine engine(g, c);
  json outs = json::array();
  for (const auto& u : engine.eval("W", {VState{stx(c, 0)}})) outs.push_back(vstate_to_json(c, u));
  out["semantics"] = outs;
  Triple t;
  t.grammar = g;
  t.nonterminal = "W";
  t.pre = Pred::pointwise("x == 0", 1);
  t.post = Pred::pointwise("x % 2 == 0");
  out["check_holds"] = check_triple(t, c).holds;
  auto rep = noncompositionality_witness(c);
  out["w1"] = json(x_projection(c, rep.w1_outputs));
  out["w2"] = json(x_projection(c, rep.w2_outputs));
  return out;
}

inline SuiteResult suite_determinism() {
  SuiteResult r;
  r.suite = "determinism";
  std::string a = determinism_payload().dump();
  std::string b = determinism_payload().dump();
  r.check("identical payload bytes across two in-process runs", a == b);
  r.details["payload_bytes"] = a.size();
  return r;
}

}  // namespace replication

inline std::vector<std::string> replicate_suite_names() {
  return {"noncompositionality", "evenness", "fig6", "engine-equivalence", "reduce",
          "gadget", "granularity", "pbe", "determinism"};
}

inline SuiteResult replicate_suite(const std::string& name) {
  using namespace replication;
  auto timed = [](SuiteResult s, std::chrono::steady_clock::time_point t0) {
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
  };
  auto t0 = std::chrono::steady_clock::now();
  if (name == "noncompositionality") return timed(suite_noncompositionality(), t0);
  if (name == "evenness") return timed(suite_evenness(), t0);
  if (name == "fig6") return timed(suite_fig6(), t0);
  if (name == "engine-equivalence") return timed(suite_engine_equivalence(), t0);
  if (name == "reduce") return timed(suite_reduce(), t0);
  if (name == "gadget") return timed(suite_gadget(), t0);
  if (name == "granularity") return timed(suite_granularity(), t0);
  if (name == "pbe") return timed(suite_pbe(), t0);
  if (name == "determinism") return timed(suite_determinism(), t0);
  throw InputError("unknown replication suite '" + name + "'");
}

}  // namespace setsem
