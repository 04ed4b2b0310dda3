#include <gtest/gtest.h>

#include <random>

#include "setsem/triples.hpp"

using namespace setsem;

namespace {

DomainConfig cfg(int lo, int hi, std::vector<std::string> vars = {"x"}) {
  DomainConfig c;
  c.lo = lo;
  c.hi = hi;
  c.tracked_vars = std::move(vars);
  return c;
}

State st(const DomainConfig& c, int x) { return State::canonical(c).with_var(0, x); }

Rtg example1() {
  return parse_grammar(
      "nonterm W : Stmt;\nnonterm E : Exp;\nstart W;\n"
      "W ::= while x < <E> do { x := x + 1 };\n"
      "E ::= 0 | <E> + (1 + 1);\n");
}

Rtg unprovable_loops(int k) {
  std::string num = pretty(numeral(k));
  return parse_grammar(
      "nonterm W : Stmt;\nnonterm B : BExp;\nstart W;\n"
      "W ::= while <B> do { x := x + 1 };\n"
      "B ::= x == " + num + " | !(x == " + num + ");\n");
}

}  // namespace

TEST(Formula, ParseAndEval) {
  DomainConfig c = cfg(0, 8, {"x", "y"});
  State s = State::canonical(c).with_var(0, 4).with_var(1, 2).with_et(3).with_bt(true);
  EXPECT_TRUE(eval_formula(parse_formula("x == 4"), c, s));
  EXPECT_TRUE(eval_formula(parse_formula("x % 2 == 0"), c, s));
  EXPECT_FALSE(eval_formula(parse_formula("x % 2 == 1"), c, s));
  EXPECT_TRUE(eval_formula(parse_formula("b_t == t"), c, s));
  EXPECT_TRUE(eval_formula(parse_formula("y < x && !(x == y)"), c, s));
  EXPECT_TRUE(eval_formula(parse_formula("e_t == 3 || false"), c, s));
  EXPECT_TRUE(eval_formula(parse_formula("x != y"), c, s));
  EXPECT_TRUE(eval_formula(parse_formula("y <= 2"), c, s));
  EXPECT_THROW(parse_formula("x =="), ParseError);
}

TEST(Pred, PointwiseExpansion) {
  DomainConfig c = cfg(0, 1);
  Pred p = Pred::pointwise("x == 0", 1);
  auto vs = pred_to_vectors(p, c, 4);
  // x pinned, e_t in {0,1}, b_t in {t,f}: 4 singleton vectors
  EXPECT_EQ(vs.size(), 4u);
  for (const auto& v : vs) {
    EXPECT_EQ(v.entries.size(), 1u);
    EXPECT_EQ(v.entries[0].var(0), 0);
  }
  // unpinned length: lengths 0..2
  Pred q = Pred::pointwise("x == 0");
  auto vs2 = pred_to_vectors(q, c, 2);
  EXPECT_EQ(vs2.size(), 1u + 4u + 16u);
}

TEST(Pred, ParityExpansion) {
  DomainConfig c = cfg(0, 8);
  auto states = pred_to_states(Pred::pointwise("x % 2 == 0"), c);
  std::set<int> xs;
  for (const auto& s : states) xs.insert(s.var(0));
  EXPECT_EQ(xs, (std::set<int>{0, 2, 4, 6, 8}));
}

TEST(Pred, ExplicitIsItself) {
  DomainConfig c = cfg(0, 1);
  std::set<DVState> xs = {dv({st(c, 0)}), dv({}, true)};
  EXPECT_EQ(pred_to_vectors(Pred::make_explicit(xs), c, 8), xs);
}

TEST(Triples, EvennessHoldsBothEngines) {
  DomainConfig c = cfg(0, 8);
  Triple t;
  t.grammar = example1();
  t.nonterminal = "W";
  t.pre = Pred::pointwise("x == 0", 1);
  t.post = Pred::pointwise("x % 2 == 0");
  t.mode = TripleMode::VectorYellow;
  t.engine = EngineChoice{};  // compositional
  EXPECT_TRUE(check_triple(t, c).holds);
  t.engine = EngineChoice::oracle(12);
  EXPECT_TRUE(check_triple(t, c).holds);
}

TEST(Triples, UnprovableTripleHoldsForB1) {
  DomainConfig c = cfg(0, 8);
  Triple t;
  t.grammar = unprovable_loops(1);
  t.nonterminal = "W";
  t.pre = Pred::pointwise("x == 0", 1);
  t.post = Pred::pointwise("x == 0 || x == 1");
  t.mode = TripleMode::VectorYellow;
  t.engine = EngineChoice::oracle(8);
  EXPECT_TRUE(check_triple(t, c).holds);
  t.engine = EngineChoice{};
  EXPECT_TRUE(check_triple(t, c).holds);
}

TEST(Triples, B2VariantViolatedWithWitnessX2) {
  DomainConfig c = cfg(0, 8);
  Triple t;
  t.grammar = unprovable_loops(2);
  t.nonterminal = "W";
  t.pre = Pred::pointwise("x == 0", 1);
  t.post = Pred::pointwise("x == 0 || x == 1");
  t.mode = TripleMode::VectorYellow;
  t.engine = EngineChoice{};
  Verdict v = check_triple(t, c);
  ASSERT_FALSE(v.holds);
  ASSERT_TRUE(v.witness_output.has_value());
  EXPECT_EQ(v.witness_output->entries[0].var(0), 2);
  // deterministic minimal witness: same result twice
  Verdict v2 = check_triple(t, c);
  EXPECT_EQ(v.witness_input->entries, v2.witness_input->entries);
  EXPECT_EQ(v.witness_output->entries, v2.witness_output->entries);
}

TEST(Triples, AgnosticGreenDivergenceViolation) {
  DomainConfig c = cfg(0, 4);
  Triple t;
  t.grammar = parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= while t do x := x;\n");
  t.nonterminal = "S";
  t.pre = Pred::pointwise("x == 0", 1);
  t.post = Pred::pointwise("true");
  t.mode = TripleMode::AgnosticGreen;
  t.engine = EngineChoice::oracle(6);
  Verdict v = check_triple(t, c);
  ASSERT_FALSE(v.holds);  // diverging output is not admitted by a formula
  EXPECT_TRUE(v.witness_output->diverges);
  // yellow mode ignores the divergence
  t.mode = TripleMode::AgnosticYellow;
  EXPECT_TRUE(check_triple(t, c).holds);
}

TEST(Triples, EngineAgreementRandom) {
  std::mt19937 rng(11);
  DomainConfig c = cfg(0, 3);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  const char* stmts[] = {"x := <E>", "while <B> do { x := x + 1 }",
                         "if <B> then { x := <E> } else { x := x + 1 }",
                         "while x < <E> do { x := x + 1 }"};
  const char* posts[] = {"x < 4", "x % 2 == 0", "x == 0 || x == 1", "x <= 2"};
  for (int trial = 0; trial < 40; ++trial) {
    std::string s_rule = stmts[pick(4)];
    if (pick(2)) s_rule += std::string(" | ") + stmts[pick(4)];
    Rtg g = parse_grammar(
        "nonterm S : Stmt; nonterm E : Exp; nonterm B : BExp;\nstart S;\n"
        "S ::= " + s_rule + ";\nE ::= 0 | 1 | x;\nB ::= x == 0 | x < 1 + 1;\n");
    Triple t;
    t.grammar = g;
    t.nonterminal = "S";
    t.pre = Pred::pointwise("x == 0 || x == 1", 1 + pick(2));
    t.post = Pred::pointwise(posts[pick(4)]);
    t.mode = pick(2) ? TripleMode::VectorYellow : TripleMode::VectorGreen;
    t.engine = EngineChoice{};
    Verdict comp = check_triple(t, c);
    t.engine = EngineChoice::oracle(16);
    Verdict orac = check_triple(t, c);
    ASSERT_EQ(comp.holds, orac.holds) << grammar_to_text(g);
    if (!comp.holds) {
      ASSERT_EQ(*comp.witness_input, *orac.witness_input) << grammar_to_text(g);
      ASSERT_EQ(*comp.witness_output, *orac.witness_output) << grammar_to_text(g);
    }
  }
}

TEST(Pbe, CrossedPairUnrealizable) {
  DomainConfig c = cfg(0, 16);
  Rtg g = parse_grammar(
      "nonterm S : Stmt;\nstart S;\n"
      "S ::= x := x + (1 + 1) | x := x + (1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1);\n");
  std::vector<std::pair<State, State>> crossed = {{st(c, 2), st(c, 4)}, {st(c, 4), st(c, 14)}};
  std::vector<std::pair<State, State>> consistent = {{st(c, 2), st(c, 4)}, {st(c, 4), st(c, 6)}};
  EXPECT_TRUE(pbe_unrealizable(g, "S", crossed, c).unrealizable);
  EXPECT_FALSE(pbe_unrealizable(g, "S", consistent, c).unrealizable);
  // brute-force oracle agrees
  EXPECT_TRUE(pbe_unrealizable(g, "S", crossed, c, EngineChoice::oracle(12)).unrealizable);
  EXPECT_FALSE(pbe_unrealizable(g, "S", consistent, c, EngineChoice::oracle(12)).unrealizable);
}

TEST(Pbe, EmptyGrammarUnrealizable) {
  DomainConfig c = cfg(0, 4);
  Rtg g;
  g.nonterminals = {{"S", Sort::Stmt}};
  g.start = "S";
  std::vector<std::pair<State, State>> ex = {{st(c, 0), st(c, 0)}};
  EXPECT_TRUE(pbe_unrealizable(g, "S", ex, c).unrealizable);
}

TEST(GrmDisj, SplitLoopsByGuard) {
  DomainConfig c = cfg(0, 8);
  Rtg g = parse_grammar(
      "nonterm W : Stmt; nonterm W1 : Stmt; nonterm W2 : Stmt;\nstart W;\n"
      "W ::= while x == 1 do { x := x + 1 } | while !(x == 1) do { x := x + 1 };\n"
      "W1 ::= while x == 1 do { x := x + 1 };\n"
      "W2 ::= while !(x == 1) do { x := x + 1 };\n");
  Triple t;
  t.grammar = g;
  t.nonterminal = "W";
  t.pre = Pred::pointwise("x == 0", 1);
  t.post = Pred::pointwise("x == 0 || x == 1");
  t.mode = TripleMode::VectorYellow;
  t.engine = EngineChoice::oracle(8);
  auto r = grmdisj_check(t, "W1", "W2", c);
  EXPECT_TRUE(r.valid_split);
  EXPECT_TRUE(r.holds);
  // soundness: the split verdict implies the whole-set verdict
  EXPECT_TRUE(check_triple(t, c).holds);
  // a stronger post fails on one half and reports it
  t.post = Pred::pointwise("x == 1");
  auto r2 = grmdisj_check(t, "W1", "W2", c);
  EXPECT_TRUE(r2.valid_split);
  EXPECT_FALSE(r2.holds);
  EXPECT_EQ(r2.failing_half, "W1");  // zero iterations leave x == 0
}

TEST(GrmDisj, DegenerateSplit) {
  DomainConfig c = cfg(0, 8);
  Rtg g = parse_grammar(
      "nonterm W : Stmt; nonterm W1 : Stmt; nonterm Z : Stmt;\nstart W;\n"
      "W ::= x := 0 | x := 1;\nW1 ::= x := 0 | x := 1;\n");
  Triple t;
  t.grammar = g;
  t.nonterminal = "W";
  t.pre = Pred::pointwise("true", 1);
  t.post = Pred::pointwise("x < 2 && x <= 1");
  t.mode = TripleMode::VectorYellow;
  t.engine = EngineChoice{};
  auto r = grmdisj_check(t, "W1", "Z", c);
  EXPECT_TRUE(r.valid_split);
  EXPECT_EQ(r.holds, check_triple(t, c).holds);
}

TEST(GrmDisj, InvalidSplitRejected) {
  DomainConfig c = cfg(0, 8);
  Rtg g = parse_grammar(
      "nonterm W : Stmt; nonterm W1 : Stmt;\nstart W;\n"
      "W ::= x := 0 | x := 1;\nW1 ::= x := 0;\n");
  Triple t;
  t.grammar = g;
  t.nonterminal = "W";
  t.pre = Pred::pointwise("true", 1);
  t.post = Pred::pointwise("true");
  EXPECT_THROW(grmdisj_check(t, "W1", "W1", c), InputError);
}

TEST(Gadget, SingleIncrementBody) {
  DomainConfig c = cfg(0, 6, {"x", "j"});
  Rtg g = parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= x := x + 1;\n");
  VState v = {st(c, 0)};
  VState u = {st(c, 1)};
  auto r = gadget_iff_check(g, "S", v, u, "j", c, 6);
  EXPECT_TRUE(r.vector_member);
  EXPECT_TRUE(r.gadget_accepts);
  // wrong output: both sides reject
  VState u2 = {st(c, 2)};
  auto r2 = gadget_iff_check(g, "S", v, u2, "j", c, 6);
  EXPECT_FALSE(r2.vector_member);
  EXPECT_FALSE(r2.gadget_accepts);
}

TEST(Gadget, PreconditionChecks) {
  DomainConfig c = cfg(0, 6, {"x", "j"});
  Rtg g = parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= x := x + 1;\n");
  // u differs from v off vars(S): rejected
  State v0 = State::canonical(c).with_var(0, 0);
  State bad = State::canonical(c).with_var(0, 1).with_var(1, 3);
  EXPECT_THROW(build_gadget_wvu(g, "S", {v0}, {bad}, "j", c), InputError);
  // counter collides with a body variable
  EXPECT_THROW(build_gadget_wvu(g, "S", {v0}, {v0.with_var(0, 1)}, "x", c), InputError);
  // domain too small for the counter bound
  DomainConfig tiny = cfg(0, 1, {"x", "j"});
  State t0 = State::canonical(tiny);
  EXPECT_THROW(build_gadget_wvu(g, "S", {t0}, {t0.with_var(0, 1)}, "j", tiny), InputError);
}

TEST(Gadget, RandomIffProperty) {
  std::mt19937 rng(5);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  DomainConfig c = cfg(0, 6, {"x", "j"});
  const char* bodies[] = {"x := x + 1", "x := x - 1",    "x := 0",
                          "x := x",     "x := x + 1 + 1", "x := 1",
                          "if x == 0 then { x := 1 } else { x := x + 1 }",
                          "while x < 1 + 1 do { x := x + 1 }",
                          "while t do { x := x }"};
  for (int trial = 0; trial < 30; ++trial) {
    std::string rule = bodies[pick(9)];
    int extra = pick(3);
    for (int i = 0; i < extra; ++i) rule += std::string(" | ") + bodies[pick(9)];
    Rtg g = parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= " + rule + ";\n");
    size_t len = 1 + pick(3);
    VState v, u;
    for (size_t i = 0; i < len; ++i) {
      v.push_back(st(c, pick(7)));
      u.push_back(st(c, pick(7)));
    }
    auto r = gadget_iff_check(g, "S", v, u, "j", c, 10);
    ASSERT_EQ(r.vector_member, r.gadget_accepts)
        << grammar_to_text(g) << " v=" << show(c, v) << " u=" << show(c, u);
  }
}
