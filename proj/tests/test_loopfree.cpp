#include <gtest/gtest.h>

#include <random>

#include "setsem/loopfree.hpp"

using namespace setsem;

namespace {

DomainConfig cfg08() {
  DomainConfig c;
  c.lo = 0;
  c.hi = 8;
  c.tracked_vars = {"x"};
  return c;
}

State st(const DomainConfig& c, int x) { return State::canonical(c).with_var(0, x); }

}  // namespace

TEST(Loopfree, GuardPairB1) {
  DomainConfig c = cfg08();
  Rtg b1 = guard_pair_grammar(1);
  for (const auto& s : enumerate_states(c, {"x"})) {
    auto r = eval_agnostic_compositional(b1, "B", {s}, c);
    EXPECT_EQ(r, (std::set<State>{s.with_bt(true), s.with_bt(false)}));
  }
}

TEST(Loopfree, SeqCrossPairs) {
  DomainConfig c = cfg08();
  Rtg g = parse_grammar(
      "nonterm S : Stmt; nonterm S1 : Stmt; nonterm S2 : Stmt;\n"
      "start S;\n"
      "S ::= <S1> ; <S2>;\n"
      "S1 ::= x := 1 | x := 1 + 1;\n"
      "S2 ::= x := x + 1;\n");
  auto r = eval_agnostic_compositional(g, "S", {st(c, 0)}, c);
  EXPECT_EQ(r, (std::set<State>{st(c, 2), st(c, 3)}));
  // matches the enumeration oracle set-exactly
  EXPECT_EQ(r, oracle_agnostic(g, "S", 8, {st(c, 0)}, AgMode::Yellow, c).states);
}

TEST(Loopfree, SingleChainEqualsEvalYellow) {
  DomainConfig c = cfg08();
  Rtg g = parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= x := x + 1 ; x := x + 1;\n");
  auto r = eval_agnostic_compositional(g, "S", {st(c, 1)}, c);
  EXPECT_EQ(r, eval_yellow(parse_term("x := x + 1 ; x := x + 1"), st(c, 1), c));
}

TEST(Loopfree, LoopDetected) {
  DomainConfig c = cfg08();
  Rtg g = parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= while t do x := x;\n");
  EXPECT_THROW(eval_agnostic_compositional(g, "S", {st(c, 0)}, c), LoopDetected);
}

TEST(Loopfree, RecursiveExpressionFixpoint) {
  DomainConfig c = cfg08();
  Rtg g = parse_grammar("nonterm E : Exp;\nstart E;\nE ::= 0 | <E> + (1 + 1);\n");
  State s = st(c, 3);
  auto r = eval_agnostic_compositional(g, "E", {s}, c);
  // e_t saturates: 0,2,4,6,8 (8+2 clamps to 8)
  std::set<State> want;
  for (int v : {0, 2, 4, 6, 8}) want.insert(s.with_et(v));
  EXPECT_EQ(r, want);
}

TEST(Loopfree, EmptyBranchMakesIfEmpty) {
  DomainConfig c = cfg08();
  Rtg g = parse_grammar(
      "nonterm S : Stmt; nonterm T : Stmt;\n"
      "start S;\n"
      "S ::= if x == 0 then { x := 1 } else { <T> };\n");
  // T has no productions: the if-set is empty even when the guard is true.
  auto r = eval_agnostic_compositional(g, "S", {st(c, 0)}, c);
  EXPECT_TRUE(r.empty());
  EXPECT_EQ(r, oracle_agnostic(g, "S", 8, {st(c, 0)}, AgMode::Yellow, c).states);
}

TEST(Loopfree, NoncompositionalityWitness) {
  DomainConfig c = cfg08();
  auto rep = noncompositionality_witness(c);
  EXPECT_TRUE(rep.guards_agree_everywhere);
  EXPECT_TRUE(rep.loops_differ);
  std::set<State> w1want, w2want;
  for (const auto& s : enumerate_states(c, {"x"})) {
    int x = s.var(0);
    if (x == 0 || x == 1) w1want.insert(s);
    if (x == 0 || x == 2) w2want.insert(s);
  }
  EXPECT_EQ(rep.w1_outputs, w1want);
  EXPECT_EQ(rep.w2_outputs, w2want);
}

// Random loop-free grammars: the engine equals the enumeration oracle
// set-exactly on every state.
namespace {

Rtg random_loopfree(std::mt19937& rng) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  // Pools of small templates per sort, with <N1>/<N2> references.
  const char* exps[] = {"0", "1", "x", "x + 1", "x - 1", "<N2> + 1", "<N2> - <N2>", "1 + <N2>"};
  const char* bexps[] = {"t", "f", "x == 0", "x < 1 + 1", "!(x == 1)", "x == <N2>"};
  const char* stmts[] = {"x := <N1>",
                         "x := <N1> ; x := x + 1",
                         "if <B1> then { x := <N1> } else { x := 0 }",
                         "if x == 0 then { x := <N1> } else { x := <N1> }",
                         "x := x + 1",
                         "x := <N1> ; x := <N1>"};
  std::string src =
      "nonterm S : Stmt; nonterm N1 : Exp; nonterm N2 : Exp; nonterm B1 : BExp;\n"
      "start S;\n";
  auto alts = [&](const char* const* pool, int pool_n, int count) {
    std::string out;
    for (int i = 0; i < count; ++i) {
      if (i) out += " | ";
      out += pool[pick(pool_n)];
    }
    return out;
  };
  src += "S ::= " + alts(stmts, 6, 1 + pick(2)) + ";\n";
  src += "N1 ::= " + alts(exps, 8, 1 + pick(3)) + ";\n";
  src += "N2 ::= " + alts(exps, 5, 1 + pick(2)) + ";\n";  // only hole-free pool entries
  src += "B1 ::= " + alts(bexps, 6, 1 + pick(2)) + ";\n";
  return parse_grammar(src);
}

}  // namespace

TEST(Loopfree, RandomGrammarsMatchOracle) {
  std::mt19937 rng(7);
  DomainConfig c;
  c.lo = 0;
  c.hi = 3;
  c.tracked_vars = {"x"};
  for (int trial = 0; trial < 60; ++trial) {
    Rtg g = random_loopfree(rng);
    ASSERT_TRUE(validate(g).empty());
    AgnosticEngine engine(g, c);
    for (const auto& s : enumerate_states(c, {"x"})) {
      auto got = engine.eval("S", {s});
      auto want = oracle_agnostic(g, "S", 10, {s}, AgMode::Yellow, c).states;
      ASSERT_EQ(got, want) << "trial " << trial << " on " << show(c, s);
    }
  }
}
