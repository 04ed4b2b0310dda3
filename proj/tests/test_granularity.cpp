#include <gtest/gtest.h>

#include <random>

#include "setsem/granularity.hpp"
#include "setsem/vector_agnostic.hpp"

using namespace setsem;

namespace {

DomainConfig cfg08() {
  DomainConfig c;
  c.lo = 0;
  c.hi = 8;
  c.tracked_vars = {"x"};
  return c;
}

Rtg ex39_s1() {
  return parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= x := 1 | x := 1 + 1;\n");
}

Rtg ex39_s2() {
  return parse_grammar(
      "nonterm S : Stmt;\nstart S;\n"
      "S ::= if x == 0 then { x := 1 } else { x := 1 + 1 }"
      " | if !(x == 0) then { x := 1 } else { x := 1 + 1 };\n");
}

Rtg empty_grammar() {
  Rtg g;
  g.nonterminals = {{"S", Sort::Stmt}};
  g.start = "S";
  return g;
}

Rtg diverging_singleton() {
  return parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= while t do x := x;\n");
}

}  // namespace

TEST(Granularity, Ex39Fingerprints) {
  DomainConfig c = cfg08();
  Probe p = default_probe(c);
  SemanticsId yellow{SemanticsKind::AgnosticYellow, 8};
  SemanticsId aware{SemanticsKind::Aware, 8};
  EXPECT_EQ(denote(yellow, ex39_s1(), "S", p, c), denote(yellow, ex39_s2(), "S", p, c));
  EXPECT_NE(denote(aware, ex39_s1(), "S", p, c), denote(aware, ex39_s2(), "S", p, c));
}

TEST(Granularity, EmptyProbeCollapsesEverything) {
  DomainConfig c = cfg08();
  Probe empty;
  SemanticsId yellow{SemanticsKind::AgnosticYellow, 8};
  EXPECT_EQ(denote(yellow, ex39_s1(), "S", empty, c),
            denote(yellow, diverging_singleton(), "S", empty, c));
}

TEST(Granularity, YellowVsAwareWitness) {
  DomainConfig c = cfg08();
  Probe p = default_probe(c);
  std::vector<std::pair<Rtg, std::string>> family = {{ex39_s1(), "S"}, {ex39_s2(), "S"}};
  auto r = refines_on_family(family, {SemanticsKind::AgnosticYellow, 8},
                             {SemanticsKind::Aware, 8}, p, c);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.witness_i, 0u);
  EXPECT_EQ(r.witness_j, 1u);
  // and the reverse direction has no counterexample on this family
  auto rr = refines_on_family(family, {SemanticsKind::Aware, 8},
                              {SemanticsKind::AgnosticYellow, 8}, p, c);
  EXPECT_TRUE(rr.ok);
}

TEST(Granularity, YellowVsGreenWitness) {
  DomainConfig c = cfg08();
  Probe p = default_probe(c);
  std::vector<std::pair<Rtg, std::string>> family = {{empty_grammar(), "S"},
                                                     {diverging_singleton(), "S"}};
  auto r = refines_on_family(family, {SemanticsKind::AgnosticYellow, 8},
                             {SemanticsKind::AgnosticGreen, 8}, p, c);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.witness_i, 0u);
  EXPECT_EQ(r.witness_j, 1u);
}

TEST(Granularity, ReflexivityAlwaysOk) {
  DomainConfig c = cfg08();
  Probe p = default_probe(c);
  std::vector<std::pair<Rtg, std::string>> family = {
      {ex39_s1(), "S"}, {ex39_s2(), "S"}, {diverging_singleton(), "S"}};
  for (SemanticsKind k : {SemanticsKind::AgnosticYellow, SemanticsKind::Aware,
                          SemanticsKind::VectorYellow}) {
    auto r = refines_on_family(family, {k, 8}, {k, 8}, p, c);
    EXPECT_TRUE(r.ok);
  }
}

TEST(Granularity, ProjectionOrderings) {
  // vector-yellow refines agnostic-yellow; vector-green refines vector-yellow
  // (no counterexample on a mixed family).
  DomainConfig c;
  c.lo = 0;
  c.hi = 3;
  c.tracked_vars = {"x"};
  Probe p = default_probe(c);
  std::vector<std::pair<Rtg, std::string>> family = {
      {ex39_s1(), "S"},
      {ex39_s2(), "S"},
      {empty_grammar(), "S"},
      {diverging_singleton(), "S"},
      {parse_grammar("nonterm S : Stmt;\nstart S;\nS ::= x := x + 1 | x := 0;\n"), "S"}};
  EXPECT_TRUE(refines_on_family(family, {SemanticsKind::VectorYellow, 8},
                                {SemanticsKind::AgnosticYellow, 8}, p, c)
                  .ok);
  EXPECT_TRUE(refines_on_family(family, {SemanticsKind::VectorGreen, 8},
                                {SemanticsKind::VectorYellow, 8}, p, c)
                  .ok);
  EXPECT_TRUE(refines_on_family(family, {SemanticsKind::Aware, 8},
                                {SemanticsKind::VectorGreen, 8}, p, c)
                  .ok);
}

TEST(Granularity, TransitivityOnFixedProbes) {
  DomainConfig c;
  c.lo = 0;
  c.hi = 2;
  c.tracked_vars = {"x"};
  Probe p = default_probe(c);
  std::vector<std::pair<Rtg, std::string>> family = {
      {ex39_s1(), "S"}, {ex39_s2(), "S"}, {diverging_singleton(), "S"}, {empty_grammar(), "S"}};
  SemanticsId a{SemanticsKind::Aware, 8};
  SemanticsId b{SemanticsKind::AgnosticGreen, 8};
  SemanticsId d{SemanticsKind::AgnosticYellow, 8};
  auto ab = refines_on_family(family, a, b, p, c);
  auto bd = refines_on_family(family, b, d, p, c);
  auto ad = refines_on_family(family, a, d, p, c);
  EXPECT_TRUE(ab.ok);
  EXPECT_TRUE(bd.ok);
  EXPECT_TRUE(ad.ok);  // transitivity: fine-equal => coarse-equal composes
}

TEST(Granularity, GreenVsAwareWitness) {
  DomainConfig c = cfg08();
  Probe p = default_probe(c);
  // Both sets have the same state-set semantics with divergence, but only
  // one contains a constant map.
  std::vector<std::pair<Rtg, std::string>> family = {{ex39_s1(), "S"}, {ex39_s2(), "S"}};
  auto r = refines_on_family(family, {SemanticsKind::AgnosticGreen, 8},
                             {SemanticsKind::Aware, 8}, p, c);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.witness_i, 0u);
  EXPECT_EQ(r.witness_j, 1u);
}

TEST(Granularity, VectorGreenVsAwareWitness) {
  // Partial identities: one set merges the two divergence points into a
  // single program, the other keeps them separate. Finite vectors cannot
  // tell the sets apart once occlusion kicks in, but the behavior tables
  // can.
  DomainConfig c;
  c.lo = 0;
  c.hi = 3;
  c.tracked_vars = {"x"};
  const char* f = "x := x";
  const char* f1 = "if x == 1 then { while t do x := x } else { x := x }";
  const char* f2 = "if x == 1 + 1 then { while t do x := x } else { x := x }";
  const char* f12 =
      "if x == 1 then { while t do x := x } else "
      "{ if x == 1 + 1 then { while t do x := x } else { x := x } }";
  Rtg s1 = parse_grammar(std::string("nonterm S : Stmt;\nstart S;\nS ::= ") + f + " | " + f12 +
                         ";\n");
  Rtg s2 = parse_grammar(std::string("nonterm S : Stmt;\nstart S;\nS ::= ") + f + " | " + f1 +
                         " | " + f2 + ";\n");
  Probe p = default_probe(c);
  std::vector<std::pair<Rtg, std::string>> family = {{s1, "S"}, {s2, "S"}};
  auto r = refines_on_family(family, {SemanticsKind::VectorGreen, 10},
                             {SemanticsKind::Aware, 10}, p, c);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.witness_i, 0u);
  EXPECT_EQ(r.witness_j, 1u);
  // sanity: the vector-green fingerprints really are equal
  SemanticsId green{SemanticsKind::VectorGreen, 10};
  EXPECT_EQ(denote(green, s1, "S", p, c), denote(green, s2, "S", p, c));
}
