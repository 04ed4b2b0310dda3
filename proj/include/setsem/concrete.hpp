#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "setsem/ast.hpp"
#include "setsem/domain.hpp"
#include "setsem/grammar.hpp"

namespace setsem {

// Shared mutable context for one evaluation run; the step budget guards
// against misconfiguration and is an error, never a divergence verdict.
struct EvalContext {
  const DomainConfig& cfg;
  long long steps = 0;

  void tick() {
    if (++steps > cfg.caps.step_budget)
      throw ResourceLimit("step budget exceeded (" + std::to_string(cfg.caps.step_budget) + ")");
  }
};

namespace detail {

inline std::optional<State> eval_node(const TermPtr& c, const State& s, EvalContext& ctx);

// Divergence is detected exactly: the state space is finite and programs are
// deterministic, so a repeated state at the head of a while activation means
// the loop never terminates.
inline std::optional<State> eval_while(const TermPtr& guard, const TermPtr& body, State s,
                                       EvalContext& ctx) {
  std::set<State> seen;
  while (true) {
    ctx.tick();
    if (!seen.insert(s).second) return std::nullopt;  // revisit => diverges
    auto g = eval_node(guard, s, ctx);
    if (!g->bt()) return s;  // guard leaves no trace on the state
    auto s2 = eval_node(body, s, ctx);
    if (!s2) return std::nullopt;
    s = *s2;
  }
}

inline std::optional<State> eval_node(const TermPtr& c, const State& s, EvalContext& ctx) {
  ctx.tick();
  const DomainConfig& cfg = ctx.cfg;
  switch (c->op()) {
    case Op::Zero: return s.with_et(cfg.clamp(0));
    case Op::One: return s.with_et(cfg.clamp(1));
    case Op::VarRef: return s.with_et(s.var(cfg.var_index(c->name())));
    case Op::True: return s.with_bt(true);
    case Op::False: return s.with_bt(false);
    case Op::Not: {
      auto b = eval_node(c->kid(0), s, ctx);
      return s.with_bt(!b->bt());
    }
    case Op::Add:
    case Op::Sub: {
      auto a = eval_node(c->kid(0), s, ctx);
      auto b = eval_node(c->kid(1), s, ctx);
      long long r = c->op() == Op::Add ? (long long)a->et() + b->et()
                                       : (long long)a->et() - b->et();
      return s.with_et(cfg.clamp(r));
    }
    case Op::Lt:
    case Op::Eq: {
      auto a = eval_node(c->kid(0), s, ctx);
      auto b = eval_node(c->kid(1), s, ctx);
      bool r = c->op() == Op::Lt ? a->et() < b->et() : a->et() == b->et();
      return s.with_bt(r);
    }
    case Op::And: {
      auto a = eval_node(c->kid(0), s, ctx);
      auto b = eval_node(c->kid(1), s, ctx);
      return s.with_bt(a->bt() && b->bt());
    }
    case Op::Assign: {
      auto e = eval_node(c->kid(0), s, ctx);
      return s.with_var(cfg.var_index(c->name()), e->et());
    }
    case Op::Seq: {
      auto a = eval_node(c->kid(0), s, ctx);
      if (!a) return std::nullopt;
      return eval_node(c->kid(1), *a, ctx);
    }
    case Op::If: {
      auto g = eval_node(c->kid(0), s, ctx);
      return g->bt() ? eval_node(c->kid(1), s, ctx) : eval_node(c->kid(2), s, ctx);
    }
    case Op::While:
      return eval_while(c->kid(0), c->kid(1), s, ctx);
    case Op::Hole:
      throw InputError("cannot evaluate a template hole <" + c->name() + ">");
  }
  throw InputError("unreachable term constructor");
}

inline void require_tracked(const DomainConfig& cfg, const TermPtr& c) {
  for (const auto& v : vars(c))
    if (!cfg.tracks(v))
      throw InputError("program variable '" + v + "' is not tracked by the domain");
}

}  // namespace detail

// Divergence-aware evaluation of a single program: the unique result state,
// or nullopt for a diverging run.
inline std::optional<State> eval_green(const TermPtr& c, const State& s, const DomainConfig& cfg) {
  detail::require_tracked(cfg, c);
  EvalContext ctx{cfg};
  return detail::eval_node(c, s, ctx);
}

// Divergence-agnostic evaluation: empty on divergence, singleton otherwise.
inline std::set<State> eval_yellow(const TermPtr& c, const State& s, const DomainConfig& cfg) {
  auto r = eval_green(c, s, cfg);
  if (!r) return {};
  return {*r};
}

// Result of a divergence-aware state-set semantics: a set of states plus an
// explicit divergence marker.
struct GreenStates {
  std::set<State> states;
  bool diverges = false;

  friend bool operator==(const GreenStates& a, const GreenStates& b) {
    return a.diverges == b.diverges && a.states == b.states;
  }
};

enum class AgMode { Yellow, Green };

// Enumeration-based state-set semantics of L(n): the union over enumerated
// programs and input states of the single-program results.
inline GreenStates oracle_agnostic(const Rtg& g, const std::string& n, size_t depth,
                                   const std::set<State>& inputs, AgMode mode,
                                   const DomainConfig& cfg) {
  require_valid(g);
  for (const auto& v : grammar_vars(g, n))
    if (!cfg.tracks(v)) throw InputError("grammar variable '" + v + "' is not tracked");
  GreenStates out;
  for (const auto& c : enumerate_terms(g, n, depth, cfg.caps.max_enum_terms)) {
    for (const auto& s : inputs) {
      auto r = eval_green(c, s, cfg);
      if (r)
        out.states.insert(*r);
      else if (mode == AgMode::Green)
        out.diverges = true;
    }
  }
  return out;
}

// One program's input/output behavior tabulated over the state enumeration
// for a fixed variable set; the element type of the program-aware semantics.
// result[i] indexes into the same enumeration, -1 marks divergence.
struct BehaviorTable {
  std::vector<std::string> vars;
  std::vector<int32_t> result;

  friend bool operator<(const BehaviorTable& a, const BehaviorTable& b) {
    if (a.vars != b.vars) return a.vars < b.vars;
    return a.result < b.result;
  }
  friend bool operator==(const BehaviorTable& a, const BehaviorTable& b) {
    return a.vars == b.vars && a.result == b.result;
  }
};

inline BehaviorTable behavior_table(const TermPtr& c, const std::set<std::string>& over,
                                    const DomainConfig& cfg) {
  auto states = enumerate_states(cfg, over);
  std::map<State, int32_t> index;
  for (size_t i = 0; i < states.size(); ++i) index[states[i]] = static_cast<int32_t>(i);
  BehaviorTable t;
  t.vars.assign(over.begin(), over.end());
  t.result.reserve(states.size());
  for (const auto& s : states) {
    auto r = eval_green(c, s, cfg);
    if (!r) {
      t.result.push_back(-1);
    } else {
      auto it = index.find(*r);
      if (it == index.end())
        throw InputError("behavior_table: program escapes the state enumeration");
      t.result.push_back(it->second);
    }
  }
  return t;
}

// Program-aware semantics of L(n): the set of distinct behavior tables over
// the grammar's variables. Extensionally equal programs collapse.
inline std::set<BehaviorTable> oracle_aware(const Rtg& g, const std::string& n, size_t depth,
                                            const DomainConfig& cfg) {
  require_valid(g);
  auto gv = grammar_vars(g, n);
  for (const auto& v : gv)
    if (!cfg.tracks(v)) throw InputError("grammar variable '" + v + "' is not tracked");
  std::set<BehaviorTable> out;
  for (const auto& c : enumerate_terms(g, n, depth, cfg.caps.max_enum_terms))
    out.insert(behavior_table(c, gv, cfg));
  return out;
}

// Divergence-agnostic vector-state semantics by enumeration: one output
// vector per (program, input vector) where the program converges on every
// entry.
inline std::set<VState> oracle_vector(const Rtg& g, const std::string& n, size_t depth,
                                      const std::set<VState>& inputs, const DomainConfig& cfg) {
  require_valid(g);
  for (const auto& v : grammar_vars(g, n))
    if (!cfg.tracks(v)) throw InputError("grammar variable '" + v + "' is not tracked");
  for (const auto& v : inputs)
    if (v.size() > cfg.caps.max_vector_len)
      throw InputError("input vector exceeds max_vector_len");
  std::set<VState> out;
  for (const auto& c : enumerate_terms(g, n, depth, cfg.caps.max_enum_terms)) {
    for (const auto& v : inputs) {
      VState u;
      u.reserve(v.size());
      bool ok = true;
      for (const auto& s : v) {
        auto r = eval_green(c, s, cfg);
        if (!r) {
          ok = false;
          break;
        }
        u.push_back(*r);
      }
      if (ok) out.insert(std::move(u));
    }
  }
  return out;
}

// Divergence-aware vector-state semantics by enumeration: entrywise results
// truncated at the first divergence, reduced across programs and inputs. A
// diverging input vector contributes its prefix and then diverges.
inline std::set<DVState> oracle_vector_green(const Rtg& g, const std::string& n, size_t depth,
                                             const std::set<DVState>& inputs,
                                             const DomainConfig& cfg) {
  require_valid(g);
  for (const auto& v : grammar_vars(g, n))
    if (!cfg.tracks(v)) throw InputError("grammar variable '" + v + "' is not tracked");
  for (const auto& v : inputs)
    if (v.entries.size() > cfg.caps.max_vector_len)
      throw InputError("input vector exceeds max_vector_len");
  std::set<DVState> acc;
  for (const auto& c : enumerate_terms(g, n, depth, cfg.caps.max_enum_terms)) {
    for (const auto& v : inputs) {
      DVState u;
      bool diverged = false;
      for (const auto& s : v.entries) {
        auto r = eval_green(c, s, cfg);
        if (!r) {
          diverged = true;
          break;
        }
        u.entries.push_back(*r);
      }
      u.diverges = diverged || v.diverges;  // a diverging input's tail stays unknown
      acc.insert(std::move(u));
    }
  }
  return reduce(acc);
}

}  // namespace setsem
