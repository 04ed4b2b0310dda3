#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "setsem/concrete.hpp"
#include "setsem/domain.hpp"
#include "setsem/grammar.hpp"

namespace setsem {

// Demand-driven evaluation of the compositional state-set equations, valid
// exactly for grammars that cannot reach a while. Entries are keyed by
// (nonterminal, input state); grammars may still be recursive (E ::= 0|E+2),
// so answers grow monotonically under a worklist until quiescent.
class AgnosticEngine {
 public:
  AgnosticEngine(const Rtg& g, const DomainConfig& cfg) : g_(g), cfg_(cfg) {
    require_valid(g);
    nonempty_ = nonempty_nonterminals(g);
  }

  // Least solution of the equation system on each input state, unioned.
  std::set<State> eval(const std::string& n, const std::set<State>& inputs) {
    std::string where;
    if (while_reachable(g_, n, &where))
      throw LoopDetected("the state-set engine does not support loops; reachable production: " +
                         where);
    for (const auto& v : grammar_vars(g_, n))
      if (!cfg_.tracks(v)) throw InputError("grammar variable '" + v + "' is not tracked");
    std::set<State> out;
    for (const auto& s : inputs) {
      Key k{n, s};
      demand(k, nullptr);
      run();
      for (const auto& r : table_.at(k).answers) out.insert(r);
    }
    return out;
  }

  size_t table_entries() const { return table_.size(); }
  size_t recomputations() const { return recomputes_; }

 private:
  using Key = std::pair<std::string, State>;

  struct Entry {
    std::set<State> answers;
    std::set<Key> dependents;
    bool queued = false;
  };

  const std::set<State>& demand(const Key& k, const Key* reader) {
    auto it = table_.find(k);
    if (it == table_.end()) {
      if (table_.size() >= cfg_.caps.max_table_entries)
        throw ResourceLimit("state-set table exceeded max_table_entries");
      it = table_.emplace(k, Entry{}).first;
      enqueue(k);
    }
    if (reader) it->second.dependents.insert(*reader);
    return it->second.answers;
  }

  void enqueue(const Key& k) {
    Entry& e = table_.at(k);
    if (!e.queued) {
      e.queued = true;
      worklist_.push_back(k);
    }
  }

  void run() {
    while (!worklist_.empty()) {
      Key k = worklist_.front();
      worklist_.pop_front();
      table_.at(k).queued = false;
      ++recomputes_;
      std::set<State> fresh = recompute(k);
      Entry& e = table_.at(k);
      size_t before = e.answers.size();
      e.answers.insert(fresh.begin(), fresh.end());
      if (e.answers.size() != before)
        for (const auto& d : e.dependents) enqueue(d);
    }
  }

  std::set<State> recompute(const Key& k) {
    std::set<State> out;
    for (const auto* p : g_.prods_of(k.first)) {
      if (!template_nonempty(p->rhs, nonempty_)) continue;
      auto r = eval_template(p->rhs, k.second, k);
      out.insert(r.begin(), r.end());
    }
    return out;
  }

  // The state-set equations over one production template. Binary operators
  // and the guard-set case split mix programs; that is the point of this
  // semantics.
  std::set<State> eval_template(const TermPtr& t, const State& s, const Key& reader) {
    switch (t->op()) {
      case Op::Hole:
        return demand({t->name(), s}, &reader);
      case Op::Zero: return {s.with_et(cfg_.clamp(0))};
      case Op::One: return {s.with_et(cfg_.clamp(1))};
      case Op::VarRef: return {s.with_et(s.var(cfg_.var_index(t->name())))};
      case Op::True: return {s.with_bt(true)};
      case Op::False: return {s.with_bt(false)};
      case Op::Not: {
        std::set<State> out;
        for (const auto& b : eval_template(t->kid(0), s, reader)) out.insert(s.with_bt(!b.bt()));
        return out;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Lt:
      case Op::Eq:
      case Op::And: {
        std::set<State> out;
        auto xs = eval_template(t->kid(0), s, reader);
        auto ys = eval_template(t->kid(1), s, reader);
        for (const auto& a : xs)
          for (const auto& b : ys) out.insert(apply_binop(t->op(), s, a, b));
        return out;
      }
      case Op::Assign: {
        std::set<State> out;
        size_t xi = cfg_.var_index(t->name());
        for (const auto& e : eval_template(t->kid(0), s, reader))
          out.insert(s.with_var(xi, e.et()));
        return out;
      }
      case Op::Seq: {
        std::set<State> out;
        for (const auto& mid : eval_template(t->kid(0), s, reader)) {
          auto r = eval_template(t->kid(1), mid, reader);
          out.insert(r.begin(), r.end());
        }
        return out;
      }
      case Op::If: {
        auto gs = eval_template(t->kid(0), s, reader);
        bool saw_t = false, saw_f = false;
        for (const auto& b : gs) (b.bt() ? saw_t : saw_f) = true;
        std::set<State> out;
        if (saw_t) {
          auto r = eval_template(t->kid(1), s, reader);
          out.insert(r.begin(), r.end());
        }
        if (saw_f) {
          auto r = eval_template(t->kid(2), s, reader);
          out.insert(r.begin(), r.end());
        }
        return out;
      }
      case Op::While:
        throw LoopDetected("while reached inside the state-set engine");
    }
    throw InputError("unreachable");
  }

  State apply_binop(Op op, const State& base, const State& a, const State& b) {
    switch (op) {
      case Op::Add: return base.with_et(cfg_.clamp((long long)a.et() + b.et()));
      case Op::Sub: return base.with_et(cfg_.clamp((long long)a.et() - b.et()));
      case Op::Lt: return base.with_bt(a.et() < b.et());
      case Op::Eq: return base.with_bt(a.et() == b.et());
      default: return base.with_bt(a.bt() && b.bt());
    }
  }

  const Rtg& g_;
  const DomainConfig& cfg_;
  std::set<std::string> nonempty_;
  std::map<Key, Entry> table_;
  std::deque<Key> worklist_;
  size_t recomputes_ = 0;
};

inline std::set<State> eval_agnostic_compositional(const Rtg& g, const std::string& n,
                                                   const std::set<State>& inputs,
                                                   const DomainConfig& cfg) {
  return AgnosticEngine(g, cfg).eval(n, inputs);
}

// The counterexample machinery: two guard sets with identical state-set
// semantics whose loops differ, showing the state-set semantics of a loop is
// not a function of its parts' state-set semantics.
struct NoncompositionalityReport {
  bool guards_agree_everywhere = false;
  std::set<State> w1_outputs;
  std::set<State> w2_outputs;
  bool loops_differ = false;
};

inline Rtg guard_pair_grammar(int k) {
  // B ::= x == k | !(x == k)
  std::string numeral_k = pretty(numeral(k));
  return parse_grammar("nonterm B : BExp;\nstart B;\nB ::= x == " + numeral_k + " | !(x == " +
                       numeral_k + ");\n");
}

inline Rtg guarded_loop_grammar(int k) {
  std::string numeral_k = pretty(numeral(k));
  return parse_grammar(
      "nonterm W : Stmt;\nnonterm B : BExp;\nstart W;\n"
      "W ::= while <B> do { x := x + 1 };\n"
      "B ::= x == " + numeral_k + " | !(x == " + numeral_k + ");\n");
}

inline NoncompositionalityReport noncompositionality_witness(const DomainConfig& cfg) {
  NoncompositionalityReport rep;
  Rtg b1 = guard_pair_grammar(1), b2 = guard_pair_grammar(2);
  rep.guards_agree_everywhere = true;
  for (const auto& s : enumerate_states(cfg, {"x"})) {
    auto r1 = oracle_agnostic(b1, "B", 8, {s}, AgMode::Yellow, cfg);
    auto r2 = oracle_agnostic(b2, "B", 8, {s}, AgMode::Yellow, cfg);
    if (r1.states != r2.states) {
      rep.guards_agree_everywhere = false;
      break;
    }
  }
  Rtg w1 = guarded_loop_grammar(1), w2 = guarded_loop_grammar(2);
  std::set<State> x0;
  for (const auto& s : enumerate_states(cfg, {"x"}))
    if (s.var(cfg.var_index("x")) == 0) x0.insert(s);
  rep.w1_outputs = oracle_agnostic(w1, "W", 10, x0, AgMode::Yellow, cfg).states;
  rep.w2_outputs = oracle_agnostic(w2, "W", 10, x0, AgMode::Yellow, cfg).states;
  rep.loops_differ = rep.w1_outputs != rep.w2_outputs;
  return rep;
}

}  // namespace setsem
