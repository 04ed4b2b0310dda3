#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "setsem/concrete.hpp"
#include "setsem/domain.hpp"
#include "setsem/grammar.hpp"

namespace setsem {

// Subsequence of v at the indices where vb's b_t is true.
inline VState filter_vstate(const VState& v, const VState& vb) {
  if (v.size() != vb.size()) throw InputError("filter: length mismatch");
  VState out;
  for (size_t i = 0; i < v.size(); ++i)
    if (vb[i].bt()) out.push_back(v[i]);
  return out;
}

inline VState negate_pattern(const VState& vb) {
  VState out;
  out.reserve(vb.size());
  for (const auto& s : vb) out.push_back(s.with_bt(!s.bt()));
  return out;
}

// Merges u1 and u2 following vb: position i takes the next entry of u1 when
// vb[i] is true, of u2 otherwise.
inline VState interleave_vstate(const VState& u1, const VState& u2, const VState& vb) {
  if (vb.size() != u1.size() + u2.size()) throw InputError("interleave: length mismatch");
  VState out;
  out.reserve(vb.size());
  size_t i1 = 0, i2 = 0;
  for (const auto& b : vb) out.push_back(b.bt() ? u1[i1++] : u2[i2++]);
  return out;
}

// ---------------------------------------------------------------------------
// The compositional vector-state engine (divergence-agnostic). Queries are
// (nonterminal, vector) pairs resolved by a demand-driven worklist; while
// productions run a trace search against the guard's and body's denotations.
// ---------------------------------------------------------------------------

class VectorEngine {
 public:
  VectorEngine(const Rtg& g, const DomainConfig& cfg) : g_(g), cfg_(cfg) {
    require_valid(g);
    nonempty_ = nonempty_nonterminals(g);
  }

  std::set<VState> eval(const std::string& n, const std::set<VState>& inputs) {
    check_query(n);
    std::set<VState> out;
    for (const auto& v : inputs) {
      if (v.size() > cfg_.caps.max_vector_len)
        throw InputError("input vector exceeds max_vector_len");
      Key k{n, v};
      demand(k, nullptr);
      run();
      const auto& ans = table_.at(k).answers;
      out.insert(ans.begin(), ans.end());
    }
    return out;
  }

  size_t table_entries() const { return table_.size(); }
  size_t recomputations() const { return recomputes_; }
  size_t traces_explored() const { return traces_; }

 private:
  using Key = std::pair<std::string, VState>;

  struct Entry {
    std::set<VState> answers;
    std::set<Key> dependents;
    bool queued = false;
  };

  void check_query(const std::string& n) {
    if (!g_.declared(n)) throw InputError("undeclared nonterminal '" + n + "'");
    for (const auto& v : grammar_vars(g_, n))
      if (!cfg_.tracks(v)) throw InputError("grammar variable '" + v + "' is not tracked");
  }

  const std::set<VState>& demand(const Key& k, const Key* reader) {
    auto it = table_.find(k);
    if (it == table_.end()) {
      if (table_.size() >= cfg_.caps.max_table_entries)
        throw ResourceLimit("vector table exceeded max_table_entries");
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
      Key k = std::move(worklist_.front());
      worklist_.pop_front();
      table_.at(k).queued = false;
      ++recomputes_;
      std::set<VState> fresh = recompute(k);
      Entry& e = table_.at(k);
      size_t before = e.answers.size();
      e.answers.insert(fresh.begin(), fresh.end());
      if (e.answers.size() != before)
        for (const auto& d : e.dependents) enqueue(d);
    }
  }

  std::set<VState> recompute(const Key& k) {
    std::set<VState> out;
    for (const auto* p : g_.prods_of(k.first)) {
      if (!template_nonempty(p->rhs, nonempty_)) continue;
      auto r = eval_template(p->rhs, k.second, k);
      out.insert(r.begin(), r.end());
    }
    return out;
  }

  // Entrywise slot write on a copy of the base vector.
  template <typename F>
  static VState map_entries(const VState& base, F&& f) {
    VState out;
    out.reserve(base.size());
    for (size_t i = 0; i < base.size(); ++i) out.push_back(f(base[i], i));
    return out;
  }

  std::set<VState> eval_template(const TermPtr& t, const VState& v, const Key& reader) {
    switch (t->op()) {
      case Op::Hole:
        return demand({t->name(), v}, &reader);
      case Op::Zero:
        return {map_entries(v, [&](const State& s, size_t) { return s.with_et(cfg_.clamp(0)); })};
      case Op::One:
        return {map_entries(v, [&](const State& s, size_t) { return s.with_et(cfg_.clamp(1)); })};
      case Op::VarRef: {
        size_t xi = cfg_.var_index(t->name());
        return {map_entries(v, [&](const State& s, size_t) { return s.with_et(s.var(xi)); })};
      }
      case Op::True:
        return {map_entries(v, [&](const State& s, size_t) { return s.with_bt(true); })};
      case Op::False:
        return {map_entries(v, [&](const State& s, size_t) { return s.with_bt(false); })};
      case Op::Not: {
        std::set<VState> out;
        for (const auto& wb : eval_template(t->kid(0), v, reader))
          out.insert(map_entries(v, [&](const State& s, size_t i) { return s.with_bt(!wb[i].bt()); }));
        return out;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Lt:
      case Op::Eq:
      case Op::And: {
        auto xs = eval_template(t->kid(0), v, reader);
        auto ys = eval_template(t->kid(1), v, reader);
        std::set<VState> out;
        for (const auto& a : xs)
          for (const auto& b : ys) out.insert(apply_binop(t->op(), v, a, b));
        return out;
      }
      case Op::Assign: {
        size_t xi = cfg_.var_index(t->name());
        std::set<VState> out;
        for (const auto& we : eval_template(t->kid(0), v, reader))
          out.insert(
              map_entries(v, [&](const State& s, size_t i) { return s.with_var(xi, we[i].et()); }));
        return out;
      }
      case Op::Seq: {
        std::set<VState> out;
        for (const auto& mid : eval_template(t->kid(0), v, reader)) {
          auto r = eval_template(t->kid(1), mid, reader);
          out.insert(r.begin(), r.end());
        }
        return out;
      }
      case Op::If: {
        std::set<VState> out;
        for (const auto& wb : eval_template(t->kid(0), v, reader)) {
          VState v1 = filter_vstate(v, wb);
          VState v2 = filter_vstate(v, negate_pattern(wb));
          auto r1 = eval_template(t->kid(1), v1, reader);
          auto r2 = eval_template(t->kid(2), v2, reader);
          for (const auto& u1 : r1)
            for (const auto& u2 : r2) out.insert(interleave_vstate(u1, u2, wb));
        }
        return out;
      }
      case Op::While:
        return f_while(t->kid(0), t->kid(1), v, reader);
    }
    throw InputError("unreachable");
  }

  VState apply_binop(Op op, const VState& base, const VState& a, const VState& b) {
    return map_entries(base, [&](const State& s, size_t i) {
      switch (op) {
        case Op::Add: return s.with_et(cfg_.clamp((long long)a[i].et() + b[i].et()));
        case Op::Sub: return s.with_et(cfg_.clamp((long long)a[i].et() - b[i].et()));
        case Op::Lt: return s.with_bt(a[i].et() < b[i].et());
        case Op::Eq: return s.with_bt(a[i].et() == b[i].et());
        default: return s.with_bt(a[i].bt() && b[i].bt());
      }
    });
  }

  // -------------------------------------------------------------------------
  // f_while: searches for per-entry traces realizable by one guard (pattern
  // query) and one body (transition query), concatenated across entries.
  // Extensions come from the body's answer set, so only realizable prefixes
  // are visited; a repeated state within a segment cannot be part of a
  // converging trace of a deterministic body and is cut off.
  // -------------------------------------------------------------------------

  struct WhileNode {
    std::vector<VState> closed;  // full trace per closed segment
    VState finals;               // final state per closed segment
    VState cur;                  // current segment's trace, starts [v_seg]
    VState sources, targets;     // accumulated body-transition query
  };

  std::set<VState> f_while(const TermPtr& bnode, const TermPtr& snode, const VState& v,
                           const Key& reader) {
    std::set<VState> out;
    // Nonempty guard and body languages are required for any output at all,
    // including the empty input vector.
    if (!template_nonempty(bnode, nonempty_) || !template_nonempty(snode, nonempty_)) return out;
    if (v.empty()) {
      bool b_ok = eval_template(bnode, {}, reader).count(VState{}) > 0;
      bool s_ok = eval_template(snode, {}, reader).count(VState{}) > 0;
      if (b_ok && s_ok) out.insert(VState{});
      return out;
    }

    size_t trace_cap = cfg_.trace_cap();
    std::deque<WhileNode> work;
    work.push_back(WhileNode{{}, {}, {v[0]}, {}, {}});
    while (!work.empty()) {
      WhileNode node = std::move(work.front());
      work.pop_front();
      ++traces_;

      // Close the current segment here: its last state is the final one, so
      // the guard must admit true on every earlier trace state and false on
      // every final, across all segments closed so far.
      if (guard_admits(bnode, node, /*closing=*/true, reader)) {
        if (node.closed.size() + 1 == v.size()) {
          VState result = node.finals;
          result.push_back(node.cur.back());
          if (body_final_ok(snode, node, reader)) out.insert(std::move(result));
        } else {
          WhileNode next;
          next.closed = node.closed;
          next.closed.push_back(node.cur);
          next.finals = node.finals;
          next.finals.push_back(node.cur.back());
          next.cur = {v[node.closed.size() + 1]};
          next.sources = node.sources;
          next.targets = node.targets;
          work.push_back(std::move(next));
        }
      }

      // Extend the current segment: candidates are the last entries of body
      // answers that agree with every transition accumulated so far.
      if (node.cur.size() >= trace_cap)
        throw ResourceLimit("f_while: trace length cap exceeded on " + show(cfg_, v));
      if (!guard_admits(bnode, node, /*closing=*/false, reader)) continue;
      VState q = node.sources;
      q.push_back(node.cur.back());
      for (const auto& w : eval_template(snode, q, reader)) {
        if (!std::equal(node.targets.begin(), node.targets.end(), w.begin())) continue;
        const State& next_state = w.back();
        bool dup = false;
        for (const auto& s : node.cur)
          if (s == next_state) {
            dup = true;
            break;
          }
        if (dup) continue;
        WhileNode next;
        next.closed = node.closed;
        next.finals = node.finals;
        next.cur = node.cur;
        next.cur.push_back(next_state);
        next.sources = q;
        next.targets = node.targets;
        next.targets.push_back(next_state);
        work.push_back(std::move(next));
      }
    }
    return out;
  }

  // Does some guard vector match: true on all non-final trace states, false
  // on all finals; the current segment's last state is final iff `closing`.
  bool guard_admits(const TermPtr& bnode, const WhileNode& node, bool closing, const Key& reader) {
    VState q;
    std::vector<int> pattern;  // 1 true, 0 false
    for (const auto& tr : node.closed) {
      for (size_t i = 0; i < tr.size(); ++i) {
        q.push_back(tr[i]);
        pattern.push_back(i + 1 < tr.size() ? 1 : 0);
      }
    }
    for (size_t i = 0; i < node.cur.size(); ++i) {
      q.push_back(node.cur[i]);
      if (i + 1 < node.cur.size())
        pattern.push_back(1);
      else
        pattern.push_back(closing ? 0 : 1);
    }
    for (const auto& wb : eval_template(bnode, q, reader)) {
      bool ok = true;
      for (size_t i = 0; i < pattern.size() && ok; ++i) {
        if (pattern[i] == 1 && !wb[i].bt()) ok = false;
        if (pattern[i] == 0 && wb[i].bt()) ok = false;
      }
      if (ok) return true;
    }
    return false;
  }

  // All transitions were validated incrementally as the query grew, except
  // when no segment ever iterated: then the body's language just needs to be
  // inhabited, witnessed by the empty-vector query.
  bool body_final_ok(const TermPtr& snode, const WhileNode& node, const Key& reader) {
    if (!node.sources.empty()) return true;  // last extension already checked
    return eval_template(snode, {}, reader).count(VState{}) > 0;
  }

  const Rtg& g_;
  const DomainConfig& cfg_;
  std::set<std::string> nonempty_;
  std::map<Key, Entry> table_;
  std::deque<Key> worklist_;
  size_t recomputes_ = 0;
  size_t traces_ = 0;
};

inline std::set<VState> eval_vector(const Rtg& g, const std::string& n,
                                    const std::set<VState>& inputs, const DomainConfig& cfg) {
  return VectorEngine(g, cfg).eval(n, inputs);
}

}  // namespace setsem
