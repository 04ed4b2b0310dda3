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
#include "setsem/vector_agnostic.hpp"

namespace setsem {

// Output of the naive divergence lift before truncation: the marker may sit
// anywhere, not only at the end.
struct RawDVector {
  std::vector<std::optional<State>> entries;  // nullopt marks divergence

  friend bool operator<(const RawDVector& a, const RawDVector& b) { return a.entries < b.entries; }
  friend bool operator==(const RawDVector& a, const RawDVector& b) {
    return a.entries == b.entries;
  }
};

// Entrywise divergence-aware results of every enumerated program, markers
// left in place. Exists to define the aware semantics and to test against.
inline std::set<RawDVector> bad_lift(const Rtg& g, const std::string& n, size_t depth,
                                     const VState& v, const DomainConfig& cfg) {
  require_valid(g);
  for (const auto& var : grammar_vars(g, n))
    if (!cfg.tracks(var)) throw InputError("grammar variable '" + var + "' is not tracked");
  std::set<RawDVector> out;
  for (const auto& c : enumerate_terms(g, n, depth, cfg.caps.max_enum_terms)) {
    RawDVector r;
    r.entries.reserve(v.size());
    for (const auto& s : v) r.entries.push_back(eval_green(c, s, cfg));
    out.insert(std::move(r));
  }
  return out;
}

// Cuts each vector at its first divergence marker.
inline std::set<DVState> truncate(const std::set<RawDVector>& xs) {
  std::set<DVState> out;
  for (const auto& r : xs) {
    DVState d;
    for (const auto& e : r.entries) {
      if (!e.has_value()) {
        d.diverges = true;
        break;
      }
      d.entries.push_back(*e);
    }
    out.insert(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// The compositional divergence-aware vector-state engine. Structure follows
// the divergence-agnostic engine; outputs are DVStates, reduce is applied at
// every union boundary, and while productions detect divergence through
// diverging body answers and through lassos (a realizable trace revisiting a
// state with the guard true throughout).
// ---------------------------------------------------------------------------

class VectorEngineGreen {
 public:
  VectorEngineGreen(const Rtg& g, const DomainConfig& cfg) : g_(g), cfg_(cfg) {
    require_valid(g);
    nonempty_ = nonempty_nonterminals(g);
  }

  std::set<DVState> eval(const std::string& n, const std::set<DVState>& inputs) {
    check_query(n);
    std::set<DVState> out;
    for (const auto& v : inputs) {
      if (v.entries.size() > cfg_.caps.max_vector_len)
        throw InputError("input vector exceeds max_vector_len");
      Key k{n, v.entries};
      demand(k, nullptr);
      run();
      // A diverging input contributes its prefix and then stays unknown.
      for (const auto& u : table_.at(k).answers)
        out.insert(v.diverges ? append_divergence(u) : u);
    }
    return reduce(out);
  }

  size_t table_entries() const { return table_.size(); }
  size_t recomputations() const { return recomputes_; }
  size_t traces_explored() const { return traces_; }

 private:
  using Key = std::pair<std::string, VState>;

  struct Entry {
    std::set<DVState> answers;
    std::set<Key> dependents;
    bool queued = false;
  };

  static DVState append_divergence(DVState u) {
    u.diverges = true;
    return u;
  }

  void check_query(const std::string& n) {
    if (!g_.declared(n)) throw InputError("undeclared nonterminal '" + n + "'");
    for (const auto& v : grammar_vars(g_, n))
      if (!cfg_.tracks(v)) throw InputError("grammar variable '" + v + "' is not tracked");
  }

  const std::set<DVState>& demand(const Key& k, const Key* reader) {
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
      std::set<DVState> fresh = recompute(k);
      Entry& e = table_.at(k);
      size_t before = e.answers.size();
      e.answers.insert(fresh.begin(), fresh.end());
      if (e.answers.size() != before)
        for (const auto& d : e.dependents) enqueue(d);
    }
  }

  std::set<DVState> recompute(const Key& k) {
    std::set<DVState> out;
    for (const auto* p : g_.prods_of(k.first)) {
      if (!template_nonempty(p->rhs, nonempty_)) continue;
      auto r = eval_template(p->rhs, DVState{k.second, false}, k);
      out.insert(r.begin(), r.end());
    }
    return reduce(out);
  }

  template <typename F>
  static VState map_entries(const VState& base, F&& f) {
    VState out;
    out.reserve(base.size());
    for (size_t i = 0; i < base.size(); ++i) out.push_back(f(base[i], i));
    return out;
  }

  // Full-length, divergence-free answers (guards and integer expressions
  // cannot diverge; their children are expression sorts by construction).
  std::set<VState> eval_expr(const TermPtr& t, const VState& v, const Key& reader) {
    std::set<VState> out;
    for (const auto& d : eval_template(t, DVState{v, false}, reader)) {
      if (d.diverges || d.entries.size() != v.size())
        throw InputError("expression produced a diverging vector");
      out.insert(d.entries);
    }
    return out;
  }

  std::set<DVState> eval_template(const TermPtr& t, const DVState& dvin, const Key& reader) {
    if (dvin.diverges) {
      // Evaluate the known prefix; everything after it stays unknown.
      std::set<DVState> out;
      for (const auto& u : eval_template(t, DVState{dvin.entries, false}, reader))
        out.insert(append_divergence(u));
      return reduce(out);
    }
    const VState& v = dvin.entries;
    switch (t->op()) {
      case Op::Hole:
        return demand({t->name(), v}, &reader);
      case Op::Zero:
        return wrap({map_entries(v, [&](const State& s, size_t) { return s.with_et(cfg_.clamp(0)); })});
      case Op::One:
        return wrap({map_entries(v, [&](const State& s, size_t) { return s.with_et(cfg_.clamp(1)); })});
      case Op::VarRef: {
        size_t xi = cfg_.var_index(t->name());
        return wrap({map_entries(v, [&](const State& s, size_t) { return s.with_et(s.var(xi)); })});
      }
      case Op::True:
        return wrap({map_entries(v, [&](const State& s, size_t) { return s.with_bt(true); })});
      case Op::False:
        return wrap({map_entries(v, [&](const State& s, size_t) { return s.with_bt(false); })});
      case Op::Not: {
        std::set<DVState> out;
        for (const auto& wb : eval_expr(t->kid(0), v, reader))
          out.insert(
              DVState{map_entries(v, [&](const State& s, size_t i) { return s.with_bt(!wb[i].bt()); }),
                      false});
        return out;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Lt:
      case Op::Eq:
      case Op::And: {
        auto xs = eval_expr(t->kid(0), v, reader);
        auto ys = eval_expr(t->kid(1), v, reader);
        std::set<DVState> out;
        for (const auto& a : xs)
          for (const auto& b : ys) out.insert(DVState{apply_binop(t->op(), v, a, b), false});
        return out;
      }
      case Op::Assign: {
        size_t xi = cfg_.var_index(t->name());
        std::set<DVState> out;
        for (const auto& we : eval_expr(t->kid(0), v, reader))
          out.insert(DVState{
              map_entries(v, [&](const State& s, size_t i) { return s.with_var(xi, we[i].et()); }),
              false});
        return out;
      }
      case Op::Seq: {
        std::set<DVState> out;
        for (const auto& mid : eval_template(t->kid(0), dvin, reader)) {
          auto r = eval_template(t->kid(1), mid, reader);
          out.insert(r.begin(), r.end());
        }
        return reduce(out);
      }
      case Op::If: {
        std::set<DVState> out;
        for (const auto& wb : eval_expr(t->kid(0), v, reader)) {
          VState v1 = filter_vstate(v, wb);
          VState v2 = filter_vstate(v, negate_pattern(wb));
          auto r1 = eval_template(t->kid(1), DVState{v1, false}, reader);
          auto r2 = eval_template(t->kid(2), DVState{v2, false}, reader);
          for (const auto& u1 : r1)
            for (const auto& u2 : r2) out.insert(interleave_green(u1, u2, wb));
        }
        return reduce(out);
      }
      case Op::While:
        return f_while_green(t->kid(0), t->kid(1), v, reader);
    }
    throw InputError("unreachable");
  }

  static std::set<DVState> wrap(std::initializer_list<VState> vs) {
    std::set<DVState> out;
    for (const auto& v : vs) out.insert(DVState{v, false});
    return out;
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

  // Merge branch outputs following the guard pattern, stopping at the first
  // entry that falls beyond a diverging branch's prefix.
  static DVState interleave_green(const DVState& u1, const DVState& u2, const VState& vb) {
    DVState out;
    size_t i1 = 0, i2 = 0;
    for (const auto& b : vb) {
      const DVState& src = b.bt() ? u1 : u2;
      size_t& idx = b.bt() ? i1 : i2;
      if (idx >= src.entries.size()) {
        if (src.diverges) {
          out.diverges = true;
          return out;
        }
        throw InputError("interleave: length mismatch");
      }
      out.entries.push_back(src.entries[idx++]);
    }
    out.diverges = u1.diverges || u2.diverges;
    return out;
  }

  // Variables the guard and body can read or write, via the grammar for
  // nonterminal references.
  std::set<std::string> template_vars(const TermPtr& t) {
    std::set<std::string> out;
    auto scan = [&](const TermPtr& n, auto&& self) -> void {
      if (n->op() == Op::Hole) {
        for (const auto& v : grammar_vars(g_, n->name())) out.insert(v);
        return;
      }
      if (n->op() == Op::VarRef || n->op() == Op::Assign) out.insert(n->name());
      for (const auto& k : n->kids()) self(k, self);
    };
    scan(t, scan);
    return out;
  }

  struct GreenNode {
    VState finals;            // finals of closed segments
    size_t seg = 0;           // current segment index
    VState cur;               // current segment trace
    VState sources, targets;  // accumulated body transitions
  };

  // The divergence-aware while operator. Guard behaviors are read off one
  // query on an enumeration of the states over the guard/body variables;
  // under a fixed behavior the trace search follows body answers, emitting a
  // diverging output when a body answer diverges at the frontier or when the
  // trace revisits a state (the guard is true on the whole cycle, so some
  // loop in the set runs forever).
  std::set<DVState> f_while_green(const TermPtr& bnode, const TermPtr& snode, const VState& v,
                                  const Key& reader) {
    std::set<DVState> out;
    if (!template_nonempty(bnode, nonempty_) || !template_nonempty(snode, nonempty_)) return out;
    bool body_inhabited =
        eval_template(snode, DVState{}, reader).count(DVState{}) > 0;
    bool guard_inhabited =
        eval_template(bnode, DVState{}, reader).count(DVState{}) > 0;
    if (!body_inhabited || !guard_inhabited) return out;
    if (v.empty()) {
      out.insert(DVState{});
      return out;
    }

    std::set<std::string> vp = template_vars(bnode);
    for (const auto& x : template_vars(snode)) vp.insert(x);
    VState x_enum = enumerate_h_states(cfg_, vp);
    std::map<std::vector<int>, size_t> h_index;
    for (size_t i = 0; i < x_enum.size(); ++i) h_index[project(x_enum[i], vp)] = i;

    size_t trace_cap = cfg_.trace_cap();
    for (const auto& wb : eval_expr(bnode, x_enum, reader)) {
      auto pred = [&](const State& s) { return wb[h_index.at(project(s, vp))].bt(); };
      std::deque<GreenNode> work;
      work.push_back(GreenNode{{}, 0, {v[0]}, {}, {}});
      while (!work.empty()) {
        GreenNode node = std::move(work.front());
        work.pop_front();
        ++traces_;
        const State& tip = node.cur.back();
        if (!pred(tip)) {
          // Guard false: the segment converges here.
          if (node.seg + 1 == v.size()) {
            VState result = node.finals;
            result.push_back(tip);
            out.insert(DVState{std::move(result), false});
          } else {
            GreenNode next;
            next.finals = node.finals;
            next.finals.push_back(tip);
            next.seg = node.seg + 1;
            next.cur = {v[next.seg]};
            next.sources = node.sources;
            next.targets = node.targets;
            work.push_back(std::move(next));
          }
          continue;
        }
        // Guard true: one more body step.
        if (node.cur.size() >= trace_cap)
          throw ResourceLimit("f_while: trace length cap exceeded on " + show(cfg_, v));
        VState q = node.sources;
        q.push_back(tip);
        for (const auto& a : eval_template(snode, DVState{q, false}, reader)) {
          if (a.diverges) {
            // Relevant only when the divergence sits exactly at the frontier;
            // earlier divergences were emitted at their own prefixes and
            // occlude anything from this branch.
            if (a.entries == node.targets) out.insert(DVState{node.finals, true});
            continue;
          }
          if (!std::equal(node.targets.begin(), node.targets.end(), a.entries.begin())) continue;
          const State& nxt = a.entries.back();
          bool lasso = false;
          for (const auto& s : node.cur)
            if (s == nxt) {
              lasso = true;
              break;
            }
          if (lasso) {
            out.insert(DVState{node.finals, true});
            continue;
          }
          GreenNode next;
          next.finals = node.finals;
          next.seg = node.seg;
          next.cur = node.cur;
          next.cur.push_back(nxt);
          next.sources = q;
          next.targets = node.targets;
          next.targets.push_back(nxt);
          work.push_back(std::move(next));
        }
      }
    }
    return reduce(out);
  }

  std::vector<int> project(const State& s, const std::set<std::string>& vp) {
    std::vector<int> key;
    key.reserve(vp.size());
    for (const auto& x : vp) key.push_back(s.var(cfg_.var_index(x)));
    return key;
  }

  const Rtg& g_;
  const DomainConfig& cfg_;
  std::set<std::string> nonempty_;
  std::map<Key, Entry> table_;
  std::deque<Key> worklist_;
  size_t recomputes_ = 0;
  size_t traces_ = 0;
};

inline std::set<DVState> eval_vector_green(const Rtg& g, const std::string& n,
                                           const std::set<DVState>& inputs,
                                           const DomainConfig& cfg) {
  return VectorEngineGreen(g, cfg).eval(n, inputs);
}

}  // namespace setsem
