#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "setsem/concrete.hpp"
#include "setsem/domain.hpp"
#include "setsem/grammar.hpp"
#include "setsem/loopfree.hpp"
#include "setsem/vector_agnostic.hpp"
#include "setsem/vector_aware.hpp"

namespace setsem {

// ---------------------------------------------------------------------------
// State formulas: comparisons over variables/e_t and constants, parity,
// b_t tests, Boolean connectives. Text form: "x == 0", "x % 2 == 0",
// "b_t == t", "x < 3 && !(y == x)".
// ---------------------------------------------------------------------------

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum Kind { And, Or, Not, Cmp, Parity, BtIs, Const } kind;
  // Cmp: lhs op rhs where an operand is a variable name, "e_t", or a constant
  std::string lhs, rhs;  // operands (Cmp), or variable (Parity)
  long long k = 0, r = 0;  // Parity: lhs % k == r
  std::string op;          // "==", "!=", "<", "<="
  bool value = false;      // BtIs / Const
  std::vector<FormulaPtr> kids;
};

namespace detail {

inline bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

class FormulaParser {
 public:
  explicit FormulaParser(const std::string& src) : src_(src) {}

  FormulaPtr parse() {
    auto f = disj();
    skip();
    if (i_ < src_.size()) throw ParseError("trailing input in formula", i_);
    return f;
  }

 private:
  void skip() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
  }
  bool lit(const char* s) {
    skip();
    size_t n = std::string(s).size();
    if (src_.compare(i_, n, s) != 0) return false;
    i_ += n;
    return true;
  }
  std::string word() {
    skip();
    size_t j = i_;
    if (j < src_.size() && (src_[j] == '-')) ++j;
    while (j < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
      ++j;
    if (j == i_) throw ParseError("expected an operand in formula", i_);
    std::string w = src_.substr(i_, j - i_);
    i_ = j;
    return w;
  }

  FormulaPtr disj() {
    auto f = conj();
    while (lit("||")) {
      auto g = conj();
      auto h = std::make_shared<Formula>();
      h->kind = Formula::Or;
      h->kids = {f, g};
      f = h;
    }
    return f;
  }

  FormulaPtr conj() {
    auto f = atom();
    while (true) {
      skip();
      if (src_.compare(i_, 2, "&&") == 0) {
        i_ += 2;
        auto g = atom();
        auto h = std::make_shared<Formula>();
        h->kind = Formula::And;
        h->kids = {f, g};
        f = h;
      } else {
        return f;
      }
    }
  }

  FormulaPtr atom() {
    skip();
    if (lit("!")) {
      auto h = std::make_shared<Formula>();
      h->kind = Formula::Not;
      h->kids = {atom()};
      return h;
    }
    if (lit("(")) {
      auto f = disj();
      if (!lit(")")) throw ParseError("expected ')' in formula", i_);
      return f;
    }
    size_t save = i_;
    std::string w = word();
    if (w == "true" || w == "false") {
      auto h = std::make_shared<Formula>();
      h->kind = Formula::Const;
      h->value = w == "true";
      return h;
    }
    if (w == "b_t") {
      if (!lit("==")) throw ParseError("expected '==' after b_t", i_);
      std::string rhs = word();
      if (rhs != "t" && rhs != "f") throw ParseError("b_t compares against t or f", i_);
      auto h = std::make_shared<Formula>();
      h->kind = Formula::BtIs;
      h->value = rhs == "t";
      return h;
    }
    // parity: VAR % K == R
    skip();
    if (i_ < src_.size() && src_[i_] == '%') {
      ++i_;
      std::string ks = word();
      if (!lit("==")) throw ParseError("expected '==' in parity formula", i_);
      std::string rs = word();
      if (!is_integer(ks) || !is_integer(rs))
        throw ParseError("parity formula needs integer modulus and remainder", i_);
      auto h = std::make_shared<Formula>();
      h->kind = Formula::Parity;
      h->lhs = w;
      h->k = std::stoll(ks);
      h->r = std::stoll(rs);
      if (h->k <= 0) throw ParseError("parity modulus must be positive", i_);
      return h;
    }
    // comparison: OPND op OPND
    const char* ops[] = {"==", "!=", "<=", "<"};
    for (const char* op : ops) {
      size_t save2 = i_;
      skip();
      if (src_.compare(i_, std::string(op).size(), op) == 0) {
        i_ += std::string(op).size();
        std::string rhs = word();
        auto h = std::make_shared<Formula>();
        h->kind = Formula::Cmp;
        h->lhs = w;
        h->rhs = rhs;
        h->op = op;
        return h;
      }
      i_ = save2;
    }
    i_ = save;
    throw ParseError("expected a comparison operator in formula", i_);
  }

  const std::string& src_;
  size_t i_ = 0;
};

}  // namespace detail

inline FormulaPtr parse_formula(const std::string& src) {
  return detail::FormulaParser(src).parse();
}

inline long long formula_operand(const std::string& w, const DomainConfig& cfg, const State& s) {
  if (w == "e_t") return s.et();
  if (detail::is_integer(w)) return std::stoll(w);
  return s.var(cfg.var_index(w));
}

inline bool eval_formula(const FormulaPtr& f, const DomainConfig& cfg, const State& s) {
  switch (f->kind) {
    case Formula::And: return eval_formula(f->kids[0], cfg, s) && eval_formula(f->kids[1], cfg, s);
    case Formula::Or: return eval_formula(f->kids[0], cfg, s) || eval_formula(f->kids[1], cfg, s);
    case Formula::Not: return !eval_formula(f->kids[0], cfg, s);
    case Formula::Const: return f->value;
    case Formula::BtIs: return s.bt() == f->value;
    case Formula::Parity: {
      long long v = formula_operand(f->lhs, cfg, s);
      long long m = ((v % f->k) + f->k) % f->k;
      return m == f->r;
    }
    case Formula::Cmp: {
      long long a = formula_operand(f->lhs, cfg, s);
      long long b = formula_operand(f->rhs, cfg, s);
      if (f->op == "==") return a == b;
      if (f->op == "!=") return a != b;
      if (f->op == "<") return a < b;
      return a <= b;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Predicates over (vector-)states: an explicit extension or a pointwise
// formula with an optional exact length.
// ---------------------------------------------------------------------------

struct Pred {
  std::optional<std::set<DVState>> explicit_set;
  FormulaPtr formula;
  std::optional<size_t> length;  // pointwise only: pin the vector length

  static Pred make_explicit(std::set<DVState> xs) {
    Pred p;
    p.explicit_set = std::move(xs);
    return p;
  }
  static Pred pointwise(const std::string& text, std::optional<size_t> len = std::nullopt) {
    Pred p;
    p.formula = parse_formula(text);
    p.length = len;
    return p;
  }

  bool is_explicit() const { return explicit_set.has_value(); }
};

// Extension of the predicate over the finite domain, vectors up to max_len
// (or exactly the pinned length). Pointwise extensions never diverge.
inline std::set<DVState> pred_to_vectors(const Pred& p, const DomainConfig& cfg, size_t max_len) {
  if (p.is_explicit()) return *p.explicit_set;
  std::set<std::string> all(cfg.tracked_vars.begin(), cfg.tracked_vars.end());
  std::vector<State> sat;
  for (const auto& s : enumerate_states(cfg, all))
    if (eval_formula(p.formula, cfg, s)) sat.push_back(s);
  std::set<DVState> out;
  size_t lo_len = p.length ? *p.length : 0;
  size_t hi_len = p.length ? *p.length : max_len;
  if (hi_len > cfg.caps.max_vector_len)
    throw InputError("predicate expansion length exceeds max_vector_len");
  for (size_t len = lo_len; len <= hi_len; ++len) {
    // all length-len vectors over sat
    double count = 1;
    for (size_t i = 0; i < len; ++i) count *= static_cast<double>(sat.size());
    if (count > static_cast<double>(cfg.caps.max_states))
      throw ResourceLimit("predicate expansion exceeds the state cap");
    if (sat.empty()) {
      if (len == 0) out.insert(DVState{});
      continue;
    }
    std::vector<size_t> pick(len, 0);
    while (true) {
      DVState v;
      for (size_t i = 0; i < len; ++i) v.entries.push_back(sat[pick[i]]);
      out.insert(std::move(v));
      size_t i = len;
      bool done = true;
      while (i > 0) {
        --i;
        if (++pick[i] < sat.size()) {
          std::fill(pick.begin() + i + 1, pick.end(), 0);
          done = false;
          break;
        }
        pick[i] = 0;
      }
      if (done) break;
    }
  }
  return out;
}

// The predicate as a set of single states (for the state-set triple modes).
inline std::set<State> pred_to_states(const Pred& p, const DomainConfig& cfg) {
  std::set<State> out;
  if (p.is_explicit()) {
    for (const auto& v : *p.explicit_set) {
      if (v.diverges || v.entries.size() != 1)
        throw InputError("state-set triples need an explicit set of singleton vectors");
      out.insert(v.entries[0]);
    }
    return out;
  }
  std::set<std::string> all(cfg.tracked_vars.begin(), cfg.tracked_vars.end());
  for (const auto& s : enumerate_states(cfg, all))
    if (eval_formula(p.formula, cfg, s)) out.insert(s);
  return out;
}

// Does the predicate accept this output? A pointwise formula accepts a
// non-diverging vector whose every entry satisfies it; diverging outputs are
// accepted only by an explicit set that lists them.
inline bool pred_accepts(const Pred& p, const DomainConfig& cfg, const DVState& u) {
  if (p.is_explicit()) return p.explicit_set->count(u) > 0;
  if (u.diverges) return false;
  if (p.length && u.entries.size() != *p.length) return false;
  for (const auto& s : u.entries)
    if (!eval_formula(p.formula, cfg, s)) return false;
  return true;
}

inline bool pred_accepts_state(const Pred& p, const DomainConfig& cfg, const State& s) {
  if (p.is_explicit()) return p.explicit_set->count(DVState{{s}, false}) > 0;
  return eval_formula(p.formula, cfg, s);
}

inline bool pred_accepts_divergence(const Pred& p) {
  return p.is_explicit() && p.explicit_set->count(DVState{{}, true}) > 0;
}

// ---------------------------------------------------------------------------
// Unrealizability triples.
// ---------------------------------------------------------------------------

enum class TripleMode { AgnosticYellow, AgnosticGreen, VectorYellow, VectorGreen };

struct EngineChoice {
  bool compositional = true;
  size_t depth = 8;  // oracle enumeration depth
  static EngineChoice oracle(size_t d) { return EngineChoice{false, d}; }
};

struct Triple {
  Pred pre;
  Rtg grammar;
  std::string nonterminal;
  Pred post;
  TripleMode mode = TripleMode::VectorYellow;
  EngineChoice engine;
};

// Verdict of a triple check. Witnesses are reported as vectors; state-set
// modes use singleton vectors, and a divergence violation in the aware mode
// reports the bare diverging vector.
struct Verdict {
  bool holds = true;
  std::optional<DVState> witness_input;
  std::optional<DVState> witness_output;
};

inline Verdict check_triple(const Triple& t, const DomainConfig& cfg) {
  require_valid(t.grammar);
  Verdict verdict;
  switch (t.mode) {
    case TripleMode::AgnosticYellow:
    case TripleMode::AgnosticGreen: {
      bool green = t.mode == TripleMode::AgnosticGreen;
      auto inputs = pred_to_states(t.pre, cfg);
      std::optional<AgnosticEngine> engine;
      if (t.engine.compositional) engine.emplace(t.grammar, cfg);
      for (const auto& s : inputs) {
        GreenStates r;
        if (t.engine.compositional)
          r.states = engine->eval(t.nonterminal, {s});  // loop-free: divergence impossible
        else
          r = oracle_agnostic(t.grammar, t.nonterminal, t.engine.depth, {s},
                              green ? AgMode::Green : AgMode::Yellow, cfg);
        for (const auto& o : r.states) {
          if (!pred_accepts_state(t.post, cfg, o)) {
            verdict.holds = false;
            verdict.witness_input = DVState{{s}, false};
            verdict.witness_output = DVState{{o}, false};
            return verdict;
          }
        }
        if (green && r.diverges && !pred_accepts_divergence(t.post)) {
          verdict.holds = false;
          verdict.witness_input = DVState{{s}, false};
          verdict.witness_output = DVState{{}, true};
          return verdict;
        }
      }
      return verdict;
    }
    case TripleMode::VectorYellow: {
      auto inputs = pred_to_vectors(t.pre, cfg, cfg.caps.max_vector_len);
      std::optional<VectorEngine> engine;
      if (t.engine.compositional) engine.emplace(t.grammar, cfg);
      for (const auto& v : inputs) {
        if (v.diverges) throw InputError("divergence-agnostic vector triples need marker-free inputs");
        std::set<VState> outs =
            t.engine.compositional
                ? engine->eval(t.nonterminal, {v.entries})
                : oracle_vector(t.grammar, t.nonterminal, t.engine.depth, {v.entries}, cfg);
        for (const auto& o : outs) {
          if (!pred_accepts(t.post, cfg, DVState{o, false})) {
            verdict.holds = false;
            verdict.witness_input = v;
            verdict.witness_output = DVState{o, false};
            return verdict;
          }
        }
      }
      return verdict;
    }
    case TripleMode::VectorGreen: {
      auto inputs = pred_to_vectors(t.pre, cfg, cfg.caps.max_vector_len);
      std::optional<VectorEngineGreen> engine;
      if (t.engine.compositional) engine.emplace(t.grammar, cfg);
      for (const auto& v : inputs) {
        std::set<DVState> outs =
            t.engine.compositional
                ? engine->eval(t.nonterminal, {v})
                : oracle_vector_green(t.grammar, t.nonterminal, t.engine.depth, {v}, cfg);
        for (const auto& o : outs) {
          if (!pred_accepts(t.post, cfg, o)) {
            verdict.holds = false;
            verdict.witness_input = v;
            verdict.witness_output = o;
            return verdict;
          }
        }
      }
      return verdict;
    }
  }
  throw InputError("unreachable");
}

// ---------------------------------------------------------------------------
// Programming-by-example unrealizability: no single program in the set maps
// every example input to its output.
// ---------------------------------------------------------------------------

struct PbeVerdict {
  bool unrealizable = false;
};

inline PbeVerdict pbe_unrealizable(const Rtg& g, const std::string& n,
                                   const std::vector<std::pair<State, State>>& examples,
                                   const DomainConfig& cfg,
                                   EngineChoice engine = EngineChoice{}) {
  if (examples.empty()) throw InputError("pbe: need at least one example");
  if (examples.size() > cfg.caps.max_vector_len)
    throw InputError("pbe: more examples than max_vector_len");
  VState vin, vout;
  for (const auto& [in, out] : examples) {
    vin.push_back(in);
    vout.push_back(out);
  }
  std::set<VState> outs = engine.compositional
                              ? eval_vector(g, n, {vin}, cfg)
                              : oracle_vector(g, n, engine.depth, {vin}, cfg);
  return PbeVerdict{outs.count(vout) == 0};
}

// ---------------------------------------------------------------------------
// GrmDisj: split a set of programs into two certified parts and check both.
// ---------------------------------------------------------------------------

struct GrmDisjVerdict {
  bool valid_split = false;
  bool holds = false;
  std::string failing_half;  // nonterminal of a violated half, if any
  Verdict half_verdict;
};

inline bool production_sets_equal(const Rtg& g, const std::string& n, const std::string& n1,
                                  const std::string& n2) {
  auto covered = [&](const Production* p, const std::vector<const Production*>& pool) {
    for (const auto* q : pool)
      if (term_compare(p->rhs, q->rhs) == 0) return true;
    return false;
  };
  auto pn = g.prods_of(n);
  auto p1 = g.prods_of(n1);
  auto p2 = g.prods_of(n2);
  std::vector<const Production*> halves = p1;
  halves.insert(halves.end(), p2.begin(), p2.end());
  for (const auto* p : pn)
    if (!covered(p, halves)) return false;
  for (const auto* p : halves)
    if (!covered(p, pn)) return false;
  return true;
}

inline GrmDisjVerdict grmdisj_check(const Triple& t, const std::string& n1, const std::string& n2,
                                    const DomainConfig& cfg) {
  GrmDisjVerdict out;
  if (!t.grammar.declared(n1) || !t.grammar.declared(n2))
    throw InputError("grmdisj: split nonterminals must be declared");
  if (!production_sets_equal(t.grammar, t.nonterminal, n1, n2))
    throw InputError("grmdisj: the split's productions do not cover '" + t.nonterminal + "'");
  out.valid_split = true;
  for (const std::string& half : {n1, n2}) {
    Triple ht = t;
    ht.nonterminal = half;
    Verdict v = check_triple(ht, cfg);
    if (!v.holds) {
      out.holds = false;
      out.failing_half = half;
      out.half_verdict = v;
      return out;
    }
  }
  out.holds = true;
  return out;
}

// ---------------------------------------------------------------------------
// The W_{v,u} gadget: a set of loops, one per body program, that replays the
// body on v entry by entry and counts the entries mapped onto u. The counter
// reaches n+1 exactly when some body maps v to u entrywise.
// ---------------------------------------------------------------------------

inline Rtg build_gadget_wvu(const Rtg& gS, const std::string& nS, const VState& v, const VState& u,
                            const std::string& counter, const DomainConfig& cfg) {
  require_valid(gS);
  if (gS.sort_of_nt(nS) != Sort::Stmt) throw InputError("gadget: the body set must be statements");
  if (v.size() != u.size() || v.empty()) throw InputError("gadget: need |v| == |u| >= 1");
  auto sv = grammar_vars(gS, nS);
  if (sv.empty()) throw InputError("gadget: the body set uses no variables");
  if (sv.count(counter)) throw InputError("gadget: counter collides with a body variable");
  if (!cfg.tracks(counter)) throw InputError("gadget: counter must be tracked");
  long long n = static_cast<long long>(v.size());
  if (cfg.lo > 0 || cfg.hi < n + 1)
    throw InputError("gadget: domain cannot represent 0 and the counter bound " +
                     std::to_string(n + 1));
  // v and u must agree outside the body's variables (including the reserved
  // slots): otherwise u is trivially unreachable and the gadget is vacuous.
  for (size_t j = 0; j < v.size(); ++j) {
    State a = v[j], b = u[j];
    if (a.et() != b.et() || a.bt() != b.bt())
      throw InputError("gadget: v and u must agree on the reserved slots");
    for (size_t i = 0; i < cfg.tracked_vars.size(); ++i)
      if (!sv.count(cfg.tracked_vars[i]) && a.var(i) != b.var(i))
        throw InputError("gadget: v and u must agree outside the body's variables");
  }
  for (size_t j = 0; j < v.size(); ++j)
    for (const auto& x : sv) {
      int val = v[j].var(cfg.var_index(x));
      int uval = u[j].var(cfg.var_index(x));
      if (-val > cfg.hi || -uval > cfg.hi)
        throw InputError("gadget: a negative constant's magnitude exceeds hi");
    }

  Rtg g = gS;
  std::string start = "GadgetStart";
  while (g.declared(start)) start += "_";
  g.nonterminals[start] = Sort::Stmt;
  g.start = start;

  TermPtr skip = t_assign(counter, t_var(counter));
  // load block: if counter == j then sigma := v_j|vars(S), chained over j
  TermPtr load = skip;
  for (long long j = n; j >= 1; --j) {
    TermPtr assigns;
    for (auto it = sv.rbegin(); it != sv.rend(); ++it) {
      TermPtr one = t_assign(*it, numeral(v[j - 1].var(cfg.var_index(*it))));
      assigns = assigns ? t_seq(one, assigns) : one;
    }
    load = t_if(t_eq(t_var(counter), numeral(j)), assigns, load);
  }
  // check block: if counter == j then (if sigma == u_j|vars(S) then j++ else
  // j := 0), chained over j
  TermPtr check = skip;
  for (long long j = n; j >= 1; --j) {
    TermPtr match;
    for (auto it = sv.rbegin(); it != sv.rend(); ++it) {
      TermPtr one = t_eq(t_var(*it), numeral(u[j - 1].var(cfg.var_index(*it))));
      match = match ? t_and(one, match) : one;
    }
    TermPtr step = t_if(match, t_assign(counter, t_add(t_var(counter), t_one())),
                        t_assign(counter, t_zero()));
    check = t_if(t_eq(t_var(counter), numeral(j)), step, check);
  }
  TermPtr guard = t_and(t_lt(t_zero(), t_var(counter)), t_lt(t_var(counter), numeral(n + 1)));
  TermPtr body = t_seq(t_seq(load, t_hole(nS)), check);
  TermPtr loop = t_seq(t_assign(counter, t_one()), t_while(guard, body));
  g.productions.push_back({start, loop});
  require_valid(g);
  return g;
}

// Enumeration depth that exposes every gadget instance whose body comes from
// enumerating nS at body_depth.
inline size_t gadget_depth(const Rtg& gadget, size_t body_depth) {
  size_t h = 0;
  for (const auto& p : gadget.productions)
    if (p.lhs == gadget.start) h = std::max(h, term_height(p.rhs));
  return h + body_depth;
}

struct GadgetCheck {
  bool vector_member = false;   // u in the vector semantics of the bodies on v
  bool gadget_accepts = false;  // some gadget output carries counter == n+1
};

inline GadgetCheck gadget_iff_check(const Rtg& gS, const std::string& nS, const VState& v,
                                    const VState& u, const std::string& counter,
                                    const DomainConfig& cfg, size_t body_depth) {
  GadgetCheck out;
  out.vector_member = oracle_vector(gS, nS, body_depth, {v}, cfg).count(u) > 0;
  Rtg gadget = build_gadget_wvu(gS, nS, v, u, counter, cfg);
  auto states = oracle_agnostic(gadget, gadget.start, gadget_depth(gadget, body_depth),
                                {State::canonical(cfg)}, AgMode::Yellow, cfg)
                    .states;
  long long want = static_cast<long long>(v.size()) + 1;
  size_t ci = cfg.var_index(counter);
  for (const auto& s : states)
    if (s.var(ci) == want) {
      out.gadget_accepts = true;
      break;
    }
  return out;
}

}  // namespace setsem
