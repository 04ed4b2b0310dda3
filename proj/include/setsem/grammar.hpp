#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "setsem/ast.hpp"
#include "setsem/errors.hpp"

namespace setsem {

// One production: lhs ::= rhs, where rhs is a term template whose Hole nodes
// reference nonterminals. Inlined leaves and whole sub-terms are allowed, so
// `S' ::= x1 := x1` is a single production.
struct Production {
  std::string lhs;
  TermPtr rhs;
};

struct Violation {
  std::string production;  // "L ::= rhs" rendering, or "" for grammar-level
  std::string message;
};

// A typed regular tree grammar over the term language.
struct Rtg {
  std::map<std::string, Sort> nonterminals;
  std::string start;
  std::vector<Production> productions;

  std::vector<const Production*> prods_of(const std::string& nt) const {
    std::vector<const Production*> out;
    for (const auto& p : productions)
      if (p.lhs == nt) out.push_back(&p);
    return out;
  }

  bool declared(const std::string& nt) const { return nonterminals.count(nt) > 0; }

  Sort sort_of_nt(const std::string& nt) const {
    auto it = nonterminals.find(nt);
    if (it == nonterminals.end()) throw InputError("undeclared nonterminal '" + nt + "'");
    return it->second;
  }
};

namespace detail {

// Sort of a template node given the declared nonterminal sorts; reports the
// first ill-sorted subterm through `bad`.
inline std::optional<Sort> template_sort(const Rtg& g, const TermPtr& t, std::string* bad) {
  if (t->op() == Op::Hole) {
    auto it = g.nonterminals.find(t->name());
    if (it == g.nonterminals.end()) {
      if (bad) *bad = "undeclared nonterminal <" + t->name() + ">";
      return std::nullopt;
    }
    return it->second;
  }
  auto expect = op_kid_sorts(t->op());
  for (size_t i = 0; i < expect.size(); ++i) {
    auto ks = template_sort(g, t->kid(i), bad);
    if (!ks) return std::nullopt;
    if (*ks != expect[i]) {
      if (bad)
        *bad = "subterm '" + pretty(t->kid(i)) + "' has sort " + sort_name(*ks) +
               " where " + sort_name(expect[i]) + " is required";
      return std::nullopt;
    }
  }
  return op_sort(t->op());
}

inline std::string show_production(const Production& p) {
  return p.lhs + " ::= " + pretty(p.rhs);
}

}  // namespace detail

// Checks that every production is valid with respect to the term language:
// sort-correct templates, declared nonterminals, declared start symbol.
inline std::vector<Violation> validate(const Rtg& g) {
  std::vector<Violation> out;
  if (!g.declared(g.start))
    out.push_back({"", "start symbol '" + g.start + "' is not declared"});
  for (const auto& p : g.productions) {
    std::string shown = detail::show_production(p);
    if (!g.declared(p.lhs)) {
      out.push_back({shown, "left-hand side '" + p.lhs + "' is not declared"});
      continue;
    }
    if (p.rhs->op() == Op::Hole) {
      out.push_back({shown, "chain production: the right-hand side must apply a constructor"});
      continue;
    }
    std::string bad;
    auto s = detail::template_sort(g, p.rhs, &bad);
    if (!s) {
      out.push_back({shown, bad});
      continue;
    }
    if (*s != g.sort_of_nt(p.lhs))
      out.push_back({shown, "right-hand side has sort " + std::string(sort_name(*s)) +
                                " but '" + p.lhs + "' is declared " +
                                sort_name(g.sort_of_nt(p.lhs))});
  }
  return out;
}

inline void require_valid(const Rtg& g) {
  auto v = validate(g);
  if (!v.empty()) {
    std::string msg = "invalid grammar:";
    for (const auto& x : v) msg += "\n  " + (x.production.empty() ? x.message : x.production + ": " + x.message);
    throw InputError(msg);
  }
}

// Nonterminals with a nonempty language (least fixpoint over productions).
inline std::set<std::string> nonempty_nonterminals(const Rtg& g) {
  std::set<std::string> ok;
  auto grounded = [&](const TermPtr& t) {
    // all holes reference nonterminals already known nonempty
    std::deque<TermPtr> q{t};
    while (!q.empty()) {
      TermPtr n = q.front();
      q.pop_front();
      if (n->op() == Op::Hole && !ok.count(n->name())) return false;
      for (const auto& k : n->kids()) q.push_back(k);
    }
    return true;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : g.productions)
      if (!ok.count(p.lhs) && grounded(p.rhs)) {
        ok.insert(p.lhs);
        changed = true;
      }
  }
  return ok;
}

inline bool template_nonempty(const TermPtr& t, const std::set<std::string>& nonempty) {
  if (t->op() == Op::Hole) return nonempty.count(t->name()) > 0;
  for (const auto& k : t->kids())
    if (!template_nonempty(k, nonempty)) return false;
  return true;
}

// Nonterminals reachable from n (n included).
inline std::set<std::string> reachable_nonterminals(const Rtg& g, const std::string& n) {
  std::set<std::string> seen{n};
  std::deque<std::string> q{n};
  auto scan = [&](const TermPtr& t, auto&& self) -> void {
    if (t->op() == Op::Hole) {
      if (seen.insert(t->name()).second) q.push_back(t->name());
      return;
    }
    for (const auto& k : t->kids()) self(k, self);
  };
  while (!q.empty()) {
    std::string cur = q.front();
    q.pop_front();
    for (const auto* p : g.prods_of(cur)) scan(p->rhs, scan);
  }
  return seen;
}

// True iff a While constructor occurs in a production reachable from n; the
// offending production is reported through `where`.
inline bool while_reachable(const Rtg& g, const std::string& n, std::string* where = nullptr) {
  auto has_while = [&](const TermPtr& t, auto&& self) -> bool {
    if (t->op() == Op::While) return true;
    for (const auto& k : t->kids())
      if (self(k, self)) return true;
    return false;
  };
  for (const auto& nt : reachable_nonterminals(g, n))
    for (const auto* p : g.prods_of(nt))
      if (has_while(p->rhs, has_while)) {
        if (where) *where = detail::show_production(*p);
        return true;
      }
  return false;
}

// Union of variables in any production reachable from n; equals the union of
// vars over the language of n.
inline std::set<std::string> grammar_vars(const Rtg& g, const std::string& n) {
  std::set<std::string> out;
  auto scan = [&](const TermPtr& t, auto&& self) -> void {
    if (t->op() == Op::VarRef || t->op() == Op::Assign) out.insert(t->name());
    for (const auto& k : t->kids()) self(k, self);
  };
  for (const auto& nt : reachable_nonterminals(g, n))
    for (const auto* p : g.prods_of(nt)) scan(p->rhs, scan);
  return out;
}

// ---------------------------------------------------------------------------
// Bounded enumeration. Depth is the height of the derivation tree in the
// fully desugared grammar, where every constructor application (including
// inlined leaves) counts one level; for ground terms this is the height of
// the term tree.
// ---------------------------------------------------------------------------

class Enumerator {
 public:
  Enumerator(const Rtg& g, size_t term_cap) : g_(g), cap_(term_cap) {}

  // Terms of L(n) with derivation depth <= depth, deterministically ordered
  // by (term size, pretty form).
  std::vector<TermPtr> enumerate(const std::string& n, size_t depth) {
    if (!g_.declared(n)) throw InputError("undeclared nonterminal '" + n + "'");
    const auto& m = upto(n, depth);
    std::vector<TermPtr> out;
    out.reserve(m.size());
    for (const auto& kv : m) out.push_back(kv.second);
    std::stable_sort(out.begin(), out.end(), [](const TermPtr& a, const TermPtr& b) {
      size_t sa = term_size(a), sb = term_size(b);
      if (sa != sb) return sa < sb;
      return pretty(a) < pretty(b);
    });
    return out;
  }

  size_t produced() const { return produced_; }

 private:
  using TermMap = std::map<std::string, TermPtr>;  // keyed by pretty form

  const TermMap& upto(const std::string& nt, size_t depth) {
    auto key = std::make_pair(nt, depth);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    TermMap result;
    if (depth >= 1) {
      for (const auto* p : g_.prods_of(nt)) {
        for (const auto& t : expand(p->rhs, depth)) add(result, t);
      }
    }
    return memo_.emplace(std::move(key), std::move(result)).first->second;
  }

  // All ground instances of the template whose tree height fits in `budget`.
  std::vector<TermPtr> expand(const TermPtr& node, size_t budget) {
    if (budget == 0) return {};
    if (node->op() == Op::Hole) {
      const auto& m = upto(node->name(), budget);
      std::vector<TermPtr> out;
      out.reserve(m.size());
      for (const auto& kv : m) out.push_back(kv.second);
      return out;
    }
    if (node->kids().empty()) return {mk(node->op(), node->name())};
    // Cross product of child expansions with budget - 1.
    std::vector<std::vector<TermPtr>> kid_terms;
    for (const auto& k : node->kids()) {
      kid_terms.push_back(expand(k, budget - 1));
      if (kid_terms.back().empty()) return {};
    }
    std::vector<TermPtr> out;
    std::vector<size_t> pick(kid_terms.size(), 0);
    while (true) {
      std::vector<TermPtr> kids;
      kids.reserve(pick.size());
      for (size_t i = 0; i < pick.size(); ++i) kids.push_back(kid_terms[i][pick[i]]);
      out.push_back(mk(node->op(), node->name(), std::move(kids)));
      bump();
      size_t i = pick.size();
      bool done = true;
      while (i > 0) {
        --i;
        if (++pick[i] < kid_terms[i].size()) {
          std::fill(pick.begin() + i + 1, pick.end(), 0);
          done = false;
          break;
        }
        pick[i] = 0;
      }
      if (done) break;
    }
    return out;
  }

  void add(TermMap& m, const TermPtr& t) { m.emplace(pretty(t), t); }

  void bump() {
    if (++produced_ > cap_)
      throw ResourceLimit("enumeration exceeded the term cap (" + std::to_string(cap_) + ")");
  }

  const Rtg& g_;
  size_t cap_;
  size_t produced_ = 0;
  std::map<std::pair<std::string, size_t>, TermMap> memo_;
};

inline std::vector<TermPtr> enumerate_terms(const Rtg& g, const std::string& n, size_t depth,
                                            size_t cap = 100'000) {
  if (depth < 1) throw InputError("enumerate: max_depth must be >= 1");
  require_valid(g);
  return Enumerator(g, cap).enumerate(n, depth);
}

// ---------------------------------------------------------------------------
// Grammar file format:
//   nonterm NAME : SORT;
//   start NAME;
//   NAME ::= alt | alt | ... ;
// Alternatives use the term concrete syntax with <NT> references.
// ---------------------------------------------------------------------------

inline Rtg parse_grammar(const std::string& src) {
  Rtg g;
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < src.size()) {
      if (std::isspace(static_cast<unsigned char>(src[i]))) { ++i; continue; }
      if (src[i] == '#') {  // comment to end of line
        while (i < src.size() && src[i] != '\n') ++i;
        continue;
      }
      break;
    }
  };
  auto ident = [&]() -> std::string {
    skip_ws();
    size_t j = i;
    while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
      ++j;
    if (j == i) throw ParseError("expected an identifier", i);
    std::string w = src.substr(i, j - i);
    i = j;
    return w;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (i >= src.size() || src[i] != c)
      throw ParseError(std::string("expected '") + c + "'", i);
    ++i;
  };
  auto lookahead_kw = [&](const char* w) {
    skip_ws();
    size_t n = std::string(w).size();
    if (src.compare(i, n, w) != 0) return false;
    size_t j = i + n;
    if (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
      return false;
    return true;
  };

  // First pass collects declarations and raw rule bodies.
  struct RawRule { std::string lhs; std::string body; size_t pos; };
  std::vector<RawRule> rules;
  while (true) {
    skip_ws();
    if (i >= src.size()) break;
    if (lookahead_kw("nonterm")) {
      ident();  // consume 'nonterm'
      std::string name = ident();
      expect(':');
      std::string sort = ident();
      expect(';');
      Sort s;
      if (sort == "Stmt") s = Sort::Stmt;
      else if (sort == "Exp") s = Sort::Exp;
      else if (sort == "BExp") s = Sort::BExp;
      else throw ParseError("unknown sort '" + sort + "'", i);
      if (g.nonterminals.count(name))
        throw ParseError("nonterminal '" + name + "' declared twice", i);
      g.nonterminals[name] = s;
      continue;
    }
    if (lookahead_kw("start")) {
      ident();
      g.start = ident();
      expect(';');
      continue;
    }
    // NAME ::= body ;   (body runs to the ';' that precedes the next
    // declaration or the end of the file)
    size_t rule_pos = i;
    std::string lhs = ident();
    skip_ws();
    if (src.compare(i, 3, "::=") != 0) throw ParseError("expected '::='", i);
    i += 3;
    // Find the end of this rule: scan forward for a ';' such that what
    // follows is a new declaration or EOF.
    size_t body_start = i;
    size_t end = std::string::npos;
    size_t scan = i;
    while (scan < src.size()) {
      if (src[scan] == '#') {
        while (scan < src.size() && src[scan] != '\n') ++scan;
        continue;
      }
      if (src[scan] == ';') {
        size_t save = i;
        i = scan + 1;
        skip_ws();
        bool boundary = i >= src.size() || lookahead_kw("nonterm") || lookahead_kw("start");
        if (!boundary) {
          // New rule boundary: IDENT ::=
          size_t save2 = i;
          try {
            ident();
            skip_ws();
            boundary = src.compare(i, 3, "::=") == 0;
          } catch (const ParseError&) {
            boundary = false;
          }
          i = save2;
        }
        if (boundary) {
          end = scan;
          i = save;
          break;
        }
        i = save;
      }
      ++scan;
    }
    if (end == std::string::npos)
      throw ParseError("rule for '" + lhs + "' is not terminated by ';'", rule_pos);
    rules.push_back({lhs, src.substr(body_start, end - body_start), body_start});
    i = end + 1;
  }

  if (g.start.empty()) throw ParseError("missing 'start NAME;' declaration", 0);

  // Second pass parses each alternative with the declared sorts.
  for (const auto& r : rules) {
    auto it = g.nonterminals.find(r.lhs);
    if (it == g.nonterminals.end())
      throw ParseError("rule for undeclared nonterminal '" + r.lhs + "'", r.pos);
    // Split the body on top-level '|' (no construct in the term syntax uses
    // '|', so every occurrence splits).
    std::vector<std::string> alts;
    std::string cur;
    for (char c : r.body) {
      if (c == '|') {
        alts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    alts.push_back(cur);
    for (const auto& alt : alts) {
      detail::TermParser p(detail::lex(alt, /*allow_holes=*/true), nullptr);
      TermPtr t;
      try {
        t = p.parse_sort(it->second);
      } catch (const ParseError& e) {
        throw ParseError("in rule for '" + r.lhs + "': " + e.what(), r.pos);
      }
      g.productions.push_back({r.lhs, t});
    }
  }
  return g;
}

// Renders a grammar back into the file format (used by the gadget builder).
inline std::string grammar_to_text(const Rtg& g) {
  std::ostringstream os;
  for (const auto& kv : g.nonterminals)
    os << "nonterm " << kv.first << " : " << sort_name(kv.second) << ";\n";
  os << "start " << g.start << ";\n";
  // Group productions by lhs, preserving declaration order of first use.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> alts;
  for (const auto& p : g.productions) {
    if (!alts.count(p.lhs)) order.push_back(p.lhs);
    alts[p.lhs].push_back(pretty(p.rhs));
  }
  for (const auto& lhs : order) {
    os << lhs << " ::= ";
    const auto& as = alts[lhs];
    for (size_t i = 0; i < as.size(); ++i) os << (i ? " | " : "") << as[i];
    os << ";\n";
  }
  return os.str();
}

}  // namespace setsem
