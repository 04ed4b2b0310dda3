#pragma once

#include <cctype>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "setsem/errors.hpp"

namespace setsem {

// Constructors of the term language: statements, integer expressions and
// Boolean expressions, plus Hole for grammar templates (a nonterminal
// occurrence inside a production right-hand side).
enum class Op {
  Assign,  // var := exp
  Seq,     // stmt ; stmt
  If,      // if bexp then { stmt } else { stmt }
  While,   // while bexp do { stmt }
  VarRef,  // var
  Zero,
  One,
  Add,
  Sub,
  True,
  False,
  Not,
  And,
  Lt,
  Eq,
  Hole,  // grammar template slot; name() holds the nonterminal
};

enum class Sort { Stmt, Exp, BExp };

inline const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Stmt: return "Stmt";
    case Sort::Exp: return "Exp";
    case Sort::BExp: return "BExp";
  }
  return "?";
}

class Term;
using TermPtr = std::shared_ptr<const Term>;

// Immutable term tree. `name` is the variable for VarRef and Assign and the
// nonterminal for Hole. Terms are shared freely; never mutated.
class Term {
 public:
  Term(Op op, std::string name, std::vector<TermPtr> kids)
      : op_(op), name_(std::move(name)), kids_(std::move(kids)) {}

  Op op() const { return op_; }
  const std::string& name() const { return name_; }
  const std::vector<TermPtr>& kids() const { return kids_; }
  const TermPtr& kid(size_t i) const { return kids_[i]; }

 private:
  Op op_;
  std::string name_;
  std::vector<TermPtr> kids_;
};

inline TermPtr mk(Op op, std::string name = "", std::vector<TermPtr> kids = {}) {
  return std::make_shared<Term>(op, std::move(name), std::move(kids));
}

inline TermPtr t_zero() { return mk(Op::Zero); }
inline TermPtr t_one() { return mk(Op::One); }
inline TermPtr t_true() { return mk(Op::True); }
inline TermPtr t_false() { return mk(Op::False); }
inline TermPtr t_var(const std::string& v) { return mk(Op::VarRef, v); }
inline TermPtr t_add(TermPtr a, TermPtr b) { return mk(Op::Add, "", {a, b}); }
inline TermPtr t_sub(TermPtr a, TermPtr b) { return mk(Op::Sub, "", {a, b}); }
inline TermPtr t_not(TermPtr a) { return mk(Op::Not, "", {a}); }
inline TermPtr t_and(TermPtr a, TermPtr b) { return mk(Op::And, "", {a, b}); }
inline TermPtr t_lt(TermPtr a, TermPtr b) { return mk(Op::Lt, "", {a, b}); }
inline TermPtr t_eq(TermPtr a, TermPtr b) { return mk(Op::Eq, "", {a, b}); }
inline TermPtr t_assign(const std::string& v, TermPtr e) { return mk(Op::Assign, v, {e}); }
inline TermPtr t_seq(TermPtr a, TermPtr b) { return mk(Op::Seq, "", {a, b}); }
inline TermPtr t_if(TermPtr b, TermPtr th, TermPtr el) { return mk(Op::If, "", {b, th, el}); }
inline TermPtr t_while(TermPtr b, TermPtr s) { return mk(Op::While, "", {b, s}); }
inline TermPtr t_hole(const std::string& nt) { return mk(Op::Hole, nt); }

// The sort a constructor produces, independent of its children.
inline Sort op_sort(Op op) {
  switch (op) {
    case Op::Assign:
    case Op::Seq:
    case Op::If:
    case Op::While: return Sort::Stmt;
    case Op::VarRef:
    case Op::Zero:
    case Op::One:
    case Op::Add:
    case Op::Sub: return Sort::Exp;
    default: return Sort::BExp;
  }
}

// Sorts each constructor expects of its children.
inline std::vector<Sort> op_kid_sorts(Op op) {
  switch (op) {
    case Op::Assign: return {Sort::Exp};
    case Op::Seq: return {Sort::Stmt, Sort::Stmt};
    case Op::If: return {Sort::BExp, Sort::Stmt, Sort::Stmt};
    case Op::While: return {Sort::BExp, Sort::Stmt};
    case Op::Add:
    case Op::Sub: return {Sort::Exp, Sort::Exp};
    case Op::Not: return {Sort::BExp};
    case Op::And: return {Sort::BExp, Sort::BExp};
    case Op::Lt:
    case Op::Eq: return {Sort::Exp, Sort::Exp};
    default: return {};
  }
}

inline bool is_ground(const TermPtr& t) {
  if (t->op() == Op::Hole) return false;
  for (const auto& k : t->kids())
    if (!is_ground(k)) return false;
  return true;
}

// Sort of a ground term. Holes have no intrinsic sort; grammar validation
// resolves them against the declared nonterminal sorts.
inline Sort sort_of(const TermPtr& t) {
  if (t->op() == Op::Hole) throw InputError("sort_of: term contains a hole <" + t->name() + ">");
  return op_sort(t->op());
}

inline int term_compare(const TermPtr& a, const TermPtr& b) {
  if (a->op() != b->op()) return a->op() < b->op() ? -1 : 1;
  if (int c = a->name().compare(b->name())) return c < 0 ? -1 : 1;
  if (a->kids().size() != b->kids().size())
    return a->kids().size() < b->kids().size() ? -1 : 1;
  for (size_t i = 0; i < a->kids().size(); ++i)
    if (int c = term_compare(a->kid(i), b->kid(i))) return c;
  return 0;
}

inline bool term_eq(const TermPtr& a, const TermPtr& b) { return term_compare(a, b) == 0; }

struct TermLess {
  bool operator()(const TermPtr& a, const TermPtr& b) const { return term_compare(a, b) < 0; }
};

// Variables syntactically occurring in a term (assignment targets count).
inline void collect_vars(const TermPtr& t, std::set<std::string>& out) {
  if (t->op() == Op::VarRef || t->op() == Op::Assign) out.insert(t->name());
  for (const auto& k : t->kids()) collect_vars(k, out);
}

inline std::set<std::string> vars(const TermPtr& t) {
  std::set<std::string> out;
  collect_vars(t, out);
  return out;
}

inline size_t term_size(const TermPtr& t) {
  size_t n = 1;
  for (const auto& k : t->kids()) n += term_size(k);
  return n;
}

// Height of the term tree; leaves count 1. This is the derivation depth in
// the fully desugared grammar, where every constructor is one production
// application.
inline size_t term_height(const TermPtr& t) {
  size_t h = 0;
  for (const auto& k : t->kids()) h = std::max(h, term_height(k));
  return h + 1;
}

// ---------------------------------------------------------------------------
// Pretty-printing. Canonical concrete syntax; parse(pretty(t)) == t.
// ---------------------------------------------------------------------------

namespace detail {

// Precedence levels (higher binds tighter).
//   bexp:  && (1)  <  !,atoms (2)
//   exp:   +,- (1, left-assoc)  <  atoms (2)
inline void print_term(std::ostream& os, const TermPtr& t, int parent_prec) {
  switch (t->op()) {
    case Op::Zero: os << "0"; break;
    case Op::One: os << "1"; break;
    case Op::True: os << "t"; break;
    case Op::False: os << "f"; break;
    case Op::VarRef: os << t->name(); break;
    case Op::Hole: os << "<" << t->name() << ">"; break;
    case Op::Add:
    case Op::Sub: {
      bool paren = parent_prec > 1;
      if (paren) os << "(";
      print_term(os, t->kid(0), 1);
      os << (t->op() == Op::Add ? " + " : " - ");
      print_term(os, t->kid(1), 2);  // right operand needs tighter binding
      if (paren) os << ")";
      break;
    }
    case Op::Lt:
    case Op::Eq: {
      // Comparisons sit at the atom level of bexps; operands are exps.
      print_term(os, t->kid(0), 1);
      os << (t->op() == Op::Lt ? " < " : " == ");
      print_term(os, t->kid(1), 1);
      break;
    }
    case Op::Not:
      os << "!";
      // Operand must be an atom; parenthesize anything looser.
      if (t->kid(0)->op() == Op::And || t->kid(0)->op() == Op::Lt ||
          t->kid(0)->op() == Op::Eq) {
        os << "(";
        print_term(os, t->kid(0), 0);
        os << ")";
      } else {
        print_term(os, t->kid(0), 2);
      }
      break;
    case Op::And: {
      bool paren = parent_prec > 1;
      if (paren) os << "(";
      print_term(os, t->kid(0), 1);
      os << " && ";
      print_term(os, t->kid(1), 2);
      if (paren) os << ")";
      break;
    }
    case Op::Assign:
      os << t->name() << " := ";
      print_term(os, t->kid(0), 0);
      break;
    case Op::Seq: {
      // ';' is left-associative in the concrete syntax, so a nested Seq on
      // either side needs braces to survive the round-trip.
      bool paren = parent_prec > 0;
      if (paren) os << "{ ";
      print_term(os, t->kid(0), 1);
      os << " ; ";
      print_term(os, t->kid(1), 1);
      if (paren) os << " }";
      break;
    }
    case Op::If:
      os << "if ";
      print_term(os, t->kid(0), 0);
      os << " then { ";
      print_term(os, t->kid(1), 0);
      os << " } else { ";
      print_term(os, t->kid(2), 0);
      os << " }";
      break;
    case Op::While:
      os << "while ";
      print_term(os, t->kid(0), 0);
      os << " do { ";
      print_term(os, t->kid(1), 0);
      os << " }";
      break;
  }
}

}  // namespace detail

inline std::string pretty(const TermPtr& t) {
  std::ostringstream os;
  detail::print_term(os, t, 0);
  return os.str();
}

// Canonical s-expression form, for debugging and logs.
inline std::string to_sexpr(const TermPtr& t) {
  static const char* names[] = {"assign", "seq", "if", "while", "var", "0", "1",
                                "add", "sub", "t", "f", "not", "and", "lt", "eq", "hole"};
  std::ostringstream os;
  const char* tag = names[static_cast<int>(t->op())];
  if (t->kids().empty() && t->name().empty()) return tag;
  os << "(" << tag;
  if (!t->name().empty()) os << " " << t->name();
  for (const auto& k : t->kids()) os << " " << to_sexpr(k);
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

namespace detail {

struct Token {
  enum Kind { Ident, Kw, Sym, NtRef, End } kind;
  std::string text;
  size_t pos;
};

inline bool is_keyword(const std::string& s) {
  return s == "while" || s == "do" || s == "if" || s == "then" || s == "else" ||
         s == "t" || s == "f";
}

inline std::vector<Token> lex(const std::string& src, bool allow_holes) {
  std::vector<Token> out;
  size_t i = 0;
  auto sym = [&](std::string s, size_t p) { out.push_back({Token::Sym, std::move(s), p}); };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    size_t p = i;
    if (c == '<' && allow_holes && i + 1 < src.size() &&
        (std::isalpha(static_cast<unsigned char>(src[i + 1])) || src[i + 1] == '_')) {
      // Possible nonterminal reference <Name>. Must close with '>'.
      size_t j = i + 1;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      if (j < src.size() && src[j] == '>') {
        out.push_back({Token::NtRef, src.substr(i + 1, j - i - 1), p});
        i = j + 1;
        continue;
      }
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      std::string w = src.substr(i, j - i);
      out.push_back({is_keyword(w) ? Token::Kw : Token::Ident, w, p});
      i = j;
      continue;
    }
    if (c == ':' && i + 1 < src.size() && src[i + 1] == '=') { sym(":=", p); i += 2; continue; }
    if (c == '=' && i + 1 < src.size() && src[i + 1] == '=') { sym("==", p); i += 2; continue; }
    if (c == '&' && i + 1 < src.size() && src[i + 1] == '&') { sym("&&", p); i += 2; continue; }
    if (std::string("01+-<!(){};").find(c) != std::string::npos) {
      sym(std::string(1, c), p);
      ++i;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", p);
  }
  out.push_back({Token::End, "", src.size()});
  return out;
}

// Recursive-descent parser for the concrete term syntax. Sort demands are
// threaded through the entry points, so a Boolean in an integer position is
// reported as a sort error naming the offending subterm.
class TermParser {
 public:
  TermParser(std::vector<Token> toks, const std::set<std::string>* reserved_ok)
      : toks_(std::move(toks)), reserved_ok_(reserved_ok) {}

  TermPtr parse_sort(Sort s) {
    TermPtr t = s == Sort::Stmt ? stmt() : s == Sort::Exp ? exp() : bexp();
    expect_end();
    return t;
  }

  // Parses a statement but leaves trailing tokens alone (grammar files use
  // this; ';' that does not start another statement is not consumed).
  TermPtr parse_sort_prefix(Sort s) {
    return s == Sort::Stmt ? stmt() : s == Sort::Exp ? exp() : bexp();
  }

  bool at_end() const { return cur().kind == Token::End; }
  size_t pos() const { return cur().pos; }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& peek(size_t k = 1) const {
    return toks_[std::min(i_ + k, toks_.size() - 1)];
  }
  void advance() { if (i_ + 1 < toks_.size()) ++i_; }

  bool is_sym(const char* s) const { return cur().kind == Token::Sym && cur().text == s; }
  bool is_kw(const char* s) const { return cur().kind == Token::Kw && cur().text == s; }

  void eat_sym(const char* s) {
    if (!is_sym(s)) throw ParseError(std::string("expected '") + s + "'", cur().pos);
    advance();
  }
  void eat_kw(const char* s) {
    if (!is_kw(s)) throw ParseError(std::string("expected '") + s + "'", cur().pos);
    advance();
  }
  void expect_end() {
    if (!at_end()) throw ParseError("trailing input '" + cur().text + "'", cur().pos);
  }

  std::string var_name() {
    if (cur().kind != Token::Ident)
      throw ParseError("expected a variable name, got '" + cur().text + "'", cur().pos);
    std::string v = cur().text;
    if ((v == "e_t" || v == "b_t") && !(reserved_ok_ && reserved_ok_->count(v)))
      throw ParseError("'" + v + "' is a reserved state slot, not a program variable", cur().pos);
    advance();
    return v;
  }

  [[noreturn]] void sort_error(Sort want, const TermPtr& got) {
    throw InputError(std::string("sort error: expected ") + sort_name(want) + " but '" +
                     pretty(got) + "' is a " + sort_name(sort_of_loose(got)));
  }

  static Sort sort_of_loose(const TermPtr& t) { return op_sort(t->op()); }

  TermPtr hole_or_null(Sort want) {
    if (cur().kind == Token::NtRef) {
      TermPtr h = t_hole(cur().text);
      hole_sorts_.push_back({cur().text, want});
      advance();
      return h;
    }
    return nullptr;
  }

 public:
  // (nonterminal, sort demanded by the context it occurred in)
  std::vector<std::pair<std::string, Sort>> hole_sorts_;

 private:
  // stmt := basic (';' basic)*    left-associated Seq
  TermPtr stmt() {
    TermPtr s = basic_stmt();
    while (is_sym(";")) {
      // In grammar files a ';' may terminate the rule; only continue when
      // the next token can start a statement.
      const Token& n = peek();
      bool starts_stmt = n.kind == Token::Ident || n.kind == Token::NtRef ||
                         (n.kind == Token::Kw && (n.text == "if" || n.text == "while")) ||
                         (n.kind == Token::Sym && n.text == "{");
      if (!starts_stmt) break;
      advance();
      s = t_seq(s, basic_stmt());
    }
    return s;
  }

  TermPtr basic_stmt() {
    if (TermPtr h = hole_or_null(Sort::Stmt)) return h;
    if (is_sym("{")) {
      advance();
      TermPtr s = stmt();
      eat_sym("}");
      return s;
    }
    if (is_kw("if")) {
      advance();
      TermPtr b = bexp();
      eat_kw("then");
      eat_sym("{");
      TermPtr th = stmt();
      eat_sym("}");
      eat_kw("else");
      eat_sym("{");
      TermPtr el = stmt();
      eat_sym("}");
      return t_if(b, th, el);
    }
    if (is_kw("while")) {
      advance();
      TermPtr b = bexp();
      eat_kw("do");
      TermPtr body;
      if (is_sym("{")) {
        advance();
        body = stmt();
        eat_sym("}");
      } else {
        body = basic_stmt();
      }
      return t_while(b, body);
    }
    if (cur().kind == Token::Ident) {
      std::string v = var_name();
      eat_sym(":=");
      return t_assign(v, exp());
    }
    throw ParseError("expected a statement, got '" + cur().text + "'", cur().pos);
  }

  // exp := exp_atom (('+'|'-') exp_atom)*   left-associated
  TermPtr exp() {
    TermPtr e = exp_atom();
    while (is_sym("+") || is_sym("-")) {
      bool add = cur().text == "+";
      advance();
      e = add ? t_add(e, exp_atom()) : t_sub(e, exp_atom());
    }
    return e;
  }

  TermPtr exp_atom() {
    if (TermPtr h = hole_or_null(Sort::Exp)) return h;
    if (is_sym("0")) { advance(); return t_zero(); }
    if (is_sym("1")) { advance(); return t_one(); }
    if (is_sym("(")) {
      advance();
      TermPtr e = exp();
      eat_sym(")");
      return e;
    }
    if (cur().kind == Token::Kw && (cur().text == "t" || cur().text == "f")) {
      TermPtr got = cur().text == "t" ? t_true() : t_false();
      sort_error(Sort::Exp, got);
    }
    if (cur().kind == Token::Ident) return t_var(var_name());
    throw ParseError("expected an integer expression, got '" + cur().text + "'", cur().pos);
  }

  // bexp := bconj ('&&' bconj)*   left-associated
  TermPtr bexp() {
    TermPtr b = bexp_atom();
    while (is_sym("&&")) {
      advance();
      b = t_and(b, bexp_atom());
    }
    return b;
  }

  TermPtr bexp_atom() {
    if (cur().kind == Token::NtRef) {
      // Ambiguous position: a hole here is Boolean unless it is followed by
      // an arithmetic or comparison operator, in which case it is the left
      // operand of a comparison.
      const Token& n = peek();
      bool exp_context = n.kind == Token::Sym &&
                         (n.text == "<" || n.text == "==" || n.text == "+" || n.text == "-");
      if (!exp_context) {
        TermPtr h = t_hole(cur().text);
        hole_sorts_.push_back({cur().text, Sort::BExp});
        advance();
        return h;
      }
      return comparison();
    }
    if (is_kw("t")) { advance(); return t_true(); }
    if (is_kw("f")) { advance(); return t_false(); }
    if (is_sym("!")) {
      advance();
      return t_not(bexp_atom());
    }
    if (is_sym("(")) {
      // Could be a parenthesized bexp or the left exp of a comparison.
      size_t save = i_;
      try {
        advance();
        TermPtr b = bexp();
        eat_sym(")");
        return b;
      } catch (const Error&) {
        i_ = save;
        return comparison();
      }
    }
    return comparison();
  }

  TermPtr comparison() {
    TermPtr lhs = exp();
    if (is_sym("<")) {
      advance();
      return t_lt(lhs, exp());
    }
    if (is_sym("==")) {
      advance();
      return t_eq(lhs, exp());
    }
    // A bare integer expression in Boolean position is a sort error.
    sort_error(Sort::BExp, lhs);
  }

  std::vector<Token> toks_;
  size_t i_ = 0;
  const std::set<std::string>* reserved_ok_;
};

}  // namespace detail

// Parses a ground term of the given sort (default: statement). Rejects
// nonterminal references and sort mismatches.
inline TermPtr parse_term(const std::string& text, Sort sort = Sort::Stmt) {
  detail::TermParser p(detail::lex(text, /*allow_holes=*/false), nullptr);
  return p.parse_sort(sort);
}

// Builds the balanced 1+1+...+1 numeral for n >= 0 (0 and 1 are literals);
// negative values are 0 - numeral(-n). Every intermediate sum stays within
// [0, |n|], so the term evaluates exactly whenever lo <= 0 and |n| <= hi.
inline TermPtr numeral(long long n) {
  if (n < 0) return t_sub(t_zero(), numeral(-n));
  if (n == 0) return t_zero();
  if (n == 1) return t_one();
  long long half = n / 2;
  return t_add(numeral(n - half), numeral(half));
}

}  // namespace setsem
