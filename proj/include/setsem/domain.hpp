#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "setsem/errors.hpp"

namespace setsem {

struct Caps {
  size_t max_vector_len = 8;
  size_t max_trace_len = 0;  // 0 = derive from the state-space size
  size_t max_table_entries = 2'000'000;
  size_t max_enum_terms = 100'000;
  size_t max_states = 1'000'000;
  long long step_budget = 50'000'000;
};

// The finite model every semantics is computed over: integer values clamped
// to [lo, hi] and a fixed, ordered set of tracked variables.
struct DomainConfig {
  int lo = -8;
  int hi = 8;
  std::vector<std::string> tracked_vars;
  Caps caps;

  void check() const {
    if (lo > hi) throw InputError("domain: lo > hi");
    if (tracked_vars.empty()) throw InputError("domain: tracked_vars must be nonempty");
    std::set<std::string> seen;
    for (const auto& v : tracked_vars) {
      if (v == "e_t" || v == "b_t")
        throw InputError("domain: '" + v + "' is a reserved slot, not a variable");
      if (!seen.insert(v).second) throw InputError("domain: duplicate tracked var '" + v + "'");
    }
  }

  int clamp(long long v) const {
    if (v < lo) return lo;
    if (v > hi) return hi;
    return static_cast<int>(v);
  }

  size_t values() const { return static_cast<size_t>(hi - lo + 1); }

  // Index of a tracked variable; InputError for anything untracked.
  size_t var_index(const std::string& v) const {
    for (size_t i = 0; i < tracked_vars.size(); ++i)
      if (tracked_vars[i] == v) return i;
    throw InputError("variable '" + v + "' is not tracked by the domain");
  }

  bool tracks(const std::string& v) const {
    return std::find(tracked_vars.begin(), tracked_vars.end(), v) != tracked_vars.end();
  }

  // Total states over all tracked vars: values^(n+1) * 2 (e_t and b_t).
  size_t state_count() const {
    size_t n = 2;
    for (size_t i = 0; i < tracked_vars.size() + 1; ++i) {
      if (n > caps.max_states / values() + 1) return caps.max_states + 1;
      n *= values();
    }
    return n;
  }

  size_t trace_cap() const {
    return caps.max_trace_len ? caps.max_trace_len : state_count() + 1;
  }
};

// A program state: values for the tracked variables plus the reserved result
// slots e_t and b_t. Value-compared; totally ordered so sets of states have a
// canonical iteration order.
class State {
 public:
  State() = default;
  State(std::vector<int> h, int et, bool bt) : h_(std::move(h)), et_(et), bt_(bt) {}

  // All slots at their canonical defaults: lo everywhere, b_t = f.
  static State canonical(const DomainConfig& cfg) {
    return State(std::vector<int>(cfg.tracked_vars.size(), cfg.lo), cfg.lo, false);
  }

  int var(size_t idx) const { return h_[idx]; }
  int et() const { return et_; }
  bool bt() const { return bt_; }
  size_t slots() const { return h_.size(); }
  const std::vector<int>& h() const { return h_; }

  State with_var(size_t idx, int v) const {
    State s = *this;
    s.h_[idx] = v;
    return s;
  }
  State with_et(int v) const {
    State s = *this;
    s.et_ = v;
    return s;
  }
  State with_bt(bool v) const {
    State s = *this;
    s.bt_ = v;
    return s;
  }

  friend bool operator==(const State& a, const State& b) {
    return a.h_ == b.h_ && a.et_ == b.et_ && a.bt_ == b.bt_;
  }
  friend bool operator!=(const State& a, const State& b) { return !(a == b); }
  friend bool operator<(const State& a, const State& b) {
    if (a.h_ != b.h_) return a.h_ < b.h_;
    if (a.et_ != b.et_) return a.et_ < b.et_;
    return a.bt_ < b.bt_;
  }

 private:
  std::vector<int> h_;
  int et_ = 0;
  bool bt_ = false;
};

// subst(sigma, slot, value): slot is a tracked variable name, "e_t" or "b_t".
// Integer values must already lie in [lo, hi].
inline State subst(const DomainConfig& cfg, const State& s, const std::string& slot, int value) {
  if (slot == "b_t") return s.with_bt(value != 0);
  if (value < cfg.lo || value > cfg.hi)
    throw InputError("subst: value " + std::to_string(value) + " out of range");
  if (slot == "e_t") return s.with_et(value);
  return s.with_var(cfg.var_index(slot), value);
}

inline State subst(const DomainConfig& cfg, const State& s, const std::string& slot, bool value) {
  if (slot != "b_t") throw InputError("subst: Boolean value requires slot b_t");
  (void)cfg;
  return s.with_bt(value);
}

using VState = std::vector<State>;

// A finite vector of states with an optional trailing divergence marker.
struct DVState {
  VState entries;
  bool diverges = false;

  friend bool operator==(const DVState& a, const DVState& b) {
    return a.diverges == b.diverges && a.entries == b.entries;
  }
  friend bool operator<(const DVState& a, const DVState& b) {
    if (a.entries.size() != b.entries.size()) return a.entries.size() < b.entries.size();
    if (a.entries != b.entries) return a.entries < b.entries;
    return a.diverges < b.diverges;
  }
};

inline DVState dv(VState v, bool diverges = false) { return DVState{std::move(v), diverges}; }

// a occludes b iff a diverges and b is a diverging extension of a's prefix
// (every diverging vector occludes itself).
inline bool occludes(const DVState& a, const DVState& b) {
  if (!a.diverges || !b.diverges) return false;
  if (a.entries.size() > b.entries.size()) return false;
  return std::equal(a.entries.begin(), a.entries.end(), b.entries.begin());
}

// Strict prefix-or-equal on DVStates (the partial order used by reduce).
inline bool dv_prefix(const DVState& a, const DVState& b) {
  if (a.entries.size() > b.entries.size()) return false;
  if (!std::equal(a.entries.begin(), a.entries.end(), b.entries.begin())) return false;
  if (a.entries.size() == b.entries.size()) return a.diverges == b.diverges || !a.diverges;
  return true;
}

// Replaces every diverging vector by its shortest occluder present in xs;
// non-diverging vectors pass through. No output element is occluded by a
// shorter output element.
inline std::set<DVState> reduce(const std::set<DVState>& xs) {
  std::set<DVState> out;
  for (const auto& u : xs) {
    if (!u.diverges) {
      out.insert(u);
      continue;
    }
    const DVState* best = &u;
    for (const auto& w : xs)
      if (occludes(w, u) && w.entries.size() < best->entries.size()) best = &w;
    out.insert(*best);
  }
  return out;
}

// All states that differ on (over ∪ {e_t, b_t}); every other slot is fixed at
// its canonical default. Deterministic lexicographic order.
inline std::vector<State> enumerate_states(const DomainConfig& cfg,
                                           const std::set<std::string>& over) {
  std::vector<size_t> idx;
  for (const auto& v : over) idx.push_back(cfg.var_index(v));  // set is sorted
  std::sort(idx.begin(), idx.end());

  size_t count = 2;
  for (size_t i = 0; i < idx.size() + 1; ++i) {
    count *= cfg.values();
    if (count > cfg.caps.max_states)
      throw ResourceLimit("enumerate_states: state count exceeds cap");
  }

  std::vector<State> out;
  out.reserve(count);
  State base = State::canonical(cfg);
  // Odometer over (h[idx...], e_t, b_t), last slot fastest.
  std::vector<int> vals(idx.size() + 1, cfg.lo);
  while (true) {
    State s = base;
    for (size_t i = 0; i < idx.size(); ++i) s = s.with_var(idx[i], vals[i]);
    s = s.with_et(vals[idx.size()]);
    out.push_back(s.with_bt(false));
    out.push_back(s.with_bt(true));
    size_t i = vals.size();
    while (i > 0) {
      --i;
      if (vals[i] < cfg.hi) {
        ++vals[i];
        std::fill(vals.begin() + i + 1, vals.end(), cfg.lo);
        break;
      }
      if (i == 0) return out;
    }
  }
}

// Variants of h over exactly the given variables, all other slots canonical
// (e_t and b_t included). Used to key guard behaviors.
inline std::vector<State> enumerate_h_states(const DomainConfig& cfg,
                                             const std::set<std::string>& over) {
  std::vector<size_t> idx;
  for (const auto& v : over) idx.push_back(cfg.var_index(v));
  std::sort(idx.begin(), idx.end());
  size_t count = 1;
  for (size_t i = 0; i < idx.size(); ++i) {
    count *= cfg.values();
    if (count > cfg.caps.max_states)
      throw ResourceLimit("enumerate_h_states: state count exceeds cap");
  }
  std::vector<State> out;
  out.reserve(count);
  State base = State::canonical(cfg);
  std::vector<int> vals(idx.size(), cfg.lo);
  while (true) {
    State s = base;
    for (size_t i = 0; i < idx.size(); ++i) s = s.with_var(idx[i], vals[i]);
    out.push_back(s);
    if (idx.empty()) return out;
    size_t i = vals.size();
    while (i > 0) {
      --i;
      if (vals[i] < cfg.hi) {
        ++vals[i];
        std::fill(vals.begin() + i + 1, vals.end(), cfg.lo);
        break;
      }
      if (i == 0) return out;
    }
  }
}

// Projection of h onto vs.
inline std::map<std::string, int> restrict_state(const DomainConfig& cfg, const State& s,
                                                 const std::set<std::string>& vs) {
  std::map<std::string, int> out;
  for (const auto& v : vs) out[v] = s.var(cfg.var_index(v));
  return out;
}

// Rendering helpers used in reports and test failure messages.
inline std::string show(const DomainConfig& cfg, const State& s) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < cfg.tracked_vars.size(); ++i)
    os << cfg.tracked_vars[i] << ":" << s.var(i) << ",";
  os << "e_t:" << s.et() << ",b_t:" << (s.bt() ? "t" : "f") << "}";
  return os.str();
}

inline std::string show(const DomainConfig& cfg, const VState& v) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << show(cfg, v[i]);
  os << "]";
  return os.str();
}

inline std::string show(const DomainConfig& cfg, const DVState& v) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < v.entries.size(); ++i) os << (i ? ", " : "") << show(cfg, v.entries[i]);
  if (v.diverges) os << (v.entries.empty() ? "^" : ", ^");
  os << "]";
  return os.str();
}

}  // namespace setsem
