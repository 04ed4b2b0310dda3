#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "setsem/concrete.hpp"
#include "setsem/domain.hpp"
#include "setsem/grammar.hpp"

namespace setsem {

enum class SemanticsKind { AgnosticYellow, AgnosticGreen, Aware, VectorYellow, VectorGreen };

inline const char* semantics_name(SemanticsKind k) {
  switch (k) {
    case SemanticsKind::AgnosticYellow: return "agnostic-yellow";
    case SemanticsKind::AgnosticGreen: return "agnostic-green";
    case SemanticsKind::Aware: return "aware";
    case SemanticsKind::VectorYellow: return "vector-yellow";
    case SemanticsKind::VectorGreen: return "vector-green";
  }
  return "?";
}

inline std::optional<SemanticsKind> semantics_from_name(const std::string& s) {
  for (SemanticsKind k : {SemanticsKind::AgnosticYellow, SemanticsKind::AgnosticGreen,
                          SemanticsKind::Aware, SemanticsKind::VectorYellow,
                          SemanticsKind::VectorGreen})
    if (s == semantics_name(k)) return k;
  return std::nullopt;
}

// A semantics bound to its enumeration depth; denotations are tabulated by
// the enumeration oracles, so every kind is total on validated grammars.
struct SemanticsId {
  SemanticsKind kind = SemanticsKind::AgnosticYellow;
  size_t depth = 10;
};

// Probe inputs: states feed the state-set and aware semantics, vectors feed
// the vector-state semantics.
struct Probe {
  std::set<State> states;
  std::set<DVState> vectors;
};

// Full state enumeration; vectors up to length 2 over a small slice (every
// tracked variable varying, reserved slots canonical).
inline Probe default_probe(const DomainConfig& cfg) {
  Probe p;
  std::set<std::string> all(cfg.tracked_vars.begin(), cfg.tracked_vars.end());
  for (const auto& s : enumerate_states(cfg, all)) p.states.insert(s);
  auto hs = enumerate_h_states(cfg, all);
  p.vectors.insert(DVState{});
  for (const auto& a : hs) {
    p.vectors.insert(dv({a}));
    for (const auto& b : hs) p.vectors.insert(dv({a, b}));
  }
  return p;
}

namespace detail {

inline void encode(std::ostringstream& os, const DomainConfig& cfg, const State& s) {
  os << show(cfg, s);
}

inline void encode(std::ostringstream& os, const DomainConfig& cfg, const DVState& v) {
  os << show(cfg, v);
}

}  // namespace detail

// Canonical fingerprint of the input-to-output-set table of the chosen
// semantics over the probe. Equal fingerprints iff equal tables.
inline std::string denote(const SemanticsId& sem, const Rtg& g, const std::string& n,
                          const Probe& probe, const DomainConfig& cfg) {
  require_valid(g);
  std::ostringstream os;
  os << semantics_name(sem.kind) << "|";
  switch (sem.kind) {
    case SemanticsKind::AgnosticYellow:
    case SemanticsKind::AgnosticGreen: {
      AgMode mode = sem.kind == SemanticsKind::AgnosticGreen ? AgMode::Green : AgMode::Yellow;
      for (const auto& s : probe.states) {
        auto r = oracle_agnostic(g, n, sem.depth, {s}, mode, cfg);
        detail::encode(os, cfg, s);
        os << "->{";
        for (const auto& o : r.states) {
          detail::encode(os, cfg, o);
          os << ";";
        }
        if (r.diverges) os << "^";
        os << "} ";
      }
      break;
    }
    case SemanticsKind::Aware: {
      // The set of per-program behavior tables over the probe states.
      std::set<std::string> tables;
      for (const auto& c : enumerate_terms(g, n, sem.depth, cfg.caps.max_enum_terms)) {
        std::ostringstream t;
        for (const auto& s : probe.states) {
          auto r = eval_green(c, s, cfg);
          detail::encode(t, cfg, s);
          t << "->";
          if (r)
            detail::encode(t, cfg, *r);
          else
            t << "^";
          t << " ";
        }
        tables.insert(t.str());
      }
      for (const auto& t : tables) os << "[" << t << "] ";
      break;
    }
    case SemanticsKind::VectorYellow: {
      for (const auto& v : probe.vectors) {
        if (v.diverges) continue;
        auto r = oracle_vector(g, n, sem.depth, {v.entries}, cfg);
        detail::encode(os, cfg, v);
        os << "->{";
        for (const auto& o : r) {
          detail::encode(os, cfg, dv(o));
          os << ";";
        }
        os << "} ";
      }
      break;
    }
    case SemanticsKind::VectorGreen: {
      for (const auto& v : probe.vectors) {
        auto r = oracle_vector_green(g, n, sem.depth, {v}, cfg);
        detail::encode(os, cfg, v);
        os << "->{";
        for (const auto& o : r) {
          detail::encode(os, cfg, o);
          os << ";";
        }
        os << "} ";
      }
      break;
    }
  }
  return os.str();
}

// A finite-family refinement check: ok means every pair the finer semantics
// identifies is also identified by the coarser one, i.e. no counterexample to
// "coarse is a function of fine" on this family. A witness pair disproves it.
struct RefinementResult {
  bool ok = true;
  size_t witness_i = 0, witness_j = 0;
};

inline RefinementResult refines_on_family(const std::vector<std::pair<Rtg, std::string>>& family,
                                          const SemanticsId& fine, const SemanticsId& coarse,
                                          const Probe& probe, const DomainConfig& cfg) {
  std::vector<std::string> fp_fine, fp_coarse;
  for (const auto& [g, n] : family) {
    fp_fine.push_back(denote(fine, g, n, probe, cfg));
    fp_coarse.push_back(denote(coarse, g, n, probe, cfg));
  }
  for (size_t i = 0; i < family.size(); ++i)
    for (size_t j = i + 1; j < family.size(); ++j)
      if (fp_fine[i] == fp_fine[j] && fp_coarse[i] != fp_coarse[j])
        return RefinementResult{false, i, j};
  return RefinementResult{true, 0, 0};
}

}  // namespace setsem
