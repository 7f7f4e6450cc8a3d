// Typing contexts and the context operations of Fig 4: splitting, addition,
// role insertion, the end predicate and protocol association.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mpst/ast.hpp"
#include "mpst/print.hpp"
#include "mpst/subtype.hpp"

namespace mpst {

struct TypingContext {
  std::map<Channel, RType> chans;
  std::set<std::string> roleVars;              // alpha : alpha singletons
  std::map<std::string, Ground> groundVars;    // ground-typed binders (plumbing)

  bool hasChan(const Channel& c) const { return chans.count(c) != 0; }
  bool hasSession(const std::string& s) const {
    for (auto& [c, u] : chans)
      if (c.endpoint && c.session == s) return true;
    return false;
  }
};

// Recursion environment Theta: process variable -> parameter types.
struct RecEnv {
  std::map<std::string, std::vector<Type>> defs;
};

// assoc_s(Psi): one endpoint entry per protocol role.
inline TypingContext assoc(const std::string& session, const Protocol& p) {
  TypingContext g;
  for (auto& [r, t] : p.roles) g.chans[Channel::ep(session, r)] = RType::single(t);
  return g;
}

// Context addition: disjoint entries union, shared channels become parallel,
// shared role variables merge.
inline TypingContext add(const TypingContext& g1, const TypingContext& g2) {
  TypingContext out = g1;
  for (auto& [c, u] : g2.chans) {
    auto it = out.chans.find(c);
    if (it == out.chans.end()) {
      out.chans[c] = u;
    } else {
      std::vector<Type> ps = it->second.parts;
      ps.insert(ps.end(), u.parts.begin(), u.parts.end());
      it->second = RType::par(std::move(ps));
    }
  }
  out.roleVars.insert(g2.roleVars.begin(), g2.roleVars.end());
  for (auto& [n, gr] : g2.groundVars) out.groundVars[n] = gr;
  return out;
}

// Role insertion (Fig 4): literals leave the context unchanged.
inline TypingContext insertRole(const TypingContext& g, const Role& r) {
  if (!r.var) return g;
  TypingContext out = g;
  out.roleVars.insert(r.name);
  return out;
}

// end(Gamma), Def 4: every channel congruent to end; role variables allowed.
inline bool isEnd(const TypingContext& g) {
  for (auto& [c, u] : g.chans)
    if (!u.isEndType()) return false;
  return true;
}

inline std::set<std::string> freeRoleVars(const TypingContext& g) {
  std::set<std::string> out;
  for (auto& [c, u] : g.chans)
    for (auto& v : freeRoleVars(u)) out.insert(v);
  for (auto& v : g.roleVars) out.erase(v);
  return out;
}

inline TypingContext substRole(const TypingContext& g, const Role& who, const std::string& forVar) {
  TypingContext out;
  out.roleVars = g.roleVars;
  out.groundVars = g.groundVars;
  for (auto& [c, u] : g.chans) out.chans[c] = substRole(u, who, forVar);
  return out;
}

// Canonical printed form: entries sorted (std::map order), parts normalized.
inline std::string contextKey(const TypingContext& g, bool unfolded) {
  std::string out;
  for (auto& [c, u] : g.chans) {
    out += c.show();
    out += ":";
    out += alphaKey(unfolded ? unfoldStar(u) : u);
    out += "; ";
  }
  for (auto& v : g.roleVars) {
    out += "@" + v + "; ";
  }
  return out;
}

inline std::string print(const TypingContext& g) {
  std::string out;
  bool first = true;
  for (auto& [c, u] : g.chans) {
    if (!first) out += ", ";
    first = false;
    out += c.show() + ": " + print(u);
  }
  for (auto& v : g.roleVars) {
    if (!first) out += ", ";
    first = false;
    out += "@" + v;
  }
  return first ? "(empty)" : out;
}

inline bool contextCongruent(const TypingContext& a, const TypingContext& b) {
  return contextKey(a, false) == contextKey(b, false);
}

// ---------------------------------------------------------------------------
// Context splitting
// ---------------------------------------------------------------------------

// Enumerates every split of g into (left, right): each whole entry goes to
// one side, and a parallel entry may additionally distribute its components
// across both. Role variables are copied to both sides.
class Splits {
 public:
  explicit Splits(const TypingContext& g) : g_(g) {
    for (auto& [c, u] : g.chans) {
      entries_.push_back(&c);
      // One choice per component (left/right); an end entry is a single
      // atomic unit that still picks a side.
      std::size_t bits = u.parts.empty() ? 1 : u.parts.size();
      bits_.push_back(bits);
      counters_.push_back(0);
    }
  }

  std::uint64_t total() const {
    std::uint64_t t = 1;
    for (auto b : bits_) t *= (std::uint64_t{1} << b);
    return t;
  }

  bool next(TypingContext& left, TypingContext& right) {
    if (done_) return false;
    build(left, right);
    // odometer
    for (std::size_t i = 0; i <= entries_.size(); ++i) {
      if (i == entries_.size()) {
        done_ = true;
        break;
      }
      counters_[i]++;
      if (counters_[i] < (std::uint64_t{1} << bits_[i])) break;
      counters_[i] = 0;
    }
    if (entries_.empty()) done_ = true;
    return true;
  }

 private:
  void build(TypingContext& left, TypingContext& right) const {
    left = TypingContext{};
    right = TypingContext{};
    left.roleVars = right.roleVars = g_.roleVars;
    left.groundVars = right.groundVars = g_.groundVars;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const Channel& c = *entries_[i];
      const RType& u = g_.chans.at(c);
      std::uint64_t mask = counters_[i];
      if (u.parts.empty()) {
        if (mask & 1) right.chans[c] = RType::end();
        else left.chans[c] = RType::end();
        continue;
      }
      std::vector<Type> l, r;
      for (std::size_t j = 0; j < u.parts.size(); ++j) {
        if (mask & (std::uint64_t{1} << j)) r.push_back(u.parts[j]);
        else l.push_back(u.parts[j]);
      }
      if (!l.empty()) left.chans[c] = RType::par(std::move(l));
      if (!r.empty()) right.chans[c] = RType::par(std::move(r));
    }
  }

  const TypingContext& g_;
  std::vector<const Channel*> entries_;
  std::vector<std::size_t> bits_;
  std::vector<std::uint64_t> counters_;
  bool done_ = false;
};

inline std::vector<std::pair<TypingContext, TypingContext>> allSplits(const TypingContext& g,
                                                                      std::size_t cap = 1 << 16) {
  std::vector<std::pair<TypingContext, TypingContext>> out;
  Splits s(g);
  TypingContext l, r;
  while (s.next(l, r)) {
    out.emplace_back(l, r);
    if (out.size() >= cap) break;
  }
  return out;
}

// Demand-driven split: each linear entry goes to the side whose free names
// demand it. A parallel entry demanded by both sides falls back to candidate
// enumeration over its component partitions; an end entry demanded by both
// is duplicated; a single non-parallel linear entry demanded by both is a
// hard error.
struct SplitForResult {
  bool hardError = false;
  std::string error;
  // candidates to try in order; first is the deterministic guess
  std::vector<std::pair<TypingContext, TypingContext>> candidates;
};

inline SplitForResult splitFor(const TypingContext& g, const std::set<Channel>& demandLeft,
                               const std::set<Channel>& demandRight, std::size_t cap = 1 << 16) {
  SplitForResult res;
  TypingContext left, right;
  left.roleVars = right.roleVars = g.roleVars;
  left.groundVars = right.groundVars = g.groundVars;

  // Entries needing enumeration: (channel, parts)
  std::vector<std::pair<Channel, std::vector<Type>>> both;

  for (auto& [c, u] : g.chans) {
    bool dl = demandLeft.count(c), dr = demandRight.count(c);
    if (dl && dr) {
      if (u.isEndType()) {  // duplicate end entries (add-invertible up to congruence)
        left.chans[c] = RType::end();
        right.chans[c] = RType::end();
      } else if (u.parts.size() == 1) {
        res.hardError = true;
        res.error = "linear channel " + c.show() + " used twice";
        return res;
      } else {
        both.emplace_back(c, u.parts);
      }
    } else if (dr) {
      right.chans[c] = u;
    } else {
      // Demanded left, or undemanded: undemanded entries ride on the left
      // where weakening can absorb them if end-typed.
      left.chans[c] = u;
    }
  }

  if (both.empty()) {
    res.candidates.emplace_back(std::move(left), std::move(right));
    return res;
  }

  // Enumerate partitions for both-demanded parallel entries, both sides
  // nonempty first as the likely intent, then empty-sided assignments.
  std::vector<std::pair<TypingContext, TypingContext>> cands;
  cands.emplace_back(left, right);
  for (auto& [c, parts] : both) {
    std::vector<std::pair<TypingContext, TypingContext>> nextCands;
    for (auto& [l0, r0] : cands) {
      std::uint64_t combos = std::uint64_t{1} << parts.size();
      for (std::uint64_t mask = 0; mask < combos; ++mask) {
        std::vector<Type> lp, rp;
        for (std::size_t j = 0; j < parts.size(); ++j) {
          if (mask & (std::uint64_t{1} << j)) rp.push_back(parts[j]);
          else lp.push_back(parts[j]);
        }
        TypingContext l = l0, r = r0;
        if (!lp.empty()) l.chans[c] = RType::par(std::move(lp));
        if (!rp.empty()) r.chans[c] = RType::par(std::move(rp));
        nextCands.emplace_back(std::move(l), std::move(r));
        if (nextCands.size() > cap) {
          res.hardError = true;
          res.error = "context split enumeration exceeds cap; simplify the parallel composition";
          return res;
        }
      }
    }
    cands = std::move(nextCands);
  }
  // Prefer partitions where both sides got something.
  std::stable_sort(cands.begin(), cands.end(), [&](auto& a, auto& b) {
    auto score = [&](const std::pair<TypingContext, TypingContext>& cd) {
      int s = 0;
      for (auto& [c, parts] : both) {
        bool l = cd.first.chans.count(c), r = cd.second.chans.count(c);
        s += (l && r) ? 0 : 1;
      }
      return s;
    };
    return score(a) < score(b);
  });
  res.candidates = std::move(cands);
  return res;
}

}  // namespace mpst
