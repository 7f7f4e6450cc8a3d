// Behavioural-set computation (Def 6) and the property checkers over it:
// safety (Def 5), deadlock freedom and termination.
#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mpst/tsem.hpp"

namespace mpst {

inline constexpr std::size_t kDefaultBudget = 10000;

enum class Property { Safety, DeadlockFree, Terminating };

inline const char* propertyName(Property p) {
  switch (p) {
    case Property::Safety: return "safety";
    case Property::DeadlockFree: return "deadlock-free";
    default: return "terminating";
  }
}

inline std::optional<Property> propertyFromName(const std::string& s) {
  if (s == "safety") return Property::Safety;
  if (s == "deadlock-free") return Property::DeadlockFree;
  if (s == "terminating") return Property::Terminating;
  return std::nullopt;
}

// One-step unfolding of every entry of a context (all top-level binders).
inline TypingContext unfoldContextOnce(const TypingContext& g) {
  TypingContext out = g;
  for (auto& [c, u] : out.chans) u = unfold1(u);
  return out;
}

struct BehResult {
  bool finite = true;
  // finite outcome: representatives plus their unfolding closure
  std::vector<TypingContext> states;
  std::vector<std::string> stateKeys;  // canonical non-unfolded keys
  std::size_t repCount = 0;
  ReduceResult reach;
  // infinite outcome
  enum class Why { Budget, Crcp } why = Why::Budget;
  std::size_t budget = 0;
  std::string witness;
};

// beh(Gamma) = unf*({Gamma' | Gamma ->* Gamma'}): the reachable contexts
// together with their iterated top-level unfoldings, counted as distinct
// syntactic states (up to congruence and alpha renaming).
inline BehResult computeBeh(const TypingContext& g, std::size_t budget = kDefaultBudget) {
  BehResult res;
  res.budget = budget;
  res.reach = reduceStar(g, budget);
  if (res.reach.boundExceeded) {
    res.finite = false;
    res.why = BehResult::Why::Budget;
    res.witness = "frontier nonempty after " + std::to_string(res.reach.states.size()) +
                  " canonical states";
    return res;
  }
  res.repCount = res.reach.states.size();
  std::set<std::string> seen;
  for (auto& rep : res.reach.states) {
    TypingContext cur = rep;
    for (;;) {
      std::string key = contextKey(cur, false);
      if (!seen.insert(key).second) break;
      res.states.push_back(cur);
      res.stateKeys.push_back(key);
      TypingContext nxt = unfoldContextOnce(cur);
      if (contextKey(nxt, false) == key) break;
      cur = nxt;
    }
  }
  return res;
}

// --- Pointwise safety conditions (Def 5) ------------------------------------

namespace detail {

struct CondViolation {
  std::string condition;
  std::string detail;
};

inline bool payloadsCompatible(const std::vector<Payload>& snd, const std::vector<Payload>& rcv,
                               std::string& why) {
  if (snd.size() != rcv.size()) {
    why = "payload arity mismatch";
    return false;
  }
  for (std::size_t i = 0; i < snd.size(); ++i) {
    if (snd[i].kind != rcv[i].kind) {
      why = "payload kind mismatch at position " + std::to_string(i + 1);
      return false;
    }
    switch (snd[i].kind) {
      case Payload::Kind::Session:
        if (!isSubtype(snd[i].session, rcv[i].session)) {
          why = "session payload not a subtype at position " + std::to_string(i + 1);
          return false;
        }
        break;
      case Payload::Kind::Gr:
        if (snd[i].ground != rcv[i].ground) {
          why = "ground payload mismatch at position " + std::to_string(i + 1);
          return false;
        }
        break;
      case Payload::Kind::RoleSing:
        break;  // arity and kind suffice (role substitution happens at Com)
    }
  }
  return true;
}

// Checks conditions S-. on one context. S-mu and S-> hold by construction of
// the behavioural set.
inline std::optional<CondViolation> safetyViolation(const TypingContext& g) {
  auto frv = freeRoleVars(g);
  if (!frv.empty())
    return CondViolation{"S-role", "free role variable @" + *frv.begin() + " in context"};

  struct Side {
    const Channel* chan;
    std::size_t part;
    Type t;  // unfolded component
    bool whole;  // the entry has no other components
  };
  std::vector<Side> outs, ins;
  for (auto& [c, u] : g.chans) {
    if (!c.endpoint) continue;
    for (std::size_t i = 0; i < u.parts.size(); ++i) {
      Type t = unfoldStar(u.parts[i]);
      if (t->kind == SessionType::Kind::Select) outs.push_back({&c, i, t, u.parts.size() == 1});
      else if (t->kind == SessionType::Kind::Branch)
        ins.push_back({&c, i, t, u.parts.size() == 1});
    }
  }
  for (auto& o : outs) {
    for (auto& in : ins) {
      if (o.chan->session != in.chan->session) continue;
      if (o.chan == in.chan && o.part == in.part) continue;
      const std::string& p = o.chan->role;
      const std::string& q = in.chan->role;
      bool applies;
      const char* cond;
      if (in.t->replicated) {
        applies = in.t->from.var || (!in.t->from.var && in.t->from.name == p);
        cond = "S-!+&";
      } else {
        applies = !in.t->from.var && in.t->from.name == p;
        cond = "S-+&";
      }
      if (!applies) continue;
      // K: the sender's options aimed at q. Common labels need compatible
      // payloads. No common label at all is a violation only when both
      // entries are whole single components aimed at each other: a sender
      // facing a replicated branch or an entry with further parallel
      // components can be served by a pulled-out copy or a later state.
      std::size_t aimed = 0, common = 0;
      for (auto& op : o.t->options) {
        if (op.to.var || op.to.name != q) continue;
        ++aimed;
        const TypeBranch* match = nullptr;
        for (auto& br : in.t->branches)
          if (br.label == op.label) match = &br;
        if (!match) continue;
        ++common;
        std::string why;
        if (!payloadsCompatible(op.payloads, match->payloads, why))
          return CondViolation{cond,
                               "label " + op.label + " from " + p + " to " + q + ": " + why};
      }
      if (aimed > 0 && common == 0 && !in.t->replicated && o.whole && in.whole)
        return CondViolation{cond, "no common message label between " + p + " and " + q};
    }
  }
  return std::nullopt;
}

// A context is quiescent when every live component is an idle replicated
// branch; together with end-typed entries this is a successful terminal.
inline bool quiescent(const TypingContext& g) {
  for (auto& [c, u] : g.chans)
    for (auto& p : u.parts) {
      Type t = unfoldStar(p);
      if (!(t->kind == SessionType::Kind::Branch && t->replicated)) return false;
    }
  return true;
}

}  // namespace detail

struct PropertyVerdict {
  enum class Status { Holds, Fails, Unknown };
  Status status = Status::Holds;
  Property property = Property::Safety;
  std::string reason;
  std::string stateDescription;
  std::vector<Action> trace;
  std::size_t statesExplored = 0;

  bool holds() const { return status == Status::Holds; }
};

namespace detail {

inline PropertyVerdict checkProperty(const TypingContext& g, Property prop, std::size_t budget) {
  PropertyVerdict v;
  v.property = prop;

  ReduceResult reach;
  std::map<std::string, int> ids;
  std::deque<int> frontier;
  auto intern = [&](const TypingContext& ctx, int par, const Action* act) -> int {
    std::string key = contextKey(ctx, true);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(reach.states.size());
    reach.states.push_back(ctx);
    reach.parent.push_back(par);
    reach.parentAction.push_back(act ? *act : Action{});
    ids.emplace(std::move(key), id);
    frontier.push_back(id);
    return id;
  };

  auto fail = [&](int state, const std::string& reason) {
    v.status = PropertyVerdict::Status::Fails;
    v.reason = reason;
    v.stateDescription = print(reach.states[state]);
    v.trace = reach.traceTo(state);
    v.statesExplored = reach.states.size();
  };

  intern(g, -1, nullptr);
  std::vector<std::vector<int>> succ;
  while (!frontier.empty()) {
    if (reach.states.size() > budget) {
      v.status = PropertyVerdict::Status::Unknown;
      v.reason = "unknown(infinite): behavioural set exceeds budget of " + std::to_string(budget);
      v.statesExplored = reach.states.size();
      return v;
    }
    int id = frontier.front();
    frontier.pop_front();
    TypingContext cur = reach.states[id];

    if (auto viol = safetyViolation(cur)) {
      fail(id, std::string("safety condition ") + viol->condition + " violated: " + viol->detail);
      return v;
    }
    auto steps = comSteps(cur);
    if (prop != Property::Safety && steps.empty() && !quiescent(cur)) {
      fail(id, "stuck state: no communication possible and context not terminated");
      return v;
    }
    if (static_cast<int>(succ.size()) <= id) succ.resize(id + 1);
    for (auto& [act, nxt] : steps) {
      int to = intern(nxt, id, &act);
      succ[id].push_back(to);
    }
  }

  if (prop == Property::Terminating) {
    // Cycle detection over the canonical reduction graph.
    succ.resize(reach.states.size());
    std::vector<int> color(reach.states.size(), 0);
    std::vector<std::pair<int, std::size_t>> stack;
    for (std::size_t s = 0; s < reach.states.size(); ++s) {
      if (color[s]) continue;
      stack.push_back({static_cast<int>(s), 0});
      color[s] = 1;
      while (!stack.empty()) {
        auto [n, i] = stack.back();
        if (i < succ[n].size()) {
          stack.back().second++;
          int m = succ[n][i];
          if (color[m] == 1) {
            fail(m, "reduction cycle: state can revisit itself via communication");
            return v;
          }
          if (color[m] == 0) {
            color[m] = 1;
            stack.push_back({m, 0});
          }
        } else {
          color[n] = 2;
          stack.pop_back();
        }
      }
    }
  }

  v.status = PropertyVerdict::Status::Holds;
  v.statesExplored = reach.states.size();
  return v;
}

}  // namespace detail

// phi = safety (Def 5) via exhaustive check of the behavioural set.
inline PropertyVerdict checkSafety(const TypingContext& g, std::size_t budget = kDefaultBudget) {
  return detail::checkProperty(g, Property::Safety, budget);
}

// Safety plus: every reachable context can communicate or is terminated
// (end entries and idle replicated branches only).
inline PropertyVerdict checkDeadlockFree(const TypingContext& g,
                                         std::size_t budget = kDefaultBudget) {
  return detail::checkProperty(g, Property::DeadlockFree, budget);
}

// Deadlock freedom plus an acyclic reduction graph.
inline PropertyVerdict checkTerminating(const TypingContext& g,
                                        std::size_t budget = kDefaultBudget) {
  return detail::checkProperty(g, Property::Terminating, budget);
}

inline PropertyVerdict checkProperty(const TypingContext& g, Property prop,
                                     std::size_t budget = kDefaultBudget) {
  return detail::checkProperty(g, prop, budget);
}

// Line-based dump of the behavioural graph for debugging and CI diffs.
inline std::string dumpBehGraph(const BehResult& beh) {
  std::string out;
  for (std::size_t i = 0; i < beh.reach.states.size(); ++i)
    out += "state " + std::to_string(i) + ": " + print(beh.reach.states[i]) + "\n";
  for (auto& [from, act, to] : beh.reach.edges)
    out += std::to_string(from) + " --" + act.label + "--> " + std::to_string(to) + "\n";
  return out;
}

}  // namespace mpst
