// Labelled transition system on typing contexts (Fig 6) and context
// reduction: input/output steps per component, synchronizations, and the
// bounded reachable-set exploration.
#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mpst/context.hpp"

namespace mpst {

struct Action {
  enum class Kind { Out, In, Com };
  Kind kind = Kind::Com;
  std::string session;
  std::string subject;  // Out: sender role; In: receiver role; Com: sender role
  Role other;           // Out: target; In: sender side (maybe binding var); Com: receiver
  std::string label;
  std::vector<Payload> payloads;  // Out / In
  bool bindingFrom = false;       // In only: universal-receive binder

  std::string show() const {
    switch (kind) {
      case Kind::Out: return session + ":" + subject + "!" + other.show() + " " + label;
      case Kind::In: return session + ":" + subject + "?" + other.show() + " " + label;
      case Kind::Com: return session + ": " + subject + " -> " + other.show() + " : " + label;
    }
    return "?";
  }
};

namespace detail {

// Rename a branch's role-payload binders apart from the avoid set. A binder
// covers the payloads to its right and the continuation.
inline TypeBranch renameBranchBindersApart(TypeBranch br, const std::set<std::string>& avoid) {
  for (std::size_t i = 0; i < br.payloads.size(); ++i) {
    Payload& p = br.payloads[i];
    if (p.kind != Payload::Kind::RoleSing || !p.role.var || !avoid.count(p.role.name)) continue;
    std::string old = p.role.name;
    Role fr = Role::rvar(freshName(old));
    for (std::size_t j = i + 1; j < br.payloads.size(); ++j)
      br.payloads[j] = substRolePayload(br.payloads[j], fr, old);
    br.cont = detail::substRoleTotal(br.cont, fr, old);
    p.role.name = fr.name;
  }
  return br;
}

// One firable top-level action of one parallel component of one entry.
struct PartAction {
  Channel chan;
  std::size_t partIdx = 0;
  bool isOut = false;
  Action act;
  Type unfoldedPart;  // acting component after on-demand unfolding
  Type cont;          // continuation (Out / In) or extracted copy (replicated In)
  bool replicated = false;
  std::vector<Role> roleBinders;  // receiver role-payload slots, positional
};

inline std::vector<PartAction> enumPartActions(const TypingContext& g) {
  std::vector<PartAction> out;
  std::set<std::string> avoid = freeRoleVars(g);
  avoid.insert(g.roleVars.begin(), g.roleVars.end());
  for (auto& [chan, u] : g.chans) {
    if (!chan.endpoint) continue;
    for (std::size_t i = 0; i < u.parts.size(); ++i) {
      Type part = unfoldStar(u.parts[i]);
      if (part->kind == SessionType::Kind::Select) {
        for (auto& op : part->options) {
          PartAction pa;
          pa.chan = chan;
          pa.partIdx = i;
          pa.isOut = true;
          pa.unfoldedPart = part;
          pa.cont = op.cont;
          pa.act.kind = Action::Kind::Out;
          pa.act.session = chan.session;
          pa.act.subject = chan.role;
          pa.act.other = op.to;
          pa.act.label = op.label;
          pa.act.payloads = op.payloads;
          out.push_back(std::move(pa));
        }
      } else if (part->kind == SessionType::Kind::Branch) {
        Role from = part->from;
        bool binding = part->replicated && part->from.var;
        for (auto& br : part->branches) {
          TypeBranch b2 = br;
          Role from2 = from;
          if (binding && avoid.count(from.name)) {
            Role fr = Role::rvar(freshName(from.name));
            b2 = substRoleTypeBranch(b2, fr, from.name);
            from2 = fr;
          }
          b2 = renameBranchBindersApart(std::move(b2), avoid);
          PartAction pa;
          pa.chan = chan;
          pa.partIdx = i;
          pa.unfoldedPart = part;
          pa.cont = b2.cont;
          pa.replicated = part->replicated;
          pa.act.kind = Action::Kind::In;
          pa.act.session = chan.session;
          pa.act.subject = chan.role;
          pa.act.other = from2;
          pa.act.label = b2.label;
          pa.act.payloads = b2.payloads;
          pa.act.bindingFrom = binding;
          for (auto& p : b2.payloads)
            if (p.kind == Payload::Kind::RoleSing) pa.roleBinders.push_back(p.role);
          out.push_back(std::move(pa));
        }
      }
    }
  }
  return out;
}

// Replace the acting component of pa's entry. The replicated branch is kept
// verbatim; the new part (continuation or extracted copy) is appended.
inline TypingContext applyPartStep(const TypingContext& g, const PartAction& pa,
                                   const Type& newPart, bool keepReplicated) {
  TypingContext out = g;
  const RType& u = out.chans.at(pa.chan);
  std::vector<Type> parts;
  for (std::size_t j = 0; j < u.parts.size(); ++j) {
    if (j == pa.partIdx) {
      if (keepReplicated) parts.push_back(pa.unfoldedPart);
    } else {
      parts.push_back(u.parts[j]);
    }
  }
  if (newPart) parts.push_back(newPart);
  out.chans[pa.chan] = RType::par(std::move(parts));
  return out;
}

}  // namespace detail

// All input/output-labelled single steps of a context.
inline std::vector<std::pair<Action, TypingContext>> localSteps(const TypingContext& g) {
  std::vector<std::pair<Action, TypingContext>> out;
  for (auto& pa : detail::enumPartActions(g)) {
    TypingContext next = detail::applyPartStep(g, pa, pa.cont, pa.replicated);
    out.emplace_back(pa.act, std::move(next));
  }
  return out;
}

// All synchronizations (Gamma-Com1 / Gamma-Com2).
inline std::vector<std::pair<Action, TypingContext>> comSteps(const TypingContext& g) {
  std::vector<std::pair<Action, TypingContext>> out;
  auto pas = detail::enumPartActions(g);
  std::set<std::string> seen;
  for (auto& snd : pas) {
    if (!snd.isOut) continue;
    if (snd.act.other.var) continue;  // cannot aim at an unbound role variable
    for (auto& rcv : pas) {
      if (rcv.isOut) continue;
      if (snd.chan == rcv.chan && snd.partIdx == rcv.partIdx) continue;
      if (rcv.chan.session != snd.chan.session) continue;
      if (rcv.chan.role != snd.act.other.name) continue;
      if (rcv.act.label != snd.act.label) continue;
      bool com2 = rcv.act.bindingFrom;
      if (!com2 && (rcv.act.other.var || rcv.act.other.name != snd.chan.role)) continue;

      if (snd.act.payloads.size() != rcv.act.payloads.size()) continue;
      bool okPay = true;
      std::vector<std::pair<std::string, Role>> roleSubsts;  // receiver binder -> sent role
      std::size_t binderIdx = 0;
      for (std::size_t i = 0; i < snd.act.payloads.size() && okPay; ++i) {
        const Payload& ps = snd.act.payloads[i];
        const Payload& pr = rcv.act.payloads[i];
        if (ps.kind != pr.kind) {
          okPay = false;
          break;
        }
        switch (ps.kind) {
          case Payload::Kind::Session: okPay = isSubtype(ps.session, pr.session); break;
          case Payload::Kind::Gr: okPay = ps.ground == pr.ground; break;
          case Payload::Kind::RoleSing: {
            Role slot = rcv.roleBinders[binderIdx++];
            if (slot.var) roleSubsts.emplace_back(slot.name, ps.role);
            else okPay = (!ps.role.var && ps.role == slot);  // pattern-matched literal
            break;
          }
        }
      }
      if (!okPay) continue;

      // Receiver residual: substitutions affect only the extracted copy or
      // advanced continuation, never the preserved replicated component.
      Type resid = rcv.cont;
      if (com2) resid = substRole(resid, Role::lit(snd.chan.role), rcv.act.other.name);
      for (auto& [var, who] : roleSubsts) resid = substRole(resid, who, var);

      TypingContext afterSend = detail::applyPartStep(g, snd, snd.cont, false);
      detail::PartAction rcv2 = rcv;
      if (rcv.chan == snd.chan && rcv.partIdx > snd.partIdx) rcv2.partIdx -= 1;
      TypingContext next = detail::applyPartStep(afterSend, rcv2, resid, rcv.replicated);

      Action com;
      com.kind = Action::Kind::Com;
      com.session = snd.chan.session;
      com.subject = snd.chan.role;
      com.other = Role::lit(rcv.chan.role);
      com.label = snd.act.label;

      std::string key = com.show() + "|" + contextKey(next, true);
      if (seen.insert(key).second) out.emplace_back(com, std::move(next));
    }
  }
  return out;
}

inline bool reduces(const TypingContext& g) { return !comSteps(g).empty(); }

struct ReduceResult {
  std::vector<TypingContext> states;  // representatives in discovery order
  std::vector<std::string> keys;      // canonical (unfolded) key per state
  std::vector<std::tuple<int, Action, int>> edges;
  std::vector<int> parent;  // BFS tree, -1 at the root
  std::vector<Action> parentAction;
  bool boundExceeded = false;

  std::vector<Action> traceTo(int state) const {
    std::vector<Action> tr;
    for (int s = state; parent[s] >= 0; s = parent[s]) tr.push_back(parentAction[s]);
    std::reverse(tr.begin(), tr.end());
    return tr;
  }
};

// Reachable set under comSteps, deduplicated modulo type congruence and
// unfoldStar, up to `bound` canonical states.
inline ReduceResult reduceStar(const TypingContext& g, std::size_t bound) {
  ReduceResult res;
  std::map<std::string, int> ids;
  std::deque<int> frontier;

  auto intern = [&](const TypingContext& ctx, int par, const Action* act) -> int {
    std::string key = contextKey(ctx, true);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(res.states.size());
    res.states.push_back(ctx);
    res.keys.push_back(key);
    res.parent.push_back(par);
    res.parentAction.push_back(act ? *act : Action{});
    ids.emplace(std::move(key), id);
    frontier.push_back(id);
    return id;
  };

  intern(g, -1, nullptr);
  while (!frontier.empty()) {
    if (res.states.size() > bound) {
      res.boundExceeded = true;
      return res;
    }
    int id = frontier.front();
    frontier.pop_front();
    TypingContext cur = res.states[id];
    for (auto& [act, nxt] : comSteps(cur)) {
      int to = intern(nxt, id, &act);
      res.edges.emplace_back(id, act, to);
    }
  }
  return res;
}

}  // namespace mpst
