// Executable operational semantics of Fig 2 with structural congruence:
// normalization to a flat configuration, step enumeration, schedulers, and
// the session-fidelity harness.
#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mpst/typecheck.hpp"

namespace mpst {

struct DefEntry {
  std::string name;
  std::vector<std::pair<std::string, Type>> params;
  Proc body;
};

struct SessionEntry {
  std::string name;
  Protocol proto;
};

// Normal form: parallel compositions flattened, restrictions and definitions
// hoisted outermost, inactive threads dropped.
struct Config {
  std::vector<DefEntry> defs;
  std::vector<SessionEntry> sessions;
  std::vector<Proc> threads;
};

struct StepLabel {
  enum class Rule { RC, RBang1, RBang2, RPlus, RX };
  Rule rule = Rule::RC;
  std::string session, fromRole, toRole, label;
  int thread = -1;       // acting thread (sender / chooser / caller)
  int choiceIndex = -1;  // R-+
  std::string defName;   // R-X
  std::vector<std::string> substs;

  static const char* ruleName(Rule r) {
    switch (r) {
      case Rule::RC: return "R-C";
      case Rule::RBang1: return "R-!C1";
      case Rule::RBang2: return "R-!C2";
      case Rule::RPlus: return "R-+";
      default: return "R-X";
    }
  }

  std::string show() const {
    std::string out = ruleName(rule);
    if (rule == Rule::RPlus) {
      out += " choice " + std::to_string(choiceIndex);
    } else if (rule == Rule::RX) {
      out += " unfold " + defName;
    } else {
      out += " " + session + " " + fromRole + "->" + toRole + " " + label;
    }
    if (!substs.empty()) {
      out += " {";
      for (std::size_t i = 0; i < substs.size(); ++i) {
        if (i) out += ", ";
        out += substs[i];
      }
      out += "}";
    }
    return out;
  }
};

// --- Substitution of concrete values for binders ----------------------------

namespace detail {

struct Subst {
  std::map<std::string, Value> chans;  // variable -> endpoint or ground value
  std::map<std::string, Role> roles;   // role variable -> role

  bool empty() const { return chans.empty() && roles.empty(); }
};

inline Channel substChan(const Channel& c, const Subst& s) {
  if (c.endpoint) return c;
  auto it = s.chans.find(c.name);
  if (it != s.chans.end() && it->second.kind == Value::Kind::Chan) return it->second.chan;
  return c;
}

inline Value substValue(const Value& v, const Subst& s) {
  if (v.kind == Value::Kind::Chan && !v.chan.endpoint) {
    auto it = s.chans.find(v.chan.name);
    if (it != s.chans.end()) return it->second;
    return v;
  }
  if (v.kind == Value::Kind::RoleVal && v.role.var) {
    auto it = s.roles.find(v.role.name);
    if (it != s.roles.end()) return Value::ofRole(it->second);
    return v;
  }
  return v;
}

inline Role substRoleRef(const Role& r, const Subst& s) {
  if (!r.var) return r;
  auto it = s.roles.find(r.name);
  return it == s.roles.end() ? r : it->second;
}

inline Proc applySubst(const Proc& p, Subst s) {
  using K = Process::Kind;
  if (s.empty()) return p;
  switch (p->kind) {
    case K::Inact: return p;
    case K::Par: return pPar(applySubst(p->left, s), applySubst(p->right, s), p->pos);
    case K::New: return pNew(p->session, p->protoName, p->proto, applySubst(p->body, s), p->pos);
    case K::Send: {
      std::vector<SendArm> arms = p->arms;
      for (auto& a : arms) {
        a.subject = substChan(a.subject, s);
        a.to = substRoleRef(a.to, s);
        for (auto& v : a.payloads) v = substValue(v, s);
        a.cont = applySubst(a.cont, s);
      }
      return pSend(std::move(arms), p->pos);
    }
    case K::Recv: {
      // A replicated-receive subject variable that is being substituted is in
      // scope, hence a reference to the enclosing binder, not a fresh binder.
      Role from = substRoleRef(p->from, s);
      std::vector<RecvArm> bs = p->branches;
      for (auto& b : bs) {
        Subst s3 = s;
        for (auto& bd : b.binders) {
          if (bd.roleVar) s3.roles.erase(bd.name);
          else s3.chans.erase(bd.name);
        }
        b.cont = applySubst(b.cont, s3);
      }
      return pRecv(p->replicated, substChan(p->subject, s), from, std::move(bs), p->pos);
    }
    case K::Def: {
      Subst s2 = s;
      for (auto& [n, t] : p->params) s2.chans.erase(n);
      return pDef(p->defName, p->params, applySubst(p->declBody, s2), applySubst(p->scope, s),
                  p->pos);
    }
    case K::Call: {
      std::vector<Channel> args = p->args;
      for (auto& a : args) a = substChan(a, s);
      return pCall(p->defName, std::move(args), p->pos);
    }
  }
  return p;
}

inline Proc substSession(const Proc& p, const std::string& from, const std::string& to) {
  using K = Process::Kind;
  auto mapChan = [&](const Channel& c) {
    if (c.endpoint && c.session == from) return Channel::ep(to, c.role);
    return c;
  };
  switch (p->kind) {
    case K::Inact: return p;
    case K::Par: return pPar(substSession(p->left, from, to), substSession(p->right, from, to));
    case K::New:
      if (p->session == from) return p;  // shadowed
      return pNew(p->session, p->protoName, p->proto, substSession(p->body, from, to), p->pos);
    case K::Send: {
      std::vector<SendArm> arms = p->arms;
      for (auto& a : arms) {
        a.subject = mapChan(a.subject);
        for (auto& v : a.payloads)
          if (v.kind == Value::Kind::Chan) v = Value::ofChan(mapChan(v.chan));
        a.cont = substSession(a.cont, from, to);
      }
      return pSend(std::move(arms), p->pos);
    }
    case K::Recv: {
      std::vector<RecvArm> bs = p->branches;
      for (auto& b : bs) b.cont = substSession(b.cont, from, to);
      return pRecv(p->replicated, mapChan(p->subject), p->from, std::move(bs), p->pos);
    }
    case K::Def:
      return pDef(p->defName, p->params, substSession(p->declBody, from, to),
                  substSession(p->scope, from, to), p->pos);
    case K::Call: {
      std::vector<Channel> args = p->args;
      for (auto& a : args) a = mapChan(a);
      return pCall(p->defName, std::move(args), p->pos);
    }
  }
  return p;
}

inline Proc substDefName(const Proc& p, const std::string& from, const std::string& to) {
  using K = Process::Kind;
  switch (p->kind) {
    case K::Inact: return p;
    case K::Par: return pPar(substDefName(p->left, from, to), substDefName(p->right, from, to));
    case K::New:
      return pNew(p->session, p->protoName, p->proto, substDefName(p->body, from, to), p->pos);
    case K::Send: {
      std::vector<SendArm> arms = p->arms;
      for (auto& a : arms) a.cont = substDefName(a.cont, from, to);
      return pSend(std::move(arms), p->pos);
    }
    case K::Recv: {
      std::vector<RecvArm> bs = p->branches;
      for (auto& b : bs) b.cont = substDefName(b.cont, from, to);
      return pRecv(p->replicated, p->subject, p->from, std::move(bs), p->pos);
    }
    case K::Def:
      if (p->defName == from) return p;  // shadowed
      return pDef(p->defName, p->params, substDefName(p->declBody, from, to),
                  substDefName(p->scope, from, to), p->pos);
    case K::Call:
      if (p->defName == from) return pCall(to, p->args, p->pos);
      return p;
  }
  return p;
}

}  // namespace detail

// --- Normalization (structural congruence) ----------------------------------

namespace detail {

inline void normalizeInto(Config& cfg, const Proc& p) {
  switch (p->kind) {
    case Process::Kind::Inact: return;
    case Process::Kind::Par:
      normalizeInto(cfg, p->left);
      normalizeInto(cfg, p->right);
      return;
    case Process::Kind::New: {
      std::string name = p->session;
      Proc body = p->body;
      for (auto& se : cfg.sessions) {
        if (se.name == name) {
          std::string f = freshName(name);
          body = substSession(body, name, f);
          name = f;
          break;
        }
      }
      cfg.sessions.push_back({name, p->proto});
      normalizeInto(cfg, body);
      return;
    }
    case Process::Kind::Def: {
      std::string name = p->defName;
      Proc declBody = p->declBody;
      Proc scope = p->scope;
      for (auto& d : cfg.defs) {
        if (d.name == name) {
          std::string f = freshName(name);
          declBody = substDefName(declBody, name, f);
          scope = substDefName(scope, name, f);
          name = f;
          break;
        }
      }
      cfg.defs.push_back({name, p->params, declBody});
      normalizeInto(cfg, scope);
      return;
    }
    default: cfg.threads.push_back(p);
  }
}

}  // namespace detail

namespace detail {

inline void canonicalizeConfig(Config& cfg) {
  std::sort(cfg.defs.begin(), cfg.defs.end(),
            [](const DefEntry& a, const DefEntry& b) { return a.name < b.name; });
  std::sort(cfg.sessions.begin(), cfg.sessions.end(),
            [](const SessionEntry& a, const SessionEntry& b) { return a.name < b.name; });
  std::sort(cfg.threads.begin(), cfg.threads.end(),
            [](const Proc& a, const Proc& b) { return print(a) < print(b); });
}

}  // namespace detail

inline Config normalize(const Proc& p) {
  Config cfg;
  detail::normalizeInto(cfg, p);
  detail::canonicalizeConfig(cfg);
  return cfg;
}

inline Config normalize(const Config& c) {
  Config cfg;
  cfg.defs = c.defs;
  cfg.sessions = c.sessions;
  for (auto& t : c.threads) detail::normalizeInto(cfg, t);
  detail::canonicalizeConfig(cfg);
  return cfg;
}

// State identity. Definition names introduced by scope extrusion depend on
// the hoisting order, so they are renamed by content signature first.
inline std::string configKey(const Config& c) {
  std::vector<std::pair<std::string, std::size_t>> order;
  for (std::size_t i = 0; i < c.defs.size(); ++i) {
    std::string sig;
    for (auto& [n, t] : c.defs[i].params) sig += print(t) + ",";
    sig += "=" + print(detail::substDefName(c.defs[i].body, c.defs[i].name, "__self"));
    order.emplace_back(std::move(sig), i);
  }
  std::sort(order.begin(), order.end());
  std::vector<std::pair<std::string, std::string>> renames;  // old -> canonical
  for (std::size_t k = 0; k < order.size(); ++k)
    renames.emplace_back(c.defs[order[k].second].name, "D" + std::to_string(k));
  auto renameAll = [&](Proc p) {
    for (auto& [from, to] : renames) p = detail::substDefName(p, from, to);
    return p;
  };
  std::string out;
  for (auto& [sig, i] : order) {
    const DefEntry& d = c.defs[i];
    out += "def ";
    for (auto& [n, t] : d.params) out += n + ":" + print(t) + ",";
    out += "=" + print(renameAll(d.body)) + ";";
  }
  for (auto& s : c.sessions) out += "new " + s.name + ";";
  std::vector<std::string> ts;
  ts.reserve(c.threads.size());
  for (auto& t : c.threads) ts.push_back(print(renameAll(t)));
  std::sort(ts.begin(), ts.end());
  for (auto& t : ts) out += t + " | ";
  return out;
}

inline std::string print(const Config& c) {
  std::string out;
  for (auto& s : c.sessions) out += "new " + s.name + " : " + print(s.proto) + " .\n";
  if (c.threads.empty()) return out + "0\n";
  for (std::size_t i = 0; i < c.threads.size(); ++i)
    out += (i ? "| " : "  ") + print(c.threads[i]) + "\n";
  return out;
}

// --- Step enumeration (Fig 2) ------------------------------------------------

inline std::vector<std::pair<StepLabel, Config>> enumerateSteps(const Config& cfg) {
  std::vector<std::pair<StepLabel, Config>> out;

  auto withThreads = [&](std::size_t drop1, std::size_t drop2, std::vector<Proc> add) {
    Config next;
    next.defs = cfg.defs;
    next.sessions = cfg.sessions;
    for (std::size_t i = 0; i < cfg.threads.size(); ++i)
      if (i != drop1 && i != drop2) next.threads.push_back(cfg.threads[i]);
    for (auto& t : add) next.threads.push_back(t);
    return normalize(next);
  };

  for (std::size_t i = 0; i < cfg.threads.size(); ++i) {
    const Proc& t = cfg.threads[i];
    if (t->kind == Process::Kind::Send && t->arms.size() > 1) {
      for (std::size_t j = 0; j < t->arms.size(); ++j) {
        StepLabel lab;
        lab.rule = StepLabel::Rule::RPlus;
        lab.thread = static_cast<int>(i);
        lab.choiceIndex = static_cast<int>(j);
        lab.label = t->arms[j].label;
        out.emplace_back(lab, withThreads(i, i, {pSend({t->arms[j]}, t->pos)}));
      }
      continue;
    }
    if (t->kind == Process::Kind::Call) {
      for (auto& d : cfg.defs) {
        if (d.name != t->defName || d.params.size() != t->args.size()) continue;
        detail::Subst s;
        for (std::size_t k = 0; k < d.params.size(); ++k)
          s.chans[d.params[k].first] = Value::ofChan(t->args[k]);
        StepLabel lab;
        lab.rule = StepLabel::Rule::RX;
        lab.thread = static_cast<int>(i);
        lab.defName = d.name;
        out.emplace_back(lab, withThreads(i, i, {detail::applySubst(d.body, s)}));
        break;
      }
      continue;
    }
    if (t->kind != Process::Kind::Send) continue;
    const SendArm& arm = t->arms[0];
    if (!arm.subject.endpoint || arm.to.var) continue;  // stuck until instantiated
    for (std::size_t k = 0; k < cfg.threads.size(); ++k) {
      if (k == i) continue;
      const Proc& r = cfg.threads[k];
      if (r->kind != Process::Kind::Recv) continue;
      if (!r->subject.endpoint) continue;
      if (r->subject.session != arm.subject.session) continue;
      if (r->subject.role != arm.to.name) continue;
      bool universal = r->replicated && r->from.var;
      if (!universal && (r->from.var || r->from.name != arm.subject.role)) continue;
      for (auto& br : r->branches) {
        if (br.label != arm.label) continue;
        if (br.binders.size() != arm.payloads.size()) continue;
        detail::Subst s;
        StepLabel lab;
        bool kindOk = true;
        for (std::size_t b = 0; b < br.binders.size() && kindOk; ++b) {
          const RBinder& bd = br.binders[b];
          const Value& v = arm.payloads[b];
          if (bd.roleVar) {
            if (v.kind != Value::Kind::RoleVal || v.role.var) {
              kindOk = false;
              break;
            }
            s.roles[bd.name] = v.role;
            lab.substs.push_back(v.role.show() + "/@" + bd.name);
          } else {
            if (v.kind == Value::Kind::RoleVal) {
              kindOk = false;
              break;
            }
            s.chans[bd.name] = v;
            lab.substs.push_back(print(v) + "/" + bd.name);
          }
        }
        if (!kindOk) continue;
        Proc body = detail::applySubst(br.cont, s);
        if (universal) {
          body = substRole(body, Role::lit(arm.subject.role), r->from.name);
          lab.substs.push_back(arm.subject.role + "/@" + r->from.name);
        }
        lab.rule = !r->replicated ? StepLabel::Rule::RC
                                  : (universal ? StepLabel::Rule::RBang2 : StepLabel::Rule::RBang1);
        lab.thread = static_cast<int>(i);
        lab.session = arm.subject.session;
        lab.fromRole = arm.subject.role;
        lab.toRole = arm.to.name;
        lab.label = arm.label;
        std::vector<Proc> add{arm.cont, body};
        if (r->replicated) add.push_back(r);
        out.emplace_back(lab, r->replicated ? withThreads(i, k, add) : withThreads(i, k, add));
      }
    }
  }
  // Deterministic enumeration order, deduplicated.
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.first.show() + configKey(a.second) < b.first.show() + configKey(b.second);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& a, const auto& b) {
                          return a.first.show() == b.first.show() &&
                                 configKey(a.second) == configKey(b.second);
                        }),
            out.end());
  return out;
}

inline std::size_t blockedThreads(const Config& cfg) {
  std::size_t n = 0;
  for (auto& t : cfg.threads) {
    if (t->kind == Process::Kind::Recv && t->replicated) continue;  // idle server
    ++n;
  }
  return n;
}

// --- Schedulers ---------------------------------------------------------------

enum class Scheduler { Exhaustive, Random, Interactive };

struct RunResult {
  std::vector<StepLabel> trace;
  Config final;
  bool stepLimit = false;
  // exhaustive only:
  std::size_t statesExplored = 0;
  std::vector<Config> terminals;
};

inline RunResult runRandom(const Config& start, std::uint64_t seed, std::size_t maxSteps) {
  RunResult res;
  std::mt19937_64 rng(seed);
  Config cur = start;
  for (std::size_t n = 0; n < maxSteps; ++n) {
    auto steps = enumerateSteps(cur);
    if (steps.empty()) {
      res.final = cur;
      return res;
    }
    auto& pick = steps[rng() % steps.size()];
    res.trace.push_back(pick.first);
    cur = pick.second;
  }
  res.final = cur;
  res.stepLimit = !enumerateSteps(cur).empty();
  return res;
}

inline RunResult runExhaustive(const Config& start, std::size_t maxStates) {
  RunResult res;
  std::map<std::string, int> ids;
  std::deque<Config> frontier;
  ids[configKey(start)] = 0;
  frontier.push_back(start);
  std::size_t visited = 0;
  while (!frontier.empty()) {
    if (visited >= maxStates) {
      res.stepLimit = true;
      break;
    }
    Config cur = frontier.front();
    frontier.pop_front();
    ++visited;
    auto steps = enumerateSteps(cur);
    if (steps.empty()) {
      res.terminals.push_back(cur);
      continue;
    }
    for (auto& [lab, nxt] : steps) {
      std::string key = configKey(nxt);
      if (ids.emplace(key, static_cast<int>(ids.size())).second) frontier.push_back(nxt);
    }
  }
  res.statesExplored = visited;
  return res;
}

inline RunResult runInteractive(const Config& start,
                                const std::function<int(const std::vector<StepLabel>&)>& choose,
                                std::size_t maxSteps) {
  RunResult res;
  Config cur = start;
  for (std::size_t n = 0; n < maxSteps; ++n) {
    auto steps = enumerateSteps(cur);
    if (steps.empty()) {
      res.final = cur;
      return res;
    }
    std::vector<StepLabel> labels;
    labels.reserve(steps.size());
    for (auto& [lab, c] : steps) labels.push_back(lab);
    int pick = choose(labels);
    if (pick < 0 || pick >= static_cast<int>(steps.size())) {
      res.final = cur;
      return res;
    }
    res.trace.push_back(steps[pick].first);
    cur = steps[pick].second;
  }
  res.final = cur;
  res.stepLimit = !enumerateSteps(cur).empty();
  return res;
}

// --- Session fidelity (Thm 2) -------------------------------------------------

struct FidelityReport {
  bool preconditionsOk = true;
  std::vector<std::string> preconditionViolations;
  bool holds = true;
  std::string violation;
  std::size_t statesChecked = 0;
};

namespace detail {

// Def 9(1): guarded definitions.
inline void checkGuardedDefs(const Proc& p, std::vector<std::string>& out) {
  using K = Process::Kind;
  switch (p->kind) {
    case K::Inact: return;
    case K::Par:
      checkGuardedDefs(p->left, out);
      checkGuardedDefs(p->right, out);
      return;
    case K::New: checkGuardedDefs(p->body, out); return;
    case K::Send:
      for (auto& a : p->arms) checkGuardedDefs(a.cont, out);
      return;
    case K::Recv:
      for (auto& b : p->branches) checkGuardedDefs(b.cont, out);
      return;
    case K::Call: return;
    case K::Def: {
      std::set<std::string> linearParams;
      for (auto& [n, t] : p->params)
        if (!isSubtype(t, tEnd())) linearParams.insert(n);
      // Within the declaration body, calls passing a linear parameter must sit
      // under a communication prefix on that parameter.
      std::function<void(const Proc&, std::set<std::string>)> walk =
          [&](const Proc& q, std::set<std::string> guarded) {
            switch (q->kind) {
              case K::Inact: return;
              case K::Par:
                walk(q->left, guarded);
                walk(q->right, guarded);
                return;
              case K::New: walk(q->body, guarded); return;
              case K::Send:
                for (auto& a : q->arms) {
                  auto g2 = guarded;
                  if (!a.subject.endpoint) g2.insert(a.subject.name);
                  walk(a.cont, g2);
                }
                return;
              case K::Recv: {
                auto g2 = guarded;
                if (!q->subject.endpoint) g2.insert(q->subject.name);
                for (auto& b : q->branches) walk(b.cont, g2);
                return;
              }
              case K::Def: walk(q->scope, guarded); return;  // nested defs checked separately
              case K::Call:
                for (auto& a : q->args) {
                  if (!a.endpoint && linearParams.count(a.name) && !guarded.count(a.name))
                    out.push_back("unguarded recursive call " + q->defName + "<...> on parameter " +
                                  a.name + " in definition " + p->defName);
                }
                return;
            }
          };
      walk(p->declBody, {});
      checkGuardedDefs(p->declBody, out);
      checkGuardedDefs(p->scope, out);
      return;
    }
  }
}

inline void checkNestedRestrictionsEnd(const Proc& p, std::vector<std::string>& out) {
  using K = Process::Kind;
  switch (p->kind) {
    case K::Inact: return;
    case K::Par:
      checkNestedRestrictionsEnd(p->left, out);
      checkNestedRestrictionsEnd(p->right, out);
      return;
    case K::New:
      for (auto& [r, t] : p->proto.roles)
        if (!isSubtype(t, tEnd()))
          out.push_back("nested restriction " + p->session + " is not end-typed at role " + r);
      checkNestedRestrictionsEnd(p->body, out);
      return;
    case K::Send:
      for (auto& a : p->arms) checkNestedRestrictionsEnd(a.cont, out);
      return;
    case K::Recv:
      for (auto& b : p->branches) checkNestedRestrictionsEnd(b.cont, out);
      return;
    case K::Def:
      checkNestedRestrictionsEnd(p->declBody, out);
      checkNestedRestrictionsEnd(p->scope, out);
      return;
    case K::Call: return;
  }
}

// The single role a thread plays in `session`, if it plays exactly one.
inline std::optional<std::string> playsOneRole(const Proc& t, const std::string& session) {
  std::set<std::string> roles;
  for (auto& c : freeChannels(t)) {
    if (!c.endpoint) return std::nullopt;  // free variable
    if (c.session != session) return std::nullopt;
    roles.insert(c.role);
  }
  if (roles.size() != 1) return std::nullopt;
  return *roles.begin();
}

inline Proc wrapConfig(const Config& cfg) {
  Proc body = nullptr;
  for (auto& t : cfg.threads) body = body ? pPar(body, t) : t;
  if (!body) body = pInact();
  for (auto it = cfg.defs.rbegin(); it != cfg.defs.rend(); ++it)
    body = pDef(it->name, it->params, it->body, body);
  return body;
}

}  // namespace detail

// Bounded session-fidelity check: at every explored state whose context has a
// communication step, the process can match one with a retypable reduct.
inline FidelityReport fidelityCheck(const Program& prog, std::size_t depth = 12,
                                    std::size_t budget = kDefaultBudget,
                                    std::size_t stateCap = 20000) {
  FidelityReport rep;

  detail::checkGuardedDefs(prog.main, rep.preconditionViolations);
  if (prog.main->kind != Process::Kind::New) {
    rep.preconditionViolations.push_back("main is not a single session restriction");
  }
  Config cfg0 = normalize(prog.main);
  if (cfg0.sessions.size() != 1)
    rep.preconditionViolations.push_back("expected exactly one top-level session");
  for (auto& t : cfg0.threads) {
    if (!detail::playsOneRole(t, cfg0.sessions.empty() ? "" : cfg0.sessions[0].name))
      rep.preconditionViolations.push_back("thread does not play exactly one role: " + print(t));
    std::vector<std::string> nested;
    detail::checkNestedRestrictionsEnd(t, nested);
    for (auto& n : nested) rep.preconditionViolations.push_back(n);
  }
  if (!rep.preconditionViolations.empty()) {
    rep.preconditionsOk = false;
    return rep;
  }

  TypingContext root = assoc(cfg0.sessions[0].name, cfg0.sessions[0].proto);
  std::set<std::string> visited;
  std::deque<std::pair<Config, TypingContext>> frontier;
  std::deque<std::size_t> depths;
  frontier.emplace_back(cfg0, root);
  depths.push_back(0);
  visited.insert(configKey(cfg0) + "##" + contextKey(root, true));

  while (!frontier.empty()) {
    auto [cfg, ctx] = frontier.front();
    frontier.pop_front();
    std::size_t d = depths.front();
    depths.pop_front();
    ++rep.statesChecked;
    if (rep.statesChecked > stateCap) break;
    if (d >= depth) continue;

    auto ctxSteps = comSteps(ctx);
    if (ctxSteps.empty()) continue;

    // Find one matching pair (ctx step, process reduction sequence).
    bool matched = false;
    for (auto& [act, ctx2] : ctxSteps) {
      // admin steps (R-+, R-X) then the matching communication
      std::set<std::string> seenCfg{configKey(cfg)};
      std::deque<std::pair<Config, std::size_t>> adminFrontier{{cfg, 0}};
      while (!adminFrontier.empty() && !matched) {
        auto [c, nAdmin] = adminFrontier.front();
        adminFrontier.pop_front();
        for (auto& [lab, nxt] : enumerateSteps(c)) {
          if (lab.rule == StepLabel::Rule::RPlus || lab.rule == StepLabel::Rule::RX) {
            if (nAdmin < 8 && seenCfg.insert(configKey(nxt)).second)
              adminFrontier.emplace_back(nxt, nAdmin + 1);
            continue;
          }
          if (lab.session != act.session || lab.fromRole != act.subject ||
              lab.toRole != act.other.name || lab.label != act.label)
            continue;
          Verdict v = typeProcess(RecEnv{}, ctx2, detail::wrapConfig(nxt));
          if (!v.ok()) continue;
          matched = true;
          std::string key = configKey(nxt) + "##" + contextKey(ctx2, true);
          if (visited.insert(key).second) {
            frontier.emplace_back(nxt, ctx2);
            depths.push_back(d + 1);
          }
          break;
        }
      }
      if (matched) break;
    }
    if (!matched) {
      rep.holds = false;
      rep.violation = "context can communicate but no matching process reduction retypes: " +
                      print(ctx);
      return rep;
    }
  }
  return rep;
}

}  // namespace mpst
