// Algorithmic typing judgements of Fig 5. Syntax-directed; the only search
// is context splitting (resolved by demand analysis with enumeration
// fallback) and the choice of a parallel component to consume.
#pragma once

#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mpst/context.hpp"
#include "mpst/safety.hpp"

namespace mpst {

struct CheckOptions {
  Property property = Property::Safety;
  std::size_t budget = kDefaultBudget;
};

struct Verdict {
  enum class Status { Ok, Fail, Unknown };
  Status status = Status::Ok;
  std::vector<Diagnostic> diagnostics;
  // (rule, context fingerprint) per derivation node, for debugging
  std::vector<std::pair<std::string, std::string>> derivation;
  bool ok() const { return status == Status::Ok; }
};

namespace detail {

inline std::string ctxFingerprint(const TypingContext& g) {
  std::ostringstream os;
  os << std::hex << std::hash<std::string>{}(contextKey(g, false));
  return os.str();
}

class TypeChecker {
 public:
  explicit TypeChecker(CheckOptions opts) : opts_(opts) {}

  Verdict run(const RecEnv& theta, const TypingContext& g, const Proc& p) {
    Verdict v;
    unknown_ = false;
    diags_.clear();
    deriv_.clear();
    bool ok = proc(theta, g, p);
    v.status = ok ? Verdict::Status::Ok
                  : (unknown_ ? Verdict::Status::Unknown : Verdict::Status::Fail);
    v.diagnostics = diags_;
    v.derivation = deriv_;
    if (!ok && v.diagnostics.empty()) v.diagnostics.push_back({{}, "typechecking failed"});
    return v;
  }

  // Full value judgement Gamma |- V : T with end-typed leftover (T-Wkn).
  Verdict value(const TypingContext& g, const Value& v, const Payload& expected) {
    Verdict out;
    diags_.clear();
    deriv_.clear();
    TypingContext g2 = g;
    bool ok = consumeValue(g2, v, expected, Pos{});
    if (ok && !isEnd(g2)) {
      ok = false;
      diags_.push_back({{}, "[T-Wkn] linear leftover: " + print(g2)});
    }
    out.status = ok ? Verdict::Status::Ok : Verdict::Status::Fail;
    out.diagnostics = diags_;
    return out;
  }

 private:
  CheckOptions opts_;
  std::vector<Diagnostic> diags_;
  std::vector<std::pair<std::string, std::string>> deriv_;
  bool unknown_ = false;

  bool fail(Pos pos, const std::string& rule, const std::string& msg) {
    diags_.push_back({pos, "[" + rule + "] " + msg});
    return false;
  }

  void note(const std::string& rule, const TypingContext& g) {
    deriv_.emplace_back(rule, ctxFingerprint(g));
  }

  bool proc(const RecEnv& theta, const TypingContext& g, const Proc& p) {
    switch (p->kind) {
      case Process::Kind::Inact: return rule0(g, p);
      case Process::Kind::Par: return rulePar(theta, g, p);
      case Process::Kind::New: return ruleNew(theta, g, p);
      case Process::Kind::Send: return ruleSend(theta, g, p);
      case Process::Kind::Recv: return p->replicated ? ruleBang(theta, g, p) : ruleRecv(theta, g, p);
      case Process::Kind::Def: return ruleDef(theta, g, p);
      case Process::Kind::Call: return ruleCall(theta, g, p);
    }
    return false;
  }

  bool rule0(const TypingContext& g, const Proc& p) {
    for (auto& [c, u] : g.chans)
      if (!u.isEndType())
        return fail(p->pos, "T-0", "inactive process but " + c.show() + " : " + print(u) +
                                       " is not end-typed");
    note("T-0", g);
    return true;
  }

  bool rulePar(const RecEnv& theta, const TypingContext& g, const Proc& p) {
    auto dl = freeChannels(p->left);
    auto dr = freeChannels(p->right);
    auto sf = splitFor(g, dl, dr);
    if (sf.hardError) return fail(p->pos, "T-|", sf.error);
    std::size_t mark = diags_.size();
    std::vector<Diagnostic> firstFailure;
    for (auto& [l, r] : sf.candidates) {
      if (proc(theta, l, p->left) && proc(theta, r, p->right)) {
        note("T-|", g);
        return true;
      }
      if (firstFailure.empty())
        firstFailure.assign(diags_.begin() + static_cast<long>(mark), diags_.end());
      diags_.resize(mark);
    }
    diags_.insert(diags_.end(), firstFailure.begin(), firstFailure.end());
    if (diags_.size() == mark) fail(p->pos, "T-|", "no context split types both sides");
    return false;
  }

  bool ruleNew(const RecEnv& theta, const TypingContext& g, const Proc& p) {
    auto vd = validate(p->proto);
    if (!vd.empty()) {
      for (auto& d : vd) diags_.push_back(d);
      return fail(p->pos, "T-nu", "ill-formed protocol for session " + p->session);
    }
    if (g.hasSession(p->session))
      return fail(p->pos, "T-nu", "session name " + p->session + " already in scope");
    TypingContext sess = assoc(p->session, p->proto);
    PropertyVerdict phi = mpst::checkProperty(sess, opts_.property, opts_.budget);
    if (phi.status == PropertyVerdict::Status::Unknown) {
      unknown_ = true;
      return fail(p->pos, "T-nu", "property " + std::string(propertyName(opts_.property)) +
                                      " undecided for session " + p->session + ": " + phi.reason);
    }
    if (!phi.holds()) {
      std::string msg = "session " + p->session + " fails " + propertyName(opts_.property) + ": " +
                        phi.reason;
      if (!phi.stateDescription.empty()) msg += " [state: " + phi.stateDescription + "]";
      if (!phi.trace.empty()) {
        msg += " [trace:";
        for (auto& a : phi.trace) msg += " " + a.label;
        msg += "]";
      }
      return fail(p->pos, "T-nu", msg);
    }
    note("T-nu", g);
    return proc(theta, add(g, sess), p->body);
  }

  bool ruleSend(const RecEnv& theta, const TypingContext& g, const Proc& p) {
    // T-+ checks every summand under the same environment; a single send is
    // the degenerate sum.
    for (auto& arm : p->arms)
      if (!sendArm(theta, g, arm)) return false;
    note(p->arms.size() > 1 ? "T-+" : "T-plus1", g);
    return true;
  }

  bool sendArm(const RecEnv& theta, const TypingContext& g, const SendArm& arm) {
    auto it = g.chans.find(arm.subject);
    if (it == g.chans.end())
      return fail(arm.pos, "T-sel", "unknown channel " + arm.subject.show());
    if (arm.to.var && !g.roleVars.count(arm.to.name))
      return fail(arm.pos, "T-sel", "message to unbound role variable @" + arm.to.name);

    const RType& u = it->second;
    std::size_t mark = diags_.size();
    std::vector<Diagnostic> firstFailure;
    bool sawOption = false;
    for (std::size_t i = 0; i < u.parts.size(); ++i) {
      Type part = unfoldStar(u.parts[i]);
      if (part->kind != SessionType::Kind::Select) continue;
      for (auto& op : part->options) {
        if (op.to != arm.to || op.label != arm.label) continue;
        sawOption = true;
        TypingContext g1 = g;
        std::vector<Type> rest;
        for (std::size_t j = 0; j < u.parts.size(); ++j)
          if (j != i) rest.push_back(u.parts[j]);
        g1.chans[arm.subject] = RType::par(rest);
        bool ok = true;
        if (arm.payloads.size() != op.payloads.size()) {
          ok = fail(arm.pos, "T-sel", "payload arity mismatch for " + arm.label + ": sent " +
                                          std::to_string(arm.payloads.size()) + ", type expects " +
                                          std::to_string(op.payloads.size()));
        }
        for (std::size_t k = 0; ok && k < arm.payloads.size(); ++k)
          ok = consumeValue(g1, arm.payloads[k], op.payloads[k], arm.pos);
        if (ok) {
          auto parts = g1.chans[arm.subject].parts;
          parts.push_back(op.cont);
          g1.chans[arm.subject] = RType::par(std::move(parts));
          ok = proc(theta, g1, arm.cont);
        }
        if (ok) {
          note("T-sel", g);
          return true;
        }
        if (firstFailure.empty())
          firstFailure.assign(diags_.begin() + static_cast<long>(mark), diags_.end());
        diags_.resize(mark);
      }
    }
    if (!sawOption)
      return fail(arm.pos, "T-sel", arm.subject.show() + " : " + print(u) +
                                        " has no selection option " + arm.to.show() + " " +
                                        arm.label);
    diags_.insert(diags_.end(), firstFailure.begin(), firstFailure.end());
    return false;
  }

  // Gamma |- V : T, consuming what the value uses from g.
  bool consumeValue(TypingContext& g, const Value& v, const Payload& expected, Pos pos) {
    switch (expected.kind) {
      case Payload::Kind::Gr: {
        if (v.kind == Value::Kind::IntLit && expected.ground == Ground::Int) return true;
        if (v.kind == Value::Kind::StrLit && expected.ground == Ground::Str) return true;
        if (v.kind == Value::Kind::BoolLit && expected.ground == Ground::Bool) return true;
        if (v.kind == Value::Kind::Chan && !v.chan.endpoint) {
          auto it = g.groundVars.find(v.chan.name);
          if (it != g.groundVars.end() && it->second == expected.ground) return true;
          if (it != g.groundVars.end())
            return fail(pos, "T-val", "variable " + v.chan.name + " : " +
                                          groundName(it->second) + ", expected " +
                                          groundName(expected.ground));
        }
        return fail(pos, "T-val", "value " + print(v) + " does not have ground type " +
                                      groundName(expected.ground));
      }
      case Payload::Kind::RoleSing: {
        if (v.kind != Value::Kind::RoleVal)
          return fail(pos, "T-q", "value " + print(v) + " is not a role (expected singleton " +
                                      expected.role.show() + ")");
        if (expected.role.var) {
          if (!v.role.var || v.role.name != expected.role.name)
            return fail(pos, "T-a", "role " + v.role.show() + " does not match singleton " +
                                        expected.role.show() + " (singletons match syntactically)");
          if (!g.roleVars.count(v.role.name))
            return fail(pos, "T-a", "role variable unbound: @" + v.role.name);
          return true;
        }
        if (v.role.var)
          return fail(pos, "T-q", "role " + v.role.show() + " does not match singleton " +
                                      expected.role.show() + " (singletons match syntactically)");
        if (v.role.name != expected.role.name)
          return fail(pos, "T-q", "role " + v.role.name + " does not match singleton " +
                                      expected.role.name);
        return true;
      }
      case Payload::Kind::Session: {
        if (v.kind != Value::Kind::Chan)
          return fail(pos, "T-Sub", "value " + print(v) + " is not a channel");
        auto it = g.chans.find(v.chan);
        if (it == g.chans.end())
          return fail(pos, "T-Sub", "unknown channel " + v.chan.show());
        const RType& u = it->second;
        if (u.isEndType()) {
          if (isSubtype(tEnd(), expected.session)) {
            g.chans.erase(v.chan);
            return true;
          }
          return fail(pos, "T-Sub", "channel type mismatch: " + v.chan.show() +
                                        " : end, expected " + print(expected.session));
        }
        for (std::size_t i = 0; i < u.parts.size(); ++i) {
          if (!isSubtype(u.parts[i], expected.session)) continue;
          std::vector<Type> rest;
          for (std::size_t j = 0; j < u.parts.size(); ++j)
            if (j != i) rest.push_back(u.parts[j]);
          g.chans[v.chan] = RType::par(std::move(rest));
          return true;
        }
        return fail(pos, "T-Sub", "channel type mismatch: " + v.chan.show() + " : " + print(u) +
                                      ", expected " + print(expected.session));
      }
    }
    return false;
  }

  struct FromMatch {
    bool ok = false;
    bool bindingVar = false;  // both sides are variables (aligned by renaming)
  };

  static FromMatch matchFrom(const Role& typeFrom, const Role& procFrom) {
    FromMatch m;
    if (typeFrom.var && procFrom.var) {
      m.ok = true;
      m.bindingVar = true;
    } else if (!typeFrom.var && !procFrom.var) {
      m.ok = typeFrom.name == procFrom.name;
    }
    return m;
  }

  // Shared branch machinery for T-& and T-!: checks label sets, binds
  // payloads, and types each branch body under `base` extended with the
  // continuation for `subject`.
  bool checkBranches(const RecEnv& theta, const TypingContext& base, const Channel& subject,
                     const Type& branchType, const Proc& p, bool insertFromVar,
                     const std::string& rule) {
    // exact label correspondence
    for (auto& tb : branchType->branches) {
      bool found = false;
      for (auto& arm : p->branches) found |= arm.label == tb.label;
      if (!found)
        return fail(p->pos, rule, "receive does not offer branch label " + tb.label +
                                      " required by " + print(branchType));
    }
    for (auto& arm : p->branches) {
      bool found = false;
      for (auto& tb : branchType->branches) found |= arm.label == tb.label;
      if (!found)
        return fail(arm.pos, rule, "branch label " + arm.label + " not in channel type " +
                                       print(branchType));
    }

    for (auto& arm : p->branches) {
      const TypeBranch* tb = nullptr;
      for (auto& cand : branchType->branches)
        if (cand.label == arm.label) tb = &cand;
      if (arm.binders.size() != tb->payloads.size())
        return fail(arm.pos, rule, "binder arity mismatch in branch " + arm.label + ": " +
                                       std::to_string(arm.binders.size()) + " binders, " +
                                       std::to_string(tb->payloads.size()) + " payloads");
      TypingContext gB = base;
      if (insertFromVar && p->from.var) gB.roleVars.insert(p->from.name);
      Proc body = arm.cont;
      std::vector<Payload> payloads = tb->payloads;
      Type cont = tb->cont;
      bool ok = true;
      for (std::size_t k = 0; k < arm.binders.size() && ok; ++k) {
        const RBinder& b = arm.binders[k];
        const Payload& pl = payloads[k];
        switch (pl.kind) {
          case Payload::Kind::Gr:
            if (b.roleVar) {
              ok = fail(arm.pos, rule, "role binder @" + b.name + " for ground payload " +
                                           groundName(pl.ground));
              break;
            }
            gB.groundVars[b.name] = pl.ground;
            break;
          case Payload::Kind::Session: {
            if (b.roleVar) {
              ok = fail(arm.pos, rule, "role binder @" + b.name + " for session payload");
              break;
            }
            Channel key = Channel::cvar(b.name);
            if (gB.chans.count(key)) {
              std::string f = freshName(b.name);
              body = substChanVar(body, b.name, Channel::cvar(f));
              key = Channel::cvar(f);
            }
            gB.chans[key] = RType::single(pl.session);
            break;
          }
          case Payload::Kind::RoleSing:
            if (!b.roleVar) {
              ok = fail(arm.pos, rule, "binder " + b.name + " for role payload " +
                                           pl.role.show() + " must be a role binder (@" + b.name +
                                           ")");
              break;
            }
            if (!pl.role.var) {
              // Pattern-matched literal: the body sees the concrete role.
              body = substRole(body, pl.role, b.name);
            } else {
              std::string f = freshName(b.name);
              Role fr = Role::rvar(f);
              body = substRole(body, fr, b.name);
              for (std::size_t j = k + 1; j < payloads.size(); ++j)
                payloads[j] = substRolePayload(payloads[j], fr, pl.role.name);
              cont = substRole(cont, fr, pl.role.name);
              gB.roleVars.insert(f);
            }
            break;
        }
      }
      if (!ok) return false;
      auto parts = gB.chans.count(subject) ? gB.chans[subject].parts : std::vector<Type>{};
      parts.push_back(cont);
      gB.chans[subject] = RType::par(std::move(parts));
      if (!proc(theta, gB, body)) return false;
    }
    return true;
  }

  bool ruleRecv(const RecEnv& theta, const TypingContext& g, const Proc& p) {
    auto it = g.chans.find(p->subject);
    if (it == g.chans.end()) return fail(p->pos, "T-&", "unknown channel " + p->subject.show());
    if (p->from.var && !g.roleVars.count(p->from.name))
      return fail(p->pos, "T-&", "role variable unbound: @" + p->from.name);
    const RType& u = it->second;
    std::size_t mark = diags_.size();
    std::vector<Diagnostic> firstFailure;
    bool saw = false;
    for (std::size_t i = 0; i < u.parts.size(); ++i) {
      Type part = unfoldStar(u.parts[i]);
      if (part->kind != SessionType::Kind::Branch || part->replicated) continue;
      if (part->from.var != p->from.var || part->from.name != p->from.name) continue;
      saw = true;
      TypingContext base = g;
      std::vector<Type> rest;
      for (std::size_t j = 0; j < u.parts.size(); ++j)
        if (j != i) rest.push_back(u.parts[j]);
      base.chans[p->subject] = RType::par(rest);
      if (checkBranches(theta, base, p->subject, part, p, false, "T-&")) {
        note("T-&", g);
        return true;
      }
      if (firstFailure.empty())
        firstFailure.assign(diags_.begin() + static_cast<long>(mark), diags_.end());
      diags_.resize(mark);
    }
    if (!saw)
      return fail(p->pos, "T-&", p->subject.show() + " : " + print(u) +
                                     " has no branching type from " + p->from.show());
    diags_.insert(diags_.end(), firstFailure.begin(), firstFailure.end());
    return false;
  }

  bool ruleBang(const RecEnv& theta, const TypingContext& g, const Proc& p) {
    auto it = g.chans.find(p->subject);
    if (it == g.chans.end()) return fail(p->pos, "T-!", "unknown channel " + p->subject.show());
    const RType& u = it->second;
    std::size_t mark = diags_.size();
    std::vector<Diagnostic> firstFailure;
    bool saw = false;
    for (std::size_t i = 0; i < u.parts.size(); ++i) {
      Type part = unfoldStar(u.parts[i]);
      if (part->kind != SessionType::Kind::Branch || !part->replicated) continue;
      FromMatch fm = matchFrom(part->from, p->from);
      if (!fm.ok) continue;
      saw = true;
      // end(Gamma): everything but the replicated component must be end-typed.
      TypingContext base = g;
      std::vector<Type> rest;
      for (std::size_t j = 0; j < u.parts.size(); ++j)
        if (j != i) rest.push_back(u.parts[j]);
      base.chans[p->subject] = RType::par(rest);
      bool endOk = true;
      for (auto& [c, uc] : base.chans) {
        if (!uc.isEndType()) {
          fail(p->pos, "T-!", "replicated receive requires an end-typed context, but " +
                                  c.show() + " : " + print(uc));
          endOk = false;
          break;
        }
      }
      Type aligned = part;
      Proc pAligned = p;
      if (endOk && fm.bindingVar && part->from.name != p->from.name) {
        // Align the type-side binder with the process-side binder.
        std::string f = freshName(p->from.name);
        Role fr = Role::rvar(f);
        std::vector<TypeBranch> bs = part->branches;
        for (auto& b : bs) b = substRoleTypeBranch(b, fr, part->from.name);
        aligned = tBranch(true, fr, std::move(bs));
        std::vector<RecvArm> arms = p->branches;
        for (auto& a : arms) a = substRoleRecvArm(a, fr, p->from.name);
        pAligned = pRecv(true, p->subject, fr, std::move(arms), p->pos);
      }
      if (endOk && checkBranches(theta, base, p->subject, aligned, pAligned,
                                 /*insertFromVar=*/true, "T-!")) {
        note("T-!", g);
        return true;
      }
      if (firstFailure.empty())
        firstFailure.assign(diags_.begin() + static_cast<long>(mark), diags_.end());
      diags_.resize(mark);
    }
    if (!saw)
      return fail(p->pos, "T-!", p->subject.show() + " : " + print(u) +
                                     " has no replicated branching type from " + p->from.show());
    diags_.insert(diags_.end(), firstFailure.begin(), firstFailure.end());
    return false;
  }

  bool ruleDef(const RecEnv& theta, const TypingContext& g, const Proc& p) {
    RecEnv theta2 = theta;
    std::vector<Type> sig;
    for (auto& [n, t] : p->params) sig.push_back(t);
    theta2.defs[p->defName] = sig;

    TypingContext declCtx;
    declCtx.roleVars = g.roleVars;
    declCtx.groundVars = g.groundVars;
    for (auto& [c, u] : g.chans)
      if (u.isEndType()) declCtx.chans[c] = u;  // end-typed ambient may ride along
    for (auto& [n, t] : p->params) declCtx.chans[Channel::cvar(n)] = RType::single(t);
    if (!proc(theta2, declCtx, p->declBody)) return false;
    note("T-Def", g);
    return proc(theta2, g, p->scope);
  }

  bool ruleCall(const RecEnv& theta, const TypingContext& g, const Proc& p) {
    auto it = theta.defs.find(p->defName);
    if (it == theta.defs.end())
      return fail(p->pos, "T-Call", "undefined process " + p->defName);
    const auto& sig = it->second;
    if (sig.size() != p->args.size())
      return fail(p->pos, "T-Call", "call arity mismatch for " + p->defName + ": " +
                                        std::to_string(p->args.size()) + " arguments, " +
                                        std::to_string(sig.size()) + " parameters");
    TypingContext g1 = g;
    for (std::size_t i = 0; i < sig.size(); ++i) {
      if (!consumeValue(g1, Value::ofChan(p->args[i]), Payload::ofSession(sig[i]), p->pos))
        return false;
    }
    for (auto& [c, u] : g1.chans)
      if (!u.isEndType())
        return fail(p->pos, "T-Call", "linear leftover at call: " + c.show() + " : " + print(u));
    note("T-Call", g);
    return true;
  }

  // Rename a free channel variable in a process (binder-shadowing aware).
  static Proc substChanVar(const Proc& p, const std::string& name, const Channel& to) {
    using K = Process::Kind;
    auto mapChan = [&](const Channel& c) {
      return (!c.endpoint && c.name == name) ? to : c;
    };
    switch (p->kind) {
      case K::Inact: return p;
      case K::Par:
        return pPar(substChanVar(p->left, name, to), substChanVar(p->right, name, to), p->pos);
      case K::New:
        return pNew(p->session, p->protoName, p->proto, substChanVar(p->body, name, to), p->pos);
      case K::Send: {
        std::vector<SendArm> arms = p->arms;
        for (auto& a : arms) {
          a.subject = mapChan(a.subject);
          for (auto& v : a.payloads)
            if (v.kind == Value::Kind::Chan) v = Value::ofChan(mapChan(v.chan));
          a.cont = substChanVar(a.cont, name, to);
        }
        return pSend(std::move(arms), p->pos);
      }
      case K::Recv: {
        std::vector<RecvArm> bs = p->branches;
        for (auto& b : bs) {
          bool shadowed = false;
          for (auto& bd : b.binders) shadowed |= (!bd.roleVar && bd.name == name);
          if (!shadowed) b.cont = substChanVar(b.cont, name, to);
        }
        return pRecv(p->replicated, mapChan(p->subject), p->from, std::move(bs), p->pos);
      }
      case K::Def: {
        bool shadowed = false;
        for (auto& [n, t] : p->params) shadowed |= (n == name);
        return pDef(p->defName, p->params,
                    shadowed ? p->declBody : substChanVar(p->declBody, name, to),
                    substChanVar(p->scope, name, to), p->pos);
      }
      case K::Call: {
        std::vector<Channel> args = p->args;
        for (auto& a : args) a = mapChan(a);
        return pCall(p->defName, std::move(args), p->pos);
      }
    }
    return p;
  }
};

}  // namespace detail

inline Verdict typeProcess(const RecEnv& theta, const TypingContext& g, const Proc& p,
                           CheckOptions opts = {}) {
  detail::TypeChecker tc(opts);
  return tc.run(theta, g, p);
}

inline Verdict typeValue(const TypingContext& g, const Value& v, const Payload& expected,
                         CheckOptions opts = {}) {
  detail::TypeChecker tc(opts);
  return tc.value(g, v, expected);
}

// Parse-level entry point: validates and typechecks a whole program under
// empty environments.
inline Verdict checkProgram(const Program& prog, CheckOptions opts = {}) {
  Verdict v;
  auto diags = validate(prog);
  if (!diags.empty()) {
    v.status = Verdict::Status::Fail;
    v.diagnostics = diags;
    return v;
  }
  auto fv = freeChanVars(prog.main);
  if (!fv.empty()) {
    v.status = Verdict::Status::Fail;
    for (auto& x : fv) v.diagnostics.push_back({{}, "free channel variable " + x + " in main"});
    return v;
  }
  return typeProcess(RecEnv{}, TypingContext{}, prog.main, opts);
}

}  // namespace mpst
