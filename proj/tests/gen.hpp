// Random term generators for property tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "mpst/mpst.hpp"

namespace mpstgen {

using namespace mpst;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  std::size_t upto(std::size_t n) { return rng() % n; }  // [0, n)
  bool coin(double p = 0.5) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  }

  std::vector<std::string> rolePool{"p", "q", "r", "w1", "w2"};
  std::vector<std::string> labelPool{"m", "n", "go", "stop", "ack"};
  std::vector<std::string> varPool{"a", "b", "g"};

  std::string role() { return rolePool[upto(rolePool.size())]; }
  std::string label() { return labelPool[upto(labelPool.size())]; }

  Ground ground() {
    switch (upto(3)) {
      case 0: return Ground::Int;
      case 1: return Ground::Str;
      default: return Ground::Bool;
    }
  }

  Payload payload(int depth, const std::vector<std::string>& recScope) {
    switch (upto(3)) {
      case 0: return Payload::ofGround(ground());
      case 1: return Payload::ofRole(Role::lit(role()));
      default: return depth > 0 ? Payload::ofSession(type(depth - 1, recScope))
                                : Payload::ofGround(ground());
    }
  }

  // Closed, guarded session type of bounded depth.
  Type type(int depth, std::vector<std::string> recScope = {}) {
    if (depth <= 0) {
      if (!recScope.empty() && coin(0.4)) return tVar(recScope[upto(recScope.size())]);
      return tEnd();
    }
    switch (upto(5)) {
      case 0: return tEnd();
      case 1: {  // rec t . <guarded body>
        std::string v = "t" + std::to_string(upto(3));
        recScope.push_back(v);
        // body must guard the variable: force a branch or selection
        Type body = coin() ? branch(depth - 1, recScope, false) : select(depth - 1, recScope);
        return tRec(v, body);
      }
      case 2: return branch(depth - 1, recScope, false);
      case 3: return branch(depth - 1, recScope, true);
      default: return select(depth - 1, recScope);
    }
  }

  Type branch(int depth, const std::vector<std::string>& recScope, bool replicated) {
    std::size_t n = 1 + upto(2);
    std::vector<TypeBranch> bs;
    std::vector<std::string> used;
    for (std::size_t i = 0; i < n; ++i) {
      std::string l = label();
      bool dup = false;
      for (auto& u : used) dup |= (u == l);
      if (dup) continue;
      used.push_back(l);
      TypeBranch b;
      b.label = l;
      if (coin(0.3)) b.payloads.push_back(payload(depth, recScope));
      b.cont = type(depth, recScope);
      bs.push_back(std::move(b));
    }
    Role from = replicated && coin(0.3) ? Role::rvar(varPool[upto(varPool.size())])
                                        : Role::lit(role());
    return tBranch(replicated, from, std::move(bs));
  }

  Type select(int depth, const std::vector<std::string>& recScope) {
    std::size_t n = 1 + upto(2);
    std::vector<TypeOption> ops;
    std::vector<std::pair<std::string, std::string>> used;
    for (std::size_t i = 0; i < n; ++i) {
      std::string to = role(), l = label();
      bool dup = false;
      for (auto& [t, u] : used) dup |= (t == to && u == l);
      if (dup) continue;
      used.emplace_back(to, l);
      TypeOption op;
      op.to = Role::lit(to);
      op.label = l;
      if (coin(0.3)) op.payloads.push_back(payload(depth, recScope));
      op.cont = type(depth, recScope);
      ops.push_back(std::move(op));
    }
    return tSelect(std::move(ops));
  }

  RType rtype(int depth) {
    std::vector<Type> parts;
    std::size_t n = upto(3);
    for (std::size_t i = 0; i < n; ++i) parts.push_back(type(depth));
    return RType::par(std::move(parts));
  }

  TypingContext context(int depth, std::size_t entries) {
    TypingContext g;
    for (std::size_t i = 0; i < entries; ++i) {
      Channel c = coin(0.8) ? Channel::ep("s", "e" + std::to_string(i))
                            : Channel::cvar("x" + std::to_string(i));
      g.chans[c] = rtype(depth);
    }
    if (coin(0.3)) g.roleVars.insert(varPool[upto(varPool.size())]);
    return g;
  }

  // Derive a supertype of t by widening branches / narrowing selections /
  // unfolding; used for subtype-relation property pairs.
  Type supertypeOf(const Type& t) {
    using K = SessionType::Kind;
    Type u = coin(0.3) ? unfold1(t) : t;
    switch (u->kind) {
      case K::Branch: {
        std::vector<TypeBranch> bs = u->branches;
        for (auto& b : bs)
          if (coin(0.5)) b.cont = supertypeOf(b.cont);
        if (coin(0.5)) {
          TypeBranch extra;
          extra.label = "zz" + std::to_string(upto(100));
          extra.cont = tEnd();
          bs.push_back(std::move(extra));
        }
        return tBranch(u->replicated, u->from, std::move(bs));
      }
      case K::Select: {
        std::vector<TypeOption> ops = u->options;
        if (ops.size() > 1 && coin(0.5)) ops.pop_back();
        for (auto& op : ops)
          if (coin(0.5)) op.cont = supertypeOf(op.cont);
        return tSelect(std::move(ops));
      }
      default: return u;
    }
  }

  // --- processes (parse/print round-trip material) ---

  Value value(const std::vector<std::string>& chanVars) {
    switch (upto(5)) {
      case 0: return Value::ofInt(static_cast<long long>(upto(100)));
      case 1: return Value::ofStr("s" + std::to_string(upto(10)));
      case 2: return Value::ofBool(coin());
      case 3:
        if (!chanVars.empty()) return Value::ofChan(Channel::cvar(chanVars[upto(chanVars.size())]));
        [[fallthrough]];
      default: return Value::ofRole(Role::lit(role()));
    }
  }

  Channel chan(const std::vector<std::string>& chanVars) {
    if (!chanVars.empty() && coin(0.4)) return Channel::cvar(chanVars[upto(chanVars.size())]);
    return Channel::ep("s", role());
  }

  Proc process(int depth, std::vector<std::string> chanVars = {}) {
    if (depth <= 0) return pInact();
    switch (upto(7)) {
      case 0: return pInact();
      case 1: return pPar(process(depth - 1, chanVars), process(depth - 1, chanVars));
      case 2: {  // send (sum when several arms)
        std::size_t n = 1 + upto(2);
        std::vector<SendArm> arms;
        for (std::size_t i = 0; i < n; ++i) {
          SendArm a;
          a.subject = chan(chanVars);
          a.to = coin(0.2) ? Role::rvar(varPool[upto(varPool.size())]) : Role::lit(role());
          a.label = label() + std::to_string(i);
          if (coin(0.5)) a.payloads.push_back(value(chanVars));
          a.cont = process(depth - 1, chanVars);
          arms.push_back(std::move(a));
        }
        return pSend(std::move(arms));
      }
      case 3: {  // receive
        bool repl = coin(0.3);
        std::size_t n = 1 + upto(2);
        std::vector<RecvArm> bs;
        for (std::size_t i = 0; i < n; ++i) {
          RecvArm b;
          b.label = label() + std::to_string(i);
          auto cv = chanVars;
          if (coin(0.5)) {
            RBinder bd;
            bd.roleVar = coin(0.3);
            bd.name = (bd.roleVar ? "rv" : "y") + std::to_string(upto(4));
            if (!bd.roleVar) cv.push_back(bd.name);
            b.binders.push_back(bd);
          }
          b.cont = process(depth - 1, cv);
          bs.push_back(std::move(b));
        }
        Role from = repl && coin(0.4) ? Role::rvar(varPool[upto(varPool.size())])
                                      : Role::lit(role());
        return pRecv(repl, chan(chanVars), from, std::move(bs));
      }
      case 4: {  // def
        std::string name = "X" + std::to_string(upto(4));
        std::vector<std::pair<std::string, Type>> params;
        auto cv = chanVars;
        if (coin(0.7)) {
          params.emplace_back("z" + std::to_string(upto(4)), type(1));
          cv.push_back(params.back().first);
        }
        return pDef(name, params, process(depth - 1, cv), process(depth - 1, chanVars));
      }
      case 5: {  // call
        std::vector<Channel> args;
        if (coin(0.6)) args.push_back(chan(chanVars));
        return pCall("X" + std::to_string(upto(4)), std::move(args));
      }
      default: {  // restriction with a tiny inline protocol
        Protocol pr;
        pr.roles.emplace_back(role(), type(1));
        return pNew("s" + std::to_string(upto(3)), "", pr, process(depth - 1, chanVars));
      }
    }
  }

  Program program(int depth) {
    Program prog;
    Protocol pr;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < 1 + upto(2); ++i) {
      std::string r = role();
      if (!seen.insert(r).second) continue;
      pr.roles.emplace_back(r, type(depth));
    }
    prog.protocols.emplace_back("P" + std::to_string(upto(3)), pr);
    prog.main = process(depth);
    return prog;
  }
};

}  // namespace mpstgen
