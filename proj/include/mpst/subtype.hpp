// Coinductive subtyping, type congruence and equi-recursive unfolding.
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "mpst/ast.hpp"
#include "mpst/print.hpp"

namespace mpst {

// --- Unfolding --------------------------------------------------------------

inline Type unfold1(const Type& t) {
  if (t->kind == SessionType::Kind::Rec) return substRecVar(t->body, t->recVar, t);
  return t;
}

inline Type unfoldN(Type t, int n) {
  for (int i = 0; i < n; ++i) t = unfold1(t);
  return t;
}

// Unfold until no top-level recursive binder remains. Guardedness of
// recursion variables guarantees this terminates.
inline Type unfoldStar(Type t) {
  int guard = 0;
  while (t->kind == SessionType::Kind::Rec) {
    t = unfold1(t);
    if (++guard > 4096) throw std::runtime_error("unfoldStar: unguarded recursion");
  }
  return t;
}

inline RType unfold1(const RType& u) {
  std::vector<Type> ps;
  ps.reserve(u.parts.size());
  for (auto& p : u.parts) ps.push_back(unfold1(p));
  return RType::par(std::move(ps));
}

inline RType unfoldStar(const RType& u) {
  std::vector<Type> ps;
  ps.reserve(u.parts.size());
  for (auto& p : u.parts) ps.push_back(unfoldStar(p));
  return RType::par(std::move(ps));
}

// --- Type congruence (Def 2) ------------------------------------------------

// Runtime types are kept flattened with end components dropped, so
// congruence is multiset equality of components up to alpha renaming.
inline bool typeCongruent(const RType& a, const RType& b) {
  return alphaKey(a) == alphaKey(b);
}

// --- Subtyping (Def 1) ------------------------------------------------------

namespace detail {

// Coinductive "assume then verify" with a visited-pair cache. Role-variable
// binders on the two sides are aligned through an environment rather than by
// renaming, so the cache keys of recursive types stabilize.
class SubtypeChecker {
  using Env = std::map<std::string, std::string>;  // left binder -> right binder

 public:
  bool check(Type a, Type b, Env env = {}) {
    a = unfoldStar(std::move(a));
    b = unfoldStar(std::move(b));
    std::string k = key(a, b, env);
    if (cache_.count(k)) return true;  // coinductive hypothesis
    if (cache_.size() > 200000) throw std::runtime_error("subtype: cache blowup");
    cache_.insert(k);

    using K = SessionType::Kind;
    if (a->kind == K::End && b->kind == K::End) return true;
    if (a->kind == K::Branch && b->kind == K::Branch) {
      if (a->replicated != b->replicated) return false;
      Env env2 = env;
      if (a->replicated && a->from.var && b->from.var) {
        env2[a->from.name] = b->from.name;  // align universal-receive binders
      } else if (!roleMatch(a->from, b->from, env)) {
        return false;
      }
      // Branch: fewer labels on the smaller side, covariant payloads and
      // continuations.
      for (auto& ba : a->branches) {
        const TypeBranch* bb = nullptr;
        for (auto& cand : b->branches)
          if (cand.label == ba.label) bb = &cand;
        if (!bb) return false;
        if (!payloadsAndCont(ba.payloads, bb->payloads, ba.cont, bb->cont, env2,
                             /*contravariant=*/false, /*binding=*/true))
          return false;
      }
      return true;
    }
    if (a->kind == K::Select && b->kind == K::Select) {
      // Selection: more options on the smaller side, contravariant payloads,
      // covariant continuations.
      for (auto& ob : b->options) {
        const TypeOption* oa = nullptr;
        for (auto& cand : a->options)
          if (cand.label == ob.label && roleMatch(cand.to, ob.to, env)) oa = &cand;
        if (!oa) return false;
        if (!payloadsAndCont(oa->payloads, ob.payloads, oa->cont, ob.cont, env,
                             /*contravariant=*/true, /*binding=*/false))
          return false;
      }
      return true;
    }
    return false;
  }

 private:
  static bool roleMatch(const Role& x, const Role& y, const Env& env) {
    if (x.var != y.var) return false;
    if (!x.var) return x.name == y.name;
    auto it = env.find(x.name);
    if (it != env.end()) return it->second == y.name;
    for (auto& [l, r] : env)
      if (r == y.name) return false;  // y already claimed by another binder
    return x.name == y.name;          // free variables relate syntactically
  }

  std::string key(const Type& a, const Type& b, const Env& env) {
    std::string k = alphaKey(a);
    k += '\x01';
    k += alphaKey(b);
    k += '\x01';
    for (auto& v : freeRoleVars(a)) {
      auto it = env.find(v);
      k += v + ">" + (it == env.end() ? v : it->second) + ";";
    }
    return k;
  }

  bool payloadsAndCont(const std::vector<Payload>& pa, const std::vector<Payload>& pb,
                       const Type& ca, const Type& cb, Env env, bool contravariant, bool binding) {
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const Payload& x = pa[i];
      const Payload& y = pb[i];
      if (x.kind != y.kind) return false;
      switch (x.kind) {
        case Payload::Kind::Gr:
          if (x.ground != y.ground) return false;
          break;
        case Payload::Kind::RoleSing:
          if (binding && x.role.var && y.role.var) env[x.role.name] = y.role.name;
          else if (!roleMatch(x.role, y.role, env)) return false;
          break;
        case Payload::Kind::Session:
          if (contravariant) {
            if (!check(y.session, x.session, flip(env))) return false;
          } else {
            if (!check(x.session, y.session, env)) return false;
          }
          break;
      }
    }
    return check(ca, cb, env);
  }

  static Env flip(const Env& env) {
    Env out;
    for (auto& [l, r] : env) out[r] = l;
    return out;
  }

  std::set<std::string> cache_;
};

}  // namespace detail

inline bool isSubtype(const Type& a, const Type& b) {
  detail::SubtypeChecker chk;
  return chk.check(a, b);
}

// Parallel runtime types relate componentwise after canonical ordering.
inline bool isSubtype(const RType& a, const RType& b) {
  if (a.parts.size() != b.parts.size()) return false;
  auto sa = a.parts, sb = b.parts;
  auto byKey = [](const Type& x, const Type& y) { return alphaKey(x) < alphaKey(y); };
  std::sort(sa.begin(), sa.end(), byKey);
  std::sort(sb.begin(), sb.end(), byKey);
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (!isSubtype(sa[i], sb[i])) return false;
  return true;
}

// A payload-level subtype check shared by the typechecker and type LTS.
inline bool payloadSubtype(const Payload& a, const Payload& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Payload::Kind::Gr: return a.ground == b.ground;
    case Payload::Kind::RoleSing: return a.role == b.role;
    case Payload::Kind::Session: return isSubtype(a.session, b.session);
  }
  return false;
}

}  // namespace mpst
