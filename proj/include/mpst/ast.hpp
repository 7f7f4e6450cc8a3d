// Core term and type representation: roles, channels, values, session types,
// runtime types, protocols and processes, with binding-aware operations.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mpst {

struct Pos {
  int line = 0;
  int col = 0;
  bool known() const { return line > 0; }
};

struct Diagnostic {
  Pos pos;
  std::string message;
};

enum class Ground { Int, Str, Bool };

inline const char* groundName(Ground g) {
  switch (g) {
    case Ground::Int: return "int";
    case Ground::Str: return "str";
    default: return "bool";
  }
}

// Role name value or role name variable. Variables carry a `@` sigil in
// printed form, so the two namespaces never collide.
struct Role {
  bool var = false;
  std::string name;

  static Role lit(std::string n) { return Role{false, std::move(n)}; }
  static Role rvar(std::string n) { return Role{true, std::move(n)}; }

  bool operator==(const Role& o) const { return var == o.var && name == o.name; }
  bool operator!=(const Role& o) const { return !(*this == o); }
  bool operator<(const Role& o) const {
    if (var != o.var) return var < o.var;
    return name < o.name;
  }
  std::string show() const { return var ? "@" + name : name; }
};

// Session endpoint s[q] (role always a literal) or channel variable.
struct Channel {
  bool endpoint = false;
  std::string session;  // endpoint only
  std::string role;     // endpoint only, literal role name
  std::string name;     // variable only

  static Channel ep(std::string s, std::string q) {
    Channel c;
    c.endpoint = true;
    c.session = std::move(s);
    c.role = std::move(q);
    return c;
  }
  static Channel cvar(std::string n) {
    Channel c;
    c.name = std::move(n);
    return c;
  }

  bool operator==(const Channel& o) const {
    return endpoint == o.endpoint && session == o.session && role == o.role && name == o.name;
  }
  bool operator!=(const Channel& o) const { return !(*this == o); }
  bool operator<(const Channel& o) const {
    if (endpoint != o.endpoint) return endpoint < o.endpoint;
    if (session != o.session) return session < o.session;
    if (role != o.role) return role < o.role;
    return name < o.name;
  }
  std::string show() const { return endpoint ? session + "[" + role + "]" : name; }
};

struct Value {
  enum class Kind { Chan, RoleVal, IntLit, StrLit, BoolLit };
  Kind kind = Kind::Chan;
  Channel chan;
  Role role;
  long long ival = 0;
  std::string sval;
  bool bval = false;

  static Value ofChan(Channel c) {
    Value v;
    v.kind = Kind::Chan;
    v.chan = std::move(c);
    return v;
  }
  static Value ofRole(Role r) {
    Value v;
    v.kind = Kind::RoleVal;
    v.role = std::move(r);
    return v;
  }
  static Value ofInt(long long i) {
    Value v;
    v.kind = Kind::IntLit;
    v.ival = i;
    return v;
  }
  static Value ofStr(std::string s) {
    Value v;
    v.kind = Kind::StrLit;
    v.sval = std::move(s);
    return v;
  }
  static Value ofBool(bool b) {
    Value v;
    v.kind = Kind::BoolLit;
    v.bval = b;
    return v;
  }
  bool operator==(const Value& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case Kind::Chan: return chan == o.chan;
      case Kind::RoleVal: return role == o.role;
      case Kind::IntLit: return ival == o.ival;
      case Kind::StrLit: return sval == o.sval;
      case Kind::BoolLit: return bval == o.bval;
    }
    return false;
  }
};

struct SessionType;
using Type = std::shared_ptr<const SessionType>;

// Payload type T: session type, role singleton, or ground type.
struct Payload {
  enum class Kind { Session, RoleSing, Gr };
  Kind kind = Kind::Gr;
  Type session;
  Role role;
  Ground ground = Ground::Int;

  static Payload ofSession(Type s);
  static Payload ofRole(Role r) {
    Payload p;
    p.kind = Kind::RoleSing;
    p.role = std::move(r);
    return p;
  }
  static Payload ofGround(Ground g) {
    Payload p;
    p.kind = Kind::Gr;
    p.ground = g;
    return p;
  }
};

struct TypeBranch {
  std::string label;
  std::vector<Payload> payloads;
  Type cont;
};

struct TypeOption {
  Role to;
  std::string label;
  std::vector<Payload> payloads;
  Type cont;
};

// Session types of Fig 3. Parallel composition lives in RType, never here.
struct SessionType {
  enum class Kind { End, Rec, Var, Branch, Select };
  Kind kind = Kind::End;
  std::string recVar;               // Rec binder name / Var reference
  Type body;                        // Rec
  bool replicated = false;          // Branch
  Role from;                        // Branch
  std::vector<TypeBranch> branches; // Branch
  std::vector<TypeOption> options;  // Select
};

inline Payload Payload::ofSession(Type s) {
  Payload p;
  p.kind = Kind::Session;
  p.session = std::move(s);
  return p;
}

inline Type tEnd() {
  static Type e = std::make_shared<SessionType>();
  return e;
}
inline Type tRec(std::string v, Type body) {
  auto t = std::make_shared<SessionType>();
  t->kind = SessionType::Kind::Rec;
  t->recVar = std::move(v);
  t->body = std::move(body);
  return t;
}
inline Type tVar(std::string v) {
  auto t = std::make_shared<SessionType>();
  t->kind = SessionType::Kind::Var;
  t->recVar = std::move(v);
  return t;
}
inline Type tBranch(bool replicated, Role from, std::vector<TypeBranch> bs) {
  auto t = std::make_shared<SessionType>();
  t->kind = SessionType::Kind::Branch;
  t->replicated = replicated;
  t->from = std::move(from);
  t->branches = std::move(bs);
  return t;
}
inline Type tSelect(std::vector<TypeOption> opts) {
  auto t = std::make_shared<SessionType>();
  t->kind = SessionType::Kind::Select;
  t->options = std::move(opts);
  return t;
}

// Runtime type U: a multiset of parallel session-type components kept in
// normal form modulo Def 2 -- flattened, with end components dropped. The
// empty part list is end itself.
struct RType {
  std::vector<Type> parts;

  static RType end() { return RType{}; }
  static RType single(Type s) {
    RType u;
    if (s->kind != SessionType::Kind::End) u.parts.push_back(std::move(s));
    return u;
  }
  static RType par(std::vector<Type> ps) {
    RType u;
    for (auto& p : ps)
      if (p->kind != SessionType::Kind::End) u.parts.push_back(std::move(p));
    return u;
  }
  bool isEndType() const { return parts.empty(); }
  bool isSingle() const { return parts.size() == 1; }
};

// Session protocol (Def 3): partial map from role literal to session type.
struct Protocol {
  std::vector<std::pair<std::string, Type>> roles;
  Pos pos;

  const Type* find(const std::string& r) const {
    for (auto& [n, t] : roles)
      if (n == r) return &t;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Processes (Fig 1)
// ---------------------------------------------------------------------------

struct Process;
using Proc = std::shared_ptr<const Process>;

struct RBinder {
  bool roleVar = false;
  std::string name;
  bool operator==(const RBinder& o) const { return roleVar == o.roleVar && name == o.name; }
};

struct SendArm {
  Channel subject;
  Role to;
  std::string label;
  std::vector<Value> payloads;
  Proc cont;
  Pos pos;
};

struct RecvArm {
  std::string label;
  std::vector<RBinder> binders;
  Proc cont;
  Pos pos;
};

struct Process {
  enum class Kind { Inact, Par, New, Send, Recv, Def, Call };
  Kind kind = Kind::Inact;
  Pos pos;

  Proc left, right;               // Par
  std::string session;            // New
  std::string protoName;          // New: declared-protocol reference, empty if inline
  Protocol proto;                 // New: resolved protocol
  Proc body;                      // New
  std::vector<SendArm> arms;      // Send; size > 1 is an output-guarded sum
  bool replicated = false;        // Recv
  Channel subject;                // Recv
  Role from;                      // Recv
  std::vector<RecvArm> branches;  // Recv
  std::string defName;            // Def / Call
  std::vector<std::pair<std::string, Type>> params;  // Def
  Proc declBody, scope;           // Def
  std::vector<Channel> args;      // Call
};

inline Proc pInact(Pos pos = {}) {
  auto p = std::make_shared<Process>();
  p->pos = pos;
  return p;
}
inline Proc pPar(Proc l, Proc r, Pos pos = {}) {
  auto p = std::make_shared<Process>();
  p->kind = Process::Kind::Par;
  p->left = std::move(l);
  p->right = std::move(r);
  p->pos = pos;
  return p;
}
inline Proc pNew(std::string s, std::string protoName, Protocol proto, Proc body, Pos pos = {}) {
  auto p = std::make_shared<Process>();
  p->kind = Process::Kind::New;
  p->session = std::move(s);
  p->protoName = std::move(protoName);
  p->proto = std::move(proto);
  p->body = std::move(body);
  p->pos = pos;
  return p;
}
inline Proc pSend(std::vector<SendArm> arms, Pos pos = {}) {
  auto p = std::make_shared<Process>();
  p->kind = Process::Kind::Send;
  p->arms = std::move(arms);
  p->pos = pos;
  return p;
}
inline Proc pRecv(bool repl, Channel subj, Role from, std::vector<RecvArm> bs, Pos pos = {}) {
  auto p = std::make_shared<Process>();
  p->kind = Process::Kind::Recv;
  p->replicated = repl;
  p->subject = std::move(subj);
  p->from = std::move(from);
  p->branches = std::move(bs);
  p->pos = pos;
  return p;
}
inline Proc pDef(std::string name, std::vector<std::pair<std::string, Type>> params, Proc declBody,
                 Proc scope, Pos pos = {}) {
  auto p = std::make_shared<Process>();
  p->kind = Process::Kind::Def;
  p->defName = std::move(name);
  p->params = std::move(params);
  p->declBody = std::move(declBody);
  p->scope = std::move(scope);
  p->pos = pos;
  return p;
}
inline Proc pCall(std::string name, std::vector<Channel> args, Pos pos = {}) {
  auto p = std::make_shared<Process>();
  p->kind = Process::Kind::Call;
  p->defName = std::move(name);
  p->args = std::move(args);
  p->pos = pos;
  return p;
}

struct Program {
  std::vector<std::pair<std::string, Protocol>> protocols;
  Proc main;
};

// ---------------------------------------------------------------------------
// Fresh names
// ---------------------------------------------------------------------------

namespace detail {
inline std::atomic<std::uint64_t>& freshCounter() {
  static std::atomic<std::uint64_t> c{0};
  return c;
}
}  // namespace detail

inline std::string freshName(const std::string& base) {
  return base + "_" + std::to_string(++detail::freshCounter());
}

// ---------------------------------------------------------------------------
// Free role variables (frv)
// ---------------------------------------------------------------------------

namespace detail {

inline void frvType(const Type& t, std::set<std::string>& bound, std::set<std::string>& out);

inline void frvPayloads(const std::vector<Payload>& ps, std::set<std::string>& bound,
                        std::set<std::string>& out, bool binding) {
  // In receiving position (branch payloads) a variable singleton binds the
  // remainder of the branch; in selections it is a plain reference.
  for (auto& p : ps) {
    switch (p.kind) {
      case Payload::Kind::RoleSing:
        if (p.role.var) {
          if (binding)
            bound.insert(p.role.name);
          else if (!bound.count(p.role.name))
            out.insert(p.role.name);
        }
        break;
      case Payload::Kind::Session: frvType(p.session, bound, out); break;
      case Payload::Kind::Gr: break;
    }
  }
}

inline void frvType(const Type& t, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (t->kind) {
    case SessionType::Kind::End:
    case SessionType::Kind::Var: return;
    case SessionType::Kind::Rec: frvType(t->body, bound, out); return;
    case SessionType::Kind::Branch: {
      std::set<std::string> b0 = bound;
      if (t->from.var) {
        if (t->replicated)
          b0.insert(t->from.name);  // universal-receive binder
        else if (!bound.count(t->from.name))
          out.insert(t->from.name);
      }
      for (auto& br : t->branches) {
        std::set<std::string> b = b0;
        frvPayloads(br.payloads, b, out, /*binding=*/true);
        frvType(br.cont, b, out);
      }
      return;
    }
    case SessionType::Kind::Select: {
      for (auto& op : t->options) {
        if (op.to.var && !bound.count(op.to.name)) out.insert(op.to.name);
        std::set<std::string> b = bound;
        frvPayloads(op.payloads, b, out, /*binding=*/false);
        frvType(op.cont, b, out);
      }
      return;
    }
  }
}

}  // namespace detail

inline std::set<std::string> freeRoleVars(const Type& t) {
  std::set<std::string> bound, out;
  detail::frvType(t, bound, out);
  return out;
}

inline std::set<std::string> freeRoleVars(const RType& u) {
  std::set<std::string> out;
  for (auto& p : u.parts) {
    auto s = freeRoleVars(p);
    out.insert(s.begin(), s.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Role substitution: replace free occurrences of a role variable.
//
// Scoping convention: a role-variable name in binding position (universal-
// receive subject, branch payload singleton) binds only when the name is not
// already in scope; an equally named inner occurrence refers to the same
// variable (no shadowing). Substituting a variable that is free in the term
// therefore reaches every occurrence, including such inner positions; a term
// in which the variable is not free is returned unchanged.
// ---------------------------------------------------------------------------

inline Type substRole(const Type& t, const Role& who, const std::string& forVar);

namespace detail {

inline Role substRoleIn(const Role& r, const Role& who, const std::string& forVar) {
  if (r.var && r.name == forVar) return who;
  return r;
}

inline Type substRoleTotal(const Type& t, const Role& who, const std::string& forVar);

inline Payload substRolePayload(const Payload& p, const Role& who, const std::string& forVar) {
  switch (p.kind) {
    case Payload::Kind::RoleSing: {
      Payload q = p;
      q.role = substRoleIn(p.role, who, forVar);
      return q;
    }
    case Payload::Kind::Session: return Payload::ofSession(substRoleTotal(p.session, who, forVar));
    default: return p;
  }
}

inline TypeBranch substRoleTypeBranch(const TypeBranch& br, const Role& who,
                                      const std::string& forVar) {
  TypeBranch out;
  out.label = br.label;
  out.payloads = br.payloads;
  for (auto& p : out.payloads) p = substRolePayload(p, who, forVar);
  out.cont = substRoleTotal(br.cont, who, forVar);
  return out;
}

inline Type substRoleTotal(const Type& t, const Role& who, const std::string& forVar) {
  using K = SessionType::Kind;
  switch (t->kind) {
    case K::End:
    case K::Var: return t;
    case K::Rec: return tRec(t->recVar, substRoleTotal(t->body, who, forVar));
    case K::Branch: {
      std::vector<TypeBranch> bs = t->branches;
      for (auto& b : bs) b = substRoleTypeBranch(b, who, forVar);
      return tBranch(t->replicated, substRoleIn(t->from, who, forVar), std::move(bs));
    }
    case K::Select: {
      std::vector<TypeOption> ops = t->options;
      for (auto& op : ops) {
        op.to = substRoleIn(op.to, who, forVar);
        for (auto& p : op.payloads) p = substRolePayload(p, who, forVar);
        op.cont = substRoleTotal(op.cont, who, forVar);
      }
      return tSelect(std::move(ops));
    }
  }
  return t;
}

}  // namespace detail

inline Type substRole(const Type& t, const Role& who, const std::string& forVar) {
  if (!freeRoleVars(t).count(forVar)) return t;
  return detail::substRoleTotal(t, who, forVar);
}

inline RType substRole(const RType& u, const Role& who, const std::string& forVar) {
  std::vector<Type> ps;
  ps.reserve(u.parts.size());
  for (auto& p : u.parts) ps.push_back(substRole(p, who, forVar));
  return RType::par(std::move(ps));
}

// Free role variables of a process, same scoping convention as for types.
inline std::set<std::string> freeRoleVars(const Proc& p);

namespace detail {

inline void frvProc(const Proc& p, std::set<std::string> bound, std::set<std::string>& out) {
  using K = Process::Kind;
  auto roleOcc = [&](const Role& r) {
    if (r.var && !bound.count(r.name)) out.insert(r.name);
  };
  switch (p->kind) {
    case K::Inact: return;
    case K::Par:
      frvProc(p->left, bound, out);
      frvProc(p->right, bound, out);
      return;
    case K::New: {
      for (auto& [r, t] : p->proto.roles) {
        std::set<std::string> b = bound;
        frvType(t, b, out);
      }
      frvProc(p->body, bound, out);
      return;
    }
    case K::Send:
      for (auto& a : p->arms) {
        roleOcc(a.to);
        for (auto& v : a.payloads)
          if (v.kind == Value::Kind::RoleVal) roleOcc(v.role);
        frvProc(a.cont, bound, out);
      }
      return;
    case K::Recv: {
      std::set<std::string> b0 = bound;
      if (p->from.var) {
        if (p->replicated) b0.insert(p->from.name);  // universal-receive binder
        else roleOcc(p->from);
      }
      for (auto& arm : p->branches) {
        std::set<std::string> b = b0;
        for (auto& bd : arm.binders)
          if (bd.roleVar) b.insert(bd.name);
        frvProc(arm.cont, b, out);
      }
      return;
    }
    case K::Def: {
      for (auto& [n, t] : p->params) {
        std::set<std::string> b = bound;
        frvType(t, b, out);
      }
      frvProc(p->declBody, bound, out);
      frvProc(p->scope, bound, out);
      return;
    }
    case K::Call: return;
  }
}

inline Proc substRoleTotalProc(const Proc& p, const Role& who, const std::string& forVar) {
  using K = Process::Kind;
  switch (p->kind) {
    case K::Inact: return p;
    case K::Par:
      return pPar(substRoleTotalProc(p->left, who, forVar),
                  substRoleTotalProc(p->right, who, forVar), p->pos);
    case K::New: {
      Protocol pr = p->proto;
      for (auto& [r, t] : pr.roles) t = substRoleTotal(t, who, forVar);
      return pNew(p->session, p->protoName, std::move(pr),
                  substRoleTotalProc(p->body, who, forVar), p->pos);
    }
    case K::Send: {
      std::vector<SendArm> arms = p->arms;
      for (auto& a : arms) {
        a.to = substRoleIn(a.to, who, forVar);
        for (auto& v : a.payloads)
          if (v.kind == Value::Kind::RoleVal) v.role = substRoleIn(v.role, who, forVar);
        a.cont = substRoleTotalProc(a.cont, who, forVar);
      }
      return pSend(std::move(arms), p->pos);
    }
    case K::Recv: {
      std::vector<RecvArm> bs = p->branches;
      for (auto& b : bs) b.cont = substRoleTotalProc(b.cont, who, forVar);
      return pRecv(p->replicated, p->subject, substRoleIn(p->from, who, forVar), std::move(bs),
                   p->pos);
    }
    case K::Def: {
      auto params = p->params;
      for (auto& [n, t] : params) t = substRoleTotal(t, who, forVar);
      return pDef(p->defName, std::move(params), substRoleTotalProc(p->declBody, who, forVar),
                  substRoleTotalProc(p->scope, who, forVar), p->pos);
    }
    case K::Call: return p;
  }
  return p;
}

inline RecvArm substRoleRecvArm(const RecvArm& arm, const Role& who, const std::string& forVar) {
  RecvArm out = arm;
  out.cont = substRoleTotalProc(out.cont, who, forVar);
  return out;
}

}  // namespace detail

inline std::set<std::string> freeRoleVars(const Proc& p) {
  std::set<std::string> out;
  detail::frvProc(p, {}, out);
  return out;
}

inline Proc substRole(const Proc& p, const Role& who, const std::string& forVar) {
  if (!freeRoleVars(p).count(forVar)) return p;
  return detail::substRoleTotalProc(p, who, forVar);
}

// ---------------------------------------------------------------------------
// Recursion-variable substitution (equi-recursive unfolding support)
// ---------------------------------------------------------------------------

inline Type substRecVar(const Type& t, const std::string& var, const Type& rep) {
  using K = SessionType::Kind;
  switch (t->kind) {
    case K::End: return t;
    case K::Var: return t->recVar == var ? rep : t;
    case K::Rec:
      if (t->recVar == var) return t;  // inner binder shadows
      return tRec(t->recVar, substRecVar(t->body, var, rep));
    case K::Branch: {
      std::vector<TypeBranch> bs = t->branches;
      for (auto& b : bs) {
        for (auto& p : b.payloads)
          if (p.kind == Payload::Kind::Session)
            p = Payload::ofSession(substRecVar(p.session, var, rep));
        b.cont = substRecVar(b.cont, var, rep);
      }
      return tBranch(t->replicated, t->from, std::move(bs));
    }
    case K::Select: {
      std::vector<TypeOption> ops = t->options;
      for (auto& op : ops) {
        for (auto& p : op.payloads)
          if (p.kind == Payload::Kind::Session)
            p = Payload::ofSession(substRecVar(p.session, var, rep));
        op.cont = substRecVar(op.cont, var, rep);
      }
      return tSelect(std::move(ops));
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Free names of processes
// ---------------------------------------------------------------------------

namespace detail {

inline void freeChansWalk(const Proc& p, std::set<std::string>& boundVars,
                          std::set<std::string>& boundSessions, std::set<Channel>& out) {
  auto note = [&](const Channel& c) {
    if (c.endpoint) {
      if (!boundSessions.count(c.session)) out.insert(c);
    } else if (!boundVars.count(c.name)) {
      out.insert(c);
    }
  };
  switch (p->kind) {
    case Process::Kind::Inact: return;
    case Process::Kind::Par:
      freeChansWalk(p->left, boundVars, boundSessions, out);
      freeChansWalk(p->right, boundVars, boundSessions, out);
      return;
    case Process::Kind::New: {
      auto bs = boundSessions;
      bs.insert(p->session);
      freeChansWalk(p->body, boundVars, bs, out);
      return;
    }
    case Process::Kind::Send:
      for (auto& a : p->arms) {
        note(a.subject);
        for (auto& v : a.payloads)
          if (v.kind == Value::Kind::Chan) note(v.chan);
        freeChansWalk(a.cont, boundVars, boundSessions, out);
      }
      return;
    case Process::Kind::Recv:
      note(p->subject);
      for (auto& b : p->branches) {
        auto bv = boundVars;
        for (auto& bd : b.binders)
          if (!bd.roleVar) bv.insert(bd.name);
        freeChansWalk(b.cont, bv, boundSessions, out);
      }
      return;
    case Process::Kind::Def: {
      auto bv = boundVars;
      for (auto& [n, t] : p->params) bv.insert(n);
      freeChansWalk(p->declBody, bv, boundSessions, out);
      freeChansWalk(p->scope, boundVars, boundSessions, out);
      return;
    }
    case Process::Kind::Call:
      for (auto& a : p->args) note(a);
      return;
  }
}

}  // namespace detail

inline std::set<Channel> freeChannels(const Proc& p) {
  std::set<std::string> bv, bs;
  std::set<Channel> out;
  detail::freeChansWalk(p, bv, bs, out);
  return out;
}

inline std::set<std::string> freeSessions(const Proc& p) {
  std::set<std::string> out;
  for (auto& c : freeChannels(p))
    if (c.endpoint) out.insert(c.session);
  return out;
}

// Free channel *variables* only (used to detect non-closed processes).
inline std::set<std::string> freeChanVars(const Proc& p) {
  std::set<std::string> out;
  for (auto& c : freeChannels(p))
    if (!c.endpoint) out.insert(c.name);
  return out;
}

// ---------------------------------------------------------------------------
// Well-formedness validation
// ---------------------------------------------------------------------------

namespace detail {

inline void validateType(const Type& t, std::set<std::string> recScope,
                         std::set<std::string> unguarded, const Pos& pos,
                         const std::string& where, std::vector<Diagnostic>& diags) {
  using K = SessionType::Kind;
  switch (t->kind) {
    case K::End: return;
    case K::Var:
      if (!recScope.count(t->recVar))
        diags.push_back({pos, where + ": free recursion variable " + t->recVar});
      else if (unguarded.count(t->recVar))
        diags.push_back({pos, where + ": unguarded recursion variable " + t->recVar});
      return;
    case K::Rec: {
      recScope.insert(t->recVar);
      unguarded.insert(t->recVar);
      validateType(t->body, recScope, unguarded, pos, where, diags);
      return;
    }
    case K::Branch: {
      if (t->branches.empty()) diags.push_back({pos, where + ": empty branch type"});
      std::set<std::string> seen;
      for (auto& b : t->branches) {
        if (!seen.insert(b.label).second)
          diags.push_back({pos, where + ": duplicate branch label " + b.label});
        for (auto& pl : b.payloads)
          if (pl.kind == Payload::Kind::Session)
            validateType(pl.session, recScope, {}, pos, where, diags);
        validateType(b.cont, recScope, {}, pos, where, diags);
      }
      return;
    }
    case K::Select: {
      if (t->options.empty()) diags.push_back({pos, where + ": empty selection type"});
      std::set<std::pair<std::string, std::string>> seen;
      for (auto& op : t->options) {
        if (!seen.insert({op.to.show(), op.label}).second)
          diags.push_back({pos, where + ": duplicate selection label " + op.label +
                                    " towards " + op.to.show()});
        for (auto& pl : op.payloads)
          if (pl.kind == Payload::Kind::Session)
            validateType(pl.session, recScope, {}, pos, where, diags);
        validateType(op.cont, recScope, {}, pos, where, diags);
      }
      return;
    }
  }
}

inline void validateProcWalk(const Proc& p, std::vector<const Protocol*> sessions,
                             std::map<std::string, const Protocol*> sessionOf,
                             std::vector<Diagnostic>& diags) {
  switch (p->kind) {
    case Process::Kind::Inact: return;
    case Process::Kind::Par:
      validateProcWalk(p->left, sessions, sessionOf, diags);
      validateProcWalk(p->right, sessions, sessionOf, diags);
      return;
    case Process::Kind::New: {
      for (auto& [r, t] : p->proto.roles) {
        validateType(t, {}, {}, p->pos, "protocol role " + r, diags);
        for (auto& v : freeRoleVars(t))
          diags.push_back({p->pos, "protocol role " + r + ": free role variable @" + v});
      }
      sessionOf[p->session] = &p->proto;
      validateProcWalk(p->body, sessions, sessionOf, diags);
      return;
    }
    case Process::Kind::Send:
      for (auto& a : p->arms) {
        if (a.subject.endpoint) {
          auto it = sessionOf.find(a.subject.session);
          if (it != sessionOf.end() && !it->second->find(a.subject.role))
            diags.push_back({a.pos, "endpoint role " + a.subject.role +
                                        " absent from protocol of session " + a.subject.session});
        }
        validateProcWalk(a.cont, sessions, sessionOf, diags);
      }
      return;
    case Process::Kind::Recv: {
      if (p->subject.endpoint) {
        auto it = sessionOf.find(p->subject.session);
        if (it != sessionOf.end() && !it->second->find(p->subject.role))
          diags.push_back({p->pos, "endpoint role " + p->subject.role +
                                       " absent from protocol of session " + p->subject.session});
      }
      std::set<std::string> seen;
      for (auto& b : p->branches) {
        if (!seen.insert(b.label).second)
          diags.push_back({b.pos, "duplicate receive branch label " + b.label});
        validateProcWalk(b.cont, sessions, sessionOf, diags);
      }
      return;
    }
    case Process::Kind::Def:
      for (auto& [n, t] : p->params) validateType(t, {}, {}, p->pos, "parameter " + n, diags);
      validateProcWalk(p->declBody, sessions, sessionOf, diags);
      validateProcWalk(p->scope, sessions, sessionOf, diags);
      return;
    case Process::Kind::Call: return;
  }
}

}  // namespace detail

inline std::vector<Diagnostic> validate(const Protocol& p) {
  std::vector<Diagnostic> diags;
  std::set<std::string> seen;
  for (auto& [r, t] : p.roles) {
    if (!seen.insert(r).second) diags.push_back({p.pos, "duplicate protocol role " + r});
    detail::validateType(t, {}, {}, p.pos, "protocol role " + r, diags);
    for (auto& v : freeRoleVars(t))
      diags.push_back({p.pos, "protocol role " + r + ": free role variable @" + v});
  }
  return diags;
}

inline std::vector<Diagnostic> validate(const Program& prog) {
  std::vector<Diagnostic> diags;
  for (auto& [n, pr] : prog.protocols) {
    auto d = validate(pr);
    diags.insert(diags.end(), d.begin(), d.end());
  }
  detail::validateProcWalk(prog.main, {}, {}, diags);
  return diags;
}

}  // namespace mpst
