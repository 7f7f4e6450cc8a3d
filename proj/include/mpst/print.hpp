// Pretty printing back to the concrete .mpst syntax, plus the canonical
// alpha-normalized key printer used for state identity in explorations.
#pragma once

#include <map>
#include <sstream>
#include <string>

#include "mpst/ast.hpp"

namespace mpst {

namespace detail {

// When renaming binders for canonical keys, free names stay as-is; bound
// names become positional. The map is threaded through the walk.
struct AlphaEnv {
  std::map<std::string, std::string> roleVars;  // source name -> canonical
  std::map<std::string, std::string> recVars;
  std::map<std::string, std::string> chanVars;
  int nRole = 0, nRec = 0, nChan = 0;

  std::string bindRole(const std::string& n) {
    std::string c = "r" + std::to_string(nRole++);
    roleVars[n] = c;
    return c;
  }
  std::string bindRec(const std::string& n) {
    std::string c = "t" + std::to_string(nRec++);
    recVars[n] = c;
    return c;
  }
  std::string bindChan(const std::string& n) {
    std::string c = "x" + std::to_string(nChan++);
    chanVars[n] = c;
    return c;
  }
};

inline std::string quoteStr(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// --- Source-name printing (round-trips through the parser) -----------------

inline std::string print(const Type& t);

inline std::string print(const Role& r) { return r.show(); }
inline std::string print(const Channel& c) { return c.show(); }

inline std::string print(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Chan: return v.chan.show();
    case Value::Kind::RoleVal: return v.role.show();
    case Value::Kind::IntLit: return std::to_string(v.ival);
    case Value::Kind::StrLit: return detail::quoteStr(v.sval);
    case Value::Kind::BoolLit: return v.bval ? "true" : "false";
  }
  return "?";
}

inline std::string print(const Payload& p) {
  switch (p.kind) {
    case Payload::Kind::Session: return print(p.session);
    case Payload::Kind::RoleSing: return p.role.show();
    case Payload::Kind::Gr: return groundName(p.ground);
  }
  return "?";
}

inline std::string printPayloads(const std::vector<Payload>& ps) {
  std::string out = "(";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ", ";
    out += print(ps[i]);
  }
  return out + ")";
}

inline std::string print(const Type& t) {
  using K = SessionType::Kind;
  switch (t->kind) {
    case K::End: return "end";
    case K::Var: return t->recVar;
    case K::Rec: return "rec " + t->recVar + " . " + print(t->body);
    case K::Branch: {
      std::string out = t->replicated ? "!" : "";
      out += t->from.show() + " & { ";
      for (std::size_t i = 0; i < t->branches.size(); ++i) {
        if (i) out += ", ";
        auto& b = t->branches[i];
        out += b.label + printPayloads(b.payloads) + " . " + print(b.cont);
      }
      return out + " }";
    }
    case K::Select: {
      if (t->options.size() == 1) {
        auto& op = t->options[0];
        return op.to.show() + " ! " + op.label + printPayloads(op.payloads) + " . " +
               print(op.cont);
      }
      std::string out = "+ { ";
      for (std::size_t i = 0; i < t->options.size(); ++i) {
        if (i) out += ", ";
        auto& op = t->options[i];
        out += op.to.show() + " " + op.label + printPayloads(op.payloads) + " . " + print(op.cont);
      }
      return out + " }";
    }
  }
  return "?";
}

inline std::string print(const RType& u) {
  if (u.parts.empty()) return "end";
  std::string out;
  for (std::size_t i = 0; i < u.parts.size(); ++i) {
    if (i) out += " || ";
    out += print(u.parts[i]);
  }
  return out;
}

inline std::string print(const Protocol& p) {
  std::string out = "{ ";
  for (std::size_t i = 0; i < p.roles.size(); ++i) {
    if (i) out += ", ";
    out += p.roles[i].first + ": " + print(p.roles[i].second);
  }
  return out + " }";
}

inline std::string print(const Proc& p);

namespace detail {

inline std::string printSendArm(const SendArm& a) {
  std::string out = a.subject.show() + "[" + a.to.show() + "]!" + a.label + "<";
  for (std::size_t i = 0; i < a.payloads.size(); ++i) {
    if (i) out += ", ";
    out += print(a.payloads[i]);
  }
  out += "> . " + print(a.cont);
  return out;
}

// Parallel operands that grab trailing input (new/def) need parentheses.
inline std::string printParOperand(const Proc& p) {
  if (p->kind == Process::Kind::New || p->kind == Process::Kind::Def)
    return "(" + print(p) + ")";
  return print(p);
}

}  // namespace detail

inline std::string print(const Proc& p) {
  using K = Process::Kind;
  switch (p->kind) {
    case K::Inact: return "0";
    case K::Par:
      return detail::printParOperand(p->left) + " | " + detail::printParOperand(p->right);
    case K::New: {
      std::string proto = p->protoName.empty() ? print(p->proto) : p->protoName;
      return "new " + p->session + " : " + proto + " . " + print(p->body);
    }
    case K::Send: {
      if (p->arms.size() == 1) return detail::printSendArm(p->arms[0]);
      std::string out = "sum { ";
      for (std::size_t i = 0; i < p->arms.size(); ++i) {
        if (i) out += ", ";
        out += detail::printSendArm(p->arms[i]);
      }
      return out + " }";
    }
    case K::Recv: {
      std::string out = p->replicated ? "!" : "";
      out += p->subject.show() + "[" + p->from.show() + "]?{ ";
      for (std::size_t i = 0; i < p->branches.size(); ++i) {
        if (i) out += ", ";
        auto& b = p->branches[i];
        out += b.label + "(";
        for (std::size_t j = 0; j < b.binders.size(); ++j) {
          if (j) out += ", ";
          out += (b.binders[j].roleVar ? "@" : "") + b.binders[j].name;
        }
        out += ") . " + print(b.cont);
      }
      return out + " }";
    }
    case K::Def: {
      std::string out = "def " + p->defName + "(";
      for (std::size_t i = 0; i < p->params.size(); ++i) {
        if (i) out += ", ";
        out += p->params[i].first + " : " + print(p->params[i].second);
      }
      out += ") = " + print(p->declBody) + " in " + print(p->scope);
      return out;
    }
    case K::Call: {
      std::string out = p->defName + "<";
      for (std::size_t i = 0; i < p->args.size(); ++i) {
        if (i) out += ", ";
        out += p->args[i].show();
      }
      return out + ">";
    }
  }
  return "?";
}

inline std::string print(const Program& prog) {
  std::string out;
  for (auto& [n, pr] : prog.protocols) {
    out += "protocol " + n + " { ";
    for (std::size_t i = 0; i < pr.roles.size(); ++i) {
      if (i) out += ", ";
      out += pr.roles[i].first + ": " + print(pr.roles[i].second);
    }
    out += " }\n";
  }
  out += "main " + print(prog.main) + "\n";
  return out;
}

// --- Canonical alpha-normalized keys ---------------------------------------

namespace detail {

inline std::string alphaType(const Type& t, AlphaEnv env);

inline std::string alphaRole(const Role& r, const AlphaEnv& env) {
  if (!r.var) return r.name;
  auto it = env.roleVars.find(r.name);
  return "@" + (it == env.roleVars.end() ? r.name : it->second);
}

inline std::string alphaPayloadsBinding(const std::vector<Payload>& ps, AlphaEnv& env) {
  std::string out = "(";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ",";
    const Payload& p = ps[i];
    switch (p.kind) {
      case Payload::Kind::RoleSing:
        if (p.role.var) out += "@" + env.bindRole(p.role.name);
        else out += p.role.name;
        break;
      case Payload::Kind::Session: out += alphaType(p.session, env); break;
      case Payload::Kind::Gr: out += groundName(p.ground); break;
    }
  }
  return out + ")";
}

inline std::string alphaPayloadsRef(const std::vector<Payload>& ps, const AlphaEnv& env) {
  std::string out = "(";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ",";
    const Payload& p = ps[i];
    switch (p.kind) {
      case Payload::Kind::RoleSing: out += alphaRole(p.role, env); break;
      case Payload::Kind::Session: out += alphaType(p.session, env); break;
      case Payload::Kind::Gr: out += groundName(p.ground); break;
    }
  }
  return out + ")";
}

inline std::string alphaType(const Type& t, AlphaEnv env) {
  using K = SessionType::Kind;
  switch (t->kind) {
    case K::End: return "end";
    case K::Var: {
      auto it = env.recVars.find(t->recVar);
      return it == env.recVars.end() ? t->recVar : it->second;
    }
    case K::Rec: {
      AlphaEnv e = env;
      std::string v = e.bindRec(t->recVar);
      return "rec " + v + "." + alphaType(t->body, e);
    }
    case K::Branch: {
      AlphaEnv e = env;
      std::string from;
      if (t->replicated && t->from.var) from = "@" + e.bindRole(t->from.name);
      else from = alphaRole(t->from, env);
      std::string out = (t->replicated ? "!" : "") + from + "&{";
      for (std::size_t i = 0; i < t->branches.size(); ++i) {
        if (i) out += ",";
        auto& b = t->branches[i];
        AlphaEnv be = e;
        out += b.label + alphaPayloadsBinding(b.payloads, be) + "." + alphaType(b.cont, be);
      }
      return out + "}";
    }
    case K::Select: {
      std::string out = "+{";
      for (std::size_t i = 0; i < t->options.size(); ++i) {
        if (i) out += ",";
        auto& op = t->options[i];
        out += alphaRole(op.to, env) + " " + op.label + alphaPayloadsRef(op.payloads, env) + "." +
               alphaType(op.cont, env);
      }
      return out + "}";
    }
  }
  return "?";
}

}  // namespace detail

// Canonical key of a single session type: binders renamed positionally,
// free names kept.
inline std::string alphaKey(const Type& t) { return detail::alphaType(t, {}); }

// Canonical key of a runtime type: parts sorted by their keys.
inline std::string alphaKey(const RType& u) {
  if (u.parts.empty()) return "end";
  std::vector<std::string> keys;
  keys.reserve(u.parts.size());
  for (auto& p : u.parts) keys.push_back(alphaKey(p));
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i) out += "||";
    out += keys[i];
  }
  return out;
}

}  // namespace mpst
