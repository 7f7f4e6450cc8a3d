// Recursive-descent parser for the .mpst concrete syntax.
#pragma once

#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpst/ast.hpp"

namespace mpst {

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return program.has_value() && diagnostics.empty(); }
};

namespace detail {

struct Token {
  enum class Kind {
    Id, Int, Str, Sym, End
  };
  Kind kind = Kind::End;
  std::string text;
  long long ival = 0;
  Pos pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skipWs();
    tok_ = Token{};
    tok_.pos = {line_, col_};
    if (i_ >= src_.size()) return;
    char c = src_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (i_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_' ||
              src_[i_] == '?')) {
        id += src_[i_];
        bump();
      }
      tok_.kind = Token::Kind::Id;
      tok_.text = id;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
      std::string num;
      if (c == '-') {
        num += c;
        bump();
      }
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
        num += src_[i_];
        bump();
      }
      tok_.kind = Token::Kind::Int;
      tok_.text = num;
      tok_.ival = std::stoll(num);
      return;
    }
    if (c == '"') {
      bump();
      std::string s;
      while (i_ < src_.size() && src_[i_] != '"') {
        char d = src_[i_];
        if (d == '\\' && i_ + 1 < src_.size()) {
          bump();
          char e = src_[i_];
          s += (e == 'n') ? '\n' : e;
          bump();
          continue;
        }
        s += d;
        bump();
      }
      if (i_ < src_.size()) bump();  // closing quote
      tok_.kind = Token::Kind::Str;
      tok_.text = s;
      return;
    }
    tok_.kind = Token::Kind::Sym;
    tok_.text = std::string(1, c);
    bump();
  }

  void skipWs() {
    for (;;) {
      while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) bump();
      if (i_ + 1 < src_.size() && src_[i_] == '/' && src_[i_ + 1] == '/') {
        while (i_ < src_.size() && src_[i_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  void bump() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  const std::string& src_;
  std::size_t i_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

struct ParseError {
  Diagnostic diag;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  ParseResult run() {
    ParseResult res;
    Program prog;
    try {
      while (peekIdIs("protocol")) {
        expectId("protocol");
        Token name = expectKind(Token::Kind::Id, "protocol name");
        Protocol p = parseProtocolBody();
        p.pos = name.pos;
        prog.protocols.emplace_back(name.text, std::move(p));
      }
      expectId("main");
      prog.main = parseProcess();
      if (lex_.peek().kind != Token::Kind::End)
        fail(lex_.peek().pos, "unexpected trailing input '" + lex_.peek().text + "'");
      resolveNamedProtocols(prog);
      prog.main = resolveValues(prog.main, {});
      res.program = std::move(prog);
    } catch (const ParseError& e) {
      diags_.push_back(e.diag);
    }
    res.diagnostics = diags_;
    if (!res.diagnostics.empty()) res.program.reset();
    return res;
  }

 private:
  Lexer lex_;
  std::vector<Diagnostic> diags_;

  [[noreturn]] void fail(Pos pos, const std::string& msg) {
    if (diags_.size() >= 10) throw ParseError{{pos, "too many errors"}};
    throw ParseError{{pos, msg}};
  }

  bool peekSym(const std::string& s) const {
    return lex_.peek().kind == Token::Kind::Sym && lex_.peek().text == s;
  }
  bool peekIdIs(const std::string& s) const {
    return lex_.peek().kind == Token::Kind::Id && lex_.peek().text == s;
  }
  bool eatSym(const std::string& s) {
    if (peekSym(s)) {
      lex_.next();
      return true;
    }
    return false;
  }
  Token expectSym(const std::string& s) {
    if (!peekSym(s)) fail(lex_.peek().pos, "expected '" + s + "', found '" + lex_.peek().text + "'");
    return lex_.next();
  }
  Token expectKind(Token::Kind k, const std::string& what) {
    if (lex_.peek().kind != k)
      fail(lex_.peek().pos, "expected " + what + ", found '" + lex_.peek().text + "'");
    return lex_.next();
  }
  void expectId(const std::string& s) {
    if (!peekIdIs(s)) fail(lex_.peek().pos, "expected '" + s + "', found '" + lex_.peek().text + "'");
    lex_.next();
  }

  static bool reserved(const std::string& s) {
    return s == "end" || s == "rec" || s == "int" || s == "str" || s == "bool" || s == "main" ||
           s == "protocol" || s == "new" || s == "sum" || s == "def" || s == "in" || s == "true" ||
           s == "false";
  }

  std::string ident(const std::string& what) {
    Token t = expectKind(Token::Kind::Id, what);
    if (reserved(t.text)) fail(t.pos, "reserved word '" + t.text + "' used as " + what);
    return t.text;
  }

  // protocol body: "{" roleTy ("," roleTy)* "}"
  Protocol parseProtocolBody() {
    Protocol p;
    p.pos = lex_.peek().pos;
    expectSym("{");
    do {
      std::string r = ident("role name");
      expectSym(":");
      Type t = parseType(/*recScope=*/{});
      p.roles.emplace_back(r, t);
    } while (eatSym(","));
    expectSym("}");
    return p;
  }

  Role parseRoleRef() {
    if (eatSym("@")) return Role::rvar(ident("role variable"));
    return Role::lit(ident("role name"));
  }

  // type := end | rec ID . type | ID | "!"? roleRef "&" "{"...
  //       | "+" "{"... | roleRef "!" ID tPayl "." type
  Type parseType(std::set<std::string> recScope) {
    Pos pos = lex_.peek().pos;
    if (peekIdIs("end")) {
      lex_.next();
      return tEnd();
    }
    if (peekIdIs("rec")) {
      lex_.next();
      std::string v = ident("recursion variable");
      expectSym(".");
      recScope.insert(v);
      return tRec(v, parseType(recScope));
    }
    if (peekSym("+")) {
      lex_.next();
      expectSym("{");
      std::vector<TypeOption> opts;
      do {
        TypeOption op;
        op.to = parseRoleRef();
        op.label = ident("message label");
        op.payloads = parsePayloads(recScope);
        expectSym(".");
        op.cont = parseType(recScope);
        opts.push_back(std::move(op));
      } while (eatSym(","));
      expectSym("}");
      return tSelect(std::move(opts));
    }
    bool repl = false;
    if (peekSym("!")) {
      lex_.next();
      repl = true;
    }
    if (!repl && lex_.peek().kind == Token::Kind::Id && !peekIdIs("end") && !peekIdIs("rec")) {
      // Could be a recursion variable, a branch, or singleton-selection sugar.
      std::string name = lex_.peek().text;
      if (recScope.count(name)) {
        // A recursion variable reference unless followed by & or !.
        Token save = lex_.next();
        if (peekSym("&") || peekSym("!")) {
          Role from = Role::lit(name);
          return parseTypeAfterRole(repl, from, recScope, save.pos);
        }
        return tVar(name);
      }
    }
    Role from = parseRoleRef();
    return parseTypeAfterRole(repl, from, recScope, pos);
  }

  Type parseTypeAfterRole(bool repl, Role from, const std::set<std::string>& recScope, Pos pos) {
    if (eatSym("&")) {
      expectSym("{");
      std::vector<TypeBranch> bs;
      do {
        TypeBranch b;
        b.label = ident("message label");
        b.payloads = parsePayloads(recScope);
        expectSym(".");
        b.cont = parseType(recScope);
        bs.push_back(std::move(b));
      } while (eatSym(","));
      expectSym("}");
      return tBranch(repl, from, std::move(bs));
    }
    if (repl) fail(pos, "'!' type prefix requires a branching type");
    expectSym("!");
    TypeOption op;
    op.to = from;
    op.label = ident("message label");
    op.payloads = parsePayloads(recScope);
    expectSym(".");
    op.cont = parseType(recScope);
    return tSelect({std::move(op)});
  }

  std::vector<Payload> parsePayloads(const std::set<std::string>& recScope) {
    std::vector<Payload> ps;
    expectSym("(");
    if (!peekSym(")")) {
      do {
        ps.push_back(parsePayload(recScope));
      } while (eatSym(","));
    }
    expectSym(")");
    return ps;
  }

  Payload parsePayload(const std::set<std::string>& recScope) {
    if (peekIdIs("int")) {
      lex_.next();
      return Payload::ofGround(Ground::Int);
    }
    if (peekIdIs("str")) {
      lex_.next();
      return Payload::ofGround(Ground::Str);
    }
    if (peekIdIs("bool")) {
      lex_.next();
      return Payload::ofGround(Ground::Bool);
    }
    if (peekSym("@")) {
      lex_.next();
      return Payload::ofRole(Role::rvar(ident("role variable")));
    }
    // Bare identifier: a role singleton unless it is a bound recursion
    // variable or the head of a structured type.
    if (lex_.peek().kind == Token::Kind::Id && !peekIdIs("end") && !peekIdIs("rec")) {
      std::string name = lex_.next().text;
      if (reserved(name)) fail(lex_.peek().pos, "reserved word '" + name + "' in payload");
      if (peekSym("&") || peekSym("!"))
        return Payload::ofSession(parseTypeAfterRole(false, Role::lit(name), recScope, lex_.peek().pos));
      if (recScope.count(name)) return Payload::ofSession(tVar(name));
      return Payload::ofRole(Role::lit(name));
    }
    return Payload::ofSession(parseType(recScope));
  }

  // process := proc1 ("|" process)?  with "0" as a proc1 alternative
  Proc parseProcess() {
    Proc l = parseProc1();
    if (eatSym("|")) {
      Pos pos = lex_.peek().pos;
      Proc r = parseProcess();
      return pPar(std::move(l), std::move(r), pos);
    }
    return l;
  }

  Proc parseProc1() {
    Pos pos = lex_.peek().pos;
    if (lex_.peek().kind == Token::Kind::Int && lex_.peek().text == "0") {
      lex_.next();
      return pInact(pos);
    }
    if (eatSym("(")) {
      Proc p = parseProcess();
      expectSym(")");
      return p;
    }
    if (peekIdIs("new")) {
      lex_.next();
      std::string s = ident("session name");
      expectSym(":");
      std::string protoName;
      Protocol proto;
      if (peekSym("{")) {
        proto = parseProtocolBody();
      } else {
        protoName = ident("protocol name");
      }
      expectSym(".");
      Proc body = parseProcess();
      return pNew(s, protoName, std::move(proto), std::move(body), pos);
    }
    if (peekIdIs("sum")) {
      lex_.next();
      expectSym("{");
      std::vector<SendArm> arms;
      do {
        arms.push_back(parseSendArm());
      } while (eatSym(","));
      expectSym("}");
      return pSend(std::move(arms), pos);
    }
    if (peekIdIs("def")) {
      lex_.next();
      std::string name = ident("definition name");
      expectSym("(");
      std::vector<std::pair<std::string, Type>> params;
      if (!peekSym(")")) {
        do {
          std::string x = ident("parameter name");
          expectSym(":");
          params.emplace_back(x, parseType({}));
        } while (eatSym(","));
      }
      expectSym(")");
      expectSym("=");
      Proc declBody = parseProcess();
      expectId("in");
      Proc scope = parseProcess();
      return pDef(name, std::move(params), std::move(declBody), std::move(scope), pos);
    }
    if (peekSym("!")) {
      lex_.next();
      return parseRecv(true, pos);
    }
    // send, recv or call, all starting with an identifier
    std::string name = ident("process");
    if (peekSym("<")) {
      lex_.next();
      std::vector<Channel> args;
      if (!peekSym(">")) {
        do {
          args.push_back(parseChan());
        } while (eatSym(","));
      }
      expectSym(">");
      return pCall(name, std::move(args), pos);
    }
    auto [subj, other] = parseCommHead(name);
    return parseCommTail(subj, other, pos);
  }

  Channel parseChan() {
    std::string name = ident("channel");
    return parseChanTail(name);
  }

  // chan := ID ("[" ID "]")? -- the leading ID was already consumed
  Channel parseChanTail(const std::string& name) {
    if (eatSym("[")) {
      std::string role = ident("role name");
      expectSym("]");
      return Channel::ep(name, role);
    }
    return Channel::cvar(name);
  }

  // Communication subjects take one bracket group (variable subject, the
  // group names the partner role) or two (endpoint subject then partner).
  std::pair<Channel, Role> parseCommHead(const std::string& firstId) {
    expectSym("[");
    if (peekSym("@")) {
      Role r = parseRoleRef();
      expectSym("]");
      return {Channel::cvar(firstId), r};
    }
    std::string id1 = ident("role name");
    expectSym("]");
    if (eatSym("[")) {
      Role r = parseRoleRef();
      expectSym("]");
      return {Channel::ep(firstId, id1), r};
    }
    return {Channel::cvar(firstId), Role::lit(id1)};
  }

  Proc parseRecv(bool repl, Pos pos) {
    std::string name = ident("channel");
    auto [subj, from] = parseCommHead(name);
    expectSym("?");
    return parseRecvBody(repl, subj, from, pos);
  }

  Proc parseRecvBody(bool repl, Channel subj, Role from, Pos pos) {
    expectSym("{");
    std::vector<RecvArm> arms;
    do {
      RecvArm arm;
      arm.pos = lex_.peek().pos;
      arm.label = ident("message label");
      expectSym("(");
      if (!peekSym(")")) {
        do {
          RBinder b;
          if (eatSym("@")) {
            b.roleVar = true;
            b.name = ident("role variable binder");
          } else {
            b.name = ident("binder");
          }
          arm.binders.push_back(std::move(b));
        } while (eatSym(","));
      }
      expectSym(")");
      expectSym(".");
      arm.cont = parseProcess();
      arms.push_back(std::move(arm));
    } while (eatSym(","));
    expectSym("}");
    return pRecv(repl, std::move(subj), std::move(from), std::move(arms), pos);
  }

  // After the subject head: "!" send or "?" recv.
  Proc parseCommTail(Channel subj, Role other, Pos pos) {
    if (eatSym("?")) return parseRecvBody(false, subj, other, pos);
    expectSym("!");
    SendArm arm = parseSendAfterBang(subj, other, pos);
    return pSend({std::move(arm)}, pos);
  }

  SendArm parseSendArm() {
    Pos pos = lex_.peek().pos;
    std::string name = ident("channel");
    auto [subj, to] = parseCommHead(name);
    expectSym("!");
    return parseSendAfterBang(subj, to, pos);
  }

  SendArm parseSendAfterBang(Channel subj, Role to, Pos pos) {
    SendArm arm;
    arm.pos = pos;
    arm.subject = std::move(subj);
    arm.to = std::move(to);
    arm.label = ident("message label");
    expectSym("<");
    if (!peekSym(">")) {
      do {
        arm.payloads.push_back(parseValue());
      } while (eatSym(","));
    }
    expectSym(">");
    expectSym(".");
    arm.cont = parseProcess();
    return arm;
  }

  Value parseValue() {
    if (lex_.peek().kind == Token::Kind::Int) return Value::ofInt(lex_.next().ival);
    if (lex_.peek().kind == Token::Kind::Str) return Value::ofStr(lex_.next().text);
    if (peekIdIs("true")) {
      lex_.next();
      return Value::ofBool(true);
    }
    if (peekIdIs("false")) {
      lex_.next();
      return Value::ofBool(false);
    }
    if (eatSym("@")) return Value::ofRole(Role::rvar(ident("role variable")));
    // Bare identifier: channel variable, endpoint, or role literal;
    // disambiguated by scope after parsing (resolveValues).
    std::string name = ident("value");
    if (peekSym("[")) return Value::ofChan(parseChanTail(name));
    return Value::ofChan(Channel::cvar(name));
  }

  void resolveNamedProtocols(Program& prog) {
    resolveNamedProtocolsIn(prog, prog.main);
  }

  void resolveNamedProtocolsIn(Program& prog, const Proc& p) {
    if (!p) return;
    if (p->kind == Process::Kind::New && !p->protoName.empty()) {
      const Protocol* found = nullptr;
      for (auto& [n, pr] : prog.protocols)
        if (n == p->protoName) found = &pr;
      if (!found) fail(p->pos, "undeclared protocol '" + p->protoName + "'");
      const_cast<Process*>(p.get())->proto = *found;
    }
    resolveNamedProtocolsIn(prog, p->left);
    resolveNamedProtocolsIn(prog, p->right);
    resolveNamedProtocolsIn(prog, p->body);
    resolveNamedProtocolsIn(prog, p->declBody);
    resolveNamedProtocolsIn(prog, p->scope);
    for (auto& a : p->arms) resolveNamedProtocolsIn(prog, a.cont);
    for (auto& b : p->branches) resolveNamedProtocolsIn(prog, b.cont);
  }

  // A bare identifier in value position is a channel variable when an
  // enclosing binder binds it, otherwise a role literal.
  Proc resolveValues(const Proc& p, std::set<std::string> boundVars) {
    using K = Process::Kind;
    switch (p->kind) {
      case K::Inact: return p;
      case K::Par:
        return pPar(resolveValues(p->left, boundVars), resolveValues(p->right, boundVars), p->pos);
      case K::New:
        return pNew(p->session, p->protoName, p->proto, resolveValues(p->body, boundVars), p->pos);
      case K::Send: {
        std::vector<SendArm> arms = p->arms;
        for (auto& a : arms) {
          for (auto& v : a.payloads) {
            if (v.kind == Value::Kind::Chan && !v.chan.endpoint && !boundVars.count(v.chan.name))
              v = Value::ofRole(Role::lit(v.chan.name));
          }
          a.cont = resolveValues(a.cont, boundVars);
        }
        return pSend(std::move(arms), p->pos);
      }
      case K::Recv: {
        std::vector<RecvArm> bs = p->branches;
        for (auto& b : bs) {
          auto bv = boundVars;
          for (auto& bd : b.binders)
            if (!bd.roleVar) bv.insert(bd.name);
          b.cont = resolveValues(b.cont, bv);
        }
        return pRecv(p->replicated, p->subject, p->from, std::move(bs), p->pos);
      }
      case K::Def: {
        auto bv = boundVars;
        for (auto& [n, t] : p->params) bv.insert(n);
        return pDef(p->defName, p->params, resolveValues(p->declBody, bv),
                    resolveValues(p->scope, boundVars), p->pos);
      }
      case K::Call: return p;
    }
    return p;
  }
};

}  // namespace detail

inline ParseResult parse(const std::string& text) { return detail::Parser(text).run(); }

// Parse a single session type, for tests and tools.
inline Type parseType(const std::string& text) {
  auto res = parse("protocol _p { _r: " + text + " } main 0");
  if (!res.program) throw std::runtime_error("parseType: " + (res.diagnostics.empty()
                                                                  ? std::string("no program")
                                                                  : res.diagnostics[0].message));
  return res.program->protocols[0].second.roles[0].second;
}

// Parse a protocol body written as `{ r: T, ... }`.
inline Protocol parseProtocol(const std::string& text) {
  auto res = parse("main new _s : " + text + " . 0");
  if (!res.program) throw std::runtime_error("parseProtocol: " + (res.diagnostics.empty()
                                                                      ? std::string("no program")
                                                                      : res.diagnostics[0].message));
  return res.program->main->proto;
}

}  // namespace mpst
