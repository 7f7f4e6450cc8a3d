#include "doctest.h"
#include "gen.hpp"
#include "util.hpp"

using namespace mpst;

namespace {

TypingContext ctxOf(std::initializer_list<std::pair<std::string, std::string>> entries) {
  TypingContext g;
  for (auto& [ep, ty] : entries) {
    auto lb = ep.find('[');
    Channel c = Channel::ep(ep.substr(0, lb), ep.substr(lb + 1, ep.size() - lb - 2));
    g.chans[c] = RType::single(parseType(ty));
  }
  return g;
}

TypingContext ex14() {
  return ctxOf({{"s[p]", "rec t . q ! m() . t"}, {"s[q]", "rec u . p & { m() . u }"}});
}

TypingContext ex15() {
  return ctxOf({{"s[p]", "rec t . q ! m() . t"}, {"s[q]", "! p & { m() . r ! m() . end }"}});
}

}  // namespace

TEST_CASE("localSteps: plain branch input advances to the continuation") {
  TypingContext g = ctxOf({{"s[p]", "q & { m() . end }"}});
  auto steps = localSteps(g);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].first.kind == Action::Kind::In);
  CHECK(isEnd(steps[0].second));
}

TEST_CASE("localSteps: replicated input pulls out a copy, binder left free") {
  TypingContext g = ctxOf({{"s[q]", "! @a & { m() . @a ! n() . end }"}});
  auto steps = localSteps(g);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].first.bindingFrom);
  const RType& u = steps[0].second.chans.at(Channel::ep("s", "q"));
  REQUIRE(u.parts.size() == 2);
  auto fv = freeRoleVars(u);
  CHECK(fv.size() == 1);  // the copy's variable is free
}

TEST_CASE("localSteps: end context has no steps") {
  TypingContext g = ctxOf({{"s[p]", "end"}});
  CHECK(localSteps(g).empty());
  CHECK(comSteps(g).empty());
}

TEST_CASE("comSteps: load balancer first step substitutes the client role") {
  TypingContext g = assoc("s", mpsttest::corpusProtocol("load_balancer.mpst"));
  auto steps = comSteps(g);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].first.label == "req");
  CHECK(steps[0].first.subject == "c");
  CHECK(steps[0].first.other.name == "s");
  const RType& server = steps[0].second.chans.at(Channel::ep("s", "s"));
  REQUIRE(server.parts.size() == 2);  // replicated type preserved, copy extracted
  for (auto& part : server.parts) {
    Type t = unfoldStar(part);
    if (t->kind == SessionType::Kind::Branch) continue;  // the persistent server
    std::string copy = print(part);
    CHECK(copy.find("@") == std::string::npos);  // @a was substituted by c
    CHECK(copy.find("fw(int, c)") != std::string::npos);
  }
}

TEST_CASE("comSteps: two-state context loops to itself modulo unfolding") {
  TypingContext g = ex14();
  auto steps = comSteps(g);
  REQUIRE(steps.size() == 1);
  CHECK(contextKey(steps[0].second, true) == contextKey(g, true));
}

TEST_CASE("reduceStar: two-state context has one canonical state") {
  auto res = reduceStar(ex14(), 100);
  CHECK(!res.boundExceeded);
  CHECK(res.states.size() == 1);
}

TEST_CASE("reduceStar: load balancer closes, all-end reachable in 4 steps on the w1 path") {
  TypingContext g = assoc("s", mpsttest::corpusProtocol("load_balancer.mpst"));
  auto res = reduceStar(g, 1000);
  CHECK(!res.boundExceeded);
  // find a state whose context is the paper's final one
  Protocol p = mpsttest::corpusProtocol("load_balancer.mpst");
  TypingContext want;
  want.chans[Channel::ep("s", "c")] = RType::end();
  want.chans[Channel::ep("s", "s")] = RType::single(*p.find("s"));
  want.chans[Channel::ep("s", "w1")] = RType::single(*p.find("w1"));
  want.chans[Channel::ep("s", "w2")] = RType::single(*p.find("w2"));
  std::string wantKey = contextKey(want, true);
  bool found = false;
  for (std::size_t i = 0; i < res.states.size(); ++i) {
    if (res.keys[i] != wantKey) continue;
    found = true;
    auto tr = res.traceTo(static_cast<int>(i));
    CHECK(tr.size() == 4);
  }
  CHECK(found);
}

TEST_CASE("reduceStar: pump context exceeds any small bound") {
  auto res = reduceStar(ex15(), 50);
  CHECK(res.boundExceeded);
}

TEST_CASE("step results are in normal form and replicated entries persist") {
  TypingContext g = assoc("s", mpsttest::corpusProtocol("tree.mpst"));
  auto res = reduceStar(g, 500);
  REQUIRE(!res.boundExceeded);
  for (auto& st : res.states) {
    for (auto& [c, u] : st.chans)
      for (auto& part : u.parts) CHECK(part->kind != SessionType::Kind::End);
    for (auto& [act, nxt] : comSteps(st)) {
      // every replicated component of every entry survives the step
      for (auto& [c, u] : st.chans) {
        for (auto& part : u.parts) {
          Type pu = unfoldStar(part);
          if (pu->kind == SessionType::Kind::Branch && pu->replicated) {
            bool stillThere = false;
            auto it = nxt.chans.find(c);
            REQUIRE(it != nxt.chans.end());
            for (auto& q : it->second.parts)
              stillThere |= alphaKey(unfoldStar(q)) == alphaKey(pu);
            CHECK(stillThere);
          }
        }
      }
    }
  }
}

// Brute-force oracle: enumerate splits and Fig 6 rule instances directly.
namespace {

struct OracleAct {
  Channel chan;
  std::size_t part;
  bool out;
  Role other;  // out: target; in: from
  bool binding = false;
  bool replicated = false;
  std::string label;
  std::vector<Payload> payloads;
  Type cont;
  Type actingPart;
};

std::vector<OracleAct> oracleActs(const TypingContext& g) {
  std::vector<OracleAct> out;
  for (auto& [c, u] : g.chans) {
    if (!c.endpoint) continue;
    for (std::size_t i = 0; i < u.parts.size(); ++i) {
      Type t = unfoldStar(u.parts[i]);
      if (t->kind == SessionType::Kind::Select) {
        for (auto& op : t->options)
          out.push_back({c, i, true, op.to, false, false, op.label, op.payloads, op.cont, t});
      } else if (t->kind == SessionType::Kind::Branch) {
        for (auto& br : t->branches)
          out.push_back({c, i, false, t->from, t->replicated && t->from.var, t->replicated,
                         br.label, br.payloads, br.cont, t});
      }
    }
  }
  return out;
}

TypingContext oracleApply(const TypingContext& g, const OracleAct& a, const Type& newPart,
                          bool keep) {
  TypingContext n = g;
  std::vector<Type> parts;
  const RType& u = n.chans.at(a.chan);
  for (std::size_t j = 0; j < u.parts.size(); ++j) {
    if (j == a.part) {
      if (keep) parts.push_back(a.actingPart);
    } else {
      parts.push_back(u.parts[j]);
    }
  }
  parts.push_back(newPart);
  n.chans[a.chan] = RType::par(parts);
  return n;
}

std::set<std::string> oracleComs(const TypingContext& g) {
  std::set<std::string> out;
  for (auto& [g1, g2] : allSplits(g, 4096)) {
    for (auto& snd : oracleActs(g1)) {
      if (!snd.out || snd.other.var) continue;
      for (auto& rcv : oracleActs(g2)) {
        if (rcv.out) continue;
        if (rcv.chan.session != snd.chan.session) continue;
        if (rcv.chan.role != snd.other.name) continue;
        if (rcv.label != snd.label) continue;
        bool com2 = rcv.binding;
        if (!com2 && (rcv.other.var || rcv.other.name != snd.chan.role)) continue;
        if (snd.payloads.size() != rcv.payloads.size()) continue;
        bool ok = true;
        std::vector<std::pair<std::string, Role>> substs;
        for (std::size_t i = 0; i < snd.payloads.size() && ok; ++i) {
          auto& ps = snd.payloads[i];
          auto& pr = rcv.payloads[i];
          if (ps.kind != pr.kind) {
            ok = false;
            break;
          }
          if (ps.kind == Payload::Kind::Session) ok = isSubtype(ps.session, pr.session);
          if (ps.kind == Payload::Kind::Gr) ok = ps.ground == pr.ground;
          if (ps.kind == Payload::Kind::RoleSing) {
            if (pr.role.var) substs.emplace_back(pr.role.name, ps.role);
            else ok = (!ps.role.var && ps.role == pr.role);
          }
        }
        if (!ok) continue;
        TypingContext g1p = oracleApply(g1, snd, snd.cont, false);
        Type resid = rcv.cont;
        if (com2) resid = substRole(resid, Role::lit(snd.chan.role), rcv.other.name);
        for (auto& [v, who] : substs) resid = substRole(resid, who, v);
        TypingContext g2p = oracleApply(g2, rcv, resid, rcv.replicated);
        TypingContext result = add(g1p, g2p);
        Action act;
        act.kind = Action::Kind::Com;
        act.session = snd.chan.session;
        act.subject = snd.chan.role;
        act.other = Role::lit(rcv.chan.role);
        act.label = snd.label;
        out.insert(act.show() + "|" + contextKey(result, true));
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("comSteps agrees with the split-enumeration oracle on small contexts") {
  mpstgen::Gen gen(424242);
  // small communication-biased types between roles p and q with label m/n
  std::function<Type(int, std::string)> commType = [&](int depth, std::string self) -> Type {
    std::string other = self == "p" ? "q" : "p";
    if (depth <= 0) return tEnd();
    switch (gen.upto(4)) {
      case 0: return tEnd();
      case 1: {
        TypeOption op{Role::lit(other), gen.coin() ? "m" : "n", {},
                      commType(depth - 1, self)};
        if (gen.coin(0.3)) op.payloads.push_back(Payload::ofGround(Ground::Int));
        return tSelect({op});
      }
      default: {
        TypeBranch b{gen.coin() ? "m" : "n", {}, commType(depth - 1, self)};
        if (gen.coin(0.3)) b.payloads.push_back(Payload::ofGround(Ground::Int));
        Role from = gen.coin(0.2) ? Role::rvar("a") : Role::lit(other);
        return tBranch(gen.coin(0.3), from, {std::move(b)});
      }
    }
  };
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    TypingContext g;
    std::vector<std::string> owners{"p", "q"};
    for (auto& o : owners)
      g.chans[Channel::ep("s", o)] =
          RType::par({commType(3, o), gen.coin(0.4) ? commType(2, o) : tEnd()});
    std::set<std::string> mine;
    for (auto& [act, nxt] : comSteps(g)) mine.insert(act.show() + "|" + contextKey(nxt, true));
    CHECK(mine == oracleComs(g));
    compared += static_cast<int>(mine.size());
  }
  CHECK(compared > 30);
}

TEST_CASE("trace export format") {
  TypingContext g = ex14();
  auto steps = comSteps(g);
  REQUIRE(!steps.empty());
  CHECK(steps[0].first.show() == "s: p -> q : m");
}
