#include "doctest.h"
#include "gen.hpp"
#include "util.hpp"

using namespace mpst;

static TypingContext lbContext() {
  return assoc("s", mpsttest::corpusProtocol("load_balancer.mpst"));
}

TEST_CASE("assoc: one endpoint per protocol role") {
  TypingContext g = lbContext();
  CHECK(g.chans.size() == 4);
  CHECK(g.chans.count(Channel::ep("s", "s")));
  CHECK(g.chans.count(Channel::ep("s", "w1")));
  CHECK(g.chans.count(Channel::ep("s", "w2")));
  CHECK(g.chans.count(Channel::ep("s", "c")));
}

TEST_CASE("assoc: empty and end protocols") {
  Protocol empty;
  CHECK(assoc("s", empty).chans.empty());
  Protocol pend;
  pend.roles.emplace_back("p", tEnd());
  TypingContext g = assoc("s", pend);
  CHECK(g.chans.size() == 1);
  CHECK(isEnd(g));
}

TEST_CASE("add: shared channel becomes parallel") {
  Type s1 = parseType("q ! m() . end");
  Type s2 = parseType("p & { n() . end }");
  TypingContext g1, g2;
  g1.chans[Channel::cvar("c")] = RType::single(s1);
  g2.chans[Channel::cvar("c")] = RType::single(s2);
  TypingContext g = add(g1, g2);
  CHECK(g.chans[Channel::cvar("c")].parts.size() == 2);
}

TEST_CASE("add: empty is identity and role vars merge") {
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::single(parseType("q ! m() . end"));
  g.roleVars.insert("a");
  TypingContext g2 = add(g, TypingContext{});
  CHECK(contextCongruent(g, g2));
  TypingContext ra, rb;
  ra.roleVars.insert("a");
  rb.roleVars.insert("a");
  CHECK(add(ra, rb).roleVars == std::set<std::string>{"a"});
}

TEST_CASE("insertRole") {
  TypingContext g;
  CHECK(insertRole(g, Role::lit("p")).roleVars.empty());
  CHECK(insertRole(g, Role::rvar("a")).roleVars == std::set<std::string>{"a"});
  TypingContext ga = insertRole(g, Role::rvar("a"));
  CHECK(insertRole(ga, Role::rvar("a")).roleVars == std::set<std::string>{"a"});
}

TEST_CASE("isEnd") {
  CHECK(isEnd(TypingContext{}));
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::par({tEnd(), tEnd()});
  CHECK(isEnd(g));
  g.chans[Channel::cvar("d")] = RType::single(parseType("p ! m() . end"));
  CHECK(!isEnd(g));
}

TEST_CASE("splits: end entry picks a side") {
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::end();
  auto sp = allSplits(g);
  CHECK(sp.size() == 2);
  bool sawLeft = false, sawRight = false;
  for (auto& [l, r] : sp) {
    if (l.chans.count(Channel::cvar("c")) && !r.chans.count(Channel::cvar("c"))) sawLeft = true;
    if (r.chans.count(Channel::cvar("c")) && !l.chans.count(Channel::cvar("c"))) sawRight = true;
  }
  CHECK(sawLeft);
  CHECK(sawRight);
}

TEST_CASE("splits: parallel entries distribute components") {
  Type s1 = parseType("q ! m() . end");
  Type s2 = parseType("p & { n() . end }");
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::par({s1, s2});
  auto sp = allSplits(g);
  bool found = false;
  for (auto& [l, r] : sp) {
    auto lc = l.chans.find(Channel::cvar("c"));
    auto rc = r.chans.find(Channel::cvar("c"));
    if (lc != l.chans.end() && rc != r.chans.end() && lc->second.parts.size() == 1 &&
        rc->second.parts.size() == 1)
      found = true;
  }
  CHECK(found);
}

TEST_CASE("splits: 2^n enumeration oracle for non-parallel entries") {
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::single(parseType("q ! m() . end"));
  g.chans[Channel::cvar("d")] = RType::single(parseType("p & { n() . end }"));
  CHECK(allSplits(g).size() == 4);
}

TEST_CASE("splitFor: deterministic when demands are disjoint") {
  TypingContext g = lbContext();
  std::set<Channel> left{Channel::ep("s", "s")};
  std::set<Channel> right{Channel::ep("s", "w1"), Channel::ep("s", "w2"), Channel::ep("s", "c")};
  auto res = splitFor(g, left, right);
  REQUIRE(!res.hardError);
  REQUIRE(res.candidates.size() == 1);
  CHECK(res.candidates[0].first.chans.size() == 1);
  CHECK(res.candidates[0].second.chans.size() == 3);
}

TEST_CASE("splitFor: both sides demanding a parallel entry enumerates partitions") {
  Type s1 = parseType("q ! m() . end");
  Type s2 = parseType("p & { n() . end }");
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::par({s1, s2});
  std::set<Channel> d{Channel::cvar("c")};
  auto res = splitFor(g, d, d);
  REQUIRE(!res.hardError);
  CHECK(res.candidates.size() == 4);
  // preferred candidates put one component on each side
  auto& [l, r] = res.candidates[0];
  CHECK(l.chans.count(Channel::cvar("c")));
  CHECK(r.chans.count(Channel::cvar("c")));
}

TEST_CASE("splitFor: linear channel demanded twice is a hard error") {
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::single(parseType("q ! m() . end"));
  std::set<Channel> d{Channel::cvar("c")};
  // oracle: no split places a single component on both sides
  for (auto& [l, r] : allSplits(g))
    CHECK(!(l.chans.count(Channel::cvar("c")) && r.chans.count(Channel::cvar("c"))));
  auto res = splitFor(g, d, d);
  CHECK(res.hardError);
  CHECK(res.error.find("used twice") != std::string::npos);
}

TEST_CASE("split/add inversion on generated contexts") {
  mpstgen::Gen gen(4711);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    TypingContext g = gen.context(2, 1 + gen.upto(3));
    auto sp = allSplits(g, 64);
    for (auto& [l, r] : sp) {
      CHECK(contextCongruent(add(l, r), g));
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("substRole distributes over splits") {
  mpstgen::Gen gen(88);
  for (int i = 0; i < 100; ++i) {
    TypingContext g = gen.context(2, 2);
    auto sp = allSplits(g, 16);
    for (auto& [l, r] : sp) {
      TypingContext lhs = substRole(g, Role::lit("q"), "a");
      TypingContext rhs = add(substRole(l, Role::lit("q"), "a"), substRole(r, Role::lit("q"), "a"));
      CHECK(contextCongruent(lhs, rhs));
    }
  }
}

TEST_CASE("end contexts are substitution-invariant") {
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::end();
  g.roleVars.insert("a");
  TypingContext g2 = substRole(g, Role::lit("q"), "a");
  CHECK(contextCongruent(g, g2));
}
