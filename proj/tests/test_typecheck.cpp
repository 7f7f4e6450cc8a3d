#include "doctest.h"
#include "gen.hpp"
#include "util.hpp"

using namespace mpst;

TEST_CASE("typeValue: channel against a wider branch type (T-Sub)") {
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::single(parseType("p & { m() . end }"));
  auto v = typeValue(g, Value::ofChan(Channel::cvar("c")),
                     Payload::ofSession(parseType("p & { m() . end, n() . end }")));
  CHECK(v.ok());
}

TEST_CASE("typeValue: role literal against its singleton (T-q)") {
  auto v = typeValue(TypingContext{}, Value::ofRole(Role::lit("q")), Payload::ofRole(Role::lit("q")));
  CHECK(v.ok());
}

TEST_CASE("typeValue: singletons match syntactically") {
  TypingContext g;
  g.roleVars.insert("a");
  auto v = typeValue(g, Value::ofRole(Role::lit("q")), Payload::ofRole(Role::rvar("a")));
  CHECK(!v.ok());
}

TEST_CASE("typeValue: linear leftover is reported") {
  TypingContext g;
  g.chans[Channel::cvar("c")] = RType::single(parseType("p & { m() . end }"));
  g.chans[Channel::cvar("d")] = RType::single(parseType("p ! m() . end"));
  auto v = typeValue(g, Value::ofChan(Channel::cvar("c")),
                     Payload::ofSession(parseType("p & { m() . end }")));
  REQUIRE(!v.ok());
  CHECK(v.diagnostics[0].message.find("linear leftover") != std::string::npos);
}

TEST_CASE("checkProgram: the load balancer typechecks under empty environments") {
  auto v = checkProgram(mpsttest::loadCorpus("load_balancer.mpst"));
  for (auto& d : v.diagnostics) MESSAGE(d.message);
  CHECK(v.ok());
}

TEST_CASE("checkProgram: corpus programs under their expected properties") {
  for (auto* f : {"ping.mpst", "tree.mpst", "tree_multi.mpst", "lock.mpst", "auction.mpst"}) {
    auto v = checkProgram(mpsttest::loadCorpus(f));
    for (auto& d : v.diagnostics) MESSAGE(f << ": " << d.message);
    CHECK_MESSAGE(v.ok(), f);
  }
}

TEST_CASE("T-0 fails under a non-end context") {
  auto res = parse("main new s : { p: q ! m() . end, q: p & { m() . end } } . 0");
  REQUIRE(res.ok());
  auto v = checkProgram(*res.program);
  REQUIRE(!v.ok());
  bool found = false;
  for (auto& d : v.diagnostics) found |= d.message.find("[T-0]") != std::string::npos;
  CHECK(found);
}

TEST_CASE("T-! requires an end-typed ambient context") {
  // A replicated branch body must not capture the linear channel s[d].
  std::string src =
      "main new s : { P: ! @a & { ping() . @a ! pong() . end },"
      "               c: P ! ping() . P & { pong() . end },"
      "               d: q ! m() . end,"
      "               q: d & { m() . end } } . ("
      "    ! s[P][@a]?{ ping() . s[P][@a]!pong<> . s[d][q]!m<> . 0 }"
      "  | s[c][P]!ping<> . s[c][P]?{ pong() . 0 }"
      "  | s[q][d]?{ m() . 0 } )";
  auto res = parse(src);
  REQUIRE(res.ok());
  auto v = checkProgram(*res.program);
  REQUIRE(!v.ok());
  bool found = false;
  for (auto& d : v.diagnostics)
    found |= d.message.find("[T-!]") != std::string::npos &&
             d.message.find("end-typed") != std::string::npos;
  CHECK(found);
}

TEST_CASE("message to an unbound role variable is rejected") {
  auto res = parse("main new s : { p: q ! m() . end, q: p & { m() . end } } . ("
                   "  s[p][@zz]!m<> . 0 | s[q][p]?{ m() . 0 } )");
  REQUIRE(res.ok());
  auto v = checkProgram(*res.program);
  REQUIRE(!v.ok());
  bool found = false;
  for (auto& d : v.diagnostics) found |= d.message.find("unbound role variable") != std::string::npos;
  CHECK(found);
}

TEST_CASE("output choice: every summand is checked under the same context") {
  // The second summand misbehaves (wrong label), so the sum must fail even
  // though the first summand alone would typecheck.
  std::string src =
      "main new s : { p: + { q m() . end, q n() . end }, q: p & { m() . end, n() . end } } . ("
      "  sum { s[p][q]!m<> . 0, s[p][q]!zz<> . 0 }"
      "| s[q][p]?{ m() . 0, n() . 0 } )";
  auto res = parse(src);
  REQUIRE(res.ok());
  CHECK(!checkProgram(*res.program).ok());
}

TEST_CASE("T-nu rejects sessions failing the configured property") {
  auto res = parse("main new s : { p: q ! m(int) . end, q: p & { n(int) . end } } . ("
                   "  s[p][q]!m<1> . 0 | s[q][p]?{ n(x) . 0 } )");
  REQUIRE(res.ok());
  auto v = checkProgram(*res.program);
  REQUIRE(!v.ok());
  bool found = false;
  for (auto& d : v.diagnostics) found |= d.message.find("[T-nu]") != std::string::npos;
  CHECK(found);
}

TEST_CASE("configured property is used at restrictions") {
  auto prog = mpsttest::loadCorpus("tree_misuse.mpst");
  CheckOptions safetyOpts;
  CHECK(checkProgram(prog, safetyOpts).ok());
  CheckOptions dfOpts;
  dfOpts.property = Property::DeadlockFree;
  auto v = checkProgram(prog, dfOpts);
  CHECK(!v.ok());
}

TEST_CASE("unknown verdict on undecided safety budgets") {
  // A protocol with an infinite behavioural set: the property is undecided
  // at any finite budget, reported as unknown rather than ok/fail.
  std::string src =
      "protocol pump { p: rec t . q ! m() . t, q: ! p & { m() . r ! m() . end } }\n"
      "main new s : pump . 0";
  auto res = parse(src);
  REQUIRE(res.ok());
  CheckOptions opts;
  opts.budget = 50;
  auto v = checkProgram(*res.program, opts);
  CHECK(v.status == Verdict::Status::Unknown);
}

TEST_CASE("narrowing: a pointwise-smaller context still types the process") {
  // client receive offering both labels, typed against the wider and the
  // narrower channel type
  auto mk = [](const std::string& ty) {
    TypingContext g;
    g.chans[Channel::ep("s", "c")] = RType::single(parseType(ty));
    return g;
  };
  auto res = parse("main s[c][p]?{ m() . 0, n() . 0 }");
  REQUIRE(res.ok());
  Proc p = res.program->main;
  TypingContext wide = mk("p & { m() . end, n() . end }");
  CHECK(typeProcess(RecEnv{}, wide, p).ok());
  // narrower type: fewer branches; the process offers extra labels, which the
  // algorithmic checker rejects as dead branches
  TypingContext narrow = mk("p & { m() . end }");
  auto v = typeProcess(RecEnv{}, narrow, p);
  CHECK(!v.ok());
}

TEST_CASE("subject congruence: typability is preserved across 0-absorption") {
  auto res1 = parse("main new s : { p: q ! m() . end, q: p & { m() . end } } . ("
                    "  s[p][q]!m<> . 0 | s[q][p]?{ m() . 0 } | 0 )");
  auto res2 = parse("main new s : { p: q ! m() . end, q: p & { m() . end } } . ("
                    "  s[p][q]!m<> . 0 | s[q][p]?{ m() . 0 } )");
  REQUIRE(res1.ok());
  REQUIRE(res2.ok());
  CHECK(checkProgram(*res1.program).ok() == checkProgram(*res2.program).ok());
}

TEST_CASE("derivation summaries record rules and context fingerprints") {
  auto v = checkProgram(mpsttest::loadCorpus("ping.mpst"));
  REQUIRE(v.ok());
  CHECK(!v.derivation.empty());
  bool sawBang = false;
  for (auto& [rule, fp] : v.derivation) {
    CHECK(!fp.empty());
    sawBang |= rule == "T-!";
  }
  CHECK(sawBang);
}
