#include "doctest.h"
#include "gen.hpp"
#include "util.hpp"

using namespace mpst;

namespace {

TypingContext rootOf(const std::string& corpus) {
  return assoc("s", mpsttest::corpusProtocol(corpus));
}

}  // namespace

TEST_CASE("computeBeh: two-state example has exactly 2 canonical states") {
  auto beh = computeBeh(rootOf("beh_two_states.mpst"), 100);
  REQUIRE(beh.finite);
  CHECK(beh.repCount == 1);
  CHECK(beh.states.size() == 2);  // the context and its unfolding
}

TEST_CASE("computeBeh: pump contexts are infinite at small budgets") {
  auto behA = computeBeh(rootOf("beh_infinite.mpst"), 50);
  CHECK(!behA.finite);
  CHECK(behA.why == BehResult::Why::Budget);
  auto behB = computeBeh(rootOf("beh_infinite_loop.mpst"), 50);
  CHECK(!behB.finite);
  auto behTiny = computeBeh(rootOf("beh_infinite.mpst"), 3);
  CHECK(!behTiny.finite);
}

TEST_CASE("computeBeh: all-end context is a single state") {
  TypingContext g;
  g.chans[Channel::ep("s", "p")] = RType::end();
  auto beh = computeBeh(g, 10);
  REQUIRE(beh.finite);
  CHECK(beh.states.size() == 1);
}

TEST_CASE("computeBeh: monotone in budget") {
  auto a = computeBeh(rootOf("beh_two_states.mpst"), 50);
  auto b = computeBeh(rootOf("beh_two_states.mpst"), 5000);
  REQUIRE(a.finite);
  REQUIRE(b.finite);
  CHECK(a.states.size() == b.states.size());
  auto la = computeBeh(rootOf("load_balancer.mpst"), 100);
  auto lb = computeBeh(rootOf("load_balancer.mpst"), 10000);
  REQUIRE(la.finite);
  CHECK(la.states.size() == lb.states.size());
}

TEST_CASE("computeBeh: states closed under communication successors") {
  auto beh = computeBeh(rootOf("load_balancer.mpst"), 1000);
  REQUIRE(beh.finite);
  std::set<std::string> keys(beh.reach.keys.begin(), beh.reach.keys.end());
  for (auto& st : beh.states)
    for (auto& [act, nxt] : comSteps(st)) CHECK(keys.count(contextKey(nxt, true)));
}

TEST_CASE("checkSafety: load balancer holds") {
  auto v = checkSafety(rootOf("load_balancer.mpst"));
  CHECK(v.holds());
}

TEST_CASE("checkSafety: no common label fails S-+&") {
  TypingContext g;
  g.chans[Channel::ep("s", "p")] = RType::single(parseType("q ! m(int) . end"));
  g.chans[Channel::ep("s", "q")] = RType::single(parseType("p & { n(int) . end }"));
  auto v = checkSafety(g);
  REQUIRE(!v.holds());
  CHECK(v.reason.find("S-+&") != std::string::npos);
  CHECK(v.reason.find("no common message label") != std::string::npos);
}

TEST_CASE("checkSafety: payload mismatch on a common label fails") {
  TypingContext g;
  g.chans[Channel::ep("s", "p")] = RType::single(parseType("q ! m(int) . end"));
  g.chans[Channel::ep("s", "q")] = RType::single(parseType("p & { m(str) . end }"));
  auto v = checkSafety(g);
  CHECK(!v.holds());
}

TEST_CASE("checkSafety: free role variable fails S-role") {
  TypingContext g;
  g.chans[Channel::ep("s", "p")] = RType::single(parseType("@a ! m() . end"));
  auto v = checkSafety(g);
  REQUIRE(!v.holds());
  CHECK(v.reason.find("S-role") != std::string::npos);
}

TEST_CASE("checkSafety: unknown on infinite behavioural sets") {
  auto v = checkSafety(rootOf("beh_infinite.mpst"), 50);
  CHECK(v.status == PropertyVerdict::Status::Unknown);
  CHECK(v.reason.find("unknown(infinite)") != std::string::npos);
}

TEST_CASE("checkSafety: verdict stable under congruent roots") {
  TypingContext g = rootOf("ping.mpst");
  // congruent variant: pad an entry with end components
  TypingContext g2 = g;
  auto& u = g2.chans.begin()->second;
  std::vector<Type> parts = u.parts;
  parts.push_back(tEnd());
  u = RType::par(parts);
  CHECK(checkSafety(g).holds() == checkSafety(g2).holds());
}

TEST_CASE("checkDeadlockFree: misuse of the tree service deadlocks") {
  auto v = checkDeadlockFree(rootOf("tree_misuse.mpst"), 5000);
  REQUIRE(!v.holds());
  CHECK(v.reason.find("stuck") != std::string::npos);
  CHECK(!v.trace.empty());
}

TEST_CASE("checkDeadlockFree: two clients on the single-client tree service deadlock") {
  auto v = checkDeadlockFree(rootOf("tree_two_clients.mpst"), 20000);
  CHECK(!v.holds());
}

TEST_CASE("checkTerminating: tree service terminates for the correct client") {
  auto v = checkTerminating(rootOf("tree.mpst"), 5000);
  CHECK(v.holds());
}

TEST_CASE("checkTerminating: multi-client tree service with both clients") {
  auto v = checkTerminating(rootOf("tree_multi.mpst"), 50000);
  CHECK(v.holds());
}

TEST_CASE("two-state example: safe and deadlock-free but not terminating") {
  TypingContext g = rootOf("beh_two_states.mpst");
  CHECK(checkSafety(g).holds());
  CHECK(checkDeadlockFree(g).holds());
  auto v = checkTerminating(g);
  REQUIRE(!v.holds());
  CHECK(v.reason.find("cycle") != std::string::npos);  // self-loop in the reduction graph
}

TEST_CASE("beh graph dump is line-based") {
  auto beh = computeBeh(rootOf("beh_two_states.mpst"), 100);
  std::string dump = dumpBehGraph(beh);
  CHECK(dump.find("state 0:") != std::string::npos);
  CHECK(dump.find("--m-->") != std::string::npos);
}
