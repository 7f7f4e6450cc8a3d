#include "doctest.h"
#include "gen.hpp"
#include "util.hpp"

using namespace mpst;

TEST_CASE("subtype: branch width covariance") {
  Type a = parseType("p & { m() . end }");
  Type b = parseType("p & { m() . end, n() . end }");
  CHECK(isSubtype(a, b));
  CHECK(!isSubtype(b, a));
}

TEST_CASE("subtype: equi-recursive unfolding") {
  Type a = parseType("rec t . q ! m() . t");
  Type b = parseType("q ! m() . rec t . q ! m() . t");
  CHECK(isSubtype(a, b));
  CHECK(isSubtype(b, a));
}

TEST_CASE("subtype: selection width contravariance (depth-1 oracle)") {
  Type wide = parseType("+ { p m() . end, q n() . end }");
  Type narrow = parseType("+ { p m() . end }");
  // oracle on depth-1 selects: subtype iff option set is a superset
  CHECK(isSubtype(wide, narrow));
  CHECK(!isSubtype(narrow, wide));
}

TEST_CASE("subtype: payload variance") {
  // branch payloads covariant
  Type a = parseType("p & { m(q & { x() . end }) . end }");
  Type b = parseType("p & { m(q & { x() . end, y() . end }) . end }");
  CHECK(isSubtype(a, b));
  CHECK(!isSubtype(b, a));
  // selection payloads contravariant
  Type c = parseType("p ! m(q & { x() . end, y() . end }) . end");
  Type d = parseType("p ! m(q & { x() . end }) . end");
  CHECK(isSubtype(c, d));
  CHECK(!isSubtype(d, c));
}

TEST_CASE("subtype: replication incomparable with plain branching") {
  Type a = parseType("! p & { m() . end }");
  Type b = parseType("p & { m() . end }");
  CHECK(isSubtype(a, a));
  CHECK(!isSubtype(a, b));
  CHECK(!isSubtype(b, a));
}

TEST_CASE("subtype: universal-receive binders align up to renaming") {
  Type a = parseType("! @a & { m() . @a ! k() . end }");
  Type b = parseType("! @b & { m() . @b ! k() . end }");
  CHECK(isSubtype(a, b));
}

TEST_CASE("type congruence") {
  Type s = parseType("q ! m() . end");
  Type s2 = parseType("p & { n() . end }");
  CHECK(typeCongruent(RType::par({s, tEnd()}), RType::single(s)));  // U || end == U
  CHECK(typeCongruent(RType::par({s, s2}), RType::par({s2, s})));   // commutative
  CHECK(!typeCongruent(RType::par({s, s}), RType::single(s)));      // multiplicity matters
}

TEST_CASE("typeCongruent is an equivalence relation") {
  mpstgen::Gen gen(2024);
  std::vector<RType> us;
  for (int i = 0; i < 30; ++i) us.push_back(gen.rtype(2));
  for (auto& a : us) CHECK(typeCongruent(a, a));
  for (auto& a : us)
    for (auto& b : us) CHECK(typeCongruent(a, b) == typeCongruent(b, a));
  for (auto& a : us)
    for (auto& b : us)
      for (auto& c : us)
        if (typeCongruent(a, b) && typeCongruent(b, c)) CHECK(typeCongruent(a, c));
}

TEST_CASE("unfold1 of a recursive type") {
  Type t = parseType("rec t . q ! m() . t");
  Type u = unfold1(t);
  CHECK(print(u) == "q ! m() . rec t . q ! m() . t");
}

TEST_CASE("unfoldStar: end fixpoint") { CHECK(print(unfoldStar(tEnd())) == "end"); }

TEST_CASE("unfoldStar reaches the fixpoint in two steps on nested recs") {
  Type t = parseType("rec t . rec u . p & { m() . u }");
  // oracle: iterate unfold1 by hand
  Type once = unfold1(t);
  CHECK(once->kind == SessionType::Kind::Rec);
  Type twice = unfold1(once);
  CHECK(twice->kind == SessionType::Kind::Branch);
  CHECK(print(unfoldStar(t)) == print(twice));
  CHECK(print(unfold1(twice)) == print(twice));
}

TEST_CASE("subtype properties on generated types") {
  mpstgen::Gen gen(5150);
  for (int i = 0; i < 1000; ++i) {
    Type t = gen.type(4);
    CHECK(isSubtype(t, t));  // reflexivity
    // invariance under unfolding of either side
    Type u = unfoldStar(t);
    CHECK(isSubtype(t, u));
    CHECK(isSubtype(u, t));
    // substitution preservation on derived pairs
    Type sup = gen.supertypeOf(t);
    if (isSubtype(t, sup)) {
      Type ts = substRole(t, Role::lit("q"), "a");
      Type sups = substRole(sup, Role::lit("q"), "a");
      CHECK(isSubtype(ts, sups));
    }
  }
}

TEST_CASE("subtype transitivity on a generated corpus") {
  mpstgen::Gen gen(31337);
  std::vector<Type> ts;
  for (int i = 0; i < 24; ++i) ts.push_back(gen.type(4));
  for (auto& a : ts)
    for (auto& b : ts)
      for (auto& c : ts)
        if (isSubtype(a, b) && isSubtype(b, c)) CHECK(isSubtype(a, c));
}
