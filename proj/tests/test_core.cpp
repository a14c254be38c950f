#include <doctest.h>

#include "test_support.hpp"

using namespace eqdl;

TEST_CASE("dictionary pins owl:sameAs to id 0") {
    Dictionary dict;
    CHECK(dict.intern("owl:sameAs") == kSameAs);
    CHECK(dict.intern("owl:sameAs").id == 0);
    CHECK(dict.decode(kSameAs) == "owl:sameAs");
}

TEST_CASE("interning is idempotent and ids follow encounter order") {
    Dictionary dict;
    Constant a = dict.intern(":a");
    Constant again = dict.intern(":a");
    CHECK(a == again);
    Constant b = dict.intern(":b");
    CHECK(a.id == 1);
    CHECK(b.id == 2);
    CHECK(a < b);
    CHECK(kSameAs < a);
    CHECK(dict.decode(a) == ":a");
    CHECK(dict.decode(b) == ":b");
}

TEST_CASE("dictionary round-trips every interned token") {
    Dictionary dict;
    std::vector<std::string> tokens = {":a", "<http://example.org/x>", "\"a literal\"",
                                       "ex:name", ":b"};
    for (const std::string& tok : tokens) {
        Constant c = dict.intern(tok);
        CHECK(dict.decode(c) == tok);
    }
    // and the interning order is the id order
    for (size_t i = 0; i + 1 < tokens.size(); ++i)
        CHECK(dict.intern(tokens[i]) < dict.intern(tokens[i + 1]));
}

TEST_CASE("malformed tokens are rejected") {
    Dictionary dict;
    CHECK_THROWS_AS(dict.intern(""), ParseError);
    CHECK_THROWS_AS(dict.intern("noColon"), ParseError);
    CHECK_THROWS_AS(dict.intern("<unterminated"), ParseError);
    CHECK_THROWS_AS(dict.intern("\"unterminated"), ParseError);
    CHECK_THROWS_AS(dict.intern("has space:x"), ParseError);
}

TEST_CASE("apply replaces bound variables and leaves the rest") {
    Dictionary dict;
    Constant a = dict.intern(":a");
    Constant b = dict.intern(":b");
    Constant r = dict.intern(":R");
    Term x = dict.variable("x");
    Term y = dict.variable("y");

    Atom pattern{x, Term(r), y};
    Substitution sigma;
    sigma.bind(x.variableId(), a);
    sigma.bind(y.variableId(), b);
    CHECK(apply(pattern, sigma) == Atom{Term(a), Term(r), Term(b)});
    CHECK(apply(pattern, Substitution()) == pattern);

    // partially grounding a rule leaves the untouched variables free
    Term y1 = dict.variable("y1");
    Term y2 = dict.variable("y2");
    Rule rule{Atom{y1, Term(kSameAs), y2}, {Atom{x, Term(r), y1}, Atom{x, Term(r), y2}}};
    Substitution justX;
    justX.bind(x.variableId(), a);
    Rule grounded = apply(rule, justX);
    Rule expected{Atom{y1, Term(kSameAs), y2},
                  {Atom{Term(a), Term(r), y1}, Atom{Term(a), Term(r), y2}}};
    CHECK(grounded == expected);
}

TEST_CASE("substitutions compose as unions on disjoint domains") {
    Dictionary dict;
    Constant a = dict.intern(":a");
    Constant b = dict.intern(":b");
    Term x = dict.variable("x");
    Term y = dict.variable("y");
    Term z = dict.variable("z");

    Substitution sigma, tau;
    sigma.bind(x.variableId(), a);
    tau.bind(y.variableId(), b);
    auto both = Substitution::merged(sigma, tau);
    REQUIRE(both.has_value());

    Atom atom{x, y, z};
    CHECK(apply(apply(atom, sigma), tau) == apply(atom, *both));
    CHECK(apply(apply(atom, tau), sigma) == apply(atom, *both));
}

TEST_CASE("voc collects exactly the occurring constants") {
    test::BijectiveFixture fx;
    SUBCASE("sameAs is in the vocabulary of an equality") {
        std::set<Constant> v = voc(equality(fx.a, fx.b));
        CHECK(v == std::set<Constant>{kSameAs, fx.a, fx.b});
    }
    SUBCASE("variables are excluded") {
        Dictionary& dict = fx.dict;
        Atom atom{dict.variable("x"), Term(fx.r), dict.variable("y")};
        CHECK(voc(atom) == std::set<Constant>{fx.r});
    }
    SUBCASE("program vocabulary") {
        CHECK(voc(fx.program) == std::set<Constant>{kSameAs, fx.r});
    }
}

TEST_CASE("rule safety detection names the offending variable") {
    Dictionary dict;
    Constant q = dict.intern(":Q");
    Term x = dict.variable("x");
    Term z = dict.variable("z");
    Rule unsafe{Atom{x, Term(q), z}, {Atom{x, Term(q), x}}};
    auto bad = unsafeHeadVariable(unsafe);
    REQUIRE(bad.has_value());
    CHECK(dict.variableName(*bad) == "z");
}

TEST_CASE("programs drop duplicate rules on construction") {
    Dictionary dict;
    Constant r = dict.intern(":R");
    Term x = dict.variable("x");
    Term y = dict.variable("y");
    Rule rule{Atom{x, Term(r), y}, {Atom{y, Term(r), x}}};
    Program p({rule, rule, rule});
    CHECK(p.size() == 1);
}
