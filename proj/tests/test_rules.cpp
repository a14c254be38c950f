#include <doctest.h>

#include <random>

#include "test_support.hpp"

using namespace eqdl;

namespace {

/// Unification oracle: enumerates every assignment of the atom's variables to
/// constants of the fact and keeps those that reproduce the fact. The fact is
/// ground, so the most general unifier is unique when it exists.
std::optional<Substitution> bruteUnify(const Atom& atom, const Triple& fact) {
    std::vector<uint32_t> vars;
    collectVariables(atom, vars);
    std::vector<Constant> values = {fact.s, fact.p, fact.o};
    std::vector<size_t> choice(vars.size(), 0);
    std::vector<Substitution> found;
    while (true) {
        Substitution sigma;
        for (size_t i = 0; i < vars.size(); ++i)
            sigma.bind(vars[i], values[choice[i]]);
        if (auto g = ground(atom, sigma); g && *g == fact)
            found.push_back(sigma);
        size_t k = 0;
        while (k < choice.size() && ++choice[k] == values.size())
            choice[k++] = 0;
        if (k == choice.size())
            break;
    }
    if (found.empty())
        return std::nullopt;
    // all found assignments agree on forced positions; the first is the mgu
    for (const Substitution& s : found)
        if (!(s == found.front()))
            return found.front();
    return found.front();
}

/// Cross-product oracle for evaluate: enumerate all substitutions over the
/// query variables with values from the dictionary, then filter.
std::vector<Substitution> bruteEvaluate(const FactView& x, const AnnotatedQuery& q,
                                        const DeltaSet& y, const Substitution& sigma,
                                        size_t constantCount) {
    std::vector<uint32_t> vars;
    for (const AnnotatedAtom& aa : q.atoms)
        collectVariables(aa.atom, vars);
    std::vector<uint32_t> freeVars;
    for (uint32_t v : vars)
        if (!sigma.lookup(v))
            freeVars.push_back(v);
    std::vector<size_t> choice(freeVars.size(), 0);
    std::vector<Substitution> out;
    while (true) {
        Substitution tau = sigma;
        for (size_t i = 0; i < freeVars.size(); ++i)
            tau.bind(freeVars[i], Constant{static_cast<uint32_t>(choice[i])});
        bool ok = true;
        for (const AnnotatedAtom& aa : q.atoms) {
            std::optional<Triple> g = ground(aa.atom, tau);
            if (!g || !x.contains(*g) || (aa.excludesDelta && y.contains(*g))) {
                ok = false;
                break;
            }
        }
        if (ok)
            out.push_back(tau);
        size_t k = 0;
        while (k < choice.size() && ++choice[k] == constantCount)
            choice[k++] = 0;
        if (k == choice.size() || freeVars.empty())
            break;
    }
    return out;
}

} // namespace

TEST_CASE("parseProgram parses the bijectivity rules") {
    Dictionary dict;
    Program p = parseProgram("[?y1, owl:sameAs, ?y2] :- [?y1, :R, ?x], [?y2, :R, ?x] .", dict);
    REQUIRE(p.size() == 1);
    const Rule& rule = p.rules()[0];
    Constant r = dict.intern(":R");
    Term y1 = dict.variable("y1");
    Term y2 = dict.variable("y2");
    Term x = dict.variable("x");
    CHECK(rule.head == Atom{y1, Term(kSameAs), y2});
    REQUIRE(rule.body.size() == 2);
    CHECK(rule.body[0] == Atom{y1, Term(r), x});
    CHECK(rule.body[1] == Atom{y2, Term(r), x});
}

TEST_CASE("the equality sugar desugars to a sameAs atom") {
    Dictionary dict;
    Program p = parseProgram("?y1 == ?y2 :- [?y1, :R, ?x], [?y2, :R, ?x] .\n"
                             "[?y1, owl:sameAs, ?y2] :- [?y1, :R, ?x], [?y2, :R, ?x] .\n",
                             dict);
    CHECK(p.size() == 1); // both lines parse to the same rule
}

TEST_CASE("parse errors") {
    Dictionary dict;
    SUBCASE("empty body") {
        CHECK_THROWS_WITH_AS(parseProgram("[?x, :P, ?y] :- .", dict),
                             doctest::Contains("empty rule body"), ParseError);
    }
    SUBCASE("safety violation names the head variable") {
        CHECK_THROWS_WITH_AS(parseProgram("[?x, :P, ?z] :- [?x, :Q, ?y] .", dict),
                             doctest::Contains("?z"), ParseError);
    }
    SUBCASE("errors carry line numbers") {
        CHECK_THROWS_WITH_AS(parseProgram("[?x, :P, ?x] :- [?x, :Q, ?y] .\n[?x :P ?x] :- .", dict),
                             doctest::Contains("line 2"), ParseError);
    }
    SUBCASE("missing final dot") {
        CHECK_THROWS_AS(parseProgram("[?x, :P, ?x] :- [?x, :Q, ?y]", dict), ParseError);
    }
}

TEST_CASE("comments and blank lines are ignored") {
    Dictionary dict;
    Program p = parseProgram("# a comment\n\n[?x, :P, ?x] :- [?x, :Q, ?y] . # trailing\n", dict);
    CHECK(p.size() == 1);
}

TEST_CASE("matchBody yields one match per rule and body position") {
    test::BijectiveFixture fx;
    Dictionary& dict = fx.dict;
    Program p = parseProgram("[?y1, owl:sameAs, ?y2] :- [?x, :R, ?y1], [?x, :R, ?y2] .", dict);
    Triple f = fx.t(fx.a, fx.r, fx.b);

    std::vector<BodyMatch> matches = matchBody(p, f);
    REQUIRE(matches.size() == 2);

    Term x = dict.variable("x");
    Term y1 = dict.variable("y1");
    Term y2 = dict.variable("y2");

    // first match: F matched to the first body atom; the remaining atom is
    // plain and y1 is bound
    CHECK(matches[0].bodyIndex == 0);
    CHECK(matches[0].sigma.lookup(x.variableId()) == fx.a);
    CHECK(matches[0].sigma.lookup(y1.variableId()) == fx.b);
    REQUIRE(matches[0].query.atoms.size() == 1);
    CHECK(matches[0].query.atoms[0].atom == Atom{x, Term(fx.r), y2});
    CHECK_FALSE(matches[0].query.atoms[0].excludesDelta);

    // second match: F matched to the second atom; the first atom precedes the
    // match and carries the exclusion
    CHECK(matches[1].bodyIndex == 1);
    CHECK(matches[1].sigma.lookup(y2.variableId()) == fx.b);
    REQUIRE(matches[1].query.atoms.size() == 1);
    CHECK(matches[1].query.atoms[0].atom == Atom{x, Term(fx.r), y1});
    CHECK(matches[1].query.atoms[0].excludesDelta);
}

TEST_CASE("matchBody with no matching predicate is empty") {
    test::BijectiveFixture fx;
    Constant s = fx.dict.intern(":S");
    CHECK(matchBody(fx.program, fx.t(fx.a, s, fx.b)).empty());
    CHECK(matchHead(fx.program, fx.t(fx.a, s, fx.b)).empty());
}

TEST_CASE("matchHead grounds the head and keeps the whole body plain") {
    test::BijectiveFixture fx;
    Dictionary& dict = fx.dict;
    Program p = parseProgram("[?y1, owl:sameAs, ?y2] :- [?x, :R, ?y1], [?x, :R, ?y2] .", dict);

    std::vector<HeadMatch> matches = matchHead(p, equality(fx.b, fx.d));
    REQUIRE(matches.size() == 1);
    Term x = dict.variable("x");
    Term y1 = dict.variable("y1");
    Term y2 = dict.variable("y2");
    CHECK(matches[0].sigma.lookup(y1.variableId()) == fx.b);
    CHECK(matches[0].sigma.lookup(y2.variableId()) == fx.d);
    REQUIRE(matches[0].query.atoms.size() == 2);
    CHECK(matches[0].query.atoms[0].atom == Atom{x, Term(fx.r), y1});
    CHECK_FALSE(matches[0].query.atoms[0].excludesDelta);
    CHECK_FALSE(matches[0].query.atoms[1].excludesDelta);

    // a constant in the head only matches facts carrying that constant
    Program withConst = parseProgram("[?x, :P, :k] :- [?x, :Q, ?y] .", dict);
    Constant pc = dict.intern(":P");
    Constant k = dict.intern(":k");
    CHECK(matchHead(withConst, Triple{fx.a, pc, k}).size() == 1);
    CHECK(matchHead(withConst, Triple{fx.a, pc, fx.b}).empty());
}

TEST_CASE("matching agrees with the brute-force unifier on small atoms") {
    Dictionary dict;
    std::vector<Constant> consts = {dict.intern(":p"), dict.intern(":q")};
    std::vector<Term> terms = {Term(consts[0]), Term(consts[1]), dict.variable("u"),
                               dict.variable("v")};
    std::vector<Atom> atoms;
    for (Term t1 : terms)
        for (Term t2 : terms)
            for (Term t3 : terms)
                atoms.push_back(Atom{t1, t2, t3});
    std::vector<Constant> factConsts = {consts[0], consts[1], kSameAs};
    for (const Atom& head : atoms) {
        // exhaustive facts over three constants
        for (Constant s : factConsts)
            for (Constant p : factConsts)
                for (Constant o : factConsts) {
                    Triple f{s, p, o};
                    std::optional<Substitution> expect = bruteUnify(head, f);
                    std::optional<Substitution> got = matchAtom(head, f);
                    CHECK(got.has_value() == expect.has_value());
                    if (got && expect)
                        CHECK(*got == *expect);
                }
    }
}

TEST_CASE("matchBody handles repeated body atoms via unification") {
    Dictionary dict;
    Program p = parseProgram("[?x, :P, ?x] :- [?x, :Q, ?y], [?x, :Q, ?y] .", dict);
    REQUIRE(p.size() == 1);
    Constant q = dict.intern(":Q");
    Constant a = dict.intern(":a");
    Constant b = dict.intern(":b");
    std::vector<BodyMatch> matches = matchBody(p, Triple{a, q, b});
    CHECK(matches.size() == 2); // one per position, identical sigma
    CHECK(matches[0].sigma == matches[1].sigma);
    auto expect = bruteUnify(p.rules()[0].body[0], Triple{a, q, b});
    REQUIRE(expect.has_value());
    CHECK(matches[0].sigma == *expect);
}

TEST_CASE("evaluate examples") {
    test::BijectiveFixture fx;
    Dictionary& dict = fx.dict;
    Term x = dict.variable("x");
    Term y1 = dict.variable("y1");
    Term y2 = dict.variable("y2");

    FactSet facts;
    facts.add(fx.t(fx.a, fx.r, fx.b));
    facts.add(fx.t(fx.a, fx.r, fx.d));
    FactView view{&facts, nullptr};

    SUBCASE("plain atom enumerates both bindings") {
        Substitution sigma;
        sigma.bind(x.variableId(), fx.a);
        sigma.bind(y1.variableId(), fx.b);
        AnnotatedQuery q{{{Atom{x, Term(fx.r), y2}, false}}};
        std::vector<Substitution> taus = evaluateAll(view, q, DeltaSet(), sigma);
        REQUIRE(taus.size() == 2);
        std::set<Constant> bound;
        for (const Substitution& tau : taus)
            bound.insert(*tau.lookup(y2.variableId()));
        CHECK(bound == std::set<Constant>{fx.b, fx.d});
    }
    SUBCASE("the exclusion removes delta facts from marked atoms") {
        FactSet only;
        only.add(fx.t(fx.a, fx.r, fx.b));
        FactSet delta;
        delta.add(fx.t(fx.a, fx.r, fx.b));
        Substitution sigma;
        sigma.bind(x.variableId(), fx.a);
        sigma.bind(y2.variableId(), fx.b);
        AnnotatedQuery q{{{Atom{x, Term(fx.r), y1}, true}}};
        FactView v2{&only, nullptr};
        CHECK(evaluateAll(v2, q, DeltaSet(delta), sigma).empty());
    }
    SUBCASE("an empty evaluation set yields nothing") {
        FactSet empty;
        FactView v3{&empty, nullptr};
        AnnotatedQuery q{{{Atom{x, Term(fx.r), y1}, false}}};
        CHECK(evaluateAll(v3, q, DeltaSet(), Substitution()).empty());
    }
}

TEST_CASE("evaluate equals filter-after-cross-product on random sets") {
    for (uint64_t seed = 0; seed < 15; ++seed) {
        std::mt19937_64 rng(seed);
        Dictionary dict;
        std::vector<Constant> pool;
        for (int i = 0; i < 5; ++i)
            pool.push_back(dict.intern(":k" + std::to_string(i)));
        FactSet base, minus, delta;
        for (int i = 0; i < 40; ++i)
            base.add(Triple{pool[rng() % pool.size()], pool[rng() % pool.size()],
                            pool[rng() % pool.size()]});
        base.forEach([&](const Triple& t) {
            if (rng() % 4 == 0)
                minus.add(t);
            if (rng() % 4 == 0)
                delta.add(t);
            return true;
        });
        std::vector<Term> terms = {Term(pool[0]), Term(pool[1]), dict.variable("x"),
                                   dict.variable("y"), dict.variable("z")};
        for (int trial = 0; trial < 10; ++trial) {
            AnnotatedQuery q;
            size_t len = 1 + rng() % 3;
            for (size_t k = 0; k < len; ++k)
                q.atoms.push_back({Atom{terms[rng() % terms.size()], terms[rng() % terms.size()],
                                        terms[rng() % terms.size()]},
                                   rng() % 2 == 0});
            FactView view{&base, &minus};
            DeltaSet y(delta);
            auto got = evaluateAll(view, q, y, Substitution());
            auto expect = bruteEvaluate(view, q, y, Substitution(),
                                        static_cast<uint32_t>(dict.size()));
            CHECK(test::sameAnswers(got, expect));
        }
    }
}

TEST_CASE("no (rule, tau) pair repeats across the body matches of one fact") {
    // the union over matchBody entries of the evaluated substitutions is
    // duplicate-free, whether or not the probed fact is in the set
    for (uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        Dictionary dict;
        std::vector<Constant> pool;
        for (int i = 0; i < 4; ++i)
            pool.push_back(dict.intern(":k" + std::to_string(i)));
        std::vector<Term> terms = {Term(pool[0]), Term(pool[1]), dict.variable("x"),
                                   dict.variable("y")};
        Rule rule;
        size_t len = 2 + rng() % 2; // 2..3 body atoms
        for (size_t k = 0; k < len; ++k)
            rule.body.push_back(Atom{terms[rng() % terms.size()], terms[rng() % terms.size()],
                                     terms[rng() % terms.size()]});
        std::vector<uint32_t> bodyVars;
        for (const Atom& a : rule.body)
            collectVariables(a, bodyVars);
        rule.head = Atom{bodyVars.empty() ? Term(pool[0]) : Term::variable(bodyVars[0]),
                         Term(pool[1]), Term(pool[0])};
        Program p({rule});

        FactSet v;
        for (int i = 0; i < 25; ++i)
            v.add(Triple{pool[rng() % pool.size()], pool[rng() % pool.size()],
                         pool[rng() % pool.size()]});
        bool includeF = rng() % 2 == 0;
        Triple f{pool[rng() % pool.size()], pool[rng() % pool.size()], pool[rng() % pool.size()]};
        if (includeF)
            v.add(f);
        else
            v.remove(f);

        std::set<std::string> seen;
        bool duplicate = false;
        FactView view{&v, nullptr};
        for (const BodyMatch& bm : matchBody(p, f)) {
            evaluate(view, bm.query, DeltaSet(f), bm.sigma, [&](const Substitution& tau) {
                if (!seen.insert(FiringLog::keyOf(*bm.rule, tau)).second)
                    duplicate = true;
                return true;
            });
        }
        CHECK_FALSE(duplicate);
    }
}
