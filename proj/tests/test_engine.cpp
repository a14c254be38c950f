#include <doctest.h>

#include "test_support.hpp"

using namespace eqdl;

TEST_CASE("materialising a single fact adds only reflexivity") {
    Dictionary dict;
    FactSet e = parseFacts(":a :R :b .", dict);
    Constant a = dict.intern(":a");
    Constant b = dict.intern(":b");
    Constant r = dict.intern(":R");

    FactSet j = materialiseAxiomatised(e, Program(), dict);
    CHECK(j.toSet() == std::set<Triple>{Triple{a, r, b}, reflexivity(a), reflexivity(r),
                                        reflexivity(b), reflexivity(kSameAs)});
}

TEST_CASE("the worked example materialises to 14 facts under axioms") {
    test::BijectiveFixture fx;
    FactSet j = materialiseAxiomatised(fx.facts, fx.program, fx.dict);
    CHECK(j.size() == 14);
    CHECK(j.toSet() ==
          oracle::naiveFixpoint(fx.facts.toSet(), withEqualityAxioms(fx.program, fx.dict)));
}

TEST_CASE("materialiseAxiomatised equals the naive fixpoint on random instances") {
    for (uint64_t seed = 500; seed < 560; ++seed) {
        test::RandomInstance inst = test::randomInstance(seed);
        FactSet j = materialiseAxiomatised(inst.facts, inst.program, inst.dict);
        CHECK(j.toSet() == oracle::naiveFixpoint(inst.facts.toSet(),
                                                 withEqualityAxioms(inst.program, inst.dict)));
    }
}

TEST_CASE("the semi-naive firing log has no duplicate (rule, tau) pairs") {
    for (uint64_t seed = 560; seed < 580; ++seed) {
        test::RandomInstance inst = test::randomInstance(seed);
        FiringLog log;
        materialiseAxiomatised(inst.facts, inst.program, inst.dict, nullptr, &log);
        std::set<std::string> seen;
        for (const FiringLog::Entry& e : log.entries)
            CHECK(seen.insert(e.key).second);
    }
}

TEST_CASE("materialisation is monotone in the explicit facts") {
    for (uint64_t seed = 580; seed < 600; ++seed) {
        test::RandomInstance inst = test::randomInstance(seed);
        FactSet smaller;
        size_t k = 0;
        inst.facts.forEach([&](const Triple& t) {
            if (k++ % 2 == 0)
                smaller.add(t);
            return true;
        });
        FactSet big = materialiseAxiomatised(inst.facts, inst.program, inst.dict);
        FactSet small = materialiseAxiomatised(smaller, inst.program, inst.dict);
        bool contained = small.forEach([&](const Triple& t) { return big.contains(t); });
        CHECK(contained);
    }
}

TEST_CASE("materialiseRewritten reproduces the worked example") {
    test::BijectiveFixture fx;
    RewrittenStore rs = materialiseRewritten(fx.facts, fx.program);

    CHECK(rs.facts.toSet() == std::set<Triple>{fx.t(fx.a, fx.r, fx.b), reflexivity(fx.a),
                                               reflexivity(fx.r), reflexivity(fx.b),
                                               reflexivity(kSameAs)});
    CHECK(rs.facts.size() == 5);
    CHECK(rs.reps.rep(fx.c) == fx.a);
    CHECK(rs.reps.rep(fx.d) == fx.b);
    for (Constant c : {fx.a, fx.b, fx.r, kSameAs})
        CHECK(rs.reps.rep(c) == c);
    CHECK(rs.explicitFacts == fx.facts);
}

TEST_CASE("materialising nothing yields an empty store") {
    FactSet empty;
    RewrittenStore rs = materialiseRewritten(empty, Program());
    CHECK(rs.facts.empty());
    CHECK(rs.reps.identity());
}

TEST_CASE("rewritingOf folds equalities into representatives") {
    Dictionary dict;
    Constant a = dict.intern(":a");
    Constant b = dict.intern(":b");

    SUBCASE("two-element class") {
        FactSet u;
        u.add(equality(a, b));
        u.add(equality(b, a));
        u.add(reflexivity(a));
        u.add(reflexivity(b));
        u.add(reflexivity(kSameAs));
        auto [reps, image] = rewritingOf(u);
        CHECK(reps.rep(b) == a);
        CHECK(image.toSet() == std::set<Triple>{reflexivity(a), reflexivity(kSameAs)});
    }
    SUBCASE("no equalities: identity and unchanged facts") {
        Constant r = dict.intern(":R");
        FactSet u;
        u.add(Triple{a, r, b});
        auto [reps, image] = rewritingOf(u);
        CHECK(reps.identity());
        CHECK(image == u);
    }
}

TEST_CASE("materialiseRewritten equals the rewriting of the axiomatised fixpoint") {
    for (uint64_t seed = 600; seed < 660; ++seed) {
        test::RandomInstance inst = test::randomInstance(seed);
        RewrittenStore rs = materialiseRewritten(inst.facts, inst.program);
        FactSet j = materialiseAxiomatised(inst.facts, inst.program, inst.dict);
        auto [reps, image] = rewritingOf(j);
        CHECK(rs.facts.toSet() == image.toSet());
        CHECK(rs.reps == reps);
        // expansion equivalence: the rewritten store stands for the full set
        CHECK(expandAll(rs).toSet() == j.toSet());
        // every stored fact is normal, and representatives in the store carry
        // their reflexivity fact
        rs.facts.forEach([&](const Triple& t) {
            CHECK(rs.reps.isNormal(t));
            for (Constant c : vocOfTriple(t))
                CHECK(rs.facts.contains(reflexivity(c)));
            return true;
        });
    }
}

TEST_CASE("answerPattern expands classes back to full answers") {
    test::BijectiveFixture fx;
    RewrittenStore rs = materialiseRewritten(fx.facts, fx.program);
    Dictionary& dict = fx.dict;
    Term x = dict.variable("qx");
    Term y = dict.variable("qy");

    SUBCASE("the worked example yields the four relation answers") {
        std::vector<Substitution> answers = answerPattern(rs, Atom{x, Term(fx.r), y});
        CHECK(answers.size() == 4);
        std::set<std::pair<uint32_t, uint32_t>> pairs;
        for (const Substitution& tau : answers)
            pairs.insert({tau.lookup(x.variableId())->id, tau.lookup(y.variableId())->id});
        CHECK(pairs == std::set<std::pair<uint32_t, uint32_t>>{{fx.a.id, fx.b.id},
                                                               {fx.a.id, fx.d.id},
                                                               {fx.c.id, fx.b.id},
                                                               {fx.c.id, fx.d.id}});
    }
    SUBCASE("no matching predicate yields nothing") {
        Constant s = dict.intern(":S");
        CHECK(answerPattern(rs, Atom{x, Term(s), y}).empty());
    }
    SUBCASE("unknown constants yield nothing rather than an error") {
        RewrittenStore tiny = materialiseRewritten(FactSet(), Program());
        CHECK(answerPattern(tiny, Atom{x, Term(fx.r), y}).empty());
    }
}

TEST_CASE("answerPattern agrees with direct evaluation over the full set") {
    for (uint64_t seed = 660; seed < 700; ++seed) {
        test::RandomInstance inst = test::randomInstance(seed);
        RewrittenStore rs = materialiseRewritten(inst.facts, inst.program);
        FactSet j = materialiseAxiomatised(inst.facts, inst.program, inst.dict);

        Term x = inst.dict.variable("qx");
        Term y = inst.dict.variable("qy");
        std::vector<Constant> pool;
        for (uint32_t id = 0; id < inst.dict.size(); ++id)
            pool.push_back(Constant{id});
        std::mt19937_64 rng(seed);
        auto anyTerm = [&]() -> Term {
            switch (rng() % 3) {
            case 0:
                return x;
            case 1:
                return y;
            default:
                return Term(pool[rng() % pool.size()]);
            }
        };
        for (int trial = 0; trial < 5; ++trial) {
            Atom pattern{anyTerm(), anyTerm(), anyTerm()};
            std::vector<Substitution> direct;
            j.matchPattern(pattern, Substitution(), [&](const Substitution& tau, const Triple&) {
                direct.push_back(tau);
                return true;
            });
            CHECK(test::sameAnswers(answerPattern(rs, pattern), direct));
        }
    }
}

TEST_CASE("repeated query variables bind one concrete constant") {
    test::BijectiveFixture fx;
    // force a fact whose subject and object collapse into one class
    Dictionary& dict = fx.dict;
    FactSet facts = fx.facts;
    facts.add(fx.t(fx.a, fx.r, fx.a));
    RewrittenStore rs = materialiseRewritten(facts, fx.program);
    FactSet j = materialiseAxiomatised(facts, fx.program, dict);

    Term x = dict.variable("qx");
    std::vector<Substitution> answers = answerPattern(rs, Atom{x, Term(fx.r), x});
    std::vector<Substitution> direct;
    j.matchPattern(Atom{x, Term(fx.r), x}, Substitution(),
                   [&](const Substitution& tau, const Triple&) {
                       direct.push_back(tau);
                       return true;
                   });
    CHECK(test::sameAnswers(answers, direct));
    CHECK(!answers.empty());
}

TEST_CASE("adding facts resumes the materialisation") {
    SUBCASE("worked example grown back together") {
        test::BijectiveFixture fx;
        FactSet twoFacts = parseFacts(":a :R :b .\n:c :R :d .\n", fx.dict);
        RewrittenStore rs = materialiseRewritten(twoFacts, fx.program);
        CHECK(rs.facts.size() == 8);

        FactSet more = parseFacts(":a :R :d .\n", fx.dict);
        addFacts(rs, more);
        RewrittenStore fresh = materialiseRewritten(fx.facts, fx.program);
        CHECK(rs.facts.toSet() == fresh.facts.toSet());
        CHECK(rs.reps == fresh.reps);
    }
    SUBCASE("random instances against from-scratch materialisation") {
        for (uint64_t seed = 4001; seed <= 4060; ++seed) {
            test::RandomInstance inst = test::randomInstance(seed);
            // split the facts into an initial part and an addition
            FactSet initial, addition;
            size_t k = 0;
            inst.facts.forEach([&](const Triple& t) {
                (k++ % 3 == 0 ? addition : initial).add(t);
                return true;
            });
            RewrittenStore rs = materialiseRewritten(initial, inst.program);
            addFacts(rs, addition);
            RewrittenStore fresh = materialiseRewritten(inst.facts, inst.program);
            CHECK(rs.facts.toSet() == fresh.facts.toSet());
            CHECK(rs.reps == fresh.reps);
            CHECK(rs.explicitFacts.toSet() == inst.facts.toSet());
        }
    }
}
