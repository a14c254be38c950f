// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "eqdl/saturation.hpp"

namespace eqdl {

/// A materialisation kept in rewritten form: `facts` holds only triples that
/// are normal w.r.t. `reps`, the explicit facts are retained for incremental
/// updates, and the program is the one the store was materialised with.
struct RewrittenStore {
    RepMap reps;
    FactSet facts;
    FactSet explicitFacts;
    Program program;
};

/// The axiomatisation of equality as ordinary rules: three replacement rules
/// (one per triple position) and the three reflexivity rules.
inline std::vector<Rule> equalityAxioms(Dictionary& dict) {
    Term x1 = dict.variable("x1");
    Term x2 = dict.variable("x2");
    Term x3 = dict.variable("x3");
    Term y = dict.variable("x_repl");
    Term eq(kSameAs);
    Atom all{x1, x2, x3};
    std::vector<Rule> rules;
    rules.push_back(Rule{Atom{y, x2, x3}, {all, Atom{x1, eq, y}}});
    rules.push_back(Rule{Atom{x1, y, x3}, {all, Atom{x2, eq, y}}});
    rules.push_back(Rule{Atom{x1, x2, y}, {all, Atom{x3, eq, y}}});
    rules.push_back(Rule{Atom{x1, eq, x1}, {all}});
    rules.push_back(Rule{Atom{x2, eq, x2}, {all}});
    rules.push_back(Rule{Atom{x3, eq, x3}, {all}});
    return rules;
}

inline Program withEqualityAxioms(const Program& program, Dictionary& dict) {
    Program out = program;
    for (Rule& r : equalityAxioms(dict))
        out.append(std::move(r));
    return out;
}

/// Semi-naive materialisation with equality handled by the literal axiom
/// rules: the least fixpoint of the program plus the equality axioms over E.
/// No (rule, substitution) combination fires twice; the optional log records
/// every firing for audits.
inline FactSet materialiseAxiomatised(const FactSet& explicitFacts, const Program& program,
                                      Dictionary& dict, DerivationCounter* counters = nullptr,
                                      FiringLog* log = nullptr) {
    Program full = withEqualityAxioms(program, dict);
    FactSet facts;
    explicitFacts.forEach([&](const Triple& t) {
        facts.add(t);
        return true;
    });
    FactSet processed;
    FactSet::Cursor cur = facts.cursor();
    while (std::optional<Triple> f = facts.next(cur)) {
        processed.add(*f);
        FactView view{&processed, nullptr};
        for (const BodyMatch& bm : matchBody(full, *f)) {
            evaluate(view, bm.query, DeltaSet(*f), bm.sigma, [&](const Substitution& tau) {
                if (log)
                    log->record(FiringLog::Site::SeminaiveRule, *bm.rule, tau);
                if (counters)
                    ++counters->seminaiveDerivations;
                std::optional<Triple> head = ground(bm.rule->head, tau);
                assert(head.has_value());
                facts.add(*head);
                return true;
            });
        }
    }
    return facts;
}

/// The definitional rewriting of a dataset: representatives are the minima of
/// the equivalence classes induced by the equality facts of U (closed
/// symmetrically and transitively), and the fact component is the image of U
/// under that map. For a sameAs-saturated U, expanding the result recovers U.
inline std::pair<RepMap, FactSet> rewritingOf(const FactSet& u) {
    RepMap reps(static_cast<size_t>(u.maxConstantId()) + 1);
    u.forEach([&](const Triple& t) {
        if (!t.isEquality())
            return true;
        Constant a = reps.rep(t.s);
        Constant b = reps.rep(t.o);
        if (a != b)
            reps.mergeInto(std::max(a, b), std::min(a, b));
        return true;
    });
    FactSet image;
    u.forEach([&](const Triple& t) {
        image.add(reps.normalize(t));
        return true;
    });
    return {std::move(reps), std::move(image)};
}

/// Materialises E and keeps the result in rewritten form. This runs the same
/// saturation loop as the incremental algorithm with the provability gate
/// disabled, so every derived fact is admitted immediately.
inline RewrittenStore materialiseRewritten(const FactSet& explicitFacts, const Program& program,
                                           DerivationCounter* counters = nullptr,
                                           FiringLog* log = nullptr) {
    UpdateState st;
    st.admitAll = true;
    st.forwardProgram = program;
    st.newReps.ensure(std::max<size_t>(explicitFacts.maxConstantId(), maxConstantId(program)) + 1);
    if (log)
        st.firingLog = log;
    explicitFacts.forEach([&](const Triple& t) {
        st.proved.add(t);
        return true;
    });
    SatEnv env;
    saturate(st, env);

    RewrittenStore rs;
    rs.program = program;
    rs.explicitFacts = explicitFacts;
    rs.reps = std::move(st.newReps);
    st.proved.forEach([&](const Triple& t) {
        if (!st.provedStale.contains(t))
            rs.facts.add(t);
        return true;
    });
    if (counters)
        *counters = st.counters;
    return rs;
}

/// Adds explicit facts to a rewritten store and resumes the saturation from
/// where the initial materialisation stopped: stored facts are pre-marked as
/// processed, so only the additions and their consequences are derived.
inline void addFacts(RewrittenStore& rs, const FactSet& additions,
                     DerivationCounter* counters = nullptr) {
    UpdateState st;
    st.admitAll = true;
    st.newReps = rs.reps;
    st.newReps.ensure(static_cast<size_t>(additions.maxConstantId()) + 1);
    st.forwardProgram = normalizeProgram(rs.reps, rs.program);
    rs.facts.forEach([&](const Triple& t) {
        st.proved.add(t);
        st.provedProcessed.add(t);
        return true;
    });
    st.provedCursor = st.proved.cursorAtEnd();
    additions.forEach([&](const Triple& t) {
        rs.explicitFacts.add(t);
        st.proved.add(t);
        return true;
    });
    SatEnv env;
    saturate(st, env);

    rs.reps = std::move(st.newReps);
    FactSet updated;
    st.proved.forEach([&](const Triple& t) {
        if (!st.provedStale.contains(t))
            updated.add(t);
        return true;
    });
    rs.facts = std::move(updated);
    if (counters)
        *counters = st.counters;
}

/// Expands every stored fact through the representative map: the full
/// materialisation the rewritten store stands for.
inline FactSet expandAll(const RepMap& reps, const FactSet& facts) {
    FactSet out;
    facts.forEach([&](const Triple& t) {
        reps.expand(t, [&](const Triple& g) {
            out.add(g);
            return true;
        });
        return true;
    });
    return out;
}

inline FactSet expandAll(const RewrittenStore& rs) { return expandAll(rs.reps, rs.facts); }

/// Answers a triple pattern over the materialisation the store represents:
/// the pattern is normalized, evaluated over the stored facts, and every
/// variable binding is expanded through its class. A repeated variable binds
/// one concrete constant, never a whole class, which the per-variable
/// expansion guarantees.
inline std::vector<Substitution> answerPattern(const RewrittenStore& rs, const Atom& pattern) {
    Atom normal = pattern;
    for (size_t i = 0; i < 3; ++i) {
        Term t = pattern[i];
        if (t.isConstant()) {
            Constant c = t.constant();
            if (c.id >= rs.reps.size())
                return {}; // unknown constant: nothing can match
            Term r = Term(rs.reps.rep(c));
            if (i == 0)
                normal.s = r;
            else if (i == 1)
                normal.p = r;
            else
                normal.o = r;
        }
    }
    std::vector<Substitution> answers;
    rs.facts.matchPattern(normal, Substitution(), [&](const Substitution& tau, const Triple&) {
        // expand each variable binding over its equivalence class
        std::vector<Substitution> expanded{Substitution()};
        for (const auto& [var, rep] : tau.bindings()) {
            std::vector<Substitution> next;
            for (const Substitution& base : expanded)
                for (Constant member : rs.reps.classOf(rep)) {
                    Substitution s = base;
                    s.bind(var, member);
                    next.push_back(std::move(s));
                }
            expanded = std::move(next);
        }
        for (Substitution& s : expanded)
            answers.push_back(std::move(s));
        return true;
    });
    return answers;
}

} // namespace eqdl
