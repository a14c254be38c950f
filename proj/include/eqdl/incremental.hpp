// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <chrono>
#include <functional>

#include "eqdl/engine.hpp"

namespace eqdl {

struct UpdateOptions {
    /// Index explicit and delayed facts by their normalization instead of
    /// streaming class expansions during checked-fact intake.
    bool useExplicitIndex = false;
};

/// Test instrumentation points. afterCheckProvability fires once per doubtful
/// fact, after its top-level provability check completes; afterIteration at
/// the end of each main-loop pass; beforePropagate just before the changes
/// are folded into the store. The firing log records every rule firing site.
struct UpdateHooks {
    std::function<void(const RewrittenStore&, const UpdateState&)> afterCheckProvability;
    std::function<void(const RewrittenStore&, const UpdateState&)> afterIteration;
    std::function<void(const RewrittenStore&, const UpdateState&)> beforePropagate;
    FiringLog* firingLog = nullptr;
};

struct UpdateReport {
    std::string strategy;
    size_t requestedDeletions = 0;
    size_t appliedDeletions = 0;
    size_t storeAdded = 0;
    size_t storeRemoved = 0;
    long long storeDelta = 0;
    size_t storeSize = 0;
    DerivationCounter counters;
    size_t derivations = 0;
    double wallMs = 0.0;
    size_t peakDoubtful = 0, peakChecked = 0, peakProved = 0, peakProvedStale = 0;
    size_t peakDelayed = 0, peakProcessed = 0, peakDisproved = 0, peakDoubtfulProcessed = 0;
};

/// allProved: F is not disproved and every fact F represents is proved.
inline bool allProved(const RewrittenStore& rs, const UpdateState& st, const Triple& f) {
    if (st.disproved.contains(f))
        return false;
    return rs.reps.expand(f, [&](const Triple& g) {
        Triple n = st.newReps.normalize(g);
        return st.proved.contains(n) && !st.provedStale.contains(n);
    });
}

/// allDisproved: no fact F represents is proved.
inline bool allDisproved(const RewrittenStore& rs, const UpdateState& st, const Triple& f) {
    return rs.reps.expand(f, [&](const Triple& g) {
        Triple n = st.newReps.normalize(g);
        return !(st.proved.contains(n) && !st.provedStale.contains(n));
    });
}

namespace detail {

/// The body of a rule grounded by tau, as a set: duplicate atoms collapse.
inline std::vector<Triple> groundedBody(const Rule& rule, const Substitution& tau) {
    std::vector<Triple> out;
    for (const Atom& atom : rule.body) {
        std::optional<Triple> g = ground(atom, tau);
        assert(g.has_value());
        bool seen = false;
        for (const Triple& t : out)
            if (t == *g)
                seen = true;
        if (!seen)
            out.push_back(*g);
    }
    return out;
}

/// Backward chaining: ensures the status of every fact F represents is known.
/// Each fact enters `checked` once, which bounds the recursion; the chase
/// stops early as soon as everything F represents is proved.
inline void checkProvability(RewrittenStore& rs, UpdateState& st, const Program& normalizedProgram,
                             const UpdateHooks* hooks, const Triple& f) {
    if (!st.checked.add(f))
        return;
    SatEnv env{&rs.reps, &rs.explicitFacts};
    saturate(st, env);
    if (allProved(rs, st, f))
        return;

    if (f.isReflexive()) {
        Constant c = f.s;
        bool stopped = !rs.facts.forEachContaining(c, [&](const Triple& g) {
            if (st.disproved.contains(g))
                return true;
            ++st.counters.backwardChecks;
            ++st.counters.backwardReflexivity;
            checkProvability(rs, st, normalizedProgram, hooks, g);
            return !allProved(rs, st, f);
        });
        if (stopped)
            return;
    }

    for (Constant c : vocOfTriple(f)) {
        if (st.disproved.contains(reflexivity(c)))
            continue;
        if (rs.reps.classSize(c) <= 1)
            continue; // a singleton cannot feed the replacement rules
        ++st.counters.backwardChecks;
        ++st.counters.backwardReplacement;
        checkProvability(rs, st, normalizedProgram, hooks, reflexivity(c));
        if (allProved(rs, st, f))
            return;
    }

    FactView view{&rs.facts, &st.disproved};
    for (const HeadMatch& hm : matchHead(normalizedProgram, f)) {
        bool keepGoing = evaluate(view, hm.query, DeltaSet(), hm.sigma,
                                  [&](const Substitution& tau) {
                                      for (const Triple& g : groundedBody(*hm.rule, tau)) {
                                          ++st.counters.backwardChecks;
                                          ++st.counters.backwardRule;
                                          checkProvability(rs, st, normalizedProgram, hooks, g);
                                          if (allProved(rs, st, f))
                                              return false;
                                      }
                                      return true;
                                  });
        if (!keepGoing)
            return;
    }
}

/// Folds the computed changes back into the store: representatives of classes
/// touched by a checked reflexivity fact are updated, doubtful facts that
/// were not proved are deleted, and proved facts are re-normalized and added.
inline void propagateChanges(RewrittenStore& rs, UpdateState& st, UpdateReport& report) {
    st.checked.forEach([&](const Triple& f) {
        if (!f.isReflexive())
            return true;
        std::vector<Constant> members = rs.reps.classOf(f.s);
        for (Constant d : members)
            rs.reps.reassign(d, st.newReps.rep(d));
        return true;
    });
    st.doubtful.forEach([&](const Triple& f) {
        if (st.proved.contains(f) && !st.provedStale.contains(f))
            return true;
        if (rs.facts.remove(f))
            ++report.storeRemoved;
        return true;
    });
    st.proved.forEach([&](const Triple& f) {
        if (st.provedStale.contains(f))
            return true;
        if (rs.facts.add(rs.reps.normalize(f)))
            ++report.storeAdded;
        return true;
    });
}

} // namespace detail

/// Incrementally deletes a set of explicit facts from a rewritten store.
/// Doubt is seeded from the normalized deleted facts and propagated forward
/// through replacement, reflexivity and the program rules, while backward
/// chaining establishes which doubtful facts survive; the changes are folded
/// into the store in a final pass. Deleting facts absent from the explicit
/// set is a silent no-op.
inline UpdateReport incrementalDelete(RewrittenStore& rs, const FactSet& deletions,
                                      const UpdateOptions& options = {},
                                      const UpdateHooks* hooks = nullptr) {
    auto started = std::chrono::steady_clock::now();
    UpdateReport report;
    report.strategy = "bfeq";
    report.requestedDeletions = deletions.size();
    size_t sizeBefore = rs.facts.size();

    UpdateState st;
    st.useExplicitIndex = options.useExplicitIndex;
    if (hooks)
        st.firingLog = hooks->firingLog;
    st.newReps.ensure(rs.reps.size());
    st.forwardProgram = rs.program;
    Program normalizedProgram = normalizeProgram(rs.reps, rs.program);

    deletions.forEach([&](const Triple& f) {
        if (rs.explicitFacts.remove(f)) {
            ++report.appliedDeletions;
            st.doubtful.add(rs.reps.normalize(f));
        }
        return true;
    });
    if (st.useExplicitIndex) {
        rs.explicitFacts.forEach([&](const Triple& g) {
            st.explicitByRep[rs.reps.normalize(g)].push_back(g);
            return true;
        });
        for (auto& [rep, bucket] : st.explicitByRep)
            std::sort(bucket.begin(), bucket.end());
    }

    while (std::optional<Triple> f = st.doubtful.next(st.doubtfulCursor)) {
        detail::checkProvability(rs, st, normalizedProgram, hooks, *f);
        if (hooks && hooks->afterCheckProvability)
            hooks->afterCheckProvability(rs, st);
        // Collect disproved facts among the newly checked ones. Once some
        // expansion of a checked fact is proved it stays proved, so facts
        // already scanned can never turn disproved later.
        while (std::optional<Triple> g = st.checked.next(st.disprovedScanCursor))
            if (allDisproved(rs, st, *g))
                st.disproved.add(*g);
        if (!allProved(rs, st, *f)) {
            auto doubt = [&](const Triple& g) {
                ++st.counters.doubtful;
                st.doubtful.add(g);
            };
            if (f->isReflexive() && rs.reps.classSize(f->s) > 1) {
                rs.facts.forEachContaining(f->s, [&](const Triple& g) {
                    if (!st.doubtfulProcessed.contains(g))
                        doubt(g);
                    return true;
                });
            }
            for (Constant c : vocOfTriple(*f))
                doubt(reflexivity(c));
            FactView view{&rs.facts, &st.doubtfulProcessed};
            for (const BodyMatch& bm : matchBody(normalizedProgram, *f)) {
                evaluate(view, bm.query, DeltaSet(*f), bm.sigma, [&](const Substitution& tau) {
                    if (st.firingLog)
                        st.firingLog->record(FiringLog::Site::DoubtRule, *bm.rule, tau);
                    std::optional<Triple> head = ground(bm.rule->head, tau);
                    assert(head.has_value());
                    doubt(*head);
                    return true;
                });
            }
            st.doubtfulProcessed.add(*f);
        }
        if (hooks && hooks->afterIteration)
            hooks->afterIteration(rs, st);
    }
    if (hooks && hooks->beforePropagate)
        hooks->beforePropagate(rs, st);
    detail::propagateChanges(rs, st, report);

    report.counters = st.counters;
    report.derivations = st.counters.deletionTotal();
    report.storeSize = rs.facts.size();
    report.storeDelta = static_cast<long long>(rs.facts.size()) -
                        static_cast<long long>(sizeBefore);
    report.peakDoubtful = st.doubtful.size();
    report.peakChecked = st.checked.size();
    report.peakProved = st.proved.size();
    report.peakProvedStale = st.provedStale.size();
    report.peakDelayed = st.delayed.size();
    report.peakProcessed = st.provedProcessed.size();
    report.peakDisproved = st.disproved.size();
    report.peakDoubtfulProcessed = st.doubtfulProcessed.size();
    report.wallMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              started)
                        .count();
    return report;
}

// --- baseline: incremental deletion with axiomatised equality ---------------
//
// The same backward/forward discipline over a plain materialisation, with
// sameAs as an ordinary constant: no representatives, no rewriting, no
// reflexivity shortcuts. The equality axioms are part of the program.

namespace detail {

struct AxiomUpdateState {
    FactSet doubtful, doubtfulProcessed, checked, disproved;
    FactSet proved, delayed, provedProcessed;
    FactSet::Cursor doubtfulCursor, checkedCursor, provedCursor, disprovedScanCursor;
    DerivationCounter counters;
};

inline void saturateAxiomatised(AxiomUpdateState& st, const FactSet& explicitFacts,
                                const Program& program) {
    while (std::optional<Triple> f = st.checked.next(st.checkedCursor))
        if (explicitFacts.contains(*f) || st.delayed.contains(*f))
            st.proved.add(*f);
    while (std::optional<Triple> f = st.proved.next(st.provedCursor)) {
        if (!st.provedProcessed.add(*f))
            continue;
        FactView view{&st.provedProcessed, nullptr};
        for (const BodyMatch& bm : matchBody(program, *f)) {
            evaluate(view, bm.query, DeltaSet(*f), bm.sigma, [&](const Substitution& tau) {
                std::optional<Triple> head = ground(bm.rule->head, tau);
                assert(head.has_value());
                ++st.counters.forwardDerivations;
                if (st.checked.contains(*head))
                    st.proved.add(*head);
                else
                    st.delayed.add(*head);
                return true;
            });
        }
    }
}

inline void checkProvabilityAxiomatised(AxiomUpdateState& st, FactSet& facts,
                                        const FactSet& explicitFacts, const Program& program,
                                        const Triple& f) {
    if (!st.checked.add(f))
        return;
    saturateAxiomatised(st, explicitFacts, program);
    auto proved = [&](const Triple& g) {
        return !st.disproved.contains(g) && st.proved.contains(g);
    };
    if (proved(f))
        return;
    FactView view{&facts, &st.disproved};
    for (const HeadMatch& hm : matchHead(program, f)) {
        bool keepGoing = evaluate(view, hm.query, DeltaSet(), hm.sigma,
                                  [&](const Substitution& tau) {
                                      for (const Triple& g : groundedBody(*hm.rule, tau)) {
                                          ++st.counters.backwardChecks;
                                          ++st.counters.backwardRule;
                                          checkProvabilityAxiomatised(st, facts, explicitFacts,
                                                                      program, g);
                                          if (proved(f))
                                              return false;
                                      }
                                      return true;
                                  });
        if (!keepGoing)
            return;
    }
}

} // namespace detail

/// Incrementally deletes explicit facts from a materialisation computed with
/// axiomatised equality. `facts` must be the materialisation of
/// `explicitFacts` w.r.t. the program plus the equality axioms.
inline UpdateReport incrementalDeleteAxiomatised(FactSet& facts, FactSet& explicitFacts,
                                                 const Program& program, Dictionary& dict,
                                                 const FactSet& deletions) {
    auto started = std::chrono::steady_clock::now();
    UpdateReport report;
    report.strategy = "bf-axiom";
    report.requestedDeletions = deletions.size();
    size_t sizeBefore = facts.size();

    Program full = withEqualityAxioms(program, dict);
    detail::AxiomUpdateState st;
    deletions.forEach([&](const Triple& f) {
        if (explicitFacts.remove(f)) {
            ++report.appliedDeletions;
            st.doubtful.add(f);
        }
        return true;
    });

    while (std::optional<Triple> f = st.doubtful.next(st.doubtfulCursor)) {
        detail::checkProvabilityAxiomatised(st, facts, explicitFacts, full, *f);
        while (std::optional<Triple> g = st.checked.next(st.disprovedScanCursor))
            if (!st.proved.contains(*g))
                st.disproved.add(*g);
        if (st.disproved.contains(*f) || !st.proved.contains(*f)) {
            FactView view{&facts, &st.doubtfulProcessed};
            for (const BodyMatch& bm : matchBody(full, *f)) {
                evaluate(view, bm.query, DeltaSet(*f), bm.sigma, [&](const Substitution& tau) {
                    std::optional<Triple> head = ground(bm.rule->head, tau);
                    assert(head.has_value());
                    ++st.counters.doubtful;
                    st.doubtful.add(*head);
                    return true;
                });
            }
            st.doubtfulProcessed.add(*f);
        }
    }
    st.doubtful.forEach([&](const Triple& f) {
        if (st.proved.contains(f))
            return true;
        if (facts.remove(f))
            ++report.storeRemoved;
        return true;
    });
    st.proved.forEach([&](const Triple& f) {
        if (facts.add(f))
            ++report.storeAdded;
        return true;
    });

    report.counters = st.counters;
    report.derivations = st.counters.deletionTotal();
    report.storeSize = facts.size();
    report.storeDelta = static_cast<long long>(facts.size()) - static_cast<long long>(sizeBefore);
    report.peakDoubtful = st.doubtful.size();
    report.peakChecked = st.checked.size();
    report.peakProved = st.proved.size();
    report.peakDelayed = st.delayed.size();
    report.peakProcessed = st.provedProcessed.size();
    report.peakDisproved = st.disproved.size();
    report.peakDoubtfulProcessed = st.doubtfulProcessed.size();
    report.wallMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              started)
                        .count();
    return report;
}

} // namespace eqdl
