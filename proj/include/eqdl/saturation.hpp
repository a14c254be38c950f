// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "eqdl/rules.hpp"

namespace eqdl {

/// Derivation-effort counters. `doubtful`, `backwardChecks` and
/// `forwardDerivations` are the three sites whose sum measures the work of an
/// incremental deletion; `seminaiveDerivations` counts rule firings of the
/// plain semi-naive materialisation. All counters only grow during a run.
struct DerivationCounter {
    size_t doubtful = 0;
    size_t backwardChecks = 0;
    size_t forwardDerivations = 0;
    size_t seminaiveDerivations = 0;
    // breakdown of backwardChecks by recursion site
    size_t backwardReflexivity = 0;
    size_t backwardReplacement = 0;
    size_t backwardRule = 0;

    size_t deletionTotal() const { return doubtful + backwardChecks + forwardDerivations; }
};

/// Working state of an incremental deletion / rewriting saturation run.
///
///   doubtful            facts whose truth might change (grows, cursor-driven)
///   doubtfulProcessed   processed subset of doubtful
///   checked             facts whose provability must be (re)established
///   disproved           checked facts none of whose expansions survive
///   newReps             the representative changes being computed
///   proved              facts proved so far (under newReps)
///   provedStale         proved facts superseded by a representative merge
///   delayed             proved facts whose normalization is not yet checked
///   provedProcessed     processed subset of proved
///   forwardProgram      mutable program copy kept normal w.r.t. newReps
///
/// With `admitAll` set the provability gate is disabled: every derived fact
/// is admitted, which turns the saturation into a from-scratch rewriting
/// materialisation. The cursors persist across saturate() calls, so repeated
/// calls continue where the previous one stopped.
struct UpdateState {
    bool admitAll = false;

    FactSet doubtful, doubtfulProcessed, checked, disproved;
    RepMap newReps;
    FactSet proved, provedStale, delayed, provedProcessed;
    Program forwardProgram;

    FactSet::Cursor doubtfulCursor, checkedCursor, provedCursor, disprovedScanCursor;

    DerivationCounter counters;
    FiringLog* firingLog = nullptr;

    // Optional book-keeping: explicit and delayed facts indexed by their
    // normalization, replacing expansion scans during checked-fact intake.
    bool useExplicitIndex = false;
    std::unordered_map<Triple, std::vector<Triple>, TripleHash> explicitByRep;
    std::unordered_map<Triple, std::vector<Triple>, TripleHash> delayedByRep;
};

/// Read-only environment of a saturation run: the fixed representative map
/// and the current explicit facts. Both are null in admit-all mode.
struct SatEnv {
    const RepMap* reps = nullptr;
    const FactSet* explicitFacts = nullptr;
};

/// Proves F: admitted into `proved` when its normalization has been checked
/// (or the gate is disabled), otherwise delayed for a later intake.
inline void prove(UpdateState& st, const SatEnv& env, const Triple& f) {
    ++st.counters.forwardDerivations;
    if (st.admitAll) {
        st.proved.add(f);
        return;
    }
    Triple norm = env.reps->normalize(f);
    if (st.checked.contains(norm)) {
        st.proved.add(f);
    } else if (st.delayed.add(f) && st.useExplicitIndex) {
        // sorted, so the indexed intake visits facts in expansion order
        std::vector<Triple>& bucket = st.delayedByRep[norm];
        bucket.insert(std::upper_bound(bucket.begin(), bucket.end(), f), f);
    }
}

/// Merges two representatives: the larger constant is folded into the
/// smaller, already-proved facts mentioning it are re-normalized, and rules
/// that change under the merge are replaced and re-evaluated over the
/// processed facts. A replacement that collides with a rule already in the
/// program is dropped without re-evaluation: the surviving copy has been
/// active all along, so re-firing it would repeat derivations.
inline void rewriteMerge(UpdateState& st, const SatEnv& env, Constant a, Constant b) {
    assert(a != b);
    assert(st.newReps.rep(a) == a && st.newReps.rep(b) == b);
    Constant c = std::min(a, b);
    Constant d = std::max(a, b);
    st.newReps.mergeInto(d, c);

    std::vector<Triple> stale;
    st.proved.forEachContaining(d, [&](const Triple& f) {
        if (!st.provedStale.contains(f))
            stale.push_back(f);
        return true;
    });
    for (const Triple& f : stale) {
        st.provedStale.add(f);
        Triple g = st.newReps.normalize(f);
        assert(g != f);
        st.proved.add(g);
    }

    std::vector<Rule> staleRules;
    for (const Rule& r : st.forwardProgram.rules())
        if (st.newReps.normalize(r) != r)
            staleRules.push_back(r);
    for (const Rule& r : staleRules) {
        Rule replacement = st.newReps.normalize(r);
        std::optional<size_t> idx = st.forwardProgram.indexOf(r);
        assert(idx.has_value());
        if (st.forwardProgram.contains(replacement)) {
            st.forwardProgram.eraseAt(*idx);
            continue;
        }
        st.forwardProgram.replaceAt(*idx, replacement);
        const Rule& active = st.forwardProgram.rules()[*idx];
        FactView view{&st.provedProcessed, &st.provedStale};
        evaluate(view, plainQuery(active.body), DeltaSet(), Substitution(),
                 [&](const Substitution& tau) {
                     if (st.firingLog)
                         st.firingLog->record(FiringLog::Site::RewriteReapply, active, tau);
                     std::optional<Triple> head = ground(active.head, tau);
                     assert(head.has_value());
                     prove(st, env, *head);
                     return true;
                 });
    }
}

/// Runs the saturation to quiescence: first the intake loop over newly
/// checked facts (skipped in admit-all mode, where the caller seeds `proved`
/// directly), then the forward-chaining loop over newly proved facts.
inline void saturate(UpdateState& st, const SatEnv& env) {
    if (!st.admitAll) {
        while (std::optional<Triple> f = st.checked.next(st.checkedCursor)) {
            // Reflexivity shortcut: c ~ c holds outright when some explicit
            // fact mentions a member of c's class.
            if (f->isReflexive()) {
                for (Constant d : env.reps->classOf(f->s))
                    if (env.explicitFacts->vocContains(d))
                        st.proved.add(reflexivity(st.newReps.rep(d)));
            }
            // Intake: explicit and delayed facts this checked fact represents.
            if (st.useExplicitIndex) {
                auto find = [&](const std::unordered_map<Triple, std::vector<Triple>,
                                                         TripleHash>& index) {
                    static const std::vector<Triple> kEmpty;
                    auto it = index.find(*f);
                    return it == index.end() ? &kEmpty : &it->second;
                };
                const std::vector<Triple>* fromExplicit = find(st.explicitByRep);
                const std::vector<Triple>* fromDelayed = find(st.delayedByRep);
                std::vector<Triple> merged;
                merged.reserve(fromExplicit->size() + fromDelayed->size());
                std::merge(fromExplicit->begin(), fromExplicit->end(), fromDelayed->begin(),
                           fromDelayed->end(), std::back_inserter(merged));
                for (const Triple& g : merged)
                    st.proved.add(st.newReps.normalize(g));
            } else {
                env.reps->expand(*f, [&](const Triple& g) {
                    if (env.explicitFacts->contains(g) || st.delayed.contains(g))
                        st.proved.add(st.newReps.normalize(g));
                    return true;
                });
            }
        }
    }

    while (std::optional<Triple> f = st.proved.next(st.provedCursor)) {
        if (st.provedStale.contains(*f))
            continue;
        if (!st.provedProcessed.add(*f))
            continue;
        Triple g = st.newReps.normalize(*f);
        if (g != *f) {
            st.provedStale.add(*f);
            st.proved.add(g);
        } else if (f->isEquality() && f->s != f->o) {
            rewriteMerge(st, env, f->s, f->o);
        } else {
            for (Constant c : vocOfTriple(g))
                prove(st, env, reflexivity(c));
            FactView view{&st.provedProcessed, &st.provedStale};
            for (const BodyMatch& bm : matchBody(st.forwardProgram, g)) {
                evaluate(view, bm.query, DeltaSet(g), bm.sigma, [&](const Substitution& tau) {
                    if (st.firingLog)
                        st.firingLog->record(FiringLog::Site::SaturateRule, *bm.rule, tau);
                    std::optional<Triple> head = ground(bm.rule->head, tau);
                    assert(head.has_value());
                    prove(st, env, *head);
                    return true;
                });
            }
        }
    }
}

} // namespace eqdl
