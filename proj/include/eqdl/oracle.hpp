// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <functional>
#include <map>

#include "eqdl/core.hpp"

namespace eqdl::oracle {

// Brute-force reference implementations for tests. Everything here trades
// efficiency for obviousness: plain std::set, scan-based joins, no indexes,
// re-derivation of everything on every round.

using TripleSet = std::set<Triple>;

namespace detail {

/// Enumerates every substitution grounding `body[k..]` into `facts` by plain
/// scans, extending sigma.
inline void matchBodyFrom(const std::vector<Atom>& body, size_t k, const TripleSet& facts,
                          const Substitution& sigma,
                          const std::function<void(const Substitution&)>& emit) {
    if (k == body.size()) {
        emit(sigma);
        return;
    }
    Atom probe = apply(body[k], sigma);
    for (const Triple& t : facts) {
        Substitution tau = sigma;
        bool ok = true;
        for (size_t i = 0; i < 3 && ok; ++i) {
            Term term = probe[i];
            Constant value = i == 0 ? t.s : i == 1 ? t.p : t.o;
            if (term.isConstant())
                ok = term.constant() == value;
            else
                ok = tau.bind(term.variableId(), value);
        }
        if (ok)
            matchBodyFrom(body, k + 1, facts, tau, emit);
    }
}

/// One naive round: every head derivable from `facts` by any rule.
inline TripleSet deriveOnce(const TripleSet& facts, const Program& program) {
    TripleSet derived;
    for (const Rule& rule : program.rules()) {
        matchBodyFrom(rule.body, 0, facts, Substitution(), [&](const Substitution& tau) {
            std::optional<Triple> head = ground(rule.head, tau);
            assert(head.has_value());
            derived.insert(*head);
        });
    }
    return derived;
}

} // namespace detail

/// The materialisation of E w.r.t. the program, computed by naive fixpoint
/// iteration. The caller appends the equality axioms when they apply.
inline TripleSet naiveFixpoint(const TripleSet& explicitFacts, const Program& program) {
    TripleSet facts = explicitFacts;
    while (true) {
        TripleSet derived = detail::deriveOnce(facts, program);
        size_t before = facts.size();
        facts.insert(derived.begin(), derived.end());
        if (facts.size() == before)
            return facts;
    }
}

/// The set of facts that have a derivation tree from `base` all of whose node
/// labels (leaves included) satisfy `allowed`.
inline TripleSet restrictedFixpoint(const TripleSet& base, const Program& program,
                                    const std::function<bool(const Triple&)>& allowed) {
    TripleSet facts;
    for (const Triple& t : base)
        if (allowed(t))
            facts.insert(t);
    while (true) {
        TripleSet derived = detail::deriveOnce(facts, program);
        size_t before = facts.size();
        for (const Triple& t : derived)
            if (allowed(t))
                facts.insert(t);
        if (facts.size() == before)
            return facts;
    }
}

/// Minimum derivation-tree height of F: 0 for explicit facts, otherwise one
/// more than the round of naive iteration that first derives it. Throws when
/// F is not derivable.
inline size_t heightOf(const Triple& f, const TripleSet& explicitFacts, const Program& program) {
    TripleSet facts = explicitFacts;
    size_t height = 0;
    while (true) {
        if (facts.count(f))
            return height;
        TripleSet derived = detail::deriveOnce(facts, program);
        size_t before = facts.size();
        facts.insert(derived.begin(), derived.end());
        if (facts.size() == before)
            throw std::runtime_error("heightOf: fact is not derivable");
        ++height;
    }
}

/// A derivation tree: leaves are base facts; every inner node is justified by
/// a rule and substitution whose grounded head is the node's fact and whose
/// grounded body labels the children.
struct DerivationTree {
    Triple fact;
    const Rule* rule = nullptr; // null for leaves
    Substitution sigma;
    std::vector<DerivationTree> children;
};

/// Builds one derivation tree for F by recording, per derived fact, the first
/// justification that produced it during naive iteration. Rounds make the
/// recorded justifications well-founded. Returns nothing if F is underivable.
inline std::optional<DerivationTree> derivationTree(const Triple& f, const TripleSet& explicitFacts,
                                                    const Program& program) {
    struct Justification {
        const Rule* rule;
        Substitution sigma;
        std::vector<Triple> body;
    };
    std::map<Triple, Justification> byFact;
    TripleSet facts = explicitFacts;
    while (!facts.count(f)) {
        TripleSet roundFacts = facts;
        for (const Rule& rule : program.rules()) {
            detail::matchBodyFrom(rule.body, 0, roundFacts, Substitution(),
                                  [&](const Substitution& tau) {
                                      std::optional<Triple> head = ground(rule.head, tau);
                                      assert(head.has_value());
                                      if (facts.count(*head))
                                          return; // derived earlier (or explicit)
                                      Justification j{&rule, tau, {}};
                                      for (const Atom& a : rule.body)
                                          j.body.push_back(*ground(a, tau));
                                      byFact.emplace(*head, std::move(j));
                                      facts.insert(*head);
                                  });
        }
        if (facts.size() == roundFacts.size())
            return std::nullopt;
    }
    std::function<DerivationTree(const Triple&)> build = [&](const Triple& t) {
        DerivationTree node;
        node.fact = t;
        auto it = byFact.find(t);
        if (it == byFact.end())
            return node; // leaf: explicit fact
        node.rule = it->second.rule;
        node.sigma = it->second.sigma;
        for (const Triple& g : it->second.body)
            node.children.push_back(build(g));
        return node;
    };
    return build(f);
}

/// Structural checks on a derivation tree: the root is labelled with the
/// requested fact, leaves are base facts, inner nodes satisfy head/body
/// consistency, and no replacement step rewrites a constant to itself.
inline bool validTree(const DerivationTree& tree, const Triple& root, const TripleSet& base) {
    if (tree.fact != root)
        return false;
    std::function<bool(const DerivationTree&)> check = [&](const DerivationTree& node) {
        if (node.rule == nullptr)
            return base.count(node.fact) != 0;
        std::optional<Triple> head = ground(node.rule->head, node.sigma);
        if (!head || *head != node.fact)
            return false;
        std::vector<Triple> body;
        for (const Atom& a : node.rule->body) {
            std::optional<Triple> g = ground(a, node.sigma);
            if (!g)
                return false;
            body.push_back(*g);
        }
        // set comparison between grounded body and child labels
        std::set<Triple> want(body.begin(), body.end());
        std::set<Triple> got;
        for (const DerivationTree& ch : node.children)
            got.insert(ch.fact);
        if (want != got)
            return false;
        // no self-replacement: a node never just re-derives its own first child
        if (node.children.size() == 2 && node.fact == node.children.front().fact)
            return false;
        for (const DerivationTree& ch : node.children)
            if (!check(ch))
                return false;
        return true;
    };
    return check(tree);
}

} // namespace eqdl::oracle
