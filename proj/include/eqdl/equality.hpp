// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <algorithm>
#include <ostream>

#include "eqdl/core.hpp"

namespace eqdl {

/// A representative mapping over dictionary-coded constants: every constant
/// maps to the minimum of its equivalence class, so the map is idempotent and
/// sameAs (id 0) always represents itself. A reverse index keeps the members
/// of each class sorted by id, which gives deterministic expansion order and
/// O(1) singleton tests.
class RepMap {
public:
    RepMap() = default;
    explicit RepMap(size_t size) { ensure(size); }

    /// Grows the map with identity entries up to ids below `size`.
    void ensure(size_t size) {
        while (rep_.size() < size) {
            uint32_t id = static_cast<uint32_t>(rep_.size());
            rep_.push_back(Constant{id});
            classes_.push_back({Constant{id}});
        }
    }

    size_t size() const { return rep_.size(); }

    Constant rep(Constant c) const {
        if (c.id >= rep_.size())
            return c;
        return rep_[c.id];
    }

    bool isNormal(Constant c) const { return rep(c) == c; }
    bool isNormal(const Triple& t) const {
        return isNormal(t.s) && isNormal(t.p) && isNormal(t.o);
    }

    /// The class of c: all constants whose representative is c. Empty when c
    /// is represented by some other constant. The map must cover c.
    const std::vector<Constant>& classOf(Constant c) const {
        assert(c.id < classes_.size());
        return classes_[c.id];
    }

    size_t classSize(Constant c) const { return classOf(c).size(); }

    Constant normalize(Constant c) const { return rep(c); }
    Triple normalize(const Triple& t) const { return Triple{rep(t.s), rep(t.p), rep(t.o)}; }
    Term normalize(Term t) const { return t.isConstant() ? Term(rep(t.constant())) : t; }
    Atom normalize(const Atom& a) const {
        return Atom{normalize(a.s), normalize(a.p), normalize(a.o)};
    }
    Rule normalize(const Rule& r) const {
        Rule out;
        out.head = normalize(r.head);
        out.body.reserve(r.body.size());
        for (const Atom& a : r.body)
            out.body.push_back(normalize(a));
        return out;
    }
    Substitution normalize(const Substitution& sigma) const {
        Substitution out;
        for (const auto& [v, c] : sigma.bindings())
            out.bind(v, rep(c));
        return out;
    }

    /// Merges the class of d into the class of c. The caller guarantees c < d,
    /// which keeps representatives minimal.
    void mergeInto(Constant d, Constant c) {
        assert(c < d);
        ensure(static_cast<size_t>(d.id) + 1);
        assert(rep_[c.id] == c && rep_[d.id] == d);
        std::vector<Constant>& from = classes_[d.id];
        std::vector<Constant>& into = classes_[c.id];
        for (Constant e : from)
            rep_[e.id] = c;
        std::vector<Constant> mergedMembers;
        mergedMembers.reserve(into.size() + from.size());
        std::merge(into.begin(), into.end(), from.begin(), from.end(),
                   std::back_inserter(mergedMembers));
        into = std::move(mergedMembers);
        from.clear();
    }

    /// Points d at a new representative, keeping the class index consistent.
    /// Used when folding a computed change map back into this one.
    void reassign(Constant d, Constant newRep) {
        ensure(std::max<size_t>(d.id, newRep.id) + 1);
        Constant old = rep_[d.id];
        if (old == newRep)
            return;
        std::vector<Constant>& fromClass = classes_[old.id];
        fromClass.erase(std::find(fromClass.begin(), fromClass.end(), d));
        rep_[d.id] = newRep;
        std::vector<Constant>& toClass = classes_[newRep.id];
        toClass.insert(std::upper_bound(toClass.begin(), toClass.end(), d), d);
    }

    /// Streams the expansion of F: every triple whose normalization equals
    /// normalize(F). fn returns false to stop; returns false if stopped.
    template <typename Fn>
    bool expand(const Triple& f, Fn&& fn) const {
        for (Constant s : classOf(rep(f.s)))
            for (Constant p : classOf(rep(f.p)))
                for (Constant o : classOf(rep(f.o)))
                    if (!fn(Triple{s, p, o}))
                        return false;
        return true;
    }

    size_t expandCount(const Triple& f) const {
        return classOf(rep(f.s)).size() * classOf(rep(f.p)).size() * classOf(rep(f.o)).size();
    }

    std::vector<Triple> expandAll(const Triple& f) const {
        std::vector<Triple> out;
        expand(f, [&](const Triple& g) {
            out.push_back(g);
            return true;
        });
        return out;
    }

    bool identity() const {
        for (uint32_t id = 0; id < rep_.size(); ++id)
            if (rep_[id].id != id)
                return false;
        return true;
    }

    /// Internal consistency: idempotence, minimality and exact class inverse.
    bool validate() const {
        for (uint32_t id = 0; id < rep_.size(); ++id) {
            Constant c{id};
            Constant r = rep_[id];
            if (rep_[r.id] != r || r > c)
                return false;
            const std::vector<Constant>& members = classes_[r.id];
            if (members.empty() || members.front() != r)
                return false;
            if (!std::binary_search(members.begin(), members.end(), c))
                return false;
        }
        for (uint32_t id = 0; id < classes_.size(); ++id)
            for (Constant m : classes_[id])
                if (rep_[m.id].id != id)
                    return false;
        return true;
    }

    /// Debug dump: one `member -> representative` line per constant, sorted.
    void dump(const Dictionary& dict, std::ostream& os) const {
        for (uint32_t id = 0; id < rep_.size() && id < dict.size(); ++id)
            os << dict.decode(Constant{id}) << " -> " << dict.decode(rep_[id]) << "\n";
    }

    friend bool operator==(const RepMap& a, const RepMap& b) {
        size_t n = std::max(a.rep_.size(), b.rep_.size());
        for (uint32_t id = 0; id < n; ++id)
            if (a.rep(Constant{id}) != b.rep(Constant{id}))
                return false;
        return true;
    }

private:
    std::vector<Constant> rep_;
    std::vector<std::vector<Constant>> classes_;
};

} // namespace eqdl
