// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "eqdl/core.hpp"

namespace eqdl {

/// An indexed fact set with set semantics. Insertion order is preserved and
/// cursors traverse it, so a fact added while a cursor is open is eventually
/// returned by that cursor. Removal tombstones the slot instead of compacting;
/// cursors skip tombstones. Re-adding a removed fact appends a fresh slot.
/// Single-writer; no concurrent mutation contract is offered.
class FactSet {
public:
    struct Cursor {
        size_t pos = 0;
    };

    FactSet() = default;

    bool add(const Triple& f) {
        if (slotOf_.count(f))
            return false;
        uint32_t slot = static_cast<uint32_t>(seq_.size());
        seq_.push_back(f);
        live_.push_back(1);
        slotOf_.emplace(f, slot);
        byS_[f.s.id].push_back(slot);
        byP_[f.p.id].push_back(slot);
        byO_[f.o.id].push_back(slot);
        bumpOcc(f, +1);
        ++liveCount_;
        return true;
    }

    bool remove(const Triple& f) {
        auto it = slotOf_.find(f);
        if (it == slotOf_.end())
            return false;
        live_[it->second] = 0;
        slotOf_.erase(it);
        bumpOcc(f, -1);
        --liveCount_;
        return true;
    }

    bool contains(const Triple& f) const { return slotOf_.count(f) != 0; }
    size_t size() const { return liveCount_; }
    bool empty() const { return liveCount_ == 0; }

    void clear() {
        seq_.clear();
        live_.clear();
        slotOf_.clear();
        byS_.clear();
        byP_.clear();
        byO_.clear();
        occurrences_.clear();
        liveCount_ = 0;
    }

    Cursor cursor() const { return Cursor{}; }
    Cursor cursorAtEnd() const { return Cursor{seq_.size()}; }

    /// Returns the next live fact in insertion order, or nothing when the
    /// cursor has reached the current end of the sequence.
    std::optional<Triple> next(Cursor& cur) const {
        while (cur.pos < seq_.size()) {
            size_t i = cur.pos++;
            if (live_[i])
                return seq_[i];
        }
        return std::nullopt;
    }

    /// Iterates live facts in insertion order; fn returns false to stop.
    template <typename Fn>
    bool forEach(Fn&& fn) const {
        for (size_t i = 0; i < seq_.size(); ++i)
            if (live_[i] && !fn(seq_[i]))
                return false;
        return true;
    }

    /// True when c occurs in some live fact (c is in voc of the set).
    bool vocContains(Constant c) const {
        return c.id < occurrences_.size() && occurrences_[c.id] > 0;
    }

    uint32_t maxConstantId() const {
        uint32_t m = 0;
        for (size_t i = 0; i < seq_.size(); ++i)
            if (live_[i]) {
                m = std::max(m, seq_[i].s.id);
                m = std::max(m, seq_[i].p.id);
                m = std::max(m, seq_[i].o.id);
            }
        return m;
    }

    /// Visits each live fact containing c exactly once, in insertion order
    /// per position. fn returns false to stop.
    template <typename Fn>
    bool forEachContaining(Constant c, Fn&& fn) const {
        if (auto it = byS_.find(c.id); it != byS_.end())
            for (uint32_t slot : it->second) {
                if (!live_[slot])
                    continue;
                if (!fn(seq_[slot]))
                    return false;
            }
        if (auto it = byP_.find(c.id); it != byP_.end())
            for (uint32_t slot : it->second) {
                if (!live_[slot])
                    continue;
                const Triple& t = seq_[slot];
                if (t.s == c)
                    continue;
                if (!fn(t))
                    return false;
            }
        if (auto it = byO_.find(c.id); it != byO_.end())
            for (uint32_t slot : it->second) {
                if (!live_[slot])
                    continue;
                const Triple& t = seq_[slot];
                if (t.s == c || t.p == c)
                    continue;
                if (!fn(t))
                    return false;
            }
        return true;
    }

    /// Streams every substitution tau extending sigma that grounds `pattern`
    /// to a member of this set, each exactly once. Served from the position
    /// index with the fewest candidates; results are identical to a full
    /// scan. fn(tau, fact) returns false to stop.
    template <typename Fn>
    bool matchPattern(const Atom& pattern, const Substitution& sigma, Fn&& fn) const {
        Atom probe = apply(pattern, sigma);
        if (probe.isGround()) {
            Triple t = probe.asTriple();
            if (contains(t))
                return fn(sigma, t);
            return true;
        }
        const std::vector<uint32_t>* best = nullptr;
        if (probe.s.isConstant())
            best = pickSmaller(best, findList(byS_, probe.s.constant()));
        if (probe.p.isConstant())
            best = pickSmaller(best, findList(byP_, probe.p.constant()));
        if (probe.o.isConstant())
            best = pickSmaller(best, findList(byO_, probe.o.constant()));
        if (best != nullptr) {
            for (uint32_t slot : *best) {
                if (!live_[slot])
                    continue;
                if (!matchCandidate(probe, sigma, seq_[slot], fn))
                    return false;
            }
            return true;
        }
        for (size_t i = 0; i < seq_.size(); ++i) {
            if (!live_[i])
                continue;
            if (!matchCandidate(probe, sigma, seq_[i], fn))
                return false;
        }
        return true;
    }

    std::vector<Triple> toVector() const {
        std::vector<Triple> out;
        out.reserve(liveCount_);
        forEach([&](const Triple& t) {
            out.push_back(t);
            return true;
        });
        return out;
    }

    std::set<Triple> toSet() const {
        std::set<Triple> out;
        forEach([&](const Triple& t) {
            out.insert(t);
            return true;
        });
        return out;
    }

    static FactSet fromSet(const std::set<Triple>& facts) {
        FactSet out;
        for (const Triple& t : facts)
            out.add(t);
        return out;
    }

    friend bool operator==(const FactSet& a, const FactSet& b) {
        if (a.size() != b.size())
            return false;
        return a.forEach([&](const Triple& t) { return b.contains(t); });
    }

private:
    template <typename Fn>
    static bool matchCandidate(const Atom& probe, const Substitution& sigma, const Triple& t,
                               Fn&& fn) {
        Substitution tau = sigma;
        for (size_t i = 0; i < 3; ++i) {
            Term term = probe[i];
            Constant value = i == 0 ? t.s : i == 1 ? t.p : t.o;
            if (term.isConstant()) {
                if (term.constant() != value)
                    return true;
            } else if (!tau.bind(term.variableId(), value)) {
                return true;
            }
        }
        return fn(tau, t);
    }

    static const std::vector<uint32_t>* findList(
        const std::unordered_map<uint32_t, std::vector<uint32_t>>& index, Constant c) {
        auto it = index.find(c.id);
        if (it == index.end()) {
            static const std::vector<uint32_t> kEmpty;
            return &kEmpty;
        }
        return &it->second;
    }

    static const std::vector<uint32_t>* pickSmaller(const std::vector<uint32_t>* a,
                                                    const std::vector<uint32_t>* b) {
        if (a == nullptr)
            return b;
        if (b == nullptr)
            return a;
        return b->size() < a->size() ? b : a;
    }

    void bumpOcc(const Triple& t, int delta) {
        uint32_t maxId = std::max(t.s.id, std::max(t.p.id, t.o.id));
        if (occurrences_.size() <= maxId)
            occurrences_.resize(maxId + 1, 0);
        occurrences_[t.s.id] += delta;
        occurrences_[t.p.id] += delta;
        occurrences_[t.o.id] += delta;
    }

    std::vector<Triple> seq_;
    std::vector<uint8_t> live_;
    std::unordered_map<Triple, uint32_t, TripleHash> slotOf_;
    std::unordered_map<uint32_t, std::vector<uint32_t>> byS_, byP_, byO_;
    std::vector<int64_t> occurrences_;
    size_t liveCount_ = 0;
};

// --- N-Triples subset I/O -------------------------------------------------
//
// One `<s> <p> <o> .` statement per line. The dialect additionally accepts
// CURIE tokens (anything containing a colon) and quoted literals in any
// position; '#' starts a comment. The full owl:sameAs IRI is canonicalised
// to the CURIE form before interning so both spellings share one constant.

inline std::string canonicalToken(std::string_view tok) {
    if (tok == kSameAsIri)
        return std::string(kSameAsLex);
    return std::string(tok);
}

namespace detail {

inline std::vector<std::string> tripleTokens(const std::string& line, size_t lineNo) {
    std::vector<std::string> tokens;
    size_t i = 0;
    auto fail = [&](const std::string& why) {
        throw ParseError("line " + std::to_string(lineNo) + ": " + why);
    };
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        if (i >= line.size())
            break;
        if (line[i] == '#')
            break;
        if (line[i] == '.') {
            tokens.push_back(".");
            ++i;
            continue;
        }
        size_t start = i;
        if (line[i] == '"') {
            ++i;
            while (i < line.size() && line[i] != '"') {
                if (line[i] == '\\')
                    ++i;
                ++i;
            }
            if (i >= line.size())
                fail("unterminated literal");
            ++i;
        } else if (line[i] == '<') {
            while (i < line.size() && line[i] != '>')
                ++i;
            if (i >= line.size())
                fail("unterminated IRI");
            ++i;
        } else {
            while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
                ++i;
        }
        tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

} // namespace detail

/// Loads facts from an N-Triples subset stream into `out`; returns the number
/// of statements read. Throws ParseError with a line number on bad input.
inline size_t loadNTriples(std::istream& in, Dictionary& dict, FactSet& out) {
    std::string line;
    size_t lineNo = 0;
    size_t statements = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        std::vector<std::string> tokens = detail::tripleTokens(line, lineNo);
        if (tokens.empty())
            continue;
        if (tokens.size() != 4 || tokens.back() != ".")
            throw ParseError("line " + std::to_string(lineNo) +
                             ": expected `<s> <p> <o> .`, got " + std::to_string(tokens.size()) +
                             " tokens");
        Triple t;
        try {
            t.s = dict.intern(canonicalToken(tokens[0]));
            t.p = dict.intern(canonicalToken(tokens[1]));
            t.o = dict.intern(canonicalToken(tokens[2]));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(lineNo) + ": " + e.what());
        }
        out.add(t);
        ++statements;
    }
    return statements;
}

/// Writes the set as sorted N-Triples text (one line per fact, lines sorted
/// lexicographically), the snapshot format used by the CLI.
inline void saveNTriples(const FactSet& facts, const Dictionary& dict, std::ostream& os) {
    std::vector<std::string> lines;
    lines.reserve(facts.size());
    facts.forEach([&](const Triple& t) {
        lines.push_back(dict.decode(t.s) + " " + dict.decode(t.p) + " " + dict.decode(t.o) + " .");
        return true;
    });
    std::sort(lines.begin(), lines.end());
    for (const std::string& l : lines)
        os << l << "\n";
}

inline FactSet parseFacts(const std::string& text, Dictionary& dict) {
    std::istringstream in(text);
    FactSet out;
    loadNTriples(in, dict, out);
    return out;
}

} // namespace eqdl
