// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace eqdl {

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Dictionary code of an RDF constant. Ids are dense and assigned in first
/// encounter order; owl:sameAs is pre-registered with id 0, which makes it the
/// minimum of the id-based total order over constants.
struct Constant {
    uint32_t id = 0;

    friend bool operator==(Constant a, Constant b) { return a.id == b.id; }
    friend std::strong_ordering operator<=>(Constant a, Constant b) { return a.id <=> b.id; }
};

inline constexpr Constant kSameAs{0};
inline constexpr std::string_view kSameAsLex = "owl:sameAs";
inline constexpr std::string_view kSameAsIri = "<http://www.w3.org/2002/07/owl#sameAs>";

struct ConstantHash {
    size_t operator()(Constant c) const { return std::hash<uint32_t>()(c.id); }
};

/// A term is a constant or a variable. The two namespaces are disjoint; the
/// encoding keeps a term in 32 bits with the top bit tagging variables.
class Term {
public:
    Term() : bits_(0) {}
    Term(Constant c) : bits_(c.id) { assert(c.id < kVarTag); }

    static Term variable(uint32_t varId) {
        assert(varId < kVarTag);
        return Term(varId | kVarTag, Raw{});
    }

    bool isVariable() const { return (bits_ & kVarTag) != 0; }
    bool isConstant() const { return !isVariable(); }
    Constant constant() const {
        assert(isConstant());
        return Constant{bits_};
    }
    uint32_t variableId() const {
        assert(isVariable());
        return bits_ & ~kVarTag;
    }
    uint32_t raw() const { return bits_; }

    friend bool operator==(Term a, Term b) { return a.bits_ == b.bits_; }
    friend std::strong_ordering operator<=>(Term a, Term b) { return a.bits_ <=> b.bits_; }

private:
    struct Raw {};
    Term(uint32_t bits, Raw) : bits_(bits) {}
    static constexpr uint32_t kVarTag = 0x80000000u;
    uint32_t bits_;
};

/// A ground RDF triple. Any constant may occupy any position.
struct Triple {
    Constant s, p, o;

    bool isEquality() const { return p == kSameAs; }
    bool isReflexive() const { return isEquality() && s == o; }

    friend bool operator==(const Triple& a, const Triple& b) {
        return a.s == b.s && a.p == b.p && a.o == b.o;
    }
    friend std::strong_ordering operator<=>(const Triple& a, const Triple& b) = default;
};

inline Triple equality(Constant s, Constant o) { return Triple{s, kSameAs, o}; }
inline Triple reflexivity(Constant c) { return Triple{c, kSameAs, c}; }

inline size_t hashMix(size_t h, uint32_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

struct TripleHash {
    size_t operator()(const Triple& t) const {
        size_t h = 0;
        h = hashMix(h, t.s.id);
        h = hashMix(h, t.p.id);
        h = hashMix(h, t.o.id);
        return h;
    }
};

/// An RDF atom: a triple pattern whose positions are terms.
struct Atom {
    Term s, p, o;

    Term operator[](size_t i) const { return i == 0 ? s : i == 1 ? p : o; }
    bool isGround() const { return s.isConstant() && p.isConstant() && o.isConstant(); }
    Triple asTriple() const {
        assert(isGround());
        return Triple{s.constant(), p.constant(), o.constant()};
    }

    friend bool operator==(const Atom& a, const Atom& b) {
        return a.s == b.s && a.p == b.p && a.o == b.o;
    }
    friend std::strong_ordering operator<=>(const Atom& a, const Atom& b) = default;
};

inline Atom atomOf(const Triple& t) { return Atom{Term(t.s), Term(t.p), Term(t.o)}; }

/// String dictionary. Constants and variables are interned separately;
/// constant ids are dense and stable, so they double as the total order.
/// Append-only: safe for concurrent reads interleaved with exclusive writes.
class Dictionary {
public:
    Dictionary() { intern(std::string(kSameAsLex)); }

    Constant intern(std::string_view lexical) {
        validateToken(lexical);
        auto it = constantIds_.find(std::string(lexical));
        if (it != constantIds_.end())
            return Constant{it->second};
        uint32_t id = static_cast<uint32_t>(constants_.size());
        constants_.emplace_back(lexical);
        constantIds_.emplace(constants_.back(), id);
        return Constant{id};
    }

    std::optional<Constant> find(std::string_view lexical) const {
        auto it = constantIds_.find(std::string(lexical));
        if (it == constantIds_.end())
            return std::nullopt;
        return Constant{it->second};
    }

    const std::string& decode(Constant c) const {
        assert(c.id < constants_.size());
        return constants_[c.id];
    }

    size_t size() const { return constants_.size(); }

    Term variable(std::string_view name) {
        auto it = variableIds_.find(std::string(name));
        if (it != variableIds_.end())
            return Term::variable(it->second);
        uint32_t id = static_cast<uint32_t>(variables_.size());
        variables_.emplace_back(name);
        variableIds_.emplace(variables_.back(), id);
        return Term::variable(id);
    }

    const std::string& variableName(uint32_t varId) const {
        assert(varId < variables_.size());
        return variables_[varId];
    }

    std::string show(Term t) const {
        if (t.isVariable())
            return "?" + variableName(t.variableId());
        return decode(t.constant());
    }

    std::string show(const Triple& t) const {
        return decode(t.s) + " " + decode(t.p) + " " + decode(t.o);
    }

private:
    static void validateToken(std::string_view tok) {
        if (tok.empty())
            throw ParseError("empty constant token");
        if (tok.front() == '"') {
            if (tok.size() < 2 || tok.back() != '"')
                throw ParseError("malformed literal token: '" + std::string(tok) + "'");
            return; // literals may contain anything between the quotes
        }
        for (char ch : tok)
            if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r')
                throw ParseError("whitespace in constant token: '" + std::string(tok) + "'");
        if (tok.front() == '<') {
            if (tok.size() < 3 || tok.back() != '>')
                throw ParseError("malformed IRI token: '" + std::string(tok) + "'");
        } else if (tok.find(':') == std::string_view::npos) {
            throw ParseError("malformed constant token (expected IRI, CURIE or literal): '" +
                             std::string(tok) + "'");
        }
    }

    std::vector<std::string> constants_;
    std::unordered_map<std::string, uint32_t> constantIds_;
    std::vector<std::string> variables_;
    std::unordered_map<std::string, uint32_t> variableIds_;
};

/// A partial map from variables to constants. Kept as a small sorted vector;
/// substitutions in this engine never bind variables to other variables.
class Substitution {
public:
    Substitution() = default;

    std::optional<Constant> lookup(uint32_t varId) const {
        for (const auto& [v, c] : bindings_)
            if (v == varId)
                return c;
        return std::nullopt;
    }

    /// Binds varId to c; returns false on a conflicting existing binding.
    bool bind(uint32_t varId, Constant c) {
        size_t i = 0;
        while (i < bindings_.size() && bindings_[i].first < varId)
            ++i;
        if (i < bindings_.size() && bindings_[i].first == varId)
            return bindings_[i].second == c;
        bindings_.insert(bindings_.begin() + static_cast<long>(i), {varId, c});
        return true;
    }

    size_t size() const { return bindings_.size(); }
    bool empty() const { return bindings_.empty(); }
    const std::vector<std::pair<uint32_t, Constant>>& bindings() const { return bindings_; }

    /// Union of two substitutions with disjoint or agreeing domains.
    static std::optional<Substitution> merged(const Substitution& a, const Substitution& b) {
        Substitution out = a;
        for (const auto& [v, c] : b.bindings_)
            if (!out.bind(v, c))
                return std::nullopt;
        return out;
    }

    friend bool operator==(const Substitution& a, const Substitution& b) {
        return a.bindings_ == b.bindings_;
    }
    friend std::strong_ordering operator<=>(const Substitution& a, const Substitution& b) = default;

private:
    std::vector<std::pair<uint32_t, Constant>> bindings_;
};

inline Term apply(Term t, const Substitution& sigma) {
    if (t.isVariable())
        if (auto c = sigma.lookup(t.variableId()))
            return Term(*c);
    return t;
}

inline Atom apply(const Atom& a, const Substitution& sigma) {
    return Atom{apply(a.s, sigma), apply(a.p, sigma), apply(a.o, sigma)};
}

/// Grounds an atom under sigma; empty when some variable stays unbound.
inline std::optional<Triple> ground(const Atom& a, const Substitution& sigma) {
    Atom g = apply(a, sigma);
    if (!g.isGround())
        return std::nullopt;
    return g.asTriple();
}

/// A datalog rule H <- B1 /\ ... /\ Bn with n >= 1. Every variable of the head
/// must occur in the body (safety); parsing enforces this.
struct Rule {
    Atom head;
    std::vector<Atom> body;

    friend bool operator==(const Rule& a, const Rule& b) {
        return a.head == b.head && a.body == b.body;
    }
    friend std::strong_ordering operator<=>(const Rule& a, const Rule& b) = default;
};

struct RuleHash {
    size_t operator()(const Rule& r) const {
        size_t h = 0;
        h = hashMix(h, r.head.s.raw());
        h = hashMix(h, r.head.p.raw());
        h = hashMix(h, r.head.o.raw());
        for (const Atom& a : r.body) {
            h = hashMix(h, a.s.raw());
            h = hashMix(h, a.p.raw());
            h = hashMix(h, a.o.raw());
        }
        return h;
    }
};

inline Rule apply(const Rule& r, const Substitution& sigma) {
    Rule out;
    out.head = apply(r.head, sigma);
    out.body.reserve(r.body.size());
    for (const Atom& a : r.body)
        out.body.push_back(apply(a, sigma));
    return out;
}

inline void collectVariables(const Atom& a, std::vector<uint32_t>& out) {
    for (size_t i = 0; i < 3; ++i) {
        Term t = a[i];
        if (!t.isVariable())
            continue;
        uint32_t v = t.variableId();
        bool seen = false;
        for (uint32_t w : out)
            if (w == v)
                seen = true;
        if (!seen)
            out.push_back(v);
    }
}

inline std::vector<uint32_t> variablesOf(const Rule& r) {
    std::vector<uint32_t> vars;
    for (const Atom& a : r.body)
        collectVariables(a, vars);
    collectVariables(r.head, vars);
    return vars;
}

/// First head variable that is missing from the body, if any.
inline std::optional<uint32_t> unsafeHeadVariable(const Rule& r) {
    std::vector<uint32_t> bodyVars;
    for (const Atom& a : r.body)
        collectVariables(a, bodyVars);
    std::vector<uint32_t> headVars;
    collectVariables(r.head, headVars);
    for (uint32_t v : headVars) {
        bool bound = false;
        for (uint32_t w : bodyVars)
            if (w == v)
                bound = true;
        if (!bound)
            return v;
    }
    return std::nullopt;
}

/// voc: the set of constants syntactically occurring in a term, triple, atom,
/// rule or program. Note sameAs is in voc(s sameAs t) like any other constant.
inline void collectVoc(Term t, std::set<Constant>& out) {
    if (t.isConstant())
        out.insert(t.constant());
}
inline void collectVoc(const Triple& t, std::set<Constant>& out) {
    out.insert(t.s);
    out.insert(t.p);
    out.insert(t.o);
}
inline void collectVoc(const Atom& a, std::set<Constant>& out) {
    collectVoc(a.s, out);
    collectVoc(a.p, out);
    collectVoc(a.o, out);
}
inline void collectVoc(const Rule& r, std::set<Constant>& out) {
    collectVoc(r.head, out);
    for (const Atom& a : r.body)
        collectVoc(a, out);
}

template <typename T>
std::set<Constant> voc(const T& x) {
    std::set<Constant> out;
    collectVoc(x, out);
    return out;
}

/// Distinct constants of a triple in position order (at most three entries).
struct TripleVoc {
    Constant items[3];
    size_t count = 0;

    const Constant* begin() const { return items; }
    const Constant* end() const { return items + count; }
};

inline TripleVoc vocOfTriple(const Triple& t) {
    TripleVoc v;
    auto push = [&](Constant c) {
        for (size_t i = 0; i < v.count; ++i)
            if (v.items[i] == c)
                return;
        v.items[v.count++] = c;
    };
    push(t.s);
    push(t.p);
    push(t.o);
    return v;
}

/// A finite set of rules; duplicates are removed on construction and the
/// remaining rules keep their first-occurrence order.
class Program {
public:
    Program() = default;
    explicit Program(std::vector<Rule> rules) {
        for (Rule& r : rules)
            append(std::move(r));
    }

    const std::vector<Rule>& rules() const { return rules_; }
    size_t size() const { return rules_.size(); }
    bool empty() const { return rules_.empty(); }
    bool contains(const Rule& r) const { return members_.count(r) != 0; }

    /// Appends r unless already present; returns true if the program grew.
    bool append(Rule r) {
        if (members_.count(r))
            return false;
        members_.insert(r);
        rules_.push_back(std::move(r));
        return true;
    }

    /// Replaces the rule at idx; the caller guarantees the replacement is not
    /// already present.
    void replaceAt(size_t idx, Rule r) {
        assert(idx < rules_.size());
        assert(!members_.count(r));
        members_.erase(rules_[idx]);
        members_.insert(r);
        rules_[idx] = std::move(r);
    }

    void eraseAt(size_t idx) {
        assert(idx < rules_.size());
        members_.erase(rules_[idx]);
        rules_.erase(rules_.begin() + static_cast<long>(idx));
    }

    std::optional<size_t> indexOf(const Rule& r) const {
        if (!members_.count(r))
            return std::nullopt;
        for (size_t i = 0; i < rules_.size(); ++i)
            if (rules_[i] == r)
                return i;
        return std::nullopt;
    }

    friend bool operator==(const Program& a, const Program& b) { return a.rules_ == b.rules_; }

private:
    std::vector<Rule> rules_;
    std::unordered_set<Rule, RuleHash> members_;
};

inline void collectVoc(const Program& p, std::set<Constant>& out) {
    for (const Rule& r : p.rules())
        collectVoc(r, out);
}

inline uint32_t maxConstantId(const Program& p) {
    uint32_t m = 0;
    for (Constant c : voc(p))
        m = std::max(m, c.id);
    return m;
}

} // namespace eqdl
