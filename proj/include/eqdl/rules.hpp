// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <sstream>

#include "eqdl/equality.hpp"
#include "eqdl/store.hpp"

namespace eqdl {

/// A rule body with optional per-atom delta exclusion: plain atoms ground
/// into the evaluation set X, marked atoms into X minus the delta set.
struct AnnotatedAtom {
    Atom atom;
    bool excludesDelta = false;
};

struct AnnotatedQuery {
    std::vector<AnnotatedAtom> atoms;

    size_t size() const { return atoms.size(); }
};

/// One way of matching a fact against a rule body: the position of the
/// matched atom, the most general grounding substitution, and the remaining
/// body as an annotated query. Atoms before the matched one carry the delta
/// exclusion; atoms after it are plain.
struct BodyMatch {
    const Rule* rule = nullptr;
    AnnotatedQuery query;
    Substitution sigma;
    size_t bodyIndex = 0;
};

struct HeadMatch {
    const Rule* rule = nullptr;
    AnnotatedQuery query;
    Substitution sigma;
};

/// Most general sigma with atom*sigma == fact, if one exists. The fact is
/// ground, so sigma maps variables straight to constants.
inline std::optional<Substitution> matchAtom(const Atom& atom, const Triple& fact) {
    Substitution sigma;
    for (size_t i = 0; i < 3; ++i) {
        Term t = atom[i];
        Constant v = i == 0 ? fact.s : i == 1 ? fact.p : fact.o;
        if (t.isConstant()) {
            if (t.constant() != v)
                return std::nullopt;
        } else if (!sigma.bind(t.variableId(), v)) {
            return std::nullopt;
        }
    }
    return sigma;
}

/// All ways a fact matches some body atom across the program, in program and
/// body-position order.
inline std::vector<BodyMatch> matchBody(const Program& program, const Triple& fact) {
    std::vector<BodyMatch> out;
    for (const Rule& rule : program.rules()) {
        for (size_t i = 0; i < rule.body.size(); ++i) {
            std::optional<Substitution> sigma = matchAtom(rule.body[i], fact);
            if (!sigma)
                continue;
            BodyMatch m;
            m.rule = &rule;
            m.sigma = std::move(*sigma);
            m.bodyIndex = i;
            m.query.atoms.reserve(rule.body.size() - 1);
            for (size_t j = 0; j < rule.body.size(); ++j) {
                if (j == i)
                    continue;
                m.query.atoms.push_back({rule.body[j], j < i});
            }
            out.push_back(std::move(m));
        }
    }
    return out;
}

/// All rules whose head matches the fact; the query is the whole body with
/// no exclusions.
inline std::vector<HeadMatch> matchHead(const Program& program, const Triple& fact) {
    std::vector<HeadMatch> out;
    for (const Rule& rule : program.rules()) {
        std::optional<Substitution> sigma = matchAtom(rule.head, fact);
        if (!sigma)
            continue;
        HeadMatch m;
        m.rule = &rule;
        m.sigma = std::move(*sigma);
        m.query.atoms.reserve(rule.body.size());
        for (const Atom& a : rule.body)
            m.query.atoms.push_back({a, false});
        out.push_back(std::move(m));
    }
    return out;
}

inline AnnotatedQuery plainQuery(const std::vector<Atom>& atoms) {
    AnnotatedQuery q;
    q.atoms.reserve(atoms.size());
    for (const Atom& a : atoms)
        q.atoms.push_back({a, false});
    return q;
}

/// Evaluation set [Z \ W]: a base fact set minus an optional excluded set.
struct FactView {
    const FactSet* base = nullptr;
    const FactSet* minus = nullptr;

    bool contains(const Triple& t) const {
        return base->contains(t) && !(minus && minus->contains(t));
    }
};

/// The delta set excluded by marked atoms: either a single fact or a set.
struct DeltaSet {
    const FactSet* set = nullptr;
    const Triple* one = nullptr;

    DeltaSet() = default;
    DeltaSet(const FactSet& s) : set(&s) {}
    DeltaSet(const Triple& t) : one(&t) {}

    bool contains(const Triple& t) const {
        if (one && *one == t)
            return true;
        return set && set->contains(t);
    }
};

namespace detail {

template <typename Fn>
bool evaluateFrom(const FactView& x, const AnnotatedQuery& q, const DeltaSet& y,
                  const Substitution& sigma, size_t k, Fn&& emit) {
    if (k == q.atoms.size())
        return emit(sigma);
    const AnnotatedAtom& aa = q.atoms[k];
    return x.base->matchPattern(aa.atom, sigma, [&](const Substitution& tau, const Triple& t) {
        if (x.minus && x.minus->contains(t))
            return true;
        if (aa.excludesDelta && y.contains(t))
            return true;
        return evaluateFrom(x, q, y, tau, k + 1, emit);
    });
}

} // namespace detail

/// Streams each smallest substitution tau extending sigma such that plain
/// atoms ground into X and marked atoms into X minus Y, each exactly once.
/// Atoms join left to right, served by the store indexes. emit returns false
/// to stop; returns false if stopped.
template <typename Fn>
bool evaluate(const FactView& x, const AnnotatedQuery& q, const DeltaSet& y,
              const Substitution& sigma, Fn&& emit) {
    return detail::evaluateFrom(x, q, y, sigma, 0, emit);
}

inline std::vector<Substitution> evaluateAll(const FactView& x, const AnnotatedQuery& q,
                                             const DeltaSet& y, const Substitution& sigma) {
    std::vector<Substitution> out;
    evaluate(x, q, y, sigma, [&](const Substitution& tau) {
        out.push_back(tau);
        return true;
    });
    return out;
}

/// Normalizes every rule of a program; duplicates collapsing under the map
/// are removed.
inline Program normalizeProgram(const RepMap& reps, const Program& program) {
    Program out;
    for (const Rule& r : program.rules())
        out.append(reps.normalize(r));
    return out;
}

// --- derivation log --------------------------------------------------------

/// Records (rule, substitution) firings per derivation site so tests can
/// audit that no combination is considered twice.
struct FiringLog {
    enum class Site { SeminaiveRule, SaturateRule, RewriteReapply, DoubtRule };

    struct Entry {
        Site site;
        std::string key;
    };

    std::vector<Entry> entries;

    static std::string keyOf(const Rule& r, const Substitution& tau) {
        std::ostringstream os;
        auto term = [&](Term t) {
            os << t.raw() << ",";
        };
        term(r.head.s);
        term(r.head.p);
        term(r.head.o);
        for (const Atom& a : r.body) {
            os << "|";
            term(a.s);
            term(a.p);
            term(a.o);
        }
        os << "@";
        for (const auto& [v, c] : tau.bindings())
            os << v << "=" << c.id << ";";
        return os.str();
    }

    void record(Site site, const Rule& r, const Substitution& tau) {
        entries.push_back({site, keyOf(r, tau)});
    }
};

// --- rule text parser -------------------------------------------------------
//
// One rule per line:  H :- B1, B2, ... .
// Atoms are `[t1, t2, t3]`; `t1 == t2` is sugar for `[t1, owl:sameAs, t2]`.
// Terms are variables `?x` or constants (IRIs, CURIEs, quoted literals).
// '#' starts a comment.

namespace detail {

class RuleLineParser {
public:
    RuleLineParser(std::string_view line, size_t lineNo, Dictionary& dict)
        : line_(line), lineNo_(lineNo), dict_(dict) {}

    std::optional<Rule> parse() {
        skipWs();
        if (eof())
            return std::nullopt;
        Rule rule;
        rule.head = parseAtom();
        skipWs();
        expect(":-");
        skipWs();
        if (!eof() && line_[pos_] == '.')
            fail("empty rule body");
        while (true) {
            rule.body.push_back(parseAtom());
            skipWs();
            if (!eof() && line_[pos_] == ',') {
                ++pos_;
                skipWs();
                continue;
            }
            break;
        }
        expect(".");
        skipWs();
        if (!eof())
            fail("trailing input after rule");
        if (auto bad = unsafeHeadVariable(rule))
            fail("unsafe rule: head variable ?" + dict_.variableName(*bad) +
                 " does not occur in the body");
        return rule;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("line " + std::to_string(lineNo_) + ": " + why);
    }

    bool eof() const { return pos_ >= line_.size(); }

    void skipWs() {
        while (!eof() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r'))
            ++pos_;
        if (!eof() && line_[pos_] == '#')
            pos_ = line_.size();
    }

    void expect(std::string_view what) {
        skipWs();
        if (line_.substr(pos_, what.size()) != what)
            fail("expected '" + std::string(what) + "'");
        pos_ += what.size();
    }

    Atom parseAtom() {
        skipWs();
        if (!eof() && line_[pos_] == '[') {
            ++pos_;
            Term t1 = parseTerm();
            expect(",");
            Term t2 = parseTerm();
            expect(",");
            Term t3 = parseTerm();
            expect("]");
            return Atom{t1, t2, t3};
        }
        // equality sugar: t1 == t2
        Term t1 = parseTerm();
        expect("==");
        Term t2 = parseTerm();
        return Atom{t1, Term(kSameAs), t2};
    }

    Term parseTerm() {
        skipWs();
        if (eof())
            fail("expected a term");
        char ch = line_[pos_];
        if (ch == '?') {
            size_t start = ++pos_;
            while (!eof() && isNameChar(line_[pos_]))
                ++pos_;
            if (pos_ == start)
                fail("empty variable name");
            return dict_.variable(line_.substr(start, pos_ - start));
        }
        size_t start = pos_;
        if (ch == '<') {
            while (!eof() && line_[pos_] != '>')
                ++pos_;
            if (eof())
                fail("unterminated IRI");
            ++pos_;
        } else if (ch == '"') {
            ++pos_;
            while (!eof() && line_[pos_] != '"') {
                if (line_[pos_] == '\\')
                    ++pos_;
                ++pos_;
            }
            if (eof())
                fail("unterminated literal");
            ++pos_;
        } else {
            while (!eof() && isNameChar(line_[pos_]))
                ++pos_;
            if (pos_ == start)
                fail("expected a term");
        }
        std::string token = canonicalToken(line_.substr(start, pos_ - start));
        try {
            return Term(dict_.intern(token));
        } catch (const ParseError& e) {
            fail(e.what());
        }
    }

    static bool isNameChar(char c) {
        return !(c == ' ' || c == '\t' || c == '\r' || c == ',' || c == ']' || c == '[' ||
                 c == '.' || c == '#' || c == '=');
    }

    std::string_view line_;
    size_t pos_ = 0;
    size_t lineNo_;
    Dictionary& dict_;
};

} // namespace detail

/// Parses a rule text into a program. Only safe rules are accepted; the
/// equality sugar is desugared; duplicate rules are dropped.
inline Program parseProgram(const std::string& text, Dictionary& dict) {
    Program program;
    std::istringstream in(text);
    std::string line;
    size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        detail::RuleLineParser parser(line, lineNo, dict);
        if (std::optional<Rule> rule = parser.parse())
            program.append(std::move(*rule));
    }
    return program;
}

inline Program loadProgram(std::istream& in, Dictionary& dict) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parseProgram(buffer.str(), dict);
}

/// Renders a rule back to the text grammar.
inline std::string showRule(const Rule& r, const Dictionary& dict) {
    std::ostringstream os;
    auto atom = [&](const Atom& a) {
        os << "[" << dict.show(a.s) << ", " << dict.show(a.p) << ", " << dict.show(a.o) << "]";
    };
    atom(r.head);
    os << " :- ";
    for (size_t i = 0; i < r.body.size(); ++i) {
        if (i)
            os << ", ";
        atom(r.body[i]);
    }
    os << " .";
    return os.str();
}

} // namespace eqdl
