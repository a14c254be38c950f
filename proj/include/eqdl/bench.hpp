// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cstdlib>
#include <fstream>
#include <random>

#include <json.hpp>

#include "eqdl/incremental.hpp"
#include "eqdl/oracle.hpp"

namespace eqdl::bench {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

inline LogLevel logLevel() {
    static LogLevel level = [] {
        const char* env = std::getenv("EQDL_LOG");
        if (!env)
            return LogLevel::Info;
        std::string v(env);
        if (v == "quiet")
            return LogLevel::Quiet;
        if (v == "debug")
            return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

inline void logInfo(const std::string& msg) {
    if (logLevel() >= LogLevel::Info)
        std::fprintf(stderr, "%s\n", msg.c_str());
}

inline void logDebug(const std::string& msg) {
    if (logLevel() >= LogLevel::Debug)
        std::fprintf(stderr, "%s\n", msg.c_str());
}

// --- strategies --------------------------------------------------------------

enum class Strategy { BfRewrite, BfAxiom, RematRewrite, RematAxiom };
enum class Mode { Rewrite, Axiom };

inline const char* strategyName(Strategy s) {
    switch (s) {
    case Strategy::BfRewrite:
        return "bfeq";
    case Strategy::BfAxiom:
        return "bf-axiom";
    case Strategy::RematRewrite:
        return "remat-eq";
    case Strategy::RematAxiom:
        return "remat-axiom";
    }
    return "?";
}

inline std::optional<Strategy> strategyFromName(std::string_view name) {
    if (name == "bfeq")
        return Strategy::BfRewrite;
    if (name == "bf-axiom")
        return Strategy::BfAxiom;
    if (name == "remat-eq")
        return Strategy::RematRewrite;
    if (name == "remat-axiom")
        return Strategy::RematAxiom;
    return std::nullopt;
}

inline Mode modeOf(Strategy s) {
    return (s == Strategy::BfRewrite || s == Strategy::RematRewrite) ? Mode::Rewrite : Mode::Axiom;
}

struct BenchConfig {
    std::string factsPath;
    std::string rulesPath;
    Mode mode = Mode::Rewrite;
    Strategy strategy = Strategy::BfRewrite;
    std::string deletePath;            // explicit deletion file, or
    std::optional<double> fraction;    // random fraction of E, with seed
    std::optional<uint64_t> seed;
    std::string reportPath;
    std::string csvPath;
    bool useExplicitIndex = false;

    void validate() const {
        if (fraction) {
            if (*fraction <= 0.0 || *fraction > 1.0)
                throw std::runtime_error("--fraction must be in (0,1]");
            if (!seed)
                throw std::runtime_error("--fraction requires --seed");
        }
    }
};

// --- generators --------------------------------------------------------------

struct GenSpec {
    enum class Kind { Bijective, Clique, Chain };
    Kind kind = Kind::Bijective;
    size_t size = 1;   // pairs (bijective), constants (clique), nodes (chain)
    size_t groups = 1; // clique only
    uint64_t seed = 0;

    void validate() const {
        if (size < 1 || groups < 1)
            throw std::runtime_error("generator sizes must be >= 1");
    }
};

struct GeneratedInstance {
    std::string factsText;
    std::string rulesText;
};

namespace detail {

/// Deterministic shuffle used everywhere randomness is needed: Fisher-Yates
/// driven by a seeded mt19937_64, independent of library distributions.
template <typename T>
void shuffle(std::vector<T>& items, uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[rng() % i]);
}

} // namespace detail

/// Pairs (a_i, b_i) linked by an R-edge, plus a cross edge from a_0 to every
/// other b_i; under the two bijectivity rules all a_i collapse into one class
/// and all b_i into another. `size` counts the cross edges, so size 1 yields
/// the minimal three-fact instance. `groups` independent copies.
inline GeneratedInstance generateBijective(size_t size, size_t groups) {
    std::ostringstream facts;
    for (size_t g = 0; g < groups; ++g) {
        auto a = [&](size_t i) { return ":a" + std::to_string(g) + "_" + std::to_string(i); };
        auto b = [&](size_t i) { return ":b" + std::to_string(g) + "_" + std::to_string(i); };
        for (size_t i = 0; i <= size; ++i)
            facts << a(i) << " :R " << b(i) << " .\n";
        for (size_t i = 1; i <= size; ++i)
            facts << a(0) << " :R " << b(i) << " .\n";
    }
    GeneratedInstance out;
    out.factsText = facts.str();
    out.rulesText = "[?y1, owl:sameAs, ?y2] :- [?y1, :R, ?x], [?y2, :R, ?x] .\n"
                    "[?y1, owl:sameAs, ?y2] :- [?x, :R, ?y1], [?x, :R, ?y2] .\n";
    return out;
}

/// `size` constants shuffled into `groups` groups; within each group every
/// unordered pair gets one explicit R-edge. R is symmetric and transitive, so
/// each group materialises into a complete clique.
inline GeneratedInstance generateClique(size_t size, size_t groups, uint64_t seed) {
    std::vector<size_t> ids(size);
    for (size_t i = 0; i < size; ++i)
        ids[i] = i;
    detail::shuffle(ids, seed);
    std::ostringstream facts;
    for (size_t g = 0; g < groups; ++g) {
        std::vector<size_t> members;
        for (size_t i = g; i < size; i += groups)
            members.push_back(ids[i]);
        for (size_t i = 0; i < members.size(); ++i)
            for (size_t j = i + 1; j < members.size(); ++j)
                facts << ":n" << members[i] << " :R :n" << members[j] << " .\n";
    }
    GeneratedInstance out;
    out.factsText = facts.str();
    out.rulesText = "[?y, :R, ?x] :- [?x, :R, ?y] .\n"
                    "[?x, :R, ?z] :- [?x, :R, ?y], [?y, :R, ?z] .\n";
    return out;
}

/// A linear R-path over `size` nodes with a transitivity rule.
inline GeneratedInstance generateChain(size_t size) {
    std::ostringstream facts;
    for (size_t i = 0; i + 1 < size; ++i)
        facts << ":n" << i << " :R :n" << (i + 1) << " .\n";
    GeneratedInstance out;
    out.factsText = facts.str();
    out.rulesText = "[?x, :R, ?z] :- [?x, :R, ?y], [?y, :R, ?z] .\n";
    return out;
}

inline GeneratedInstance generate(const GenSpec& spec) {
    spec.validate();
    switch (spec.kind) {
    case GenSpec::Kind::Bijective:
        return generateBijective(spec.size, spec.groups);
    case GenSpec::Kind::Clique:
        return generateClique(spec.size, spec.groups, spec.seed);
    case GenSpec::Kind::Chain:
        return generateChain(spec.size);
    }
    throw std::runtime_error("unknown generator kind");
}

/// A random subset of E: the prefix of a seeded Fisher-Yates shuffle of the
/// insertion order, sized by the fraction (rounded to nearest).
inline FactSet randomSubset(const FactSet& facts, double fraction, uint64_t seed) {
    std::vector<Triple> all = facts.toVector();
    detail::shuffle(all, seed);
    size_t k = static_cast<size_t>(fraction * static_cast<double>(all.size()) + 0.5);
    k = std::min(k, all.size());
    FactSet out;
    for (size_t i = 0; i < k; ++i)
        out.add(all[i]);
    return out;
}

// --- strategy runner ----------------------------------------------------------

struct UpdateOutcome {
    UpdateReport report;
    FactSet expanded; // the full materialisation the final store stands for
};

/// Runs one update strategy over (E, program, deletions) starting from the
/// matching initial materialisation. Both rematerialisation strategies
/// recompute from scratch; both incremental strategies update in place.
inline UpdateOutcome runUpdateStrategy(Strategy strategy, const FactSet& explicitFacts,
                                       const Program& program, Dictionary& dict,
                                       const FactSet& deletions,
                                       const UpdateOptions& options = {},
                                       const UpdateHooks* hooks = nullptr) {
    UpdateOutcome out;
    switch (strategy) {
    case Strategy::BfRewrite: {
        RewrittenStore rs = materialiseRewritten(explicitFacts, program);
        out.report = incrementalDelete(rs, deletions, options, hooks);
        out.expanded = expandAll(rs);
        return out;
    }
    case Strategy::BfAxiom: {
        FactSet facts = materialiseAxiomatised(explicitFacts, program, dict);
        FactSet explicitCopy = explicitFacts;
        out.report = incrementalDeleteAxiomatised(facts, explicitCopy, program, dict, deletions);
        out.expanded = std::move(facts);
        return out;
    }
    case Strategy::RematRewrite: {
        auto started = std::chrono::steady_clock::now();
        FactSet remaining = explicitFacts;
        size_t applied = 0;
        deletions.forEach([&](const Triple& t) {
            if (remaining.remove(t))
                ++applied;
            return true;
        });
        RewrittenStore before = materialiseRewritten(explicitFacts, program);
        DerivationCounter counters;
        RewrittenStore rs = materialiseRewritten(remaining, program, &counters);
        out.report.strategy = strategyName(strategy);
        out.report.requestedDeletions = deletions.size();
        out.report.appliedDeletions = applied;
        out.report.counters = counters;
        out.report.derivations = counters.forwardDerivations;
        out.report.storeSize = rs.facts.size();
        out.report.storeDelta = static_cast<long long>(rs.facts.size()) -
                                static_cast<long long>(before.facts.size());
        out.report.wallMs = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - started)
                                .count();
        out.expanded = expandAll(rs);
        return out;
    }
    case Strategy::RematAxiom: {
        auto started = std::chrono::steady_clock::now();
        FactSet remaining = explicitFacts;
        size_t applied = 0;
        deletions.forEach([&](const Triple& t) {
            if (remaining.remove(t))
                ++applied;
            return true;
        });
        FactSet before = materialiseAxiomatised(explicitFacts, program, dict);
        DerivationCounter counters;
        FactSet facts = materialiseAxiomatised(remaining, program, dict, &counters);
        out.report.strategy = strategyName(strategy);
        out.report.requestedDeletions = deletions.size();
        out.report.appliedDeletions = applied;
        out.report.counters = counters;
        out.report.derivations = counters.seminaiveDerivations;
        out.report.storeSize = facts.size();
        out.report.storeDelta = static_cast<long long>(facts.size()) -
                                static_cast<long long>(before.size());
        out.report.wallMs = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - started)
                                .count();
        out.expanded = std::move(facts);
        return out;
    }
    }
    throw std::runtime_error("unknown strategy");
}

// --- reports -------------------------------------------------------------------

inline nlohmann::json toJson(const DerivationCounter& c) {
    return nlohmann::json{{"doubtful", c.doubtful},
                          {"backward_checks", c.backwardChecks},
                          {"forward_derivations", c.forwardDerivations},
                          {"seminaive_derivations", c.seminaiveDerivations}};
}

inline nlohmann::json toJson(const UpdateReport& r) {
    return nlohmann::json{{"strategy", r.strategy},
                          {"requested_deletions", r.requestedDeletions},
                          {"applied_deletions", r.appliedDeletions},
                          {"store_added", r.storeAdded},
                          {"store_removed", r.storeRemoved},
                          {"store_delta", r.storeDelta},
                          {"store_size", r.storeSize},
                          {"derivations", r.derivations},
                          {"counters", toJson(r.counters)},
                          {"wall_ms", r.wallMs},
                          {"peak_sizes",
                           {{"doubtful", r.peakDoubtful},
                            {"checked", r.peakChecked},
                            {"proved", r.peakProved},
                            {"proved_stale", r.peakProvedStale},
                            {"delayed", r.peakDelayed},
                            {"processed", r.peakProcessed},
                            {"disproved", r.peakDisproved},
                            {"doubtful_processed", r.peakDoubtfulProcessed}}}};
}

inline constexpr std::string_view kCsvHeader = "dataset,strategy,E,Pi,Eminus,I,dI,D,T_ms";

inline std::string csvRow(const std::string& dataset, const UpdateReport& r, size_t explicitSize,
                          size_t programSize) {
    std::ostringstream os;
    os << dataset << "," << r.strategy << "," << explicitSize << "," << programSize << ","
       << r.appliedDeletions << "," << r.storeSize << "," << r.storeDelta << ","
       << r.derivations << "," << r.wallMs;
    return os.str();
}

inline void appendCsv(const std::string& path, const std::string& dataset, const UpdateReport& r,
                      size_t explicitSize, size_t programSize) {
    bool writeHeader = true;
    {
        std::ifstream probe(path);
        writeHeader = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
    }
    std::ofstream os(path, std::ios::app);
    if (!os)
        throw std::runtime_error("cannot open CSV file: " + path);
    if (writeHeader)
        os << kCsvHeader << "\n";
    os << csvRow(dataset, r, explicitSize, programSize) << "\n";
}

} // namespace eqdl::bench
