// eqdl -- a datalog engine with equality over RDF triples.
// Licensed under the Apache License, Version 2.0.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <eqdl/eqdl.hpp>

using namespace eqdl;
using namespace eqdl::bench;

namespace {

FactSet loadFactsFile(const std::string& path, Dictionary& dict) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open facts file: " + path);
    FactSet out;
    loadNTriples(in, dict, out);
    return out;
}

Program loadRulesFile(const std::string& path, Dictionary& dict) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open rules file: " + path);
    return loadProgram(in, dict);
}

void writeTextFile(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write file: " + path);
    os << content;
}

std::string factsToText(const FactSet& facts, const Dictionary& dict) {
    std::ostringstream os;
    saveNTriples(facts, dict, os);
    return os.str();
}

std::string readTextFile(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void emitReport(const nlohmann::json& j, const std::string& path) {
    if (path.empty())
        std::cout << j.dump(2) << std::endl;
    else
        writeTextFile(path, j.dump(2) + "\n");
}

std::string matPath(const std::string& base, Mode mode) {
    return base + (mode == Mode::Rewrite ? ".mat-rewrite.nt" : ".mat-axiom.nt");
}

struct MaterialiseOutcome {
    size_t storeSize = 0;
    size_t derivations = 0;
    std::string storeText;
    std::string repsText;
};

MaterialiseOutcome materialiseForMode(Mode mode, const FactSet& facts, const Program& program,
                                      Dictionary& dict) {
    MaterialiseOutcome out;
    if (mode == Mode::Rewrite) {
        DerivationCounter counters;
        RewrittenStore rs = materialiseRewritten(facts, program, &counters);
        out.storeSize = rs.facts.size();
        out.derivations = counters.forwardDerivations;
        out.storeText = factsToText(rs.facts, dict);
        std::ostringstream reps;
        rs.reps.dump(dict, reps);
        out.repsText = reps.str();
    } else {
        DerivationCounter counters;
        FactSet j = materialiseAxiomatised(facts, program, dict, &counters);
        out.storeSize = j.size();
        out.derivations = counters.seminaiveDerivations;
        out.storeText = factsToText(j, dict);
    }
    return out;
}

int runMaterialise(const std::string& factsPath, const std::string& rulesPath,
                   const std::string& modeName, const std::string& outBase,
                   const std::string& reportPath) {
    Mode mode = modeName == "axiom" ? Mode::Axiom : Mode::Rewrite;
    Dictionary dict;
    Program program = loadRulesFile(rulesPath, dict);
    FactSet facts = loadFactsFile(factsPath, dict);

    auto started = std::chrono::steady_clock::now();
    MaterialiseOutcome out = materialiseForMode(mode, facts, program, dict);
    double wallMs =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();

    writeTextFile(outBase + ".facts.nt", factsToText(facts, dict));
    writeTextFile(matPath(outBase, mode), out.storeText);
    if (mode == Mode::Rewrite)
        writeTextFile(outBase + ".reps.txt", out.repsText);

    emitReport(nlohmann::json{{"mode", modeName},
                              {"explicit_facts", facts.size()},
                              {"rules", program.size()},
                              {"store_size", out.storeSize},
                              {"derivations", out.derivations},
                              {"wall_ms", wallMs}},
               reportPath);
    logInfo("materialised " + std::to_string(facts.size()) + " facts into " +
            std::to_string(out.storeSize) + " stored facts");
    return 0;
}

int runUpdate(const BenchConfig& cfg, const std::string& snapshotBase,
              const std::vector<double>& sweep, const std::string& dataset) {
    Dictionary dict;
    Program program = loadRulesFile(cfg.rulesPath, dict);
    FactSet facts = loadFactsFile(snapshotBase + ".facts.nt", dict);
    Mode mode = modeOf(cfg.strategy);

    // the snapshot must exist and match the inputs it claims to come from
    std::string snapshotStore = readTextFile(matPath(snapshotBase, mode));
    MaterialiseOutcome initial = materialiseForMode(mode, facts, program, dict);
    if (initial.storeText != snapshotStore)
        throw std::runtime_error("snapshot " + matPath(snapshotBase, mode) +
                                 " does not match the given facts and rules (stale snapshot?)");

    UpdateOptions options;
    options.useExplicitIndex = cfg.useExplicitIndex;

    auto deletionsFor = [&](double fraction) {
        if (!cfg.deletePath.empty())
            return loadFactsFile(cfg.deletePath, dict);
        return randomSubset(facts, fraction, *cfg.seed);
    };

    if (!sweep.empty()) {
        nlohmann::json all = nlohmann::json::array();
        for (double fraction : sweep) {
            FactSet deletions = deletionsFor(fraction);
            UpdateOutcome out =
                runUpdateStrategy(cfg.strategy, facts, program, dict, deletions, options);
            nlohmann::json j = toJson(out.report);
            j["fraction"] = fraction;
            all.push_back(j);
            if (!cfg.csvPath.empty())
                appendCsv(cfg.csvPath, dataset, out.report, facts.size(), program.size());
            logInfo("sweep fraction " + std::to_string(fraction) + ": D=" +
                    std::to_string(out.report.derivations));
        }
        emitReport(all, cfg.reportPath);
        return 0;
    }

    FactSet deletions = deletionsFor(cfg.fraction.value_or(0.0));
    UpdateOutcome out;
    if (cfg.strategy == Strategy::BfRewrite) {
        // update the loaded store in place and persist it
        RewrittenStore rs = materialiseRewritten(facts, program);
        out.report = incrementalDelete(rs, deletions, options);
        out.expanded = expandAll(rs);
        writeTextFile(snapshotBase + ".facts.nt", factsToText(rs.explicitFacts, dict));
        writeTextFile(matPath(snapshotBase, mode), factsToText(rs.facts, dict));
        std::ostringstream reps;
        rs.reps.dump(dict, reps);
        writeTextFile(snapshotBase + ".reps.txt", reps.str());
    } else {
        out = runUpdateStrategy(cfg.strategy, facts, program, dict, deletions, options);
        FactSet remaining = facts;
        deletions.forEach([&](const Triple& t) {
            remaining.remove(t);
            return true;
        });
        writeTextFile(snapshotBase + ".facts.nt", factsToText(remaining, dict));
        MaterialiseOutcome updated = materialiseForMode(mode, remaining, program, dict);
        writeTextFile(matPath(snapshotBase, mode), updated.storeText);
        if (mode == Mode::Rewrite)
            writeTextFile(snapshotBase + ".reps.txt", updated.repsText);
    }
    if (!cfg.csvPath.empty())
        appendCsv(cfg.csvPath, dataset, out.report, facts.size(), program.size());
    emitReport(toJson(out.report), cfg.reportPath);
    logInfo("update done: strategy=" + std::string(strategyName(cfg.strategy)) +
            " D=" + std::to_string(out.report.derivations));
    return 0;
}

int runGenerate(const std::string& kindName, size_t size, size_t groups, uint64_t seed,
                const std::string& outFacts, const std::string& outRules) {
    GenSpec spec;
    if (kindName == "bijective")
        spec.kind = GenSpec::Kind::Bijective;
    else if (kindName == "clique")
        spec.kind = GenSpec::Kind::Clique;
    else if (kindName == "chain")
        spec.kind = GenSpec::Kind::Chain;
    else
        throw std::runtime_error("unknown generator kind: " + kindName);
    spec.size = size;
    spec.groups = groups;
    spec.seed = seed;
    GeneratedInstance inst = generate(spec);
    writeTextFile(outFacts, inst.factsText);
    writeTextFile(outRules, inst.rulesText);
    logInfo("generated " + kindName + " instance: " + outFacts + ", " + outRules);
    return 0;
}

int runVerify(const std::string& factsPath, const std::string& rulesPath,
              std::optional<double> fraction, uint64_t seed, size_t limit) {
    Dictionary dict;
    Program program = loadRulesFile(rulesPath, dict);
    FactSet facts = loadFactsFile(factsPath, dict);
    if (facts.size() > limit)
        throw std::runtime_error("verify is meant for small inputs (limit " +
                                 std::to_string(limit) + " facts; got " +
                                 std::to_string(facts.size()) + ")");

    int failures = 0;
    auto report = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
        if (!ok)
            ++failures;
    };

    oracle::TripleSet full =
        oracle::naiveFixpoint(facts.toSet(), withEqualityAxioms(program, dict));
    FactSet j = materialiseAxiomatised(facts, program, dict);
    report("axiomatised materialisation equals the naive fixpoint", j.toSet() == full);

    RewrittenStore rs = materialiseRewritten(facts, program);
    auto [reps, image] = rewritingOf(FactSet::fromSet(full));
    report("rewritten materialisation equals the rewriting of the fixpoint",
           rs.facts.toSet() == image.toSet() && rs.reps == reps);
    report("expansion of the rewritten store recovers the fixpoint",
           expandAll(rs).toSet() == full);

    if (fraction) {
        FactSet deletions = randomSubset(facts, *fraction, seed);
        std::optional<std::set<Triple>> expected;
        bool agree = true;
        for (Strategy s : {Strategy::BfRewrite, Strategy::BfAxiom, Strategy::RematRewrite,
                           Strategy::RematAxiom}) {
            UpdateOutcome out = runUpdateStrategy(s, facts, program, dict, deletions);
            if (!expected)
                expected = out.expanded.toSet();
            agree = agree && out.expanded.toSet() == *expected;
        }
        report("all four update strategies agree on a random deletion", agree);

        RewrittenStore updated = materialiseRewritten(facts, program);
        incrementalDelete(updated, deletions);
        FactSet remaining = facts;
        deletions.forEach([&](const Triple& t) {
            remaining.remove(t);
            return true;
        });
        RewrittenStore fresh = materialiseRewritten(remaining, program);
        report("incremental deletion equals rematerialisation",
               updated.facts.toSet() == fresh.facts.toSet() && updated.reps == fresh.reps);
    }
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"datalog materialisation with equality rewriting and incremental deletion"};
    app.require_subcommand(1);

    // materialise
    auto* mat = app.add_subcommand("materialise", "materialise a facts file under a program");
    std::string factsPath, rulesPath, modeName = "rewrite", outBase = "store", reportPath;
    mat->add_option("--facts", factsPath, "facts file (N-Triples subset)")->required();
    mat->add_option("--rules", rulesPath, "rules file")->required();
    mat->add_option("--mode", modeName, "rewrite|axiom")
        ->check(CLI::IsMember({"rewrite", "axiom"}));
    mat->add_option("--out", outBase, "snapshot base path")->required();
    mat->add_option("--report", reportPath, "stats JSON path (default: stdout)");

    // update
    auto* upd = app.add_subcommand("update", "delete facts from a materialised snapshot");
    BenchConfig cfg;
    std::string snapshotBase, strategyName_ = "bfeq", updModeName, dataset = "dataset";
    std::vector<double> sweep;
    double fractionOpt = -1.0;
    uint64_t seedOpt = 0;
    bool seedSet = false;
    upd->add_option("--snapshot", snapshotBase, "snapshot base path from materialise")->required();
    upd->add_option("--rules", cfg.rulesPath, "rules file")->required();
    upd->add_option("--strategy", strategyName_, "bfeq|bf-axiom|remat-eq|remat-axiom")
        ->check(CLI::IsMember({"bfeq", "bf-axiom", "remat-eq", "remat-axiom"}));
    upd->add_option("--mode", updModeName, "rewrite|axiom (checked against the strategy)")
        ->check(CLI::IsMember({"rewrite", "axiom"}));
    upd->add_option("--delete", cfg.deletePath, "facts file listing the deletions");
    upd->add_option("--fraction", fractionOpt, "random deletion fraction in (0,1]");
    upd->add_option("--seed", seedOpt, "seed for random deletions")->each([&](const std::string&) {
        seedSet = true;
    });
    upd->add_option("--sweep", sweep, "fraction list; one run per fraction, no persistence");
    upd->add_option("--report", cfg.reportPath, "report JSON path (default: stdout)");
    upd->add_option("--csv", cfg.csvPath, "append a CSV row per run");
    upd->add_option("--dataset", dataset, "dataset label for the CSV");
    upd->add_flag("--bookkeeping", cfg.useExplicitIndex,
                  "index explicit facts by representative during intake");

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic instance");
    std::string kindName = "bijective", outFacts, outRules;
    size_t genSize = 1, genGroups = 1;
    uint64_t genSeed = 0;
    gen->add_option("--kind", kindName, "bijective|clique|chain")
        ->check(CLI::IsMember({"bijective", "clique", "chain"}));
    gen->add_option("--size", genSize, "pairs / constants / nodes")->required();
    gen->add_option("--groups", genGroups, "independent components");
    gen->add_option("--seed", genSeed, "shuffle seed (clique)");
    gen->add_option("--out-facts", outFacts, "facts output path")->required();
    gen->add_option("--out-rules", outRules, "rules output path")->required();

    // verify
    auto* ver = app.add_subcommand("verify", "run oracle equivalence checks on small inputs");
    std::string vFacts, vRules;
    double vFraction = -1.0;
    uint64_t vSeed = 1;
    size_t vLimit = 2000;
    ver->add_option("--facts", vFacts, "facts file")->required();
    ver->add_option("--rules", vRules, "rules file")->required();
    ver->add_option("--fraction", vFraction, "also verify a random deletion of this fraction");
    ver->add_option("--seed", vSeed, "seed for the random deletion");
    ver->add_option("--limit", vLimit, "maximum explicit facts accepted");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(mat))
            return runMaterialise(factsPath, rulesPath, modeName, outBase, reportPath);
        if (app.got_subcommand(upd)) {
            auto parsed = strategyFromName(strategyName_);
            if (!parsed)
                throw std::runtime_error("unknown strategy: " + strategyName_);
            cfg.strategy = *parsed;
            cfg.mode = modeOf(cfg.strategy);
            if (!updModeName.empty()) {
                Mode requested = updModeName == "axiom" ? Mode::Axiom : Mode::Rewrite;
                if (requested != cfg.mode)
                    throw std::runtime_error(std::string("strategy ") + strategyName_ +
                                             " requires mode " +
                                             (cfg.mode == Mode::Rewrite ? "rewrite" : "axiom"));
            }
            if (fractionOpt >= 0.0)
                cfg.fraction = fractionOpt;
            if (seedSet)
                cfg.seed = seedOpt;
            if (cfg.deletePath.empty() && !cfg.fraction && sweep.empty())
                throw std::runtime_error("update needs --delete, --fraction or --sweep");
            if ((cfg.fraction || !sweep.empty()) && !cfg.seed)
                throw std::runtime_error("--fraction/--sweep require --seed");
            if (cfg.fraction)
                cfg.validate();
            return runUpdate(cfg, snapshotBase, sweep, dataset);
        }
        if (app.got_subcommand(gen))
            return runGenerate(kindName, genSize, genGroups, genSeed, outFacts, outRules);
        if (app.got_subcommand(ver))
            return runVerify(vFacts, vRules, vFraction < 0.0 ? std::nullopt
                                                             : std::optional<double>(vFraction),
                             vSeed, vLimit);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
