#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ccr/dynamics.hpp"
#include "ccr/measures.hpp"
#include "ccr/relations.hpp"
#include "ccr/stateio.hpp"
#include "ccr/version.hpp"

namespace {

using nlohmann::ordered_json;
using namespace ccr;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerificationFailed = 2;

struct CommonOpts {
    std::string out;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
};

std::uint64_t resolveSeed(const std::optional<std::uint64_t>& given) {
    if (given) return *given;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

Dims parseDimsSpec(const std::string& spec) {
    Dims dims;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        try {
            std::size_t used = 0;
            int d = std::stoi(part, &used);
            if (used != part.size() || d < 1) throw std::invalid_argument(part);
            dims.push_back(d);
        } catch (const std::exception&) {
            throw InvalidState("invalid dims spec: " + spec);
        }
    }
    if (dims.empty()) throw InvalidState("invalid dims spec: " + spec);
    return dims;
}

std::string dimsToString(const Dims& dims) {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += 'x';
        out += std::to_string(dims[i]);
    }
    return out;
}

using ConfigItems = std::vector<std::pair<std::string, std::string>>;

std::string csvComments(const std::string& command, const ConfigItems& config) {
    std::string out;
    out += "# tool: ccr " + std::string(kVersion) + "\n";
    out += "# command: " + command + "\n";
    for (const auto& [key, value] : config) out += "# " + key + ": " + value + "\n";
    return out;
}

ordered_json jsonHeader(const std::string& command, const ConfigItems& config) {
    ordered_json j;
    j["tool"] = "ccr";
    j["version"] = kVersion;
    j["command"] = command;
    ordered_json cfg = ordered_json::object();
    for (const auto& [key, value] : config) cfg[key] = value;
    j["config"] = std::move(cfg);
    return j;
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty()) {
        std::cout << content;
    } else {
        writeFileAtomic(out, content);
    }
}

// ---------------------------------------------------------------- verify

struct VerifyOpts : CommonOpts {
    std::string relation;
    std::string dims;
    int trials = 1000;
    double tolerance = 1e-10;
    int rank = 0;
    int restarts = 8;
    int maxIterations = 40;
    double optTolerance = 1e-7;
    bool povm = false;
};

Dims defaultDimsFor(const std::string& relation) {
    if (relation == "ccr-reality") return {2};
    if (relation == "ccr-koashi") return {2, 2, 2};
    return {2, 2};
}

int runVerify(const VerifyOpts& opt) {
    std::uint64_t seed = resolveSeed(opt.seed);
    Dims dims = opt.dims.empty() ? defaultDimsFor(opt.relation) : parseDimsSpec(opt.dims);

    std::string dimsErr = relationDimsError(opt.relation, dims);
    if (!dimsErr.empty()) throw InvalidState(opt.relation + ": " + dimsErr);

    OptimizerConfig cfg;
    cfg.restarts = opt.restarts;
    cfg.maxIterations = opt.maxIterations;
    cfg.tolerance = opt.optTolerance;
    MeasurementMode mode = opt.povm ? MeasurementMode::Povm : MeasurementMode::Projective;

    std::vector<TrialRecord> trials;
    BatchSummary summary = verifyBatch(opt.relation, {dims, opt.rank}, opt.trials, opt.tolerance,
                                       seed, cfg, mode, &trials);

    ConfigItems config{{"relation", opt.relation},
                       {"dims", dimsToString(dims)},
                       {"trials", std::to_string(opt.trials)},
                       {"tolerance", fmt12(opt.tolerance)},
                       {"rank", std::to_string(opt.rank)},
                       {"restarts", std::to_string(opt.restarts)},
                       {"max_iterations", std::to_string(opt.maxIterations)},
                       {"opt_tolerance", fmt12(opt.optTolerance)},
                       {"measurement_mode", measurementModeName(mode)},
                       {"format", opt.format},
                       {"seed", std::to_string(seed)}};

    std::string content;
    if (opt.format == "json") {
        ordered_json j = jsonHeader("verify", config);
        j["summary"] = {{"relation", summary.relationId},
                        {"trials", summary.trials},
                        {"max_residual", summary.maxResidual},
                        {"mean_residual", summary.meanResidual},
                        {"failures", summary.failures},
                        {"tolerance", summary.tolerance}};
        ordered_json rows = ordered_json::array();
        for (const auto& t : trials)
            rows.push_back({{"trial", t.trial},
                            {"seed", t.seed},
                            {"residual", t.residual},
                            {"spread", t.spread},
                            {"converged", t.converged},
                            {"mode", t.mode}});
        j["trials"] = std::move(rows);
        content = j.dump(2) + "\n";
    } else {
        content = csvComments("verify", config);
        content += "# summary: failures=" + std::to_string(summary.failures) +
                   " max_residual=" + fmt12(summary.maxResidual) +
                   " mean_residual=" + fmt12(summary.meanResidual) + "\n";
        content += "trial,seed,residual,spread,converged,mode\n";
        for (const auto& t : trials) {
            content += std::to_string(t.trial) + "," + std::to_string(t.seed) + "," +
                       fmt12(t.residual) + "," + fmt12(t.spread) + "," +
                       (t.converged ? "1" : "0") + "," + (t.mode.empty() ? "-" : t.mode) + "\n";
        }
    }
    emit(opt.out, content);
    return summary.failures > 0 ? kExitVerificationFailed : kExitOk;
}

// ---------------------------------------------------------------- koashi

struct KoashiOpts : CommonOpts {
    std::string dims = "2x2x2";
    int trials = 100;
    double tolerance = 1e-3;
    int restarts = 20;
    int maxIterations = 40;
    double optTolerance = 1e-7;
    bool povm = false;
    bool swapRoles = false;
};

int runKoashi(const KoashiOpts& opt) {
    std::uint64_t seed = resolveSeed(opt.seed);
    Dims dims = parseDimsSpec(opt.dims);
    std::string dimsErr = relationDimsError("ccr-koashi", dims);
    if (!dimsErr.empty()) throw InvalidState("ccr-koashi: " + dimsErr);

    OptimizerConfig cfg;
    cfg.restarts = opt.restarts;
    cfg.maxIterations = opt.maxIterations;
    cfg.tolerance = opt.optTolerance;
    MeasurementMode mode = opt.povm ? MeasurementMode::Povm : MeasurementMode::Projective;

    std::vector<CcrReport> reports(opt.trials);
    std::vector<std::uint64_t> seeds(opt.trials);
    for (int t = 0; t < opt.trials; ++t) {
        std::uint64_t trialSeed = mixSeed(seed, static_cast<std::uint64_t>(t));
        seeds[t] = trialSeed;
        OptimizerConfig trialCfg = cfg;
        trialCfg.seed = mixSeed(trialSeed, 2);
        reports[t] =
            ccrKoashi(randomPure(dims, mixSeed(trialSeed, 1)), trialCfg, opt.swapRoles, mode);
    }

    int failures = 0;
    double maxResidual = 0.0;
    std::vector<double> sorted;
    for (const auto& rep : reports) {
        maxResidual = std::max(maxResidual, rep.residual);
        sorted.push_back(rep.residual);
        if (rep.residual > opt.tolerance) ++failures;
    }
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];

    ConfigItems config{{"relation", "ccr-koashi"},
                       {"dims", dimsToString(dims)},
                       {"trials", std::to_string(opt.trials)},
                       {"tolerance", fmt12(opt.tolerance)},
                       {"restarts", std::to_string(opt.restarts)},
                       {"max_iterations", std::to_string(opt.maxIterations)},
                       {"opt_tolerance", fmt12(opt.optTolerance)},
                       {"measurement_mode", measurementModeName(mode)},
                       {"swap_roles", opt.swapRoles ? "1" : "0"},
                       {"format", opt.format},
                       {"seed", std::to_string(seed)}};

    std::string content;
    if (opt.format == "json") {
        ordered_json j = jsonHeader("koashi", config);
        j["summary"] = {{"trials", opt.trials},
                        {"max_residual", maxResidual},
                        {"median_residual", median},
                        {"failures", failures}};
        ordered_json rows = ordered_json::array();
        for (int t = 0; t < opt.trials; ++t) {
            const auto& rep = reports[t];
            rows.push_back({{"trial", t},
                            {"seed", seeds[t]},
                            {"E_f", rep.term("E_f")},
                            {"J", rep.term("J")},
                            {"P_vn", rep.term("P_vn")},
                            {"C_re", rep.term("C_re")},
                            {"lhs", rep.lhs},
                            {"rhs", rep.rhs},
                            {"residual", rep.residual},
                            {"spread", rep.optimizerSpread},
                            {"converged", rep.converged},
                            {"mode", rep.mode}});
        }
        j["trials"] = std::move(rows);
        content = j.dump(2) + "\n";
    } else {
        content = csvComments("koashi", config);
        content += "# summary: failures=" + std::to_string(failures) +
                   " max_residual=" + fmt12(maxResidual) +
                   " median_residual=" + fmt12(median) + "\n";
        content += "trial,seed,E_f,J,P_vn,C_re,lhs,rhs,residual,spread,converged,mode\n";
        for (int t = 0; t < opt.trials; ++t) {
            const auto& rep = reports[t];
            content += std::to_string(t) + "," + std::to_string(seeds[t]) + "," +
                       fmt12(rep.term("E_f")) + "," + fmt12(rep.term("J")) + "," +
                       fmt12(rep.term("P_vn")) + "," + fmt12(rep.term("C_re")) + "," +
                       fmt12(rep.lhs) + "," + fmt12(rep.rhs) + "," + fmt12(rep.residual) + "," +
                       fmt12(rep.optimizerSpread) + "," + (rep.converged ? "1" : "0") + "," +
                       rep.mode + "\n";
        }
    }
    emit(opt.out, content);
    return failures > 0 ? kExitVerificationFailed : kExitOk;
}

// ---------------------------------------------------------------- decohere

struct DecohereOpts : CommonOpts {
    std::string input = "plus";
    double gamma = 1.0;
    double tmax = 5.0;
    int steps = 500;
    int restarts = 6;
    int window = 10;
    double epsilon = 1e-3;
};

DensityMatrix decohereInput(const std::string& input) {
    if (input == "plus") {
        return DensityMatrix({2}, Mat::Constant(2, 2, Cplx(0.5, 0.0)));
    }
    if (input == "zero") {
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = 1.0;
        return DensityMatrix({2}, m);
    }
    DensityMatrix rho = asDensity(loadStateFile(input));
    if (rho.dim() != 2) throw InvalidState("decohere: input state must be a single qubit");
    return rho;
}

int runDecohere(const DecohereOpts& opt) {
    std::uint64_t seed = resolveSeed(opt.seed);
    DensityMatrix rho = decohereInput(opt.input);
    std::vector<double> grid = uniformGrid(0.0, opt.tmax, opt.steps);

    OptimizerConfig cfg;
    cfg.restarts = opt.restarts;
    cfg.seed = seed;
    Trajectory traj = measurementModel(rho, opt.gamma, grid, cfg);
    std::optional<double> detection = pointerBasisDetect(traj, opt.window, opt.epsilon);

    ConfigItems config{{"input", opt.input},
                       {"gamma", fmt12(opt.gamma)},
                       {"tmax", fmt12(opt.tmax)},
                       {"steps", std::to_string(opt.steps)},
                       {"restarts", std::to_string(opt.restarts)},
                       {"window", std::to_string(opt.window)},
                       {"epsilon", fmt12(opt.epsilon)},
                       {"seed", std::to_string(seed)}};

    std::string content = csvComments("decohere", config);
    content += "time,C_re,P_vn,S_vn,E_f_AE,J_AA,I_AA,ccr_residual\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        content += fmt12(traj.times()[i]);
        for (const char* key : {kKeyCoherence, kKeyPredictability, kKeyEntropy, kKeyEfAE,
                                kKeyJ, kKeyCondInfo, kKeyCcrResidual})
            content += "," + fmt12(traj.at(i, key));
        content += "\n";
    }
    if (opt.out.empty()) throw InvalidState("decohere: --out is required");
    writeFileAtomic(opt.out, content);

    ordered_json sidecar = jsonHeader("decohere", config);
    if (detection)
        sidecar["pointer_basis_time"] = *detection;
    else
        sidecar["pointer_basis_time"] = nullptr;
    writeFileAtomic(opt.out + ".meta.json", sidecar.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------- quantifiers

struct QuantifierOpts : CommonOpts {
    std::string stateFile;
};

std::vector<QuantifierValue> computeQuantifiers(const LoadedState& state) {
    DensityMatrix rho = asDensity(state);
    std::vector<QuantifierValue> out;
    auto add = [&](const std::string& name, double value, const std::string& basis = "") {
        out.push_back({name, value, basis});
    };

    add("S_vn", vonNeumannEntropy(rho));
    add("S_l", linearEntropy(rho));
    add("I", stateInformation(rho));
    add("C_re", coherence(rho), "computational");
    add("P_vn", predictability(rho), "computational");
    add("Irr", irreality(rho), "computational");
    add("R", reality(rho), "computational");
    if (rho.dim() == 2) {
        add("V", gyVisibility(rho));
        add("P", gyPredictability(rho));
    }

    if (rho.subsystemCount() == 2) {
        add("I_A:B", mutualInformation(rho, {0}));
        add("S_A|B", conditionalEntropy(rho, {0}));
        add("S_A>B", coherentInformation(rho, {0}));
        add("I_A|B", conditionalInformation(rho, {0}));
        DensityMatrix rhoA = partialTrace(rho, {0});
        DensityMatrix rhoB = partialTrace(rho, {1});
        add("S_vn_A", vonNeumannEntropy(rhoA));
        add("C_re_A", coherence(rhoA), "computational");
        add("P_vn_A", predictability(rhoA), "computational");
        add("S_vn_B", vonNeumannEntropy(rhoB));
        add("C_re_B", coherence(rhoB), "computational");
        add("P_vn_B", predictability(rhoB), "computational");
        if (rho.dims() == Dims{2, 2}) {
            add("C", concurrence(rho));
            add("E_f", entanglementOfFormationTwoQubit(rho));
            add("Tr_rr_tilde", jaegerMeasure(rho));
        }
    }
    return out;
}

int runQuantifiers(const QuantifierOpts& opt) {
    LoadedState state = loadStateFile(opt.stateFile);
    std::vector<QuantifierValue> values = computeQuantifiers(state);
    DensityMatrix rho = asDensity(state);

    ConfigItems config{{"state_file", opt.stateFile},
                       {"dims", dimsToString(rho.dims())},
                       {"format", opt.format}};

    std::string content;
    if (opt.format == "json") {
        ordered_json j = jsonHeader("quantifiers", config);
        ordered_json rows = ordered_json::array();
        for (const auto& q : values)
            rows.push_back({{"name", q.name}, {"value", q.value}, {"basis", q.basis}});
        j["quantifiers"] = std::move(rows);
        content = j.dump(2) + "\n";
    } else {
        content = csvComments("quantifiers", config);
        content += "name,value,basis\n";
        for (const auto& q : values)
            content += q.name + "," + fmt12(q.value) + "," + (q.basis.empty() ? "-" : q.basis) +
                       "\n";
    }
    emit(opt.out, content);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"complementarity, coherence and correlation quantifiers for finite"
                 " quantum states, with batch verification of their exact trade-off"
                 " relations"};
    app.set_version_flag("--version", std::string("ccr ") + kVersion);
    app.require_subcommand(1);

    VerifyOpts verifyOpt;
    CLI::App* verify = app.add_subcommand("verify", "run a randomized relation batch");
    verify->add_option("--relation", verifyOpt.relation, "relation id")->required();
    verify->add_option("--dims", verifyOpt.dims, "factor dimensions, e.g. 2x2");
    verify->add_option("--trials", verifyOpt.trials, "number of random trials")
        ->check(CLI::PositiveNumber);
    verify->add_option("--tol", verifyOpt.tolerance, "residual tolerance");
    verify->add_option("--rank", verifyOpt.rank, "state rank (0 = random)");
    verify->add_option("--restarts", verifyOpt.restarts, "optimizer restarts");
    verify->add_option("--max-iters", verifyOpt.maxIterations, "optimizer sweep cap");
    verify->add_option("--opt-tol", verifyOpt.optTolerance, "optimizer tolerance");
    verify->add_flag("--povm", verifyOpt.povm, "extended rank-1 POVM mode for J");
    verify->add_option("--seed", verifyOpt.seed, "base seed (auto when omitted)");
    verify->add_option("--out", verifyOpt.out, "report path (stdout when omitted)");
    verify->add_option("--format", verifyOpt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    KoashiOpts koashiOpt;
    CLI::App* koashi = app.add_subcommand("koashi", "entanglement-of-formation sweep over"
                                                    " random tripartite pure states");
    koashi->add_option("--dims", koashiOpt.dims, "factor dimensions (2x2xE)");
    koashi->add_option("--trials", koashiOpt.trials, "number of random states")
        ->check(CLI::PositiveNumber);
    koashi->add_option("--tol", koashiOpt.tolerance, "residual tolerance");
    koashi->add_option("--restarts", koashiOpt.restarts, "optimizer restarts");
    koashi->add_option("--max-iters", koashiOpt.maxIterations, "optimizer sweep cap");
    koashi->add_option("--opt-tol", koashiOpt.optTolerance, "optimizer tolerance");
    koashi->add_flag("--povm", koashiOpt.povm, "extended rank-1 POVM mode for J");
    koashi->add_flag("--swap", koashiOpt.swapRoles, "exchange the two correlation partners");
    koashi->add_option("--seed", koashiOpt.seed, "base seed (auto when omitted)");
    koashi->add_option("--out", koashiOpt.out, "report path (stdout when omitted)");
    koashi->add_option("--format", koashiOpt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    DecohereOpts decohereOpt;
    CLI::App* decohere = app.add_subcommand("decohere", "measurement-record dynamics with"
                                                        " apparatus decoherence");
    decohere->add_option("--input", decohereOpt.input, "plus, zero, or a state file");
    decohere->add_option("--gamma", decohereOpt.gamma, "decoherence rate")
        ->check(CLI::NonNegativeNumber);
    decohere->add_option("--tmax", decohereOpt.tmax, "final time")->check(CLI::PositiveNumber);
    decohere->add_option("--steps", decohereOpt.steps, "grid points");
    decohere->add_option("--restarts", decohereOpt.restarts, "optimizer restarts for J");
    decohere->add_option("--window", decohereOpt.window, "detection window (samples)");
    decohere->add_option("--epsilon", decohereOpt.epsilon, "detection flatness (bits)");
    decohere->add_option("--seed", decohereOpt.seed, "base seed (auto when omitted)");
    decohere->add_option("--out", decohereOpt.out, "trajectory CSV path")->required();

    QuantifierOpts quantOpt;
    CLI::App* quant = app.add_subcommand("quantifiers", "evaluate every applicable quantifier"
                                                        " for a state file");
    quant->add_option("--state", quantOpt.stateFile, "state JSON file")->required();
    quant->add_option("--out", quantOpt.out, "report path (stdout when omitted)");
    quant->add_option("--format", quantOpt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (verify->parsed()) return runVerify(verifyOpt);
        if (koashi->parsed()) return runKoashi(koashiOpt);
        if (decohere->parsed()) return runDecohere(decohereOpt);
        if (quant->parsed()) return runQuantifiers(quantOpt);
        std::cerr << "ccr: no subcommand selected\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "ccr: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "ccr: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "ccr: " << e.what() << "\n";
        return kExitUsage;
    }
}
