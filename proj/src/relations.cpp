#include "ccr/relations.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <sstream>
#include <thread>

#include "ccr/measures.hpp"

namespace ccr {

namespace {

double log2d(long d) { return std::log2(static_cast<double>(d)); }

void appendWord(std::uint64_t& h, std::uint64_t w) {
    for (int b = 0; b < 8; ++b) {
        h ^= (w >> (8 * b)) & 0xffULL;
        h *= 0x100000001b3ULL;  // FNV-1a prime
    }
}

std::uint64_t doubleBits(double v) {
    std::uint64_t out;
    std::memcpy(&out, &v, sizeof(out));
    return out;
}

/// Run fn(0..n-1) on a few worker threads; each index owns its output
/// slot, so the reduction is schedule-independent.
void parallelForIndexed(int n, const std::function<void(int)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    int workers = std::min(n, static_cast<int>(hw ? hw : 1));
    workers = std::min(workers, 8);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr firstError;
    std::mutex errMutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(errMutex);
                    if (!firstError) firstError = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (firstError) std::rethrow_exception(firstError);
}

}  // namespace

double CcrReport::maxResidual() const {
    double worst = residual;
    for (const auto& [name, value] : checks) worst = std::max(worst, std::abs(value));
    return worst;
}

double CcrReport::term(const std::string& name) const {
    for (const auto& [n, v] : terms)
        if (n == name) return v;
    throw MissingKey("CcrReport: no term named " + name);
}

double CcrReport::check(const std::string& name) const {
    for (const auto& [n, v] : checks)
        if (n == name) return v;
    throw MissingKey("CcrReport: no check named " + name);
}

std::string stateDigest(const Dims& dims, const Mat& m, const std::vector<std::uint64_t>& extra) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
    for (int d : dims) appendWord(h, static_cast<std::uint64_t>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            appendWord(h, doubleBits(m(i, j).real()));
            appendWord(h, doubleBits(m(i, j).imag()));
        }
    for (std::uint64_t w : extra) appendWord(h, w);
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

CcrReport ccrPure(const PureState& psiAB, const MeasurementBasis& basisA) {
    if (psiAB.subsystemCount() < 2) throw BadCut("ccrPure: state must be at least bipartite");
    DensityMatrix rhoA = partialTrace(psiAB, Cut{0});
    double c = coherence(rhoA, basisA);
    double p = predictability(rhoA, basisA);
    double s = vonNeumannEntropy(rhoA);

    CcrReport rep;
    rep.relationId = "ccr-pure";
    rep.terms = {{"C_re", c}, {"P_vn", p}, {"S_vn", s}};
    rep.lhs = c + p + s;
    rep.rhs = log2d(rhoA.dim());
    rep.residual = std::abs(rep.lhs - rep.rhs);
    rep.inputDigest = stateDigest(psiAB.dims(), psiAB.amplitudes());
    return rep;
}

CcrReport ccrPure(const PureState& psiAB) {
    if (psiAB.subsystemCount() < 2) throw BadCut("ccrPure: state must be at least bipartite");
    return ccrPure(psiAB, MeasurementBasis::computational(psiAB.dims()[0]));
}

CcrReport ccrReality(const DensityMatrix& rho, const MeasurementBasis& basis) {
    double r = reality(rho, basis);
    double c = coherence(rho, basis);
    double irr = irreality(rho, basis);
    double p = predictability(rho, basis);
    double s = vonNeumannEntropy(rho);

    CcrReport rep;
    rep.relationId = "ccr-reality";
    rep.terms = {{"R", r}, {"C_re", c}};
    rep.lhs = r + c;
    rep.rhs = log2d(rho.dim());
    rep.residual = std::abs(rep.lhs - rep.rhs);
    rep.checks = {{"reality_split", r - (p + s)}, {"cre_vs_irreality", c - irr}};
    rep.inputDigest = stateDigest(rho.dims(), rho.mat());
    return rep;
}

CcrReport ccrReality(const DensityMatrix& rho) {
    return ccrReality(rho, MeasurementBasis::computational(static_cast<int>(rho.dim())));
}

CcrReport ccrKoashi(const PureState& psiABE, const OptimizerConfig& cfg, bool swapRoles,
                    MeasurementMode mode) {
    if (psiABE.subsystemCount() != 3)
        throw BadCut("ccrKoashi: state must have exactly three factors");
    for (int d : psiABE.dims())
        if (d > 4) throw DimTooLarge("ccrKoashi: factor dimension exceeds 4");

    const std::size_t partnerB = swapRoles ? 2 : 1;
    const std::size_t partnerE = swapRoles ? 1 : 2;

    DensityMatrix rhoA = partialTrace(psiABE, Cut{0});
    double p = predictability(rhoA);
    double c = coherence(rhoA);

    DensityMatrix rhoAB = partialTrace(psiABE, Cut{0, partnerB});
    bool efConverged = true;
    double efSpread = 0.0;
    double ef;
    if (rhoAB.dims() == Dims{2, 2}) {
        ef = entanglementOfFormationTwoQubit(rhoAB);
    } else {
        OptResult r = entanglementOfFormation(rhoAB, Cut{0}, cfg);
        ef = r.value;
        efConverged = r.converged;
        efSpread = r.spreadAcrossRestarts;
    }

    DensityMatrix rhoAE = partialTrace(psiABE, Cut{0, partnerE});
    OptResult j = classicalCorrelation(rhoAE, Cut{1}, cfg, mode);

    CcrReport rep;
    rep.relationId = "ccr-koashi";
    rep.terms = {{"E_f", ef}, {"J", j.value}, {"P_vn", p}, {"C_re", c}};
    rep.lhs = ef + j.value + p + c;
    rep.rhs = log2d(rhoA.dim());
    rep.residual = std::abs(rep.lhs - rep.rhs);
    rep.converged = efConverged && j.converged;
    rep.optimizerSpread = std::max(efSpread, j.spreadAcrossRestarts);
    rep.mode = j.mode;
    rep.inputDigest = stateDigest(psiABE.dims(), psiABE.amplitudes(),
                                  {cfg.seed, static_cast<std::uint64_t>(cfg.restarts),
                                   static_cast<std::uint64_t>(swapRoles),
                                   static_cast<std::uint64_t>(mode)});
    return rep;
}

CcrReport ccrTessier(const DensityMatrix& rho) {
    if (rho.dims() != Dims{2, 2}) throw NotTwoQubit("ccrTessier: requires a two-qubit state");
    double jae = jaegerMeasure(rho);
    double sl = linearEntropy(rho);
    DensityMatrix rhoA = partialTrace(rho, Cut{0});
    DensityMatrix rhoB = partialTrace(rho, Cut{1});
    auto sbar2 = [](const DensityMatrix& r) {
        double v = gyVisibility(r), p = gyPredictability(r);
        return 0.5 * (v * v + p * p);
    };
    double sa = sbar2(rhoA), sb = sbar2(rhoB);

    CcrReport rep;
    rep.relationId = "ccr-tessier";
    rep.terms = {{"Tr_rr_tilde", jae}, {"S_l", sl}, {"Sbar2_A", sa}, {"Sbar2_B", sb}};
    rep.lhs = jae + sl + sa + sb;
    rep.rhs = 1.0;
    rep.residual = std::abs(rep.lhs - rep.rhs);
    rep.inputDigest = stateDigest(rho.dims(), rho.mat());
    return rep;
}

std::vector<CcrReport> ccrQuantumClassical(const std::vector<double>& weights,
                                           const std::vector<DensityMatrix>& conditionals) {
    DensityMatrix rhoAB = quantumClassicalState(weights, conditionals);
    const long dA = conditionals.front().dim();
    const long dB = static_cast<long>(weights.size());

    double sG = vonNeumannEntropy(rhoAB);
    double pG = predictability(rhoAB);
    double cG = coherence(rhoAB);
    double hW = shannonEntropy(weights);

    double avgS = 0.0, avgP = 0.0, avgC = 0.0;
    std::vector<CcrReport> reports;
    std::vector<CcrReport> memberReports;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        double sj = vonNeumannEntropy(conditionals[j]);
        double pj = predictability(conditionals[j]);
        double cj = coherence(conditionals[j]);
        avgS += weights[j] * sj;
        avgP += weights[j] * pj;
        avgC += weights[j] * cj;

        CcrReport m;
        m.relationId = "ccr-qc-member";
        m.terms = {{"P_vn", pj}, {"S_vn", sj}, {"C_re", cj}};
        m.lhs = pj + sj + cj;
        m.rhs = log2d(dA);
        m.residual = std::abs(m.lhs - m.rhs);
        m.inputDigest = stateDigest(conditionals[j].dims(), conditionals[j].mat(),
                                    {static_cast<std::uint64_t>(j)});
        memberReports.push_back(std::move(m));
    }

    CcrReport g;
    g.relationId = "ccr-qc";
    g.terms = {{"P_vn", pG}, {"C_re", cG}, {"S_vn", sG}};
    g.lhs = pG + cG + sG;
    g.rhs = log2d(dA * dB);
    g.residual = std::abs(g.lhs - g.rhs);
    g.checks = {{"entropy_split", sG - (hW + avgS)},
                {"predictability_split", pG - (log2d(dB) - hW + avgP)},
                {"coherence_split", cG - avgC}};
    g.inputDigest = stateDigest(rhoAB.dims(), rhoAB.mat());

    reports.push_back(std::move(g));
    for (auto& m : memberReports) reports.push_back(std::move(m));
    return reports;
}

CcrReport ccrMutualInfo(const DensityMatrix& rho, const Cut& cut) {
    auto [sideA, sideB] = splitCut(cut, rho.subsystemCount());
    DensityMatrix rhoA = partialTrace(rho, sideA);
    DensityMatrix rhoB = partialTrace(rho, sideB);
    double info = mutualInformation(rho, sideA);
    double s = vonNeumannEntropy(rho);
    double pA = predictability(rhoA), cA = coherence(rhoA);
    double pB = predictability(rhoB), cB = coherence(rhoB);

    CcrReport rep;
    rep.relationId = "ccr-mutual-info";
    rep.terms = {{"I_A:B", info}, {"S_vn_AB", s}, {"P_vn_A", pA},
                 {"C_re_A", cA}, {"P_vn_B", pB}, {"C_re_B", cB}};
    rep.lhs = info + s + pA + cA + pB + cB;
    rep.rhs = log2d(rho.dim());
    rep.residual = std::abs(rep.lhs - rep.rhs);
    double split = stateInformation(rho) -
                   (stateInformation(rhoA) + stateInformation(rhoB) + info);
    rep.checks = {{"state_info_split", split}};
    rep.inputDigest = stateDigest(rho.dims(), rho.mat());
    return rep;
}

CcrReport ccrConditional(const DensityMatrix& rho, const Cut& cut) {
    auto [sideA, sideB] = splitCut(cut, rho.subsystemCount());
    DensityMatrix rhoA = partialTrace(rho, sideA);
    double info = mutualInformation(rho, sideA);
    double sCond = conditionalEntropy(rho, sideA);
    double pA = predictability(rhoA);
    double cA = coherence(rhoA);

    CcrReport rep;
    rep.relationId = "ccr-conditional";
    rep.terms = {{"I_A:B", info}, {"S_A|B", sCond}, {"P_vn_A", pA}, {"C_re_A", cA}};
    rep.lhs = info + sCond + pA + cA;
    rep.rhs = log2d(rhoA.dim());
    rep.residual = std::abs(rep.lhs - rep.rhs);
    double condForm = conditionalInformation(rho, sideA) - (info + pA + cA);
    double realitySplit = reality(rhoA) - (info + sCond + pA);
    rep.checks = {{"cond_info_form", condForm}, {"reality_split", realitySplit}};
    rep.inputDigest = stateDigest(rho.dims(), rho.mat());
    return rep;
}

const std::vector<std::string> kRelationIds = {
    "ccr-pure", "ccr-reality", "ccr-koashi", "ccr-tessier",
    "ccr-qc",   "ccr-mutual-info", "ccr-conditional"};

std::string relationDimsError(const std::string& relationId, const Dims& dims) {
    auto known = std::find(kRelationIds.begin(), kRelationIds.end(), relationId);
    if (known == kRelationIds.end())
        throw UnknownRelation("unknown relation: " + relationId);
    auto allAtLeast2 = [&] {
        return std::all_of(dims.begin(), dims.end(), [](int d) { return d >= 2; });
    };
    if (relationId == "ccr-pure") {
        if (dims.size() < 2 || !allAtLeast2())
            return "relation requires at least two factors of dimension >= 2";
    } else if (relationId == "ccr-reality") {
        if (dims.size() != 1 || dims[0] < 2 || dims[0] > 16)
            return "relation requires a single qudit dimension in 2..16";
    } else if (relationId == "ccr-koashi") {
        if (dims.size() != 3 || dims[0] != 2 || dims[1] != 2 || dims[2] < 2 || dims[2] > 4)
            return "relation requires dims 2x2xE with E in 2..4";
    } else if (relationId == "ccr-tessier") {
        if (dims != Dims{2, 2}) return "relation requires 2x2";
    } else if (relationId == "ccr-qc") {
        if (dims.size() != 2 || dims[0] < 2 || dims[0] > 4 || dims[1] < 2 || dims[1] > 4)
            return "relation requires two factors with dimensions in 2..4";
    } else {  // ccr-mutual-info, ccr-conditional
        if (dims.size() != 2 || !allAtLeast2() || dimProduct(dims) > 16)
            return "relation requires two factors with total dimension <= 16";
    }
    if (dimProduct(dims) > 64) return "total dimension too large";
    return "";
}

namespace {

int drawRank(detail::Rng& rng, int d, int fixedRank) {
    if (fixedRank > 0) return std::min(fixedRank, d);
    int r = 1 + static_cast<int>(rng.uniform() * d);
    return std::clamp(r, 1, d);
}

}  // namespace

CcrReport evaluateRelationTrial(const std::string& relationId, const GeneratorSpec& gen,
                                std::uint64_t seed, const OptimizerConfig& cfg,
                                MeasurementMode mode) {
    std::string dimsErr = relationDimsError(relationId, gen.dims);
    if (!dimsErr.empty()) throw InvalidState(relationId + ": " + dimsErr);

    detail::Rng rng(seed);
    if (relationId == "ccr-pure") {
        return ccrPure(randomPure(gen.dims, mixSeed(seed, 1)));
    }
    if (relationId == "ccr-reality") {
        int d = gen.dims[0];
        int rank = drawRank(rng, d, gen.rank);
        DensityMatrix rho = randomMixed(d, rank, mixSeed(seed, 1));
        MeasurementBasis basis = MeasurementBasis::random(d, mixSeed(seed, 2));
        return ccrReality(rho, basis);
    }
    if (relationId == "ccr-koashi") {
        OptimizerConfig trialCfg = cfg;
        trialCfg.seed = mixSeed(seed, 2);
        return ccrKoashi(randomPure(gen.dims, mixSeed(seed, 1)), trialCfg, false, mode);
    }
    if (relationId == "ccr-tessier") {
        int rank = drawRank(rng, 4, gen.rank);
        DensityMatrix rho4 = randomMixed(4, rank, mixSeed(seed, 1));
        return ccrTessier(DensityMatrix(Dims{2, 2}, rho4.mat()));
    }
    if (relationId == "ccr-qc") {
        int dA = gen.dims[0], dB = gen.dims[1];
        std::vector<double> weights(dB);
        double sum = 0.0;
        for (int j = 0; j < dB; ++j) {
            weights[j] = -std::log(1.0 - rng.uniform());
            sum += weights[j];
        }
        for (double& w : weights) w /= sum;
        std::vector<DensityMatrix> conds;
        conds.reserve(dB);
        for (int j = 0; j < dB; ++j) {
            int rank = drawRank(rng, dA, gen.rank);
            conds.push_back(randomMixed(dA, rank, mixSeed(seed, 10 + j)));
        }
        auto reports = ccrQuantumClassical(weights, conds);
        std::size_t worst = 0;
        for (std::size_t i = 1; i < reports.size(); ++i)
            if (reports[i].maxResidual() > reports[worst].maxResidual()) worst = i;
        return reports[worst];
    }
    // ccr-mutual-info / ccr-conditional
    int d = static_cast<int>(dimProduct(gen.dims));
    int rank = drawRank(rng, d, gen.rank);
    DensityMatrix flat = randomMixed(d, rank, mixSeed(seed, 1));
    DensityMatrix rho(gen.dims, flat.mat());
    if (relationId == "ccr-mutual-info") return ccrMutualInfo(rho, Cut{0});
    return ccrConditional(rho, Cut{0});
}

BatchSummary verifyBatch(const std::string& relationId, const GeneratorSpec& gen, int trials,
                         double tolerance, std::uint64_t seed, const OptimizerConfig& cfg,
                         MeasurementMode mode, std::vector<TrialRecord>* perTrial) {
    if (trials < 1) throw InvalidState("verifyBatch: trials must be >= 1");
    std::string dimsErr = relationDimsError(relationId, gen.dims);
    if (!dimsErr.empty()) throw InvalidState(relationId + ": " + dimsErr);

    std::vector<TrialRecord> records(trials);
    parallelForIndexed(trials, [&](int t) {
        std::uint64_t trialSeed = mixSeed(seed, static_cast<std::uint64_t>(t));
        CcrReport rep = evaluateRelationTrial(relationId, gen, trialSeed, cfg, mode);
        TrialRecord& rec = records[t];
        rec.trial = t;
        rec.seed = trialSeed;
        rec.residual = rep.maxResidual();
        rec.spread = rep.optimizerSpread;
        rec.converged = rep.converged;
        rec.mode = rep.mode;
    });

    BatchSummary summary;
    summary.relationId = relationId;
    summary.trials = trials;
    summary.tolerance = tolerance;
    double sum = 0.0;
    for (const auto& rec : records) {
        summary.maxResidual = std::max(summary.maxResidual, rec.residual);
        sum += rec.residual;
        if (rec.residual > tolerance) ++summary.failures;
    }
    summary.meanResidual = sum / trials;
    if (perTrial) *perTrial = std::move(records);
    return summary;
}

}  // namespace ccr
