#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccr/measures.hpp"
#include "ccr/relations.hpp"

using namespace ccr;

namespace {

PureState bellPhiPlus() {
    Vec v = Vec::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return PureState({2, 2}, v);
}

PureState basisKet(Dims dims, int index) {
    Vec v = Vec::Zero(dimProduct(dims));
    v(index) = 1.0;
    return PureState(std::move(dims), v);
}

DensityMatrix ketDensity(int dim, int k) {
    Mat m = Mat::Zero(dim, dim);
    m(k, k) = 1.0;
    return DensityMatrix({dim}, m);
}

DensityMatrix plusDensity() {
    return DensityMatrix({2}, Mat::Constant(2, 2, Cplx(0.5, 0.0)));
}

double h2(double x) {
    auto term = [](double v) { return v > 0 ? -v * std::log2(v) : 0.0; };
    return term(x) + term(1.0 - x);
}

}  // namespace

TEST_CASE("ccrPure on canonical bipartite states") {
    CcrReport r00 = ccrPure(basisKet({2, 2}, 0));
    CHECK(r00.term("C_re") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r00.term("P_vn") == doctest::Approx(1.0));
    CHECK(r00.term("S_vn") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r00.rhs == doctest::Approx(1.0));
    CHECK(r00.residual < 1e-12);

    CcrReport bell = ccrPure(bellPhiPlus());
    CHECK(bell.term("C_re") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(bell.term("P_vn") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(bell.term("S_vn") == doctest::Approx(1.0));
    CHECK(bell.residual < 1e-10);
}

TEST_CASE("ccrPure Monte-Carlo on two-qutrit states") {
    for (int trial = 0; trial < 50; ++trial) {
        CcrReport rep = ccrPure(randomPure({3, 3}, mixSeed(11, trial)));
        CHECK(rep.rhs == doctest::Approx(std::log2(3.0)));
        CHECK(rep.residual <= 1e-10);
        for (const auto& [name, value] : rep.terms) CHECK(value >= -1e-10);
    }
}

TEST_CASE("ccrReality canonical and Monte-Carlo") {
    CcrReport plus = ccrReality(plusDensity());
    CHECK(plus.term("R") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(plus.term("C_re") == doctest::Approx(1.0));
    CHECK(plus.residual < 1e-10);

    CcrReport mixed = ccrReality(DensityMatrix({2}, Mat::Identity(2, 2) / 2.0));
    CHECK(mixed.term("R") == doctest::Approx(1.0));
    CHECK(mixed.term("C_re") == doctest::Approx(0.0).epsilon(1e-12));

    for (int trial = 0; trial < 60; ++trial) {
        int d = 2 + trial % 4;
        DensityMatrix rho = randomMixed(d, 1 + trial % d, mixSeed(21, trial));
        MeasurementBasis basis = MeasurementBasis::random(d, mixSeed(22, trial));
        CcrReport rep = ccrReality(rho, basis);
        CHECK(rep.residual <= 1e-10);
        CHECK(std::abs(rep.check("reality_split")) <= 1e-10);
        CHECK(std::abs(rep.check("cre_vs_irreality")) <= 1e-12);
    }
}

TEST_CASE("ccrKoashi canonical states") {
    OptimizerConfig cfg;
    cfg.restarts = 8;
    cfg.seed = 5;

    CcrReport triv = ccrKoashi(basisKet({2, 2, 2}, 0), cfg);
    CHECK(triv.term("E_f") == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(triv.term("J") == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(triv.term("P_vn") == doctest::Approx(1.0));
    CHECK(triv.term("C_re") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(triv.residual < 1e-9);

    Vec ghzAmps = Vec::Zero(8);
    ghzAmps(0) = ghzAmps(7) = 1.0 / std::sqrt(2.0);
    CcrReport ghz = ccrKoashi(PureState({2, 2, 2}, ghzAmps), cfg);
    CHECK(ghz.term("E_f") == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(ghz.term("J") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ghz.term("P_vn") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(ghz.term("C_re") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(ghz.residual <= 1e-4);
    CHECK(ghz.mode == "projective");
}

TEST_CASE("ccrKoashi W state terms against hand-derived values") {
    Vec w = Vec::Zero(8);
    w(1) = w(2) = w(4) = 1.0 / std::sqrt(3.0);
    OptimizerConfig cfg;
    cfg.restarts = 12;
    cfg.seed = 6;
    CcrReport rep = ccrKoashi(PureState({2, 2, 2}, w), cfg);

    // rho_A = diag(2/3, 1/3); concurrence of rho_AB is 2/3
    double efOracle = h2(0.5 * (1.0 + std::sqrt(1.0 - 4.0 / 9.0)));
    double sA = h2(1.0 / 3.0);
    CHECK(rep.term("C_re") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(rep.term("P_vn") == doctest::Approx(1.0 - sA).epsilon(1e-10));
    CHECK(rep.term("E_f") == doctest::Approx(efOracle).epsilon(1e-10));
    CHECK(rep.term("J") == doctest::Approx(sA - efOracle).epsilon(1e-5));
    CHECK(rep.residual <= 1e-3);
}

TEST_CASE("ccrKoashi swap mode exchanges the correlation partners") {
    OptimizerConfig cfg;
    cfg.restarts = 10;
    cfg.seed = 7;
    for (int trial = 0; trial < 5; ++trial) {
        PureState psi = randomPure({2, 2, 2}, mixSeed(71, trial));
        CcrReport swapped = ccrKoashi(psi, cfg, true);
        CHECK(swapped.residual <= 1e-3);
        for (const auto& [name, value] : swapped.terms) CHECK(value >= -1e-10);
    }
}

TEST_CASE("ccrTessier exact identity") {
    CcrReport bell = ccrTessier(bellPhiPlus().toDensity());
    CHECK(bell.term("Tr_rr_tilde") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bell.term("S_l") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bell.term("Sbar2_A") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bell.term("Sbar2_B") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bell.residual <= 1e-12);

    CcrReport i4 = ccrTessier(DensityMatrix({2, 2}, Mat::Identity(4, 4) / 4.0));
    CHECK(i4.term("Tr_rr_tilde") == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(i4.term("S_l") == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(i4.residual <= 1e-12);

    for (int trial = 0; trial < 60; ++trial) {
        DensityMatrix rho({2, 2}, randomMixed(4, 1 + trial % 4, mixSeed(31, trial)).mat());
        CHECK(ccrTessier(rho).residual <= 1e-12);
    }
    CHECK_THROWS_AS(ccrTessier(randomMixed(4, 4, 1)), NotTwoQubit);
}

TEST_CASE("ccrQuantumClassical single member") {
    auto reports = ccrQuantumClassical({1.0}, {ketDensity(2, 0)});
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].residual <= 1e-10);
    CHECK(reports[1].term("P_vn") == doctest::Approx(1.0));
    CHECK(reports[1].term("S_vn") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(reports[1].term("C_re") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(reports[1].rhs == doctest::Approx(1.0));
}

TEST_CASE("ccrQuantumClassical coherence decomposition example") {
    auto reports = ccrQuantumClassical({0.5, 0.5}, {ketDensity(2, 0), plusDensity()});
    // global C_re = 1/2 * 0 + 1/2 * 1
    CHECK(reports[0].term("C_re") == doctest::Approx(0.5).epsilon(1e-10));
    for (const auto& rep : reports) CHECK(rep.maxResidual() <= 1e-10);
}

TEST_CASE("ccrQuantumClassical Monte-Carlo over random blocks") {
    for (int trial = 0; trial < 30; ++trial) {
        detail::Rng rng(mixSeed(41, trial));
        int dA = 2 + trial % 2, dB = 2 + (trial / 2) % 2;
        std::vector<double> weights(dB);
        double sum = 0;
        for (auto& w : weights) {
            w = 0.1 + rng.uniform();
            sum += w;
        }
        for (auto& w : weights) w /= sum;
        std::vector<DensityMatrix> conds;
        for (int j = 0; j < dB; ++j)
            conds.push_back(randomMixed(dA, 1 + (trial + j) % dA, mixSeed(42, trial * 10 + j)));
        for (const auto& rep : ccrQuantumClassical(weights, conds)) {
            CHECK(rep.maxResidual() <= 1e-10);
            for (const auto& [name, value] : rep.terms) CHECK(value >= -1e-10);
        }
    }
}

TEST_CASE("ccrMutualInfo worked examples and Monte-Carlo") {
    CcrReport i4 = ccrMutualInfo(DensityMatrix({2, 2}, Mat::Identity(4, 4) / 4.0), {0});
    CHECK(i4.term("I_A:B") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(i4.term("S_vn_AB") == doctest::Approx(2.0));
    CHECK(i4.rhs == doctest::Approx(2.0));
    CHECK(i4.residual <= 1e-10);

    CcrReport bell = ccrMutualInfo(bellPhiPlus().toDensity(), {0});
    CHECK(bell.term("I_A:B") == doctest::Approx(2.0));
    CHECK(bell.term("S_vn_AB") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(bell.residual <= 1e-10);

    for (int trial = 0; trial < 25; ++trial) {
        DensityMatrix flat = randomMixed(9, 1 + trial % 9, mixSeed(51, trial));
        CcrReport rep = ccrMutualInfo(DensityMatrix({3, 3}, flat.mat()), {0});
        CHECK(rep.rhs == doctest::Approx(std::log2(9.0)));
        CHECK(rep.residual <= 1e-10);
        CHECK(std::abs(rep.check("state_info_split")) <= 1e-10);
    }
}

TEST_CASE("ccrConditional worked examples and Monte-Carlo") {
    CcrReport bell = ccrConditional(bellPhiPlus().toDensity(), {0});
    CHECK(bell.term("I_A:B") == doctest::Approx(2.0));
    CHECK(bell.term("S_A|B") == doctest::Approx(-1.0));
    CHECK(bell.rhs == doctest::Approx(1.0));
    CHECK(bell.residual <= 1e-10);

    DensityMatrix rhoA = randomMixed(2, 2, 61);
    DensityMatrix rhoB = randomMixed(2, 2, 62);
    DensityMatrix prod({2, 2}, kron(rhoA.mat(), rhoB.mat()));
    CcrReport prodRep = ccrConditional(prod, {0});
    CHECK(prodRep.term("I_A:B") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(prodRep.term("S_A|B") == doctest::Approx(vonNeumannEntropy(rhoA)).epsilon(1e-10));
    // the quoted local form: S_A|B + P_vn + C_re = log2 dA when I vanishes
    CHECK(prodRep.term("S_A|B") + prodRep.term("P_vn_A") + prodRep.term("C_re_A") ==
          doctest::Approx(1.0).epsilon(1e-10));

    for (int trial = 0; trial < 40; ++trial) {
        DensityMatrix flat = randomMixed(8, 1 + trial % 8, mixSeed(63, trial));
        CcrReport rep = ccrConditional(DensityMatrix({2, 4}, flat.mat()), {0});
        CHECK(rep.residual <= 1e-10);
        CHECK(std::abs(rep.check("cond_info_form")) <= 1e-10);
        CHECK(std::abs(rep.check("reality_split")) <= 1e-10);
    }
}

TEST_CASE("ccrKoashi residual weakly decreases with more restarts") {
    PureState psi = randomPure({2, 2, 2}, 88);
    double prev = 1e9;
    for (int restarts : {2, 6, 12}) {
        OptimizerConfig cfg;
        cfg.restarts = restarts;
        cfg.seed = 777;
        double r = ccrKoashi(psi, cfg).residual;
        CHECK(r <= prev + 1e-12);
        prev = r;
    }
}

TEST_CASE("verifyBatch determinism and aggregation") {
    GeneratorSpec gen{{2, 2}, 0};
    std::vector<TrialRecord> trialsA, trialsB;
    BatchSummary a = verifyBatch("ccr-pure", gen, 200, 1e-10, 99, {}, MeasurementMode::Projective,
                                 &trialsA);
    BatchSummary b = verifyBatch("ccr-pure", gen, 200, 1e-10, 99, {}, MeasurementMode::Projective,
                                 &trialsB);
    CHECK(a.failures == 0);
    CHECK(a.maxResidual == b.maxResidual);
    CHECK(a.meanResidual == b.meanResidual);
    REQUIRE(trialsA.size() == trialsB.size());
    for (std::size_t i = 0; i < trialsA.size(); ++i) {
        CHECK(trialsA[i].residual == trialsB[i].residual);
        CHECK(trialsA[i].seed == trialsB[i].seed);
    }
    CHECK(a.maxResidual >= a.meanResidual);
}

TEST_CASE("verifyBatch across the registry") {
    CHECK(verifyBatch("ccr-tessier", {{2, 2}, 0}, 200, 1e-12, 3).failures == 0);
    CHECK(verifyBatch("ccr-reality", {{3}, 0}, 100, 1e-10, 4).failures == 0);
    CHECK(verifyBatch("ccr-qc", {{2, 3}, 0}, 50, 1e-10, 5).failures == 0);
    CHECK(verifyBatch("ccr-mutual-info", {{2, 3}, 0}, 100, 1e-10, 6).failures == 0);
    CHECK(verifyBatch("ccr-conditional", {{3, 3}, 0}, 100, 1e-10, 7).failures == 0);

    OptimizerConfig cfg;
    cfg.restarts = 10;
    BatchSummary kw = verifyBatch("ccr-koashi", {{2, 2, 2}, 0}, 20, 1e-3, 8, cfg);
    CHECK(kw.failures == 0);

    CHECK_THROWS_AS(verifyBatch("ccr-unknown", {{2, 2}, 0}, 10, 1e-10, 1), UnknownRelation);
    CHECK_THROWS_AS(verifyBatch("ccr-tessier", {{3, 3}, 0}, 10, 1e-12, 1), InvalidState);
}

TEST_CASE("relationDimsError reports constraints") {
    CHECK(relationDimsError("ccr-tessier", {3, 3}) != "");
    CHECK(relationDimsError("ccr-tessier", {2, 2}) == "");
    CHECK(relationDimsError("ccr-pure", {2}) != "");
    CHECK(relationDimsError("ccr-reality", {2, 2}) != "");
    CHECK_THROWS_AS(relationDimsError("nope", {2, 2}), UnknownRelation);
}

TEST_CASE("report reproducibility: identical digest, identical report") {
    PureState psi = randomPure({2, 2}, 1234);
    CcrReport a = ccrPure(psi);
    CcrReport b = ccrPure(psi);
    CHECK(a.inputDigest == b.inputDigest);
    CHECK(a.lhs == b.lhs);
    CHECK(a.residual == b.residual);
    REQUIRE(a.terms.size() == b.terms.size());
    for (std::size_t i = 0; i < a.terms.size(); ++i) CHECK(a.terms[i].second == b.terms[i].second);

    PureState other = randomPure({2, 2}, 1235);
    CHECK(ccrPure(other).inputDigest != a.inputDigest);
}
