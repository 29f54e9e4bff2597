#include "ccr/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "ccr/measures.hpp"
#include "ccr/relations.hpp"

namespace ccr {

namespace {

constexpr double kPurityTol = 1e-10;

void requireRate(double gamma) {
    if (gamma < 0.0 || !std::isfinite(gamma)) throw InvalidState("dephasing rate must be >= 0");
}

/// Environment kets (columns) with pairwise overlap c: the Cholesky factor
/// of the Gram matrix (1-c) I + c J. Column 0 is |0>; for a qubit this is
/// the controlled-rotation dilation |e1> = c|0> + sqrt(1-c^2)|1>.
Mat envKets(int d, double c) {
    if (c >= 1.0 - 1e-15) {
        Mat e = Mat::Zero(d, d);
        e.row(0).setOnes();
        return e;
    }
    Mat g = Mat::Constant(d, d, Cplx(c, 0.0));
    g.diagonal().setOnes();
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) throw Error("envKets: Cholesky failed");
    Mat l = llt.matrixL();
    return l.adjoint();
}

void checkUniform(const std::vector<double>& tGrid) {
    if (tGrid.size() < 3) throw GridTooCoarse("rate check needs at least 3 grid points");
    double h = tGrid[1] - tGrid[0];
    if (h <= 0.0) throw GridTooCoarse("grid must be strictly increasing");
    for (std::size_t i = 1; i + 1 < tGrid.size(); ++i) {
        double step = tGrid[i + 1] - tGrid[i];
        if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw GridTooCoarse("grid must be uniform");
    }
}

}  // namespace

Trajectory::Trajectory(std::vector<std::string> keys, std::vector<double> times)
    : keys_(std::move(keys)), times_(std::move(times)) {
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (times_[i] <= times_[i - 1]) throw InvalidState("Trajectory: times not increasing");
}

void Trajectory::appendRecord(const std::vector<double>& values) {
    if (values.size() != keys_.size())
        throw InvalidState("Trajectory: record does not match the key set");
    if (records_.size() >= times_.size()) throw InvalidState("Trajectory: too many records");
    records_.push_back(values);
}

bool Trajectory::hasKey(const std::string& key) const {
    return std::find(keys_.begin(), keys_.end(), key) != keys_.end();
}

double Trajectory::at(std::size_t i, const std::string& key) const {
    auto it = std::find(keys_.begin(), keys_.end(), key);
    if (it == keys_.end()) throw MissingKey("Trajectory: no key named " + key);
    return records_.at(i)[static_cast<std::size_t>(it - keys_.begin())];
}

std::vector<double> Trajectory::series(const std::string& key) const {
    auto it = std::find(keys_.begin(), keys_.end(), key);
    if (it == keys_.end()) throw MissingKey("Trajectory: no key named " + key);
    std::size_t col = static_cast<std::size_t>(it - keys_.begin());
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& rec : records_) out.push_back(rec[col]);
    return out;
}

std::vector<double> uniformGrid(double t0, double t1, int steps) {
    if (steps < 3) throw GridTooCoarse("grid needs at least 3 points");
    if (!(t1 > t0)) throw GridTooCoarse("grid needs t1 > t0");
    std::vector<double> out(steps);
    double h = (t1 - t0) / (steps - 1);
    for (int i = 0; i < steps; ++i) out[i] = t0 + i * h;
    return out;
}

PureState dilateDephasing(const PureState& psiA, double gamma, double t) {
    requireRate(gamma);
    if (t < 0.0) throw InvalidState("dilateDephasing: t must be >= 0");
    const long d = psiA.dim();
    double c = std::exp(-gamma * t);
    Mat env = envKets(static_cast<int>(d), c);

    Vec amps = Vec::Zero(d * d);
    for (long k = 0; k < d; ++k)
        for (long m = 0; m < d; ++m) amps(k * d + m) = psiA.amplitudes()(k) * env(m, k);
    amps /= amps.norm();
    return PureState(Dims{static_cast<int>(d), static_cast<int>(d)}, std::move(amps));
}

PureState dilateDephasing(const DensityMatrix& rhoA, double gamma, double t) {
    if (std::abs(rhoA.purity() - 1.0) > kPurityTol)
        throw NotPure("dilateDephasing: input state is mixed");
    EigSystem eig = hermEig(rhoA.mat());
    Vec psi = eig.vectors.col(0);
    return dilateDephasing(PureState(Dims{static_cast<int>(rhoA.dim())}, psi / psi.norm()),
                           gamma, t);
}

PureState dilateDephasing(const DensityMatrix& rhoA, const ChannelSpec& spec, double t) {
    if (spec.kind != ChannelKind::Dephasing)
        throw InvalidState("dilateDephasing: channel kind must be dephasing");
    if (!spec.basis) return dilateDephasing(rhoA, spec.rate, t);
    // dephase toward the given basis: rotate into its frame and back
    const Mat& u = spec.basis->vectors();
    if (spec.basis->dim() != rhoA.dim()) throw DimMismatch("dilateDephasing: basis dim mismatch");
    DensityMatrix rotated(rhoA.dims(), u.adjoint() * rhoA.mat() * u);
    PureState dilated = dilateDephasing(rotated, spec.rate, t);
    const long d = rhoA.dim();
    Vec amps = Vec::Zero(d * d);
    // apply (U (x) I) to restore the system frame
    for (long k = 0; k < d; ++k)
        for (long m = 0; m < d; ++m) {
            Cplx acc = 0.0;
            for (long k2 = 0; k2 < d; ++k2) acc += u(k, k2) * dilated.amplitudes()(k2 * d + m);
            amps(k * d + m) = acc;
        }
    return PureState(dilated.dims(), std::move(amps));
}

RateCheckResult rateCheck(const PureState& psiA, double gamma,
                          const std::vector<double>& tGrid) {
    requireRate(gamma);
    checkUniform(tGrid);
    const double h = tGrid[1] - tGrid[0];
    const long d = psiA.dim();
    const int n = static_cast<int>(tGrid.size());

    Trajectory traj({kKeyCoherence, kKeyPredictability, kKeyEntropy, kKeyEfAE}, tGrid);
    std::vector<double> cSeries(n), eSeries(n), analyticRate(n);
    for (int i = 0; i < n; ++i) {
        PureState global = dilateDephasing(psiA, gamma, tGrid[i]);
        DensityMatrix rhoA = partialTrace(global, Cut{0});
        double c = coherence(rhoA);
        double p = predictability(rhoA);
        double s = vonNeumannEntropy(rhoA);
        double ef = entanglementEntropy(global, Cut{0});
        traj.appendRecord({c, p, s, ef});
        cSeries[i] = c;
        eSeries[i] = ef;

        // analytic dC/dt = -dS/dt by first-order perturbation of the
        // spectrum: d lambda_i = <v_i| drho/dt |v_i>, drho/dt = -gamma *
        // offdiag(rho)
        EigSystem eig = hermEig(rhoA.mat());
        Mat offdiag = rhoA.mat();
        offdiag.diagonal().setZero();
        double dS = 0.0;
        for (long k = 0; k < d; ++k) {
            double lambda = eig.values(k);
            if (lambda <= 1e-300) continue;
            double dLambda = -gamma * (eig.vectors.col(k).adjoint() * offdiag *
                                       eig.vectors.col(k))(0, 0).real();
            dS += -dLambda * std::log2(lambda);
        }
        analyticRate[i] = -dS;  // dC/dt
    }

    RateCheckResult out{std::move(traj), {}, {}, {}, 0.0, 0.0, h};
    for (int i = 1; i + 1 < n; ++i) {
        double fdC = (cSeries[i + 1] - cSeries[i - 1]) / (2.0 * h);
        double fdE = (eSeries[i + 1] - eSeries[i - 1]) / (2.0 * h);
        out.interiorTimes.push_back(tGrid[i]);
        out.coherenceRateFd.push_back(fdC);
        out.entanglementRateFd.push_back(fdE);
        out.maxRateMismatch = std::max(out.maxRateMismatch, std::abs(fdC + fdE));
        out.maxFdError = std::max(out.maxFdError, std::abs(fdC - analyticRate[i]));
    }
    return out;
}

Trajectory measurementModel(const DensityMatrix& systemState, double gammaEnv,
                            const std::vector<double>& tGrid, const OptimizerConfig& cfg) {
    if (systemState.dim() != 2) throw NotQubit("measurementModel: system must be a qubit");
    requireRate(gammaEnv);
    if (tGrid.empty()) throw GridTooCoarse("measurementModel: empty time grid");

    // spectral decomposition of the system; a reference register purifies
    // mixed inputs so the tracked global state stays pure
    EigSystem eig = hermEig(systemState.mat());
    long rank = (eig.values.size() > 1 && eig.values(1) > 1e-12) ? 2 : 1;

    Dims dims{2, 2, 2};
    if (rank == 2) dims.push_back(2);
    const long refDim = (rank == 2) ? 2 : 1;

    Trajectory traj({kKeyCoherence, kKeyPredictability, kKeyEntropy, kKeyEfAE, kKeyJ,
                     kKeyCondInfo, kKeyCcrResidual},
                    tGrid);

    for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
        double kappa = std::exp(-gammaEnv * tGrid[ti]);
        double s = std::sqrt(std::max(0.0, 1.0 - kappa * kappa));

        // |0>_A |0 e0>;  |1>_A (kappa |0 e0> + s |1 e1>), |e1> = kappa|0> + s|1>
        Vec amps = Vec::Zero(8 * refDim);
        auto put = [&](long a, long app, long e, long r, Cplx v) {
            amps(((a * 2 + app) * 2 + e) * refDim + r) += v;
        };
        for (long i = 0; i < rank; ++i) {
            double root = std::sqrt(std::max(eig.values(static_cast<Eigen::Index>(i)), 0.0));
            for (long a = 0; a < 2; ++a) {
                Cplx amp = root * eig.vectors(a, i);
                if (amp == Cplx(0.0, 0.0)) continue;
                if (a == 0) {
                    put(0, 0, 0, i, amp);
                } else {
                    put(1, 0, 0, i, amp * kappa);
                    put(1, 1, 0, i, amp * s * kappa);
                    put(1, 1, 1, i, amp * s * s);
                }
            }
        }
        amps /= amps.norm();
        PureState global(dims, std::move(amps));

        DensityMatrix rhoA = partialTrace(global, Cut{0});
        DensityMatrix rhoAApp = partialTrace(global, Cut{0, 1});
        DensityMatrix rhoAE = partialTrace(global, Cut{0, 2});

        OptimizerConfig jCfg = cfg;
        jCfg.seed = mixSeed(cfg.seed, ti);
        OptResult j = classicalCorrelation(rhoAApp, Cut{1}, jCfg);

        traj.appendRecord({coherence(rhoA), predictability(rhoA), vonNeumannEntropy(rhoA),
                           entanglementOfFormationTwoQubit(rhoAE), j.value,
                           conditionalInformation(rhoAApp, Cut{0}),
                           ccrPure(global).residual});
    }
    return traj;
}

std::optional<double> pointerBasisDetect(const Trajectory& traj, int window, double epsilon) {
    if (window < 1) throw InvalidState("pointerBasisDetect: window must be >= 1");
    std::vector<double> j = traj.series(kKeyJ);  // MissingKey when absent
    const int n = static_cast<int>(j.size());
    for (int i = 0; i + window <= n; ++i) {
        double lo = j[i], hi = j[i];
        for (int k = i; k < i + window; ++k) {
            lo = std::min(lo, j[k]);
            hi = std::max(hi, j[k]);
        }
        if (hi - lo < epsilon) return traj.times()[i];
    }
    return std::nullopt;
}

}  // namespace ccr
