#include "ccr/correlations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ccr/measures.hpp"

namespace ccr {

namespace {

constexpr double kOutcomeCutoff = 1e-12;
constexpr long kEfDimCap = 16;
constexpr long kMeasuredDimCap = 4;

double entropyTerm(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

/// Entropy of a Hermitian 2x2 matrix scaled to unit trace, via trace/det.
double entropy2x2Normalized(const Cplx& m00, const Cplx& m01, const Cplx& m11, double trace) {
    if (trace <= 0.0) return 0.0;
    double a = m00.real() / trace;
    double d = m11.real() / trace;
    double det = a * d - std::norm(m01) / (trace * trace);
    double disc = std::max(0.0, 1.0 - 4.0 * det);  // (a+d)=1
    double root = std::sqrt(disc);
    double lm = 0.5 * (1.0 - root);
    if (lm < -1e-10) throw InvalidState("entropy: negative eigenvalue");
    double lp = std::clamp(0.5 * (1.0 + root), 0.0, 1.0);
    return entropyTerm(lp) + entropyTerm(std::max(lm, 0.0));
}

double spectrumEntropyClipped(const Eigen::VectorXd& values) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        double lambda = values(i);
        if (lambda < 0.0) {
            if (lambda < -1e-10) throw InvalidState("entropy: negative eigenvalue");
            lambda = 0.0;
        }
        s += entropyTerm(lambda);
    }
    return s;
}

/// SU(2) rotation exp(i (x sx + y sy + z sz)) embedded at rows/cols (j, k).
void applyBlockRotation(Mat& u, int j, int k, double x, double y, double z) {
    double theta = std::sqrt(x * x + y * y + z * z);
    if (theta < 1e-300) return;
    double c = std::cos(theta);
    double s = std::sin(theta) / theta;
    Cplx g00(c, s * z), g01(s * y, s * x), g10(-s * y, s * x), g11(c, -s * z);
    // right-multiplication: mixes columns j and k
    Vec cj = u.col(j), ck = u.col(k);
    u.col(j) = cj * g00 + ck * g10;
    u.col(k) = cj * g01 + ck * g11;
}

/// Compact Nelder-Mead over n parameters. Starts from the origin with the
/// given simplex scale; returns the best point and value found.
struct SimplexResult {
    std::vector<double> x;
    double f;
};

SimplexResult nelderMead(const std::function<double(const std::vector<double>&)>& fn, int n,
                         double scale, double ftol, int maxEvals) {
    const double alpha = 1.0, gamma = 2.0, beta = 0.5, sigma = 0.5;
    int evals = 0;
    std::vector<std::vector<double>> xs(n + 1, std::vector<double>(n, 0.0));
    std::vector<double> fs(n + 1);
    for (int i = 1; i <= n; ++i) xs[i][i - 1] = scale;
    for (int i = 0; i <= n; ++i) {
        fs[i] = fn(xs[i]);
        ++evals;
    }
    std::vector<int> order(n + 1);
    while (true) {
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        int best = order[0], worst = order[n], second = order[n - 1];
        if (fs[worst] - fs[best] <= ftol || evals >= maxEvals)
            return {xs[best], fs[best]};

        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (int d = 0; d < n; ++d) centroid[d] += xs[i][d];
        }
        for (int d = 0; d < n; ++d) centroid[d] /= n;

        auto combine = [&](double t) {
            std::vector<double> p(n);
            for (int d = 0; d < n; ++d) p[d] = centroid[d] + t * (centroid[d] - xs[worst][d]);
            return p;
        };
        std::vector<double> xr = combine(alpha);
        double fr = fn(xr);
        ++evals;
        if (fr < fs[order[0]]) {
            std::vector<double> xe = combine(gamma);
            double fe = fn(xe);
            ++evals;
            if (fe < fr) {
                xs[worst] = xe;
                fs[worst] = fe;
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
        } else if (fr < fs[second]) {
            xs[worst] = xr;
            fs[worst] = fr;
        } else {
            std::vector<double> xc = combine(-beta);
            double fc = fn(xc);
            ++evals;
            if (fc < fs[worst]) {
                xs[worst] = xc;
                fs[worst] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    int idx = order[i];
                    for (int d = 0; d < n; ++d)
                        xs[idx][d] = xs[best][d] + sigma * (xs[idx][d] - xs[best][d]);
                    fs[idx] = fn(xs[idx]);
                    ++evals;
                }
            }
        }
    }
}

std::vector<double> flattenUnitary(const Mat& u) {
    std::vector<double> out;
    out.reserve(2 * u.size());
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        for (Eigen::Index j = 0; j < u.cols(); ++j) {
            out.push_back(u(i, j).real());
            out.push_back(u(i, j).imag());
        }
    return out;
}

}  // namespace

std::string measurementModeName(MeasurementMode mode) {
    return mode == MeasurementMode::Projective ? "projective" : "povm";
}

double binaryEntropy(double x) { return entropyTerm(x) + entropyTerm(1.0 - x); }

double entanglementEntropy(const PureState& psi, const Cut& cut) {
    auto [sideA, sideB] = splitCut(cut, psi.subsystemCount());
    return vonNeumannEntropy(partialTrace(psi, sideA));
}

namespace {

const Mat& spinFlipKernel() {
    static const Mat y2 = [] {
        Mat m = Mat::Zero(4, 4);
        m(0, 3) = -1.0;
        m(1, 2) = 1.0;
        m(2, 1) = 1.0;
        m(3, 0) = -1.0;
        return m;
    }();
    return y2;
}

void requireTwoQubit(const DensityMatrix& rho) {
    if (rho.dims() != Dims{2, 2}) throw NotTwoQubit("operation requires a two-qubit state");
}

}  // namespace

Mat spinFlip(const DensityMatrix& rho) {
    requireTwoQubit(rho);
    const Mat& y2 = spinFlipKernel();
    return y2 * rho.mat().conjugate() * y2;
}

double jaegerMeasure(const DensityMatrix& rho) {
    requireTwoQubit(rho);
    double trA2 = partialTrace(rho, Cut{0}).purity();
    double trB2 = partialTrace(rho, Cut{1}).purity();
    double combo = 1.0 - trA2 - trB2 + rho.purity();
    double direct = (rho.mat() * spinFlip(rho)).trace().real();
    if (std::abs(combo - direct) > 1e-10)
        throw Error("jaegerMeasure: purity combination and Tr(rho rho~) disagree");
    return combo;
}

double concurrence(const DensityMatrix& rho) {
    requireTwoQubit(rho);
    EigSystem eig = hermEig(rho.mat());
    Mat sqrtRho = Mat::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
        double lambda = std::max(eig.values(i), 0.0);
        sqrtRho += std::sqrt(lambda) * (eig.vectors.col(i) * eig.vectors.col(i).adjoint());
    }
    Mat r = sqrtRho * spinFlip(rho) * sqrtRho;
    EigSystem reig = hermEig((r + r.adjoint()) / 2.0);
    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i) {
        if (reig.values(i) < -1e-10) throw InvalidState("concurrence: negative eigenvalue");
        lam[i] = std::sqrt(std::max(reig.values(i), 0.0));
    }
    return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double entanglementOfFormationTwoQubit(const DensityMatrix& rho) {
    double c = concurrence(rho);
    double root = std::sqrt(std::max(0.0, 1.0 - c * c));
    return binaryEntropy(0.5 * (1.0 + root));
}

OptResult minimizeOverUnitary(int m, const std::function<double(const Mat&)>& objective,
                              const OptimizerConfig& cfg) {
    if (cfg.restarts < 1) throw InvalidState("OptimizerConfig: restarts must be >= 1");
    if (cfg.tolerance <= 0.0) throw InvalidState("OptimizerConfig: tolerance must be > 0");

    if (m == 1) {
        Mat u = Mat::Identity(1, 1);
        return {objective(u), flattenUnitary(u), true, 0.0, ""};
    }

    // spread a roughly constant per-sweep budget over the 2x2 blocks:
    // small groups get tight refinement, large ones cheap local steps
    const int numBlocks = m * (m - 1) / 2;
    const bool smallGroup = numBlocks <= 6;
    const double sweepTol = smallGroup ? std::max(cfg.tolerance * 1e-2, 1e-13)
                                       : std::max(cfg.tolerance * 10.0, 1e-12);
    const double blockFtol = smallGroup ? std::max(cfg.tolerance * 1e-3, 1e-14)
                                        : std::max(cfg.tolerance * 1e-1, 1e-13);
    const int blockEvalCap = std::clamp(480 / numBlocks, 12, 160);

    std::vector<double> restartValues(cfg.restarts);
    std::vector<Mat> restartArgs(cfg.restarts);

    for (int r = 0; r < cfg.restarts; ++r) {
        // restart 0 is the identity; the computational family is a common optimum
        Mat u = (r == 0) ? Mat::Identity(m, m) : randomUnitary(m, mixSeed(cfg.seed, r));
        double best = objective(u);
        for (int sweep = 0; sweep < cfg.maxIterations; ++sweep) {
            double prev = best;
            double scale = std::max(0.05, 0.5 * std::pow(0.7, sweep));
            for (int j = 0; j < m; ++j) {
                for (int k = j + 1; k < m; ++k) {
                    auto blockFn = [&](const std::vector<double>& v) {
                        Mat trial = u;
                        applyBlockRotation(trial, j, k, v[0], v[1], v[2]);
                        return objective(trial);
                    };
                    SimplexResult sr = nelderMead(blockFn, 3, scale, blockFtol, blockEvalCap);
                    if (sr.f < best) {
                        applyBlockRotation(u, j, k, sr.x[0], sr.x[1], sr.x[2]);
                        best = sr.f;
                    }
                }
            }
            if (prev - best <= sweepTol) break;
        }
        restartValues[r] = best;
        restartArgs[r] = std::move(u);
    }

    int bestIdx = 0;
    for (int r = 1; r < cfg.restarts; ++r)
        if (restartValues[r] < restartValues[bestIdx]) bestIdx = r;

    double spread = 0.0;
    if (cfg.restarts > 1) {
        double second = std::numeric_limits<double>::infinity();
        for (int r = 0; r < cfg.restarts; ++r)
            if (r != bestIdx) second = std::min(second, restartValues[r]);
        spread = second - restartValues[bestIdx];
    }

    OptResult out;
    out.value = restartValues[bestIdx];
    out.argument = flattenUnitary(restartArgs[bestIdx]);
    out.spreadAcrossRestarts = spread;
    out.converged = spread <= 10.0 * cfg.tolerance;
    return out;
}

namespace {

/// Precomputed permutation of the full index so that side A is the leading
/// block and side B/E the trailing one: newIndex(a, b) = a * dB + b.
std::vector<long> splitIndexMap(const Dims& dims, const Cut& sideA, const Cut& sideB) {
    std::vector<long> strides(dims.size(), 1);
    for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i)
        strides[i] = strides[i + 1] * dims[i + 1];
    long dA = 1, dB = 1;
    for (std::size_t s : sideA) dA *= dims[s];
    for (std::size_t s : sideB) dB *= dims[s];

    std::vector<long> oldIndex(dA * dB);
    std::vector<int> ai(sideA.size(), 0), bi(sideB.size(), 0);
    for (long a = 0; a < dA; ++a) {
        long v = a;
        for (std::size_t q = sideA.size(); q-- > 0;) {
            ai[q] = static_cast<int>(v % dims[sideA[q]]);
            v /= dims[sideA[q]];
        }
        for (long b = 0; b < dB; ++b) {
            v = b;
            for (std::size_t q = sideB.size(); q-- > 0;) {
                bi[q] = static_cast<int>(v % dims[sideB[q]]);
                v /= dims[sideB[q]];
            }
            long full = 0;
            for (std::size_t q = 0; q < sideA.size(); ++q) full += ai[q] * strides[sideA[q]];
            for (std::size_t q = 0; q < sideB.size(); ++q) full += bi[q] * strides[sideB[q]];
            oldIndex[a * dB + b] = full;
        }
    }
    return oldIndex;
}

Mat reorderToSplit(const Mat& rho, const std::vector<long>& oldIndex) {
    const long n = static_cast<long>(oldIndex.size());
    Mat out(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) out(i, j) = rho(oldIndex[i], oldIndex[j]);
    return out;
}

/// Average post-measurement entropy of side A for rank-1 measurement kets
/// given by the columns of `u`, over a state stored in (A x E) split order.
double averageConditionalEntropy(const Mat& split, long dA, long dE, const Mat& u) {
    double avg = 0.0;
    Mat cond(dA, dA);
    for (long j = 0; j < u.cols(); ++j) {
        for (long a = 0; a < dA; ++a)
            for (long b = a; b < dA; ++b) {
                Cplx acc = 0.0;
                for (long e = 0; e < dE; ++e) {
                    Cplx row = 0.0;
                    for (long e2 = 0; e2 < dE; ++e2) row += split(a * dE + e, b * dE + e2) * u(e2, j);
                    acc += std::conj(u(e, j)) * row;
                }
                cond(a, b) = acc;
                cond(b, a) = std::conj(acc);
            }
        double p = 0.0;
        for (long a = 0; a < dA; ++a) p += cond(a, a).real();
        if (p < kOutcomeCutoff) continue;
        if (dA == 2) {
            avg += p * entropy2x2Normalized(cond(0, 0), cond(0, 1), cond(1, 1), p);
        } else {
            Eigen::SelfAdjointEigenSolver<Mat> es(cond / p, Eigen::EigenvaluesOnly);
            avg += p * spectrumEntropyClipped(es.eigenvalues());
        }
    }
    return avg;
}

}  // namespace

OptResult classicalCorrelation(const DensityMatrix& rho, const Cut& measuredSide,
                               const OptimizerConfig& cfg, MeasurementMode mode) {
    auto [measured, sideA] = splitCut(measuredSide, rho.subsystemCount());

    long dE = 1;
    for (std::size_t s : measured) dE *= rho.dims()[s];
    if (dE > kMeasuredDimCap)
        throw DimTooLarge("classicalCorrelation: measured side dimension exceeds 4");
    long dA = rho.dim() / dE;

    double sA = vonNeumannEntropy(partialTrace(rho, sideA));

    Mat split = reorderToSplit(rho.mat(), splitIndexMap(rho.dims(), sideA, measured));
    long dM = dE;  // dimension of the measured space seen by the optimizer
    if (mode == MeasurementMode::Povm) {
        // Naimark dilation: append an ancilla in |0> to the measured side;
        // rank-1 projective measurements there realize d_E^2-outcome POVMs.
        dM = dE * dE;
        Mat ext = Mat::Zero(dA * dM, dA * dM);
        for (long a = 0; a < dA; ++a)
            for (long b = 0; b < dA; ++b)
                for (long e = 0; e < dE; ++e)
                    for (long e2 = 0; e2 < dE; ++e2)
                        ext(a * dM + e * dE, b * dM + e2 * dE) = split(a * dE + e, b * dE + e2);
        split = std::move(ext);
    }

    auto objective = [&](const Mat& u) {
        return averageConditionalEntropy(split, dA, dM, u);
    };
    OptResult res = minimizeOverUnitary(static_cast<int>(dM), objective, cfg);
    res.value = sA - res.value;
    res.mode = measurementModeName(mode);
    return res;
}

OptResult entanglementOfFormation(const DensityMatrix& rho, const Cut& cut,
                                  const OptimizerConfig& cfg) {
    if (rho.dim() > kEfDimCap)
        throw DimTooLarge("entanglementOfFormation: total dimension exceeds 16");
    auto [sideA, sideB] = splitCut(cut, rho.subsystemCount());

    EigSystem eig = hermEig(rho.mat());
    long rank = 0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        if (eig.values(i) > kOutcomeCutoff) ++rank;
    rank = std::max(rank, 1L);

    long dA = 1, dB = 1;
    for (std::size_t s : sideA) dA *= rho.dims()[s];
    for (std::size_t s : sideB) dB *= rho.dims()[s];

    // scaled eigenvectors, reordered to the (A x B) split
    std::vector<long> oldIndex = splitIndexMap(rho.dims(), sideA, sideB);
    Mat w(rho.dim(), rank);
    for (long i = 0; i < rank; ++i) {
        double root = std::sqrt(std::max(eig.values(i), 0.0));
        for (long x = 0; x < rho.dim(); ++x) w(x, i) = root * eig.vectors(oldIndex[x], i);
    }

    long members = cfg.ensembleSize > 0 ? cfg.ensembleSize : rank * rank;
    if (members < rank) members = rank;

    Mat psi(dA, dB);
    Mat red(dA, dA);
    auto objective = [&](const Mat& u) {
        double avg = 0.0;
        for (long j = 0; j < members; ++j) {
            Vec member = w * u.block(0, j, rank, 1);
            double p = member.squaredNorm();
            if (p < kOutcomeCutoff) continue;
            for (long a = 0; a < dA; ++a)
                for (long b = 0; b < dB; ++b) psi(a, b) = member(a * dB + b);
            if (dA == 2) {
                // reduced state entries (psi psi^dag)_{ab}; only |m01| matters
                Cplx m00 = psi.row(0).dot(psi.row(0));
                Cplx m01 = psi.row(1).dot(psi.row(0));
                Cplx m11 = psi.row(1).dot(psi.row(1));
                avg += p * entropy2x2Normalized(m00, m01, m11, p);
            } else {
                red = psi * psi.adjoint();
                Eigen::SelfAdjointEigenSolver<Mat> es(red / p, Eigen::EigenvaluesOnly);
                avg += p * spectrumEntropyClipped(es.eigenvalues());
            }
        }
        return avg;
    };

    OptResult res = minimizeOverUnitary(static_cast<int>(members), objective, cfg);
    res.mode = "ensemble-unitary";
    return res;
}

double koashiWinterResidual(const PureState& psiABE, const OptimizerConfig& cfg,
                            MeasurementMode mode) {
    if (psiABE.subsystemCount() != 3)
        throw BadCut("koashiWinterResidual: state must have exactly three factors");
    for (int d : psiABE.dims())
        if (d > 4) throw DimTooLarge("koashiWinterResidual: factor dimension exceeds 4");

    double sA = vonNeumannEntropy(partialTrace(psiABE, Cut{0}));

    DensityMatrix rhoAB = partialTrace(psiABE, Cut{0, 1});
    double ef = (rhoAB.dims() == Dims{2, 2})
                    ? entanglementOfFormationTwoQubit(rhoAB)
                    : entanglementOfFormation(rhoAB, Cut{0}, cfg).value;

    DensityMatrix rhoAE = partialTrace(psiABE, Cut{0, 2});
    double j = classicalCorrelation(rhoAE, Cut{1}, cfg, mode).value;

    return std::abs(sA - ef - j);
}

}  // namespace ccr
