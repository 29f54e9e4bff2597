#include "ccr/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace ccr {

namespace {

constexpr double kHermTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kPsdTol = 1e-10;
constexpr double kNormTol = 1e-10;
constexpr double kRankCutoff = 1e-12;

bool allFinite(const Mat& m) { return m.allFinite(); }

void checkDims(const Dims& dims, long expectedTotal, const char* what) {
    if (dims.empty()) throw InvalidState(std::string(what) + ": empty dims list");
    for (int d : dims) {
        if (d < 1) throw InvalidState(std::string(what) + ": subsystem dimension < 1");
    }
    if (dimProduct(dims) != expectedTotal) {
        std::ostringstream os;
        os << what << ": dims product " << dimProduct(dims) << " != size " << expectedTotal;
        throw InvalidState(os.str());
    }
}

// Mixed-radix index decomposition helpers over a subset of factors.
struct IndexMap {
    std::vector<long> strides;  // stride of each original factor
    Dims dims;

    explicit IndexMap(const Dims& d) : dims(d) {
        strides.assign(d.size(), 1);
        for (int i = static_cast<int>(d.size()) - 2; i >= 0; --i)
            strides[i] = strides[i + 1] * d[i + 1];
    }
};

}  // namespace

long dimProduct(const Dims& dims) {
    return std::accumulate(dims.begin(), dims.end(), 1L,
                           [](long a, int b) { return a * b; });
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

EigSystem hermEig(const Mat& m) {
    if (m.rows() != m.cols()) throw NotHermitian("hermEig: matrix not square");
    double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermTol) {
        std::ostringstream os;
        os << "hermEig: matrix not Hermitian (max |m - m^dag| = " << asym << ")";
        throw NotHermitian(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Mat> solver(m);
    if (solver.info() != Eigen::Success) throw Error("hermEig: eigensolver failed");
    // Eigen sorts ascending; flip to descending.
    EigSystem out;
    const auto n = m.rows();
    out.values = solver.eigenvalues().reverse();
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    return out;
}

std::uint64_t mixSeed(std::uint64_t base, std::uint64_t counter) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

Rng::Rng(std::uint64_t seed) : state_(seed) {
    // avoid the all-zero fixed point and decorrelate small seeds
    state_ = mixSeed(state_, 0x5ca1ab1e);
}

std::uint64_t Rng::nextU64() {
    // splitmix64 step
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(nextU64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
    if (spare_) {
        double v = *spare_;
        spare_.reset();
        return v;
    }
    // Box-Muller; u1 in (0, 1] to keep the log finite
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    return r * std::cos(2.0 * M_PI * u2);
}

Cplx Rng::complexGaussian() { return {gaussian(), gaussian()}; }

}  // namespace detail

DensityMatrix::DensityMatrix(Dims dims, Mat mat) : dims_(std::move(dims)), mat_(std::move(mat)) {
    if (mat_.rows() != mat_.cols()) throw InvalidState("DensityMatrix: matrix not square");
    checkDims(dims_, mat_.rows(), "DensityMatrix");
    if (!allFinite(mat_)) throw InvalidState("DensityMatrix: non-finite entries");
    double asym = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermTol) throw InvalidState("DensityMatrix: not Hermitian");
    double traceErr = std::abs(mat_.trace() - Cplx(1.0, 0.0));
    if (traceErr > kTraceTol) throw InvalidState("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<Mat> solver(mat_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -kPsdTol)
        throw InvalidState("DensityMatrix: negative eigenvalue beyond tolerance");
}

double DensityMatrix::purity() const { return (mat_ * mat_).trace().real(); }

DensityMatrix DensityMatrix::fromPure(const PureState& psi) {
    return DensityMatrix(psi.dims(), psi.amplitudes() * psi.amplitudes().adjoint());
}

PureState::PureState(Dims dims, Vec amplitudes)
    : dims_(std::move(dims)), amps_(std::move(amplitudes)) {
    checkDims(dims_, amps_.size(), "PureState");
    if (!amps_.allFinite()) throw InvalidState("PureState: non-finite amplitudes");
    if (std::abs(amps_.norm() - 1.0) > kNormTol)
        throw InvalidState("PureState: amplitudes not unit-norm");
}

DensityMatrix PureState::toDensity() const { return DensityMatrix::fromPure(*this); }

MeasurementBasis::MeasurementBasis(Mat vectors, std::vector<double> labels)
    : vectors_(std::move(vectors)), labels_(std::move(labels)) {
    const auto d = vectors_.rows();
    if (d == 0 || vectors_.cols() != d)
        throw InvalidState("MeasurementBasis: need d column vectors of length d");
    if (!labels_.empty() && static_cast<long>(labels_.size()) != d)
        throw InvalidState("MeasurementBasis: label count mismatch");
    // Orthonormality covers idempotence, unit trace, completeness and
    // mutual orthogonality of the induced projectors.
    double err = (vectors_.adjoint() * vectors_ - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
    if (err > kHermTol) throw InvalidState("MeasurementBasis: columns not orthonormal");
}

MeasurementBasis MeasurementBasis::computational(int dim) {
    return MeasurementBasis(Mat::Identity(dim, dim));
}

MeasurementBasis MeasurementBasis::fromUnitary(const Mat& u, std::vector<double> labels) {
    return MeasurementBasis(u, std::move(labels));
}

MeasurementBasis MeasurementBasis::random(int dim, std::uint64_t seed) {
    return MeasurementBasis(randomUnitary(dim, seed));
}

Mat MeasurementBasis::projector(int k) const {
    if (k < 0 || k >= dim()) throw BadIndex("MeasurementBasis: projector index out of range");
    return vectors_.col(k) * vectors_.col(k).adjoint();
}

Ensemble::Ensemble(std::vector<double> weights, std::vector<DensityMatrix> members)
    : weights_(std::move(weights)), members_(std::move(members)) {
    if (weights_.size() != members_.size() || weights_.empty())
        throw WeightMismatch("Ensemble: weights and members differ in length");
    double sum = 0.0;
    for (double w : weights_) {
        if (w < -1e-12) throw InvalidState("Ensemble: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-10) throw InvalidState("Ensemble: weights not normalized");
    for (const auto& m : members_)
        if (m.dims() != members_.front().dims())
            throw DimMismatch("Ensemble: members have differing dims");
}

DensityMatrix Ensemble::averageState() const {
    Mat acc = Mat::Zero(members_.front().dim(), members_.front().dim());
    for (std::size_t i = 0; i < weights_.size(); ++i) acc += weights_[i] * members_[i].mat();
    return DensityMatrix(members_.front().dims(), acc);
}

Cut cutComplement(const Cut& side, std::size_t subsystemCount) {
    std::set<std::size_t> in(side.begin(), side.end());
    Cut out;
    for (std::size_t i = 0; i < subsystemCount; ++i)
        if (!in.count(i)) out.push_back(i);
    return out;
}

std::pair<Cut, Cut> splitCut(const Cut& side, std::size_t subsystemCount) {
    if (side.empty()) throw BadCut("cut: empty subsystem set");
    std::set<std::size_t> in(side.begin(), side.end());
    if (in.size() != side.size()) throw BadCut("cut: duplicate subsystem index");
    for (std::size_t s : in)
        if (s >= subsystemCount) throw BadCut("cut: subsystem index out of range");
    Cut sorted(in.begin(), in.end());
    Cut rest = cutComplement(sorted, subsystemCount);
    if (rest.empty()) throw BadCut("cut: complement side is empty");
    return {sorted, rest};
}

namespace {

// Shared partial-trace kernel over raw amplitudes or matrices.
Dims keptDims(const Dims& dims, const Cut& keep) {
    Dims out;
    for (std::size_t k : keep) out.push_back(dims[k]);
    return out;
}

Cut validateKeep(const Cut& keep, std::size_t n) {
    if (keep.empty()) throw BadIndex("partialTrace: empty keep set");
    std::set<std::size_t> in(keep.begin(), keep.end());
    if (in.size() != keep.size()) throw BadIndex("partialTrace: duplicate subsystem index");
    for (std::size_t s : in)
        if (s >= n) throw BadIndex("partialTrace: subsystem index out of range");
    return Cut(in.begin(), in.end());
}

}  // namespace

DensityMatrix partialTrace(const DensityMatrix& rho, const Cut& keep) {
    const Dims& dims = rho.dims();
    Cut kept = validateKeep(keep, dims.size());
    Cut traced = cutComplement(kept, dims.size());

    IndexMap im(dims);
    Dims outDims = keptDims(dims, kept);
    long dK = dimProduct(outDims);
    long dT = 1;
    for (std::size_t t : traced) dT *= dims[t];

    Mat out = Mat::Zero(dK, dK);
    std::vector<int> ki(kept.size(), 0), kj(kept.size(), 0), ti(traced.size(), 0);
    for (long i = 0; i < dK; ++i) {
        for (long j = 0; j < dK; ++j) {
            // decode row/col multi-indices of the kept factors
            long r = i, c = j;
            for (std::size_t a = kept.size(); a-- > 0;) {
                ki[a] = static_cast<int>(r % dims[kept[a]]);
                r /= dims[kept[a]];
                kj[a] = static_cast<int>(c % dims[kept[a]]);
                c /= dims[kept[a]];
            }
            Cplx acc = 0.0;
            for (long m = 0; m < dT; ++m) {
                long mm = m;
                for (std::size_t a = traced.size(); a-- > 0;) {
                    ti[a] = static_cast<int>(mm % dims[traced[a]]);
                    mm /= dims[traced[a]];
                }
                long fullR = 0, fullC = 0;
                for (std::size_t a = 0; a < kept.size(); ++a) {
                    fullR += ki[a] * im.strides[kept[a]];
                    fullC += kj[a] * im.strides[kept[a]];
                }
                for (std::size_t a = 0; a < traced.size(); ++a) {
                    fullR += ti[a] * im.strides[traced[a]];
                    fullC += ti[a] * im.strides[traced[a]];
                }
                acc += rho.mat()(fullR, fullC);
            }
            out(i, j) = acc;
        }
    }
    return DensityMatrix(outDims, std::move(out));
}

DensityMatrix partialTrace(const PureState& psi, const Cut& keep) {
    const Dims& dims = psi.dims();
    Cut kept = validateKeep(keep, dims.size());
    Cut traced = cutComplement(kept, dims.size());

    IndexMap im(dims);
    Dims outDims = keptDims(dims, kept);
    long dK = dimProduct(outDims);
    long dT = 1;
    for (std::size_t t : traced) dT *= dims[t];

    // Gather amplitudes into a (kept x traced) matrix, then rho_K = A A^dag.
    Mat a = Mat::Zero(dK, dT);
    std::vector<int> ki(kept.size(), 0), ti(traced.size(), 0);
    for (long i = 0; i < dK; ++i) {
        long r = i;
        for (std::size_t q = kept.size(); q-- > 0;) {
            ki[q] = static_cast<int>(r % dims[kept[q]]);
            r /= dims[kept[q]];
        }
        for (long m = 0; m < dT; ++m) {
            long mm = m;
            for (std::size_t q = traced.size(); q-- > 0;) {
                ti[q] = static_cast<int>(mm % dims[traced[q]]);
                mm /= dims[traced[q]];
            }
            long full = 0;
            for (std::size_t q = 0; q < kept.size(); ++q) full += ki[q] * im.strides[kept[q]];
            for (std::size_t q = 0; q < traced.size(); ++q) full += ti[q] * im.strides[traced[q]];
            a(i, m) = psi.amplitudes()(full);
        }
    }
    return DensityMatrix(outDims, a * a.adjoint());
}

PureState purify(const DensityMatrix& rho) {
    EigSystem eig = hermEig(rho.mat());
    const long d = rho.dim();
    long rank = 0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        if (eig.values(i) > kRankCutoff) ++rank;
    if (rank == 0) throw InvalidState("purify: state has no positive eigenvalues");

    Vec amps = Vec::Zero(d * rank);
    for (long i = 0; i < rank; ++i) {
        double lambda = std::max(eig.values(i), 0.0);
        double root = std::sqrt(lambda);
        for (long a = 0; a < d; ++a) amps(a * rank + i) = root * eig.vectors(a, i);
    }
    amps /= amps.norm();
    return PureState(Dims{static_cast<int>(d), static_cast<int>(rank)}, std::move(amps));
}

PureState randomPure(const Dims& dims, std::uint64_t seed) {
    for (int d : dims)
        if (d < 2) throw InvalidState("randomPure: each dimension must be >= 2");
    long n = dimProduct(dims);
    detail::Rng rng(seed);
    Vec v(n);
    for (long i = 0; i < n; ++i) v(i) = rng.complexGaussian();
    v /= v.norm();
    return PureState(dims, std::move(v));
}

DensityMatrix randomMixed(int dim, int rank, std::uint64_t seed) {
    if (dim < 2) throw InvalidState("randomMixed: dim must be >= 2");
    if (rank < 1 || rank > dim) throw InvalidState("randomMixed: need 1 <= rank <= dim");
    if (rank == 1) {
        // a Haar pure state; no ancilla needed
        PureState psi = randomPure(Dims{dim}, seed);
        return psi.toDensity();
    }
    PureState psi = randomPure(Dims{dim, rank}, seed);
    return partialTrace(psi, Cut{0});
}

Mat randomUnitary(int dim, std::uint64_t seed) {
    detail::Rng rng(seed);
    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = rng.complexGaussian();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    // fix phases so the distribution is Haar (Mezzadri's recipe)
    for (int j = 0; j < dim; ++j) {
        Cplx rjj = r(j, j);
        Cplx phase = (std::abs(rjj) > 0) ? rjj / std::abs(rjj) : Cplx(1.0, 0.0);
        q.col(j) *= phase;
    }
    return q;
}

DensityMatrix quantumClassicalState(const std::vector<double>& weights,
                                    const std::vector<DensityMatrix>& conditionals) {
    if (weights.size() != conditionals.size() || weights.empty())
        throw WeightMismatch("quantumClassicalState: weights/conditionals length mismatch");
    const long dA = conditionals.front().dim();
    for (const auto& c : conditionals)
        if (c.dim() != dA) throw DimMismatch("quantumClassicalState: conditionals differ in dim");
    double sum = 0.0;
    for (double w : weights) {
        if (w < -1e-12) throw InvalidState("quantumClassicalState: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw InvalidState("quantumClassicalState: weights not normalized");

    const long dB = static_cast<long>(weights.size());
    Mat out = Mat::Zero(dA * dB, dA * dB);
    for (long j = 0; j < dB; ++j) {
        for (long a = 0; a < dA; ++a)
            for (long b = 0; b < dA; ++b)
                out(a * dB + j, b * dB + j) = weights[j] * conditionals[j].mat()(a, b);
    }
    return DensityMatrix(Dims{static_cast<int>(dA), static_cast<int>(dB)}, std::move(out));
}

PureState purifyQuantumClassical(const std::vector<double>& weights,
                                 const std::vector<DensityMatrix>& conditionals) {
    if (weights.size() != conditionals.size() || weights.empty())
        throw WeightMismatch("purifyQuantumClassical: weights/conditionals length mismatch");
    const long dA = conditionals.front().dim();
    const long dB = static_cast<long>(weights.size());
    const long dE = dA * dB;

    // |Psi> = sum_{j,k} sqrt(p_j a_jk) |a_jk>_A |j>_B |c_jk>_E with
    // rho_{A|j} = sum_k a_jk |a_jk><a_jk| and E basis indexed by (j, k).
    Vec amps = Vec::Zero(dA * dB * dE);
    for (long j = 0; j < dB; ++j) {
        if (conditionals[j].dim() != dA)
            throw DimMismatch("purifyQuantumClassical: conditionals differ in dim");
        EigSystem eig = hermEig(conditionals[j].mat());
        for (long k = 0; k < dA; ++k) {
            double ajk = std::max(eig.values(k), 0.0);
            double coeff = std::sqrt(std::max(weights[j], 0.0) * ajk);
            if (coeff == 0.0) continue;
            long e = j * dA + k;
            for (long a = 0; a < dA; ++a)
                amps((a * dB + j) * dE + e) += coeff * eig.vectors(a, k);
        }
    }
    amps /= amps.norm();
    return PureState(Dims{static_cast<int>(dA), static_cast<int>(dB), static_cast<int>(dE)},
                     std::move(amps));
}

Mat embedOperator(const Dims& dims, const Cut& targets, const Mat& op) {
    Cut sorted = validateKeep(targets, dims.size());
    Dims tDims = keptDims(dims, sorted);
    long dT = dimProduct(tDims);
    if (op.rows() != dT || op.cols() != dT)
        throw DimMismatch("embedOperator: operator does not match target dims");
    Cut rest = cutComplement(sorted, dims.size());

    IndexMap im(dims);
    long dFull = dimProduct(dims);
    long dR = 1;
    for (std::size_t r : rest) dR *= dims[r];

    Mat out = Mat::Zero(dFull, dFull);
    std::vector<int> tiR(sorted.size(), 0), tiC(sorted.size(), 0), ri(rest.size(), 0);
    for (long i = 0; i < dT; ++i) {
        long v = i;
        for (std::size_t q = sorted.size(); q-- > 0;) {
            tiR[q] = static_cast<int>(v % dims[sorted[q]]);
            v /= dims[sorted[q]];
        }
        for (long j = 0; j < dT; ++j) {
            if (op(i, j) == Cplx(0.0, 0.0)) continue;
            v = j;
            for (std::size_t q = sorted.size(); q-- > 0;) {
                tiC[q] = static_cast<int>(v % dims[sorted[q]]);
                v /= dims[sorted[q]];
            }
            for (long m = 0; m < dR; ++m) {
                long mm = m;
                for (std::size_t q = rest.size(); q-- > 0;) {
                    ri[q] = static_cast<int>(mm % dims[rest[q]]);
                    mm /= dims[rest[q]];
                }
                long fullR = 0, fullC = 0;
                for (std::size_t q = 0; q < sorted.size(); ++q) {
                    fullR += tiR[q] * im.strides[sorted[q]];
                    fullC += tiC[q] * im.strides[sorted[q]];
                }
                for (std::size_t q = 0; q < rest.size(); ++q) {
                    fullR += ri[q] * im.strides[rest[q]];
                    fullC += ri[q] * im.strides[rest[q]];
                }
                out(fullR, fullC) = op(i, j);
            }
        }
    }
    return out;
}

}  // namespace ccr
