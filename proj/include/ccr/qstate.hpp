#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "ccr/errors.hpp"

namespace ccr {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Cplx = std::complex<double>;

/// Ordered list of tensor-factor dimensions; index 0 is the leftmost factor.
using Dims = std::vector<int>;

/// Subsystem index set (a bipartition is given by one side; the other is the
/// complement).
using Cut = std::vector<std::size_t>;

long dimProduct(const Dims& dims);

/// Kronecker (tensor) product.
Mat kron(const Mat& a, const Mat& b);

/// Eigensystem of a Hermitian matrix, eigenvalues sorted descending.
struct EigSystem {
    Eigen::VectorXd values;
    Mat vectors;  // orthonormal columns, vectors.col(i) <-> values(i)
};

/// Throws NotHermitian if max |m - m^dag| exceeds 1e-10.
EigSystem hermEig(const Mat& m);

/// Deterministic stream splitting: derive an independent child seed from a
/// base seed and a counter (splitmix64 finalizer).
std::uint64_t mixSeed(std::uint64_t base, std::uint64_t counter);

class PureState;

/// Square complex matrix with unit trace, Hermitian and positive
/// semidefinite within 1e-10, carrying its tensor-factor dimensions.
class DensityMatrix {
  public:
    DensityMatrix(Dims dims, Mat mat);

    const Dims& dims() const { return dims_; }
    const Mat& mat() const { return mat_; }
    long dim() const { return mat_.rows(); }
    std::size_t subsystemCount() const { return dims_.size(); }

    double purity() const;  // Tr rho^2
    static DensityMatrix fromPure(const PureState& psi);

  private:
    Dims dims_;
    Mat mat_;
};

/// Unit-norm complex amplitude vector with tensor-factor dimensions.
class PureState {
  public:
    PureState(Dims dims, Vec amplitudes);

    const Dims& dims() const { return dims_; }
    const Vec& amplitudes() const { return amps_; }
    long dim() const { return amps_.size(); }
    std::size_t subsystemCount() const { return dims_.size(); }

    DensityMatrix toDensity() const;

  private:
    Dims dims_;
    Vec amps_;
};

/// Orthonormal rank-1 projector family (an observable's eigenbasis),
/// optionally labelled with eigenvalues.
class MeasurementBasis {
  public:
    /// Columns of `vectors` are the basis kets.
    MeasurementBasis(Mat vectors, std::vector<double> labels = {});

    static MeasurementBasis computational(int dim);
    static MeasurementBasis fromUnitary(const Mat& u, std::vector<double> labels = {});
    static MeasurementBasis random(int dim, std::uint64_t seed);

    int dim() const { return static_cast<int>(vectors_.cols()); }
    const Mat& vectors() const { return vectors_; }
    const std::vector<double>& labels() const { return labels_; }
    Mat projector(int k) const;

  private:
    Mat vectors_;
    std::vector<double> labels_;
};

/// Probability-weighted list of states on common dims.
class Ensemble {
  public:
    Ensemble(std::vector<double> weights, std::vector<DensityMatrix> members);

    const std::vector<double>& weights() const { return weights_; }
    const std::vector<DensityMatrix>& members() const { return members_; }
    std::size_t size() const { return weights_.size(); }

    DensityMatrix averageState() const;

  private:
    std::vector<double> weights_;
    std::vector<DensityMatrix> members_;
};

/// Partial trace keeping the listed subsystems (order-insensitive; the
/// result keeps the original factor order).
DensityMatrix partialTrace(const DensityMatrix& rho, const Cut& keep);
DensityMatrix partialTrace(const PureState& psi, const Cut& keep);

/// Canonical purification sum_i sqrt(lambda_i) |v_i> (x) |i>; the ancilla
/// dimension is the number of eigenvalues above 1e-12.
PureState purify(const DensityMatrix& rho);

/// Haar-distributed global pure state; deterministic per seed.
PureState randomPure(const Dims& dims, std::uint64_t seed);

/// Induced-measure mixed state: reduction of a Haar pure state on
/// dim x rank. Requires 1 <= rank <= dim.
DensityMatrix randomMixed(int dim, int rank, std::uint64_t seed);

/// Haar-distributed unitary, deterministic per seed.
Mat randomUnitary(int dim, std::uint64_t seed);

/// Block-diagonal quantum-classical state sum_j p_j rho_j (x) |j><j| on
/// dims (d_A, d_B) with d_B = weights.size().
DensityMatrix quantumClassicalState(const std::vector<double>& weights,
                                    const std::vector<DensityMatrix>& conditionals);

/// Tripartite purification |Psi>_ABE = sum_{j,k} sqrt(p_j a_jk)
/// |a_jk>_A |j>_B |c_jk>_E of the quantum-classical state, with the E
/// basis indexed by the pairs (j, k); dim E = d_A * d_B.
PureState purifyQuantumClassical(const std::vector<double>& weights,
                                 const std::vector<DensityMatrix>& conditionals);

/// Embed an operator acting on the listed subsystems (ascending order)
/// into the full space, identity elsewhere.
Mat embedOperator(const Dims& dims, const Cut& targets, const Mat& op);

/// Complement of a subsystem index set.
Cut cutComplement(const Cut& side, std::size_t subsystemCount);

/// Validates that `side` is a nonempty strict subset of 0..n-1 and returns
/// the sorted side plus its complement. Throws BadCut otherwise.
std::pair<Cut, Cut> splitCut(const Cut& side, std::size_t subsystemCount);

namespace detail {

/// Deterministic uniform/Gaussian source (splitmix64-seeded xoshiro-free
/// minimal generator; stable across platforms and library versions).
class Rng {
  public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t nextU64();
    double uniform();   // [0, 1)
    double gaussian();  // standard normal, Box-Muller
    Cplx complexGaussian();

  private:
    std::uint64_t state_;
    std::optional<double> spare_;
};

}  // namespace detail

}  // namespace ccr
