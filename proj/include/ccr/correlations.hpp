#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ccr/qstate.hpp"

namespace ccr {

/// Knobs for the multistart derivative-free optimizers.
struct OptimizerConfig {
    int restarts = 8;           // independent starts; restart 0 is the identity
    int maxIterations = 40;     // block sweeps per restart
    double tolerance = 1e-7;    // sweep-improvement stop + convergence declaration
    std::uint64_t seed = 1;
    int ensembleSize = 0;       // ensemble members for E_f; 0 means rank^2
};

/// Measurement family optimized over in classicalCorrelation.
enum class MeasurementMode {
    Projective,  // d_E rank-1 orthogonal projectors (unitary-parametrized)
    Povm,        // up to d_E^2 rank-1 elements via an ancilla isometry
};

std::string measurementModeName(MeasurementMode mode);

/// Result of a variational optimization; `value` is a bound, not a
/// certificate, so the restart spread is always reported.
struct OptResult {
    double value = 0.0;
    std::vector<double> argument;      // flattened optimal unitary (re, im pairs)
    bool converged = true;             // |best - secondBest| <= 10 * tolerance
    double spreadAcrossRestarts = 0.0; // |best - secondBest|; 0 for one restart
    std::string mode;                  // which search family produced the value
};

/// Entanglement entropy of a bipartite pure state across the cut.
double entanglementEntropy(const PureState& psi, const Cut& cut);

/// Spin-flipped two-qubit state (sigma_y (x) sigma_y) rho* (sigma_y (x) sigma_y).
Mat spinFlip(const DensityMatrix& rho);

/// Jaeger two-qubit entanglement measure Tr(rho rho~). Evaluated through
/// the purity combination 1 - Tr rho_A^2 - Tr rho_B^2 + Tr rho_AB^2 and
/// cross-checked against the direct spin-flip trace.
double jaegerMeasure(const DensityMatrix& rho);

/// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);

/// Two-qubit entanglement of formation closed form
/// h2((1 + sqrt(1 - C^2)) / 2) from the concurrence C.
double entanglementOfFormationTwoQubit(const DensityMatrix& rho);

/// Binary entropy h2(x) in bits.
double binaryEntropy(double x);

/// Variational entanglement of formation: minimum average entanglement
/// entropy over ensemble decompositions, parametrized by unitaries mixing
/// a purification's ancilla. Upper bound from the best ensemble found.
OptResult entanglementOfFormation(const DensityMatrix& rho, const Cut& cut,
                                  const OptimizerConfig& cfg);

/// Classical correlation J_{A|E} = S(rho_A) - min over measurements on E
/// of the average post-measurement entropy of A. `measuredSide` lists the
/// measured subsystems; the complement plays the role of A.
OptResult classicalCorrelation(const DensityMatrix& rho, const Cut& measuredSide,
                               const OptimizerConfig& cfg,
                               MeasurementMode mode = MeasurementMode::Projective);

/// |S(rho_A) - E_f(rho_AB) - J_{A|E}(rho_AE)| for a tripartite pure state
/// on factors (A, B, E). Uses the concurrence closed form for E_f whenever
/// A and B are qubits.
double koashiWinterResidual(const PureState& psiABE, const OptimizerConfig& cfg,
                            MeasurementMode mode = MeasurementMode::Projective);

/// Multistart minimization of a smooth objective over the unitary group
/// U(m): cyclic 2x2-block rotations, each refined by a small simplex
/// search. Deterministic per (cfg.seed, restart index); restart 0 starts
/// from the identity. Exposed for reuse by the dynamics experiments.
OptResult minimizeOverUnitary(int m, const std::function<double(const Mat&)>& objective,
                              const OptimizerConfig& cfg);

}  // namespace ccr
