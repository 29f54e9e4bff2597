#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccr/correlations.hpp"
#include "ccr/qstate.hpp"

namespace ccr {

enum class ChannelKind { Dephasing, MeasurementInteraction };

/// Open-system channel parameters; the basis (computational by default)
/// is the one the channel dephases toward.
struct ChannelSpec {
    ChannelKind kind = ChannelKind::Dephasing;
    double rate = 1.0;  // gamma >= 0 per unit time
    std::optional<MeasurementBasis> basis;
};

/// Time-indexed table of quantifier evaluations. Every record carries the
/// same key set by construction.
class Trajectory {
  public:
    Trajectory(std::vector<std::string> keys, std::vector<double> times);

    void appendRecord(const std::vector<double>& values);  // one value per key

    const std::vector<double>& times() const { return times_; }
    const std::vector<std::string>& keys() const { return keys_; }
    std::size_t size() const { return records_.size(); }

    double at(std::size_t i, const std::string& key) const;  // MissingKey
    std::vector<double> series(const std::string& key) const;
    bool hasKey(const std::string& key) const;

  private:
    std::vector<std::string> keys_;
    std::vector<double> times_;
    std::vector<std::vector<double>> records_;
};

/// Uniform grid of `steps` points on [t0, t1]; steps >= 3 (GridTooCoarse).
std::vector<double> uniformGrid(double t0, double t1, int steps);

/// Unitary dilation of the dephasing channel at time t: a pure state on
/// A (x) E whose reduction to A has the off-diagonals of rhoA scaled by
/// exp(-gamma t). rhoA must be pure; the environment starts disentangled.
PureState dilateDephasing(const DensityMatrix& rhoA, double gamma, double t);
PureState dilateDephasing(const PureState& psiA, double gamma, double t);
PureState dilateDephasing(const DensityMatrix& rhoA, const ChannelSpec& spec, double t);

/// Dephasing-trajectory rate comparison for -d/dt C_re = d/dt E_f.
struct RateCheckResult {
    Trajectory trajectory;        // per grid point: C_re, E_f_AE, P_vn, S_vn
    std::vector<double> interiorTimes;
    std::vector<double> coherenceRateFd;     // central differences of C_re
    std::vector<double> entanglementRateFd;  // central differences of E_f
    double maxRateMismatch = 0.0;  // max |dC/dt + dEf/dt|, both differenced
    double maxFdError = 0.0;       // max |dC/dt (fd) - dC/dt (analytic)|, O(h^2)
    double step = 0.0;
};

/// Evolves psiA through the dilated dephasing channel over a uniform grid
/// (>= 3 points) and compares coherence-loss and entanglement-creation
/// rates. The analytic rate used for maxFdError comes from first-order
/// perturbation of the spectrum (d lambda_i = <v_i| drho/dt |v_i>).
RateCheckResult rateCheck(const PureState& psiA, double gamma,
                          const std::vector<double>& tGrid);

/// Three-party measurement record model on A (x) apparatus (x)
/// environment: the apparatus acquires the computational-basis record of A
/// through a controlled rotation that completes asymptotically at rate
/// gammaEnv while the environment monitors the apparatus at the same rate.
/// Tracks a global pure state (a purification register is appended when
/// systemState is mixed) and records J_A|App, I_A|App, C_re, P_vn, S_vn of
/// rho_A, E_f(rho_AE) (concurrence closed form), and the pure-state CCR
/// residual of the A | rest split.
Trajectory measurementModel(const DensityMatrix& systemState, double gammaEnv,
                            const std::vector<double>& tGrid,
                            const OptimizerConfig& cfg = {});

/// Earliest time from which J_A|App stays within epsilon over `window`
/// consecutive samples; nullopt when no such window exists.
std::optional<double> pointerBasisDetect(const Trajectory& traj, int window = 10,
                                         double epsilon = 1e-3);

/// Trajectory keys used by measurementModel and the CSV contract.
inline constexpr const char* kKeyCoherence = "C_re";
inline constexpr const char* kKeyPredictability = "P_vn";
inline constexpr const char* kKeyEntropy = "S_vn";
inline constexpr const char* kKeyEfAE = "E_f_AE";
inline constexpr const char* kKeyJ = "J_AA";
inline constexpr const char* kKeyCondInfo = "I_AA";
inline constexpr const char* kKeyCcrResidual = "ccr_residual";

}  // namespace ccr
