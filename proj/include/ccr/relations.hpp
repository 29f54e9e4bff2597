#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ccr/correlations.hpp"
#include "ccr/qstate.hpp"

namespace ccr {

/// One evaluated complementarity relation: every term, the two sides of
/// the equality, and the residual. `checks` carries the residuals of any
/// auxiliary identities the relation also verifies.
struct CcrReport {
    std::string relationId;
    std::vector<std::pair<std::string, double>> terms;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // |lhs - rhs|
    std::string inputDigest;
    std::vector<std::pair<std::string, double>> checks;
    bool converged = true;             // false when a variational term did not converge
    double optimizerSpread = 0.0;
    std::string mode;                  // measurement family for variational terms

    /// Worst residual over the main equality and all auxiliary checks.
    double maxResidual() const;
    double term(const std::string& name) const;  // MissingKey if absent
    double check(const std::string& name) const;
};

/// Aggregate over a batch of random trials of one relation.
struct BatchSummary {
    std::string relationId;
    int trials = 0;
    double maxResidual = 0.0;
    double meanResidual = 0.0;
    int failures = 0;  // trials with maxResidual > tolerance
    double tolerance = 0.0;
};

/// Per-trial record kept alongside a BatchSummary.
struct TrialRecord {
    int trial = 0;
    std::uint64_t seed = 0;
    double residual = 0.0;
    double spread = 0.0;
    bool converged = true;
    std::string mode;
};

/// Pure-state triality: C_re + P_vn + S_vn on rho_A = Tr_B equals log2 d_A.
CcrReport ccrPure(const PureState& psiAB, const MeasurementBasis& basisA);
CcrReport ccrPure(const PureState& psiAB);

/// Reality identity: reality + coherence = log2 d, with the
/// reality = P_vn + S_vn split and C_re = irreality checked alongside.
CcrReport ccrReality(const DensityMatrix& rho, const MeasurementBasis& basis);
CcrReport ccrReality(const DensityMatrix& rho);

/// Koashi-Winter four-term relation on a tripartite pure state:
/// E_f(rho_AB) + J_{A|E}(rho_AE) + P_vn(rho_A) + C_re(rho_A) = log2 d_A.
/// swapRoles exchanges B and E.
CcrReport ccrKoashi(const PureState& psiABE, const OptimizerConfig& cfg,
                    bool swapRoles = false,
                    MeasurementMode mode = MeasurementMode::Projective);

/// Tessier two-qubit identity:
/// Tr(rho rho~) + S_l(rho_AB) + Sbar2(rho_A) + Sbar2(rho_B) = 1.
CcrReport ccrTessier(const DensityMatrix& rho);

/// Quantum-classical CCRs: the global relation on rho_AB (with the
/// entropy/predictability/coherence decompositions as checks) followed by
/// one standard-form relation per ensemble member.
std::vector<CcrReport> ccrQuantumClassical(const std::vector<double>& weights,
                                           const std::vector<DensityMatrix>& conditionals);

/// Informational relation for two qudits: log2(dA dB) = I_{A:B} + S_AB +
/// sum_k (P_vn(rho_k) + C_re(rho_k)), with the state-information split
/// checked alongside.
CcrReport ccrMutualInfo(const DensityMatrix& rho, const Cut& cut);

/// Conditional-entropy relation log2 dA = I_{A:B} + S_{A|B} + P_vn + C_re,
/// with the conditional-information form and the reality decomposition
/// checked alongside.
CcrReport ccrConditional(const DensityMatrix& rho, const Cut& cut);

/// Random-input generator parameters for verifyBatch. `rank` <= 0 draws
/// the rank uniformly from [1, d] per trial.
struct GeneratorSpec {
    Dims dims;
    int rank = 0;
};

/// Registered relation ids. Every entry instantiates the same schema: a
/// coherence term plus a predictability term plus one or more
/// correlation/mixedness terms that together saturate a log2-dimension
/// budget; the generic triple is not a relation of its own.
extern const std::vector<std::string> kRelationIds;

/// Dimension constraints for a relation id; throws UnknownRelation.
/// Returns a human-readable requirement description when dims are invalid.
std::string relationDimsError(const std::string& relationId, const Dims& dims);

/// Evaluate one relation on a deterministic random input derived from
/// `seed`; returns the report (worst sub-report for multi-report
/// relations, by maxResidual).
CcrReport evaluateRelationTrial(const std::string& relationId, const GeneratorSpec& gen,
                                std::uint64_t seed, const OptimizerConfig& cfg,
                                MeasurementMode mode = MeasurementMode::Projective);

/// Run `trials` independent random trials of a relation. Per-trial seeds
/// are split from `seed` by counter so results are schedule-independent.
BatchSummary verifyBatch(const std::string& relationId, const GeneratorSpec& gen,
                         int trials, double tolerance, std::uint64_t seed,
                         const OptimizerConfig& cfg = {},
                         MeasurementMode mode = MeasurementMode::Projective,
                         std::vector<TrialRecord>* perTrial = nullptr);

/// FNV-1a fingerprint of dims + raw matrix bytes (+ optional extra words),
/// used as the CcrReport input digest.
std::string stateDigest(const Dims& dims, const Mat& m,
                        const std::vector<std::uint64_t>& extra = {});

}  // namespace ccr
