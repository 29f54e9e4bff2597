#pragma once

#include <string>
#include <vector>

#include "ccr/qstate.hpp"

namespace ccr {

/// Named quantifier evaluation, in bits.
struct QuantifierValue {
    std::string name;
    double value = 0.0;
    std::string basis;  // basis description, empty when not basis-dependent
};

/// Shannon entropy -sum p log2 p with 0 log 0 := 0.
double shannonEntropy(const std::vector<double>& p);

/// von Neumann entropy in bits, computed from the eigenvalue spectrum.
/// Eigenvalues in [-1e-10, 0) are clipped to zero; more negative values
/// are rejected by the DensityMatrix invariants upstream.
double vonNeumannEntropy(const DensityMatrix& rho);

/// Linear entropy 1 - Tr rho^2.
double linearEntropy(const DensityMatrix& rho);

/// Measurement probabilities <u_k| rho |u_k> in the given basis.
std::vector<double> basisProbabilities(const DensityMatrix& rho, const MeasurementBasis& basis);

/// Non-selective projective measurement map: sum_k P_k rho P_k.
DensityMatrix dephase(const DensityMatrix& rho, const MeasurementBasis& basis);
DensityMatrix dephase(const DensityMatrix& rho);

/// Relative entropy of coherence S(rho_diag) - S(rho) in the given basis
/// (computational basis by default).
double coherence(const DensityMatrix& rho, const MeasurementBasis& basis);
double coherence(const DensityMatrix& rho);

/// Predictability log2 d - S(rho_diag).
double predictability(const DensityMatrix& rho, const MeasurementBasis& basis);
double predictability(const DensityMatrix& rho);

/// Irreality of the observable with the given eigenbasis,
/// S(dephase(rho)) - S(rho). Coincides with the coherence; the two are
/// computed along different numerical routes on purpose.
double irreality(const DensityMatrix& rho, const MeasurementBasis& basis);
double irreality(const DensityMatrix& rho);

/// Reality (definiteness) log2 d - irreality.
double reality(const DensityMatrix& rho, const MeasurementBasis& basis);
double reality(const DensityMatrix& rho);

/// Interferometric visibility 2|rho_01| of a qubit state.
double gyVisibility(const DensityMatrix& rho);
/// Which-path predictability |rho_00 - rho_11| of a qubit state.
double gyPredictability(const DensityMatrix& rho);

/// Mutual information S(rho_A) + S(rho_B) - S(rho_AB) across the cut
/// (side A listed; side B is the complement).
double mutualInformation(const DensityMatrix& rho, const Cut& cut);

/// Conditional entropy S(rho_AB) - S(rho_B); may be negative.
double conditionalEntropy(const DensityMatrix& rho, const Cut& cut);

/// Coherent information, the negated conditional entropy.
double coherentInformation(const DensityMatrix& rho, const Cut& cut);

/// Conditional information log2 d_A - S_{A|B}; always >= mutual information.
double conditionalInformation(const DensityMatrix& rho, const Cut& cut);

/// State information log2 d - S(rho).
double stateInformation(const DensityMatrix& rho);

}  // namespace ccr
