#include "ccr/measures.hpp"

#include <cmath>

namespace ccr {

namespace {

constexpr double kClipTol = 1e-10;

double entropyTerm(double p) {
    if (p <= 0.0) return 0.0;
    return -p * std::log2(p);
}

/// Entropy of a spectrum with the clipping rule for small negatives.
double spectrumEntropy(const Eigen::VectorXd& values) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        double lambda = values(i);
        if (lambda < 0.0) {
            if (lambda < -kClipTol) throw InvalidState("entropy: negative eigenvalue");
            lambda = 0.0;
        }
        s += entropyTerm(lambda);
    }
    return s;
}

double log2Dim(const DensityMatrix& rho) { return std::log2(static_cast<double>(rho.dim())); }

void requireBasisDim(const DensityMatrix& rho, const MeasurementBasis& basis) {
    if (basis.dim() != rho.dim())
        throw DimMismatch("basis dimension does not match the state");
}

void requireQubit(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw NotQubit("operation requires a single qubit");
}

}  // namespace

double shannonEntropy(const std::vector<double>& p) {
    double s = 0.0;
    for (double pi : p) {
        if (pi < -kClipTol) throw InvalidState("shannonEntropy: negative probability");
        s += entropyTerm(std::max(pi, 0.0));
    }
    return s;
}

double vonNeumannEntropy(const DensityMatrix& rho) {
    return spectrumEntropy(hermEig(rho.mat()).values);
}

double linearEntropy(const DensityMatrix& rho) { return 1.0 - rho.purity(); }

std::vector<double> basisProbabilities(const DensityMatrix& rho, const MeasurementBasis& basis) {
    requireBasisDim(rho, basis);
    std::vector<double> p(basis.dim());
    for (int k = 0; k < basis.dim(); ++k) {
        auto v = basis.vectors().col(k);
        p[k] = (v.adjoint() * rho.mat() * v)(0, 0).real();
    }
    return p;
}

DensityMatrix dephase(const DensityMatrix& rho, const MeasurementBasis& basis) {
    requireBasisDim(rho, basis);
    const long d = rho.dim();
    Mat out = Mat::Zero(d, d);
    for (int k = 0; k < basis.dim(); ++k) {
        Mat p = basis.projector(k);
        out += p * rho.mat() * p;
    }
    return DensityMatrix(rho.dims(), std::move(out));
}

DensityMatrix dephase(const DensityMatrix& rho) {
    return dephase(rho, MeasurementBasis::computational(static_cast<int>(rho.dim())));
}

double coherence(const DensityMatrix& rho, const MeasurementBasis& basis) {
    return shannonEntropy(basisProbabilities(rho, basis)) - vonNeumannEntropy(rho);
}

double coherence(const DensityMatrix& rho) {
    return coherence(rho, MeasurementBasis::computational(static_cast<int>(rho.dim())));
}

double predictability(const DensityMatrix& rho, const MeasurementBasis& basis) {
    return log2Dim(rho) - shannonEntropy(basisProbabilities(rho, basis));
}

double predictability(const DensityMatrix& rho) {
    return predictability(rho, MeasurementBasis::computational(static_cast<int>(rho.dim())));
}

double irreality(const DensityMatrix& rho, const MeasurementBasis& basis) {
    // the dephasing-map route, numerically independent of coherence()
    return vonNeumannEntropy(dephase(rho, basis)) - vonNeumannEntropy(rho);
}

double irreality(const DensityMatrix& rho) {
    return irreality(rho, MeasurementBasis::computational(static_cast<int>(rho.dim())));
}

double reality(const DensityMatrix& rho, const MeasurementBasis& basis) {
    return log2Dim(rho) - irreality(rho, basis);
}

double reality(const DensityMatrix& rho) {
    return reality(rho, MeasurementBasis::computational(static_cast<int>(rho.dim())));
}

double gyVisibility(const DensityMatrix& rho) {
    requireQubit(rho);
    return 2.0 * std::abs(rho.mat()(0, 1));
}

double gyPredictability(const DensityMatrix& rho) {
    requireQubit(rho);
    return std::abs(rho.mat()(0, 0).real() - rho.mat()(1, 1).real());
}

double mutualInformation(const DensityMatrix& rho, const Cut& cut) {
    auto [sideA, sideB] = splitCut(cut, rho.subsystemCount());
    double sA = vonNeumannEntropy(partialTrace(rho, sideA));
    double sB = vonNeumannEntropy(partialTrace(rho, sideB));
    return sA + sB - vonNeumannEntropy(rho);
}

double conditionalEntropy(const DensityMatrix& rho, const Cut& cut) {
    auto [sideA, sideB] = splitCut(cut, rho.subsystemCount());
    return vonNeumannEntropy(rho) - vonNeumannEntropy(partialTrace(rho, sideB));
}

double coherentInformation(const DensityMatrix& rho, const Cut& cut) {
    return -conditionalEntropy(rho, cut);
}

double conditionalInformation(const DensityMatrix& rho, const Cut& cut) {
    auto [sideA, sideB] = splitCut(cut, rho.subsystemCount());
    double dA = 1.0;
    for (std::size_t s : sideA) dA *= rho.dims()[s];
    return std::log2(dA) - conditionalEntropy(rho, cut);
}

double stateInformation(const DensityMatrix& rho) {
    return log2Dim(rho) - vonNeumannEntropy(rho);
}

}  // namespace ccr
