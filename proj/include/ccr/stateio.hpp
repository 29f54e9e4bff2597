#pragma once

#include <string>
#include <variant>

#include "ccr/qstate.hpp"

namespace ccr {

/// A state loaded from a JSON state file: either a density matrix
/// ({"dims": [...], "matrix": [[re, im], ...]} row-major) or a pure state
/// ({"dims": [...], "vector": [[re, im], ...]}).
using LoadedState = std::variant<DensityMatrix, PureState>;

LoadedState parseStateJson(const std::string& text);
LoadedState loadStateFile(const std::string& path);

std::string stateToJson(const DensityMatrix& rho);
std::string stateToJson(const PureState& psi);

/// Density matrix of the loaded state regardless of flavor.
DensityMatrix asDensity(const LoadedState& state);

/// Format a double with 12 significant digits (the report contract).
std::string fmt12(double v);

/// Write `content` to `path` atomically (temp file + rename).
void writeFileAtomic(const std::string& path, const std::string& content);

}  // namespace ccr
