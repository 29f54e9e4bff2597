#pragma once

#include <stdexcept>
#include <string>

namespace ccr {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotHermitian : Error {
    using Error::Error;
};
struct InvalidState : Error {
    using Error::Error;
};
struct BadIndex : Error {
    using Error::Error;
};
struct DimMismatch : Error {
    using Error::Error;
};
struct WeightMismatch : Error {
    using Error::Error;
};
struct NotQubit : Error {
    using Error::Error;
};
struct NotTwoQubit : Error {
    using Error::Error;
};
struct BadCut : Error {
    using Error::Error;
};
struct DimTooLarge : Error {
    using Error::Error;
};
struct NotPure : Error {
    using Error::Error;
};
struct GridTooCoarse : Error {
    using Error::Error;
};
struct MissingKey : Error {
    using Error::Error;
};
struct UnknownRelation : Error {
    using Error::Error;
};

/// State-file parsing failure; carries a 1-based location when known.
struct ParseError : Error {
    ParseError(const std::string& msg, int line_ = 0, int column_ = 0)
        : Error(msg), line(line_), column(column_) {}
    int line;
    int column;
};

}  // namespace ccr
