#pragma once

#include <stdexcept>
#include <string>

namespace dpmpqp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical breakdowns. The CLI maps these to exit code 3.
class NumericalFailure : public Error { using Error::Error; };
class NonConvergence : public NumericalFailure { using NumericalFailure::NumericalFailure; };
class NoFiniteDetermination : public NumericalFailure { using NumericalFailure::NumericalFailure; };

// Invalid problem data or contract violations.
class InvalidInput : public Error { using Error::Error; };
class NotStabilizable : public InvalidInput { using InvalidInput::InvalidInput; };
class DimensionMismatch : public InvalidInput { using InvalidInput::InvalidInput; };
class EmptyTerminalSet : public InvalidInput { using InvalidInput::InvalidInput; };
class StageOutOfRange : public InvalidInput { using InvalidInput::InvalidInput; };
class IndexOutOfRange : public InvalidInput { using InvalidInput::InvalidInput; };
class HorizonMismatch : public InvalidInput { using InvalidInput::InvalidInput; };
class SchemaError : public InvalidInput { using InvalidInput::InvalidInput; };

// Region construction.
class RankDeficient : public Error { using Error::Error; };
class EmptyRegion : public Error { using Error::Error; };

}  // namespace dpmpqp
