#pragma once

#include <stdexcept>
#include <string>

namespace predict {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid distribution or chain parameters (probabilities out of range, shape <= 0, ...).
struct InvalidParameter : Error {
    using Error::Error;
};

// Transition matrix rows do not sum to one or contain negative entries.
struct NotStochastic : Error {
    using Error::Error;
};

// Chain is not irreducible.
struct Reducible : Error {
    using Error::Error;
};

// Chain is irreducible but has period > 1.
struct Periodic : Error {
    using Error::Error;
};

// Detailed balance fails; spectral machinery is unavailable.
struct NotReversible : Error {
    using Error::Error;
};

// Marginal puts mass where the forecast has none; the truncation horizon
// must be extended before a cross-entropy value is meaningful.
struct AbsoluteContinuityViolation : Error {
    using Error::Error;
};

// Aggregation map leaves a coarse state without preimage.
struct NotSurjective : Error {
    using Error::Error;
};

// Predictability stays above epsilon through the whole scan; the horizon
// is not bracketed and the caller must raise the scan limit.
struct HorizonExceedsScan : Error {
    using Error::Error;
};

// beta >= 1: the large-K approximation requires a stable queue.
struct UnstableQueue : Error {
    using Error::Error;
};

// Bad scenario / CLI configuration. CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// An internal oracle disagreement (closed form vs matrix power, dual
// predictability routes, ...). CLI exit code 3.
struct NumericalValidationError : Error {
    using Error::Error;
};

}  // namespace predict
