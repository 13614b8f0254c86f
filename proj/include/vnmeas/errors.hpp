// errors.hpp - error types shared across the library

#pragma once

#include <stdexcept>

namespace vnmeas {

// Post-selection probability fell below the floor; conditioned averages diverge.
struct DegeneratePostSelection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Amplitude leaked into the guard band at the grid edges (periodic wrap-around
// would silently corrupt moments).
struct WrapGuardViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A truncated series failed to reach its tolerance within the term cap.
struct SeriesNotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shared floor for post-selection probabilities.
inline constexpr double kProbFloor = 1e-12;

} // namespace vnmeas
