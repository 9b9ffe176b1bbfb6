#pragma once

#include <stdexcept>
#include <string>

namespace pairtomo {

// Coherence magnitude below the floor: arg() would be noise.
struct UndefinedPhaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Measurement settings do not span the 16-dimensional Hermitian space.
struct IncompletePlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No delta-k sign change inside the calibration bracket.
struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Spectrum does not cross half maximum on both sides of its peak.
struct UnresolvedWidthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Intensity-weighted phase average over a spectrum with zero total weight.
struct UndefinedAverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// More than half of the bootstrap resamples failed to produce the metric.
struct UnstableMetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; message names the first offending line.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Wavelength outside the validity window of the dispersion coefficients.
struct OutOfRangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

}  // namespace pairtomo
