#pragma once

#include "luxland/lightfield.hpp"

namespace luxland {

struct BulbFit {
    LightSource source;             // axis fixed to +z
    double rms_rel_residual = 0.0;  // RMS of (model - sample)/sample over fitted samples
    bool converged = false;
    bool degenerate = false;        // no usable decay information (near-constant field)
    int iterations = 0;
};

// Calibrates the analytic bulb model (power, lambert exponent, source
// position) against a measured grid by least squares on log intensities,
// which weights residuals relatively across the field's dynamic range.
//
// Samples at or below noise_floor (fraction of the grid maximum) are
// excluded; fewer than 25 usable samples is an error. Non-convergence within
// max_iterations returns the best-so-far fit with converged = false.
BulbFit fit_bulb_model(const MeasuredFieldGrid& grid, double noise_floor_frac = 0.02,
                       int max_iterations = 200);

}  // namespace luxland
