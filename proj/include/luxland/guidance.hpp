#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "luxland/dynamics.hpp"
#include "luxland/sensing.hpp"

namespace luxland {

// PD mounts plus their channel responses; at most one motorized mount.
struct PDLayout {
    std::vector<PDMount> mounts;
    std::vector<PDResponse> responses;

    void validate() const;
    int motorized_index() const;                 // -1 when none
    std::vector<int> downward_indices() const;   // all non-motorized mounts

    // n downward-facing PDs evenly spaced on a circle.
    static PDLayout arpd(int n, const PDResponse& resp, double radius = 0.04);
    // single downward off-center PD (virtual array by yaw sweeping).
    static PDLayout spd(const PDResponse& resp, double radius = 0.04);
    // front motorized PD plus two downward PDs, equilateral triangle.
    static PDLayout hybrid(const PDResponse& resp, double radius = 0.04);
};

enum class ControllerMode {
    YawSweep,
    PolarSweep,
    Approach,
    NearFieldArPD,
    Descend,
    Landed,
    BarrierStop,
    Failed,
};

const char* mode_name(ControllerMode mode);

// Thresholds and procedure knobs for the hybrid landing state machine.
struct GuidanceParams {
    double equal_tol = 0.05;       // relative spread treated as "equal"
    double switch_margin = 0.10;   // downward must exceed motorized by this margin
    double barrier_ratio = 1.6;    // jump factor over the trend prediction
    int barrier_window = 10;       // samples in the trend window
    double tilt_gain = 0.03;       // rad per unit relative intensity increase
    double min_signal = 2.0;       // counts; 2 is the ADC resolution floor

    double barrier_advance = 0.3;  // [m] carried past the jump before reorienting
    double tilt_step_max = 0.1;    // [rad] servo limit per schedule application
    double yaw_rate = kPi / 2.0;   // [rad/s] sweep rate
    double approach_speed = 0.3;   // [m/s]
    double near_speed = 0.15;      // [m/s] final-leg array guidance
    double descend_speed = 0.3;    // [m/s]
    double leg_distance = 0.5;     // [m] travel between single-PD sweeps
    double z_land = 0.02;          // [m] touchdown height
    int polar_steps = 16;          // tilt stations per polar sweep
    int polar_hold = 8;            // control steps held at each tilt station
    double signal_lost_timeout = 2.0;  // [s]
    int history_capacity = 256;
    int filter_window = 8;         // rolling-min window [samples]

    // min_signal rule: 3x the ADC-counts noise floor, floored at 2 counts.
    static double default_min_signal(const PDResponse& resp);
};

// Ring buffer of (time, filtered counts) for one PD channel.
class IntensityHistory {
public:
    explicit IntensityHistory(int capacity = 256) : capacity_(capacity) {}

    void push(double t, double value);
    std::size_t size() const { return buf_.size(); }
    // index 0 is the oldest retained sample
    const std::pair<double, double>& at(std::size_t i) const { return buf_[i]; }
    const std::pair<double, double>& newest() const { return buf_.back(); }

private:
    int capacity_;
    std::deque<std::pair<double, double>> buf_;
};

// Intensity-weighted vector sum over the mount offsets (§ArPD). Returns the
// normalized horizontal travel direction, or nothing when the sum is balanced
// below min_signal (the drone is effectively centered).
std::optional<Vec3> arpd_direction(const std::vector<double>& readings,
                                   const PDLayout& layout, double yaw,
                                   double min_signal);

// Bearing of the maximum of a 360-degree sweep profile after a 3-sample
// circular moving mean; ties resolve to the smallest angle >= 0. Returns
// nothing for a flat (no-signal) profile.
std::optional<double> spd_sweep_direction(
    std::vector<std::pair<double, double>> samples, double min_signal);

// Best tilt from a polar sweep profile; ties prefer the smaller (side-facing,
// longer-range) tilt. Returns nothing for a flat profile.
std::optional<double> polar_sweep_best_tilt(
    const std::vector<std::pair<double, double>>& samples, double min_signal);

// One tilt increment proportional to the relative intensity rise over the
// trailing window; never decreases, clamped to [0, pi/2].
double tilt_schedule(double current_tilt, const IntensityHistory& history,
                     const GuidanceParams& params);

// True when both downward readings exceed the motorized reading by the
// switch margin: the drone is inside the downward array's operating band.
bool switch_check(double motorized, double downward_a, double downward_b,
                  const GuidanceParams& params);

// True when the readings agree within equal_tol (drone directly on top of
// the source) and carry usable signal.
bool equal_intensity_check(const std::vector<double>& readings,
                           const GuidanceParams& params);

// Log-linear one-step-ahead predictor over the trailing window: fires when
// the newest sample exceeds barrier_ratio times the predicted trend, i.e. the
// exponential jump of a line-of-sight transition rather than the polynomial
// growth of a plain approach.
bool detect_barrier(const IntensityHistory& history, const GuidanceParams& params);

// Full controller state for the motorized-hybrid landing procedure.
struct ControllerState {
    ControllerMode mode = ControllerMode::YawSweep;
    double tilt = 0.0;             // commanded motorized tilt
    double heading = 0.0;          // chosen travel bearing [rad, world]
    std::vector<IntensityHistory> history;  // per mount
    GuidanceParams params;
    std::string fail_reason;

    // transition bookkeeping (consumed by the run loop's mode log)
    std::string last_trigger;

    // sweep/mode internals
    int steps_in_mode = 0;
    double sweep_accum = 0.0;
    double prev_yaw = 0.0;
    bool prev_yaw_valid = false;
    std::vector<std::pair<double, double>> sweep_samples;
    std::deque<double> recent_aim;  // aim azimuth ring for filter-lag compensation
    int polar_index = 0;
    int polar_hold_count = 0;
    bool polar_aligned = false;  // drone turned to face the chosen bearing
    std::vector<std::pair<double, double>> polar_samples;
    Vec3 stop_anchor{0.0, 0.0, 0.0};  // position at BarrierStop entry
    bool stop_anchor_valid = false;
    bool barrier_armed = false;
    int tilt_window_countdown = 0;
    double last_signal_time = 0.0;

    static ControllerState init(const PDLayout& layout, const GuidanceParams& params,
                                double start_time = 0.0);
};

// One transition of the hybrid mode machine. readings are post-filter counts
// aligned with layout.mounts. Failures surface as Failed mode, never as
// exceptions.
std::pair<ControllerState, ControlCommand> hybrid_step(
    ControllerState ctrl, const std::vector<double>& readings,
    const DroneState& drone, const PDLayout& layout);

}  // namespace luxland
