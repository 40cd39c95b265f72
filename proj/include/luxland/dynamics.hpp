#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "luxland/geometry.hpp"
#include "luxland/rng.hpp"

namespace luxland {

struct DroneState {
    Vec3 position{0.0, 0.0, 1.0};
    double yaw = 0.0;       // [rad], normalized to [-pi, pi)
    double time = 0.0;      // [s]
    Vec3 velocity{0.0, 0.0, 0.0};
    bool landed = false;    // Land is absorbing

    Pose pose() const { return {position, yaw}; }
};

enum class CommandKind { Hover, MoveHorizontal, YawRate, Descend, Land };

struct ControlCommand {
    CommandKind kind = CommandKind::Hover;
    Vec3 direction{1.0, 0.0, 0.0};  // unit, horizontal; MoveHorizontal only
    double speed = 0.0;             // [m/s]; MoveHorizontal / Descend
    double yaw_rate = 0.0;          // [rad/s]; YawRate only

    static ControlCommand hover() { return {}; }
    static ControlCommand move_horizontal(const Vec3& dir, double speed);
    static ControlCommand yaw(double rate);
    static ControlCommand descend(double speed);
    static ControlCommand land();
};

// Velocity oscillation, yaw wander and the slowly varying drift the flight
// stack cannot correct for.
struct ActuationNoise {
    double velocity_sigma = 0.0;    // [m/s] per axis, horizontal
    double yaw_sigma = 0.0;         // [rad] per step
    double drift_sigma = 0.0;       // [m/s] std of the resampled bias
    double drift_interval = 5.0;    // [s] between bias resamples
};

// Mutable drift bias state owned by the run loop.
struct DriftState {
    Vec3 bias{0.0, 0.0, 0.0};
    double next_resample = 0.0;

    void update(double t, const ActuationNoise& noise, SplitMix64& rng);
};

inline constexpr double kMaxSpeed = 0.5;   // [m/s]
inline constexpr double kMaxStepDt = 0.1;  // [s]

// Euler step of the kinematic model. Landed states are frozen; z never goes
// negative.
DroneState step(const DroneState& state, const ControlCommand& cmd,
                const ActuationNoise& noise, const DriftState& drift, double dt,
                SplitMix64& rng);

// Rotates exactly 2*pi (within one dt*yaw_rate step), invoking the sampler at
// each step. Returns the final state and samples keyed by world yaw.
using SweepSampler = std::function<double(const DroneState&)>;
std::pair<DroneState, std::vector<std::pair<double, double>>> yaw_sweep(
    DroneState state, double dt, double yaw_rate, const SweepSampler& sampler);

}  // namespace luxland
