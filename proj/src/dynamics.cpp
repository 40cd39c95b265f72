#include "luxland/dynamics.hpp"

#include <stdexcept>

namespace luxland {

ControlCommand ControlCommand::move_horizontal(const Vec3& dir, double speed) {
    if (!(speed > 0.0 && speed <= kMaxSpeed))
        throw std::invalid_argument("ControlCommand: speed must be in (0, v_max]");
    Vec3 d = dir;
    d.z() = 0.0;
    const double n = d.norm();
    if (n < 1e-9)
        throw std::invalid_argument("ControlCommand: direction must be horizontal and nonzero");
    return {CommandKind::MoveHorizontal, d / n, speed, 0.0};
}

ControlCommand ControlCommand::yaw(double rate) {
    return {CommandKind::YawRate, Vec3(1, 0, 0), 0.0, rate};
}

ControlCommand ControlCommand::descend(double speed) {
    if (!(speed > 0.0 && speed <= kMaxSpeed))
        throw std::invalid_argument("ControlCommand: speed must be in (0, v_max]");
    return {CommandKind::Descend, Vec3(1, 0, 0), speed, 0.0};
}

ControlCommand ControlCommand::land() {
    return {CommandKind::Land, Vec3(1, 0, 0), 0.0, 0.0};
}

void DriftState::update(double t, const ActuationNoise& noise, SplitMix64& rng) {
    if (t < next_resample) return;
    bias = Vec3(noise.drift_sigma * rng.gaussian(), noise.drift_sigma * rng.gaussian(), 0.0);
    next_resample = t + noise.drift_interval;
}

DroneState step(const DroneState& state, const ControlCommand& cmd,
                const ActuationNoise& noise, const DriftState& drift, double dt,
                SplitMix64& rng) {
    if (!(dt > 0.0 && dt <= kMaxStepDt))
        throw std::invalid_argument("step: dt must be in (0, 0.1] s");
    DroneState next = state;
    next.time = state.time + dt;
    if (state.landed) return next;

    Vec3 v(0.0, 0.0, 0.0);
    double yaw_rate = 0.0;
    switch (cmd.kind) {
        case CommandKind::Hover:
            break;
        case CommandKind::MoveHorizontal:
            v = cmd.direction * cmd.speed;
            break;
        case CommandKind::YawRate:
            yaw_rate = cmd.yaw_rate;
            break;
        case CommandKind::Descend:
            v = Vec3(0.0, 0.0, -cmd.speed);
            break;
        case CommandKind::Land:
            next.position.z() = 0.0;
            next.velocity = Vec3(0.0, 0.0, 0.0);
            next.landed = true;
            return next;
    }
    if (noise.velocity_sigma > 0.0) {
        v.x() += noise.velocity_sigma * rng.gaussian();
        v.y() += noise.velocity_sigma * rng.gaussian();
    }
    v += drift.bias;

    next.velocity = v;
    next.position = state.position + v * dt;
    if (next.position.z() < 0.0) next.position.z() = 0.0;
    double yaw = state.yaw + yaw_rate * dt;
    if (noise.yaw_sigma > 0.0) yaw += noise.yaw_sigma * rng.gaussian();
    next.yaw = wrap_pi(yaw);
    return next;
}

std::pair<DroneState, std::vector<std::pair<double, double>>> yaw_sweep(
    DroneState state, double dt, double yaw_rate, const SweepSampler& sampler) {
    if (!(yaw_rate > 0.0)) throw std::invalid_argument("yaw_sweep: yaw_rate must be > 0");
    std::vector<std::pair<double, double>> samples;
    const int n = static_cast<int>(std::ceil(2.0 * kPi / (yaw_rate * dt)));
    samples.reserve(static_cast<std::size_t>(n));
    ActuationNoise no_noise;
    DriftState no_drift;
    SplitMix64 rng(0);
    for (int i = 0; i < n; ++i) {
        samples.emplace_back(wrap_two_pi(state.yaw), sampler(state));
        state = step(state, ControlCommand::yaw(yaw_rate), no_noise, no_drift, dt, rng);
    }
    return {state, samples};
}

}  // namespace luxland
