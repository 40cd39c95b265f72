#include "luxland/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace luxland {

void PDLayout::validate() const {
    if (mounts.empty()) throw std::invalid_argument("PDLayout: needs at least one mount");
    if (mounts.size() != responses.size())
        throw std::invalid_argument("PDLayout: mounts/responses length mismatch");
    int motor = 0;
    for (const auto& m : mounts) {
        m.validate();
        if (m.motorized) ++motor;
    }
    for (const auto& r : responses) r.validate();
    if (motor > 1) throw std::invalid_argument("PDLayout: at most one motorized mount");
}

int PDLayout::motorized_index() const {
    for (std::size_t i = 0; i < mounts.size(); ++i)
        if (mounts[i].motorized) return static_cast<int>(i);
    return -1;
}

std::vector<int> PDLayout::downward_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < mounts.size(); ++i)
        if (!mounts[i].motorized) out.push_back(static_cast<int>(i));
    return out;
}

PDLayout PDLayout::arpd(int n, const PDResponse& resp, double radius) {
    if (n < 2) throw std::invalid_argument("PDLayout::arpd: need at least 2 mounts");
    PDLayout layout;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * kPi * i / n;
        PDMount m;
        m.offset = Vec3(radius * std::cos(a), radius * std::sin(a), 0.0);
        m.azimuth = a;
        m.tilt = kPi / 2.0;
        layout.mounts.push_back(m);
        layout.responses.push_back(resp);
    }
    layout.validate();
    return layout;
}

PDLayout PDLayout::spd(const PDResponse& resp, double radius) {
    PDLayout layout;
    PDMount m;
    m.offset = Vec3(radius, 0.0, 0.0);
    m.azimuth = 0.0;
    m.tilt = kPi / 2.0;
    layout.mounts.push_back(m);
    layout.responses.push_back(resp);
    layout.validate();
    return layout;
}

PDLayout PDLayout::hybrid(const PDResponse& resp, double radius) {
    PDLayout layout;
    // front motorized mount; starts side-facing for the long-range sweep
    PDMount motor;
    motor.offset = Vec3(radius, 0.0, 0.0);
    motor.azimuth = 0.0;
    motor.tilt = 0.0;
    motor.motorized = true;
    layout.mounts.push_back(motor);
    layout.responses.push_back(resp);
    for (double a : {2.0 * kPi / 3.0, 4.0 * kPi / 3.0}) {
        PDMount m;
        m.offset = Vec3(radius * std::cos(a), radius * std::sin(a), 0.0);
        m.azimuth = a;
        m.tilt = kPi / 2.0;
        layout.mounts.push_back(m);
        layout.responses.push_back(resp);
    }
    layout.validate();
    return layout;
}

const char* mode_name(ControllerMode mode) {
    switch (mode) {
        case ControllerMode::YawSweep: return "YawSweep";
        case ControllerMode::PolarSweep: return "PolarSweep";
        case ControllerMode::Approach: return "Approach";
        case ControllerMode::NearFieldArPD: return "NearFieldArPD";
        case ControllerMode::Descend: return "Descend";
        case ControllerMode::Landed: return "Landed";
        case ControllerMode::BarrierStop: return "BarrierStop";
        case ControllerMode::Failed: return "Failed";
    }
    return "?";
}

double GuidanceParams::default_min_signal(const PDResponse& resp) {
    const double noise_counts = resp.noise_sigma / resp.full_scale * resp.max_count();
    return std::max(3.0 * noise_counts, 2.0);
}

void IntensityHistory::push(double t, double value) {
    if (!buf_.empty() && t <= buf_.back().first)
        throw std::invalid_argument("IntensityHistory: timestamps must increase");
    buf_.emplace_back(t, value);
    while (buf_.size() > static_cast<std::size_t>(capacity_)) buf_.pop_front();
}

std::optional<Vec3> arpd_direction(const std::vector<double>& readings,
                                   const PDLayout& layout, double yaw,
                                   double min_signal) {
    if (readings.size() != layout.mounts.size())
        throw std::invalid_argument("arpd_direction: readings/mounts length mismatch");
    if (readings.size() < 2)
        throw std::invalid_argument("arpd_direction: need at least 2 mounts");
    Vec3 sum(0.0, 0.0, 0.0);
    for (std::size_t i = 0; i < readings.size(); ++i) {
        Vec3 dir = layout.mounts[i].offset;
        dir.z() = 0.0;
        const double n = dir.norm();
        if (n < 1e-9) continue;  // centered mounts carry no directionality
        sum += readings[i] * rotate_z(dir / n, yaw);
    }
    if (sum.norm() < min_signal) return std::nullopt;
    return sum.normalized();
}

std::optional<double> spd_sweep_direction(
    std::vector<std::pair<double, double>> samples, double min_signal) {
    if (samples.size() < 8)
        throw std::invalid_argument("spd_sweep_direction: need at least 8 samples");
    for (auto& s : samples) s.first = wrap_two_pi(s.first);
    std::sort(samples.begin(), samples.end());
    const double span = samples.back().first - samples.front().first;
    if (span < 350.0 * kPi / 180.0)
        throw std::invalid_argument("spd_sweep_direction: sweep must span >= 350 degrees");

    const std::size_t n = samples.size();
    double best_val = -1.0;
    double best_raw = -1.0;
    double best_angle = 0.0;
    double vmin = samples[0].second, vmax = samples[0].second;
    for (std::size_t i = 0; i < n; ++i) {
        const double raw = samples[i].second;
        vmin = std::min(vmin, raw);
        vmax = std::max(vmax, raw);
        const double smooth =
            (samples[(i + n - 1) % n].second + raw + samples[(i + 1) % n].second) / 3.0;
        // smoothed ties resolve to the strongest raw sample (an impulse keeps
        // its own bin), then to the smallest angle
        const bool better =
            smooth > best_val + 1e-12 ||
            (std::abs(smooth - best_val) <= 1e-12 &&
             (raw > best_raw + 1e-12 ||
              (std::abs(raw - best_raw) <= 1e-12 && samples[i].first < best_angle)));
        if (better) {
            best_val = smooth;
            best_raw = raw;
            best_angle = samples[i].first;
        }
    }
    if (vmax - vmin < min_signal) return std::nullopt;
    return best_angle;
}

std::optional<double> polar_sweep_best_tilt(
    const std::vector<std::pair<double, double>>& samples, double min_signal) {
    if (samples.size() < 5)
        throw std::invalid_argument("polar_sweep_best_tilt: need at least 5 tilts");
    double tmin = samples[0].first, tmax = samples[0].first;
    for (const auto& s : samples) {
        tmin = std::min(tmin, s.first);
        tmax = std::max(tmax, s.first);
    }
    if (tmin > 0.1 || tmax < kPi / 2.0 - 0.1)
        throw std::invalid_argument("polar_sweep_best_tilt: sweep must span [0, pi/2]");
    double vmin = samples[0].second, vmax = samples[0].second;
    double best_val = -1.0, best_tilt = 0.0;
    for (const auto& [tilt, v] : samples) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        if (v > best_val + 1e-12 ||
            (std::abs(v - best_val) <= 1e-12 && tilt < best_tilt)) {
            best_val = v;
            best_tilt = tilt;
        }
    }
    if (vmax - vmin < min_signal) return std::nullopt;
    return best_tilt;
}

double tilt_schedule(double current_tilt, const IntensityHistory& history,
                     const GuidanceParams& params) {
    if (history.size() < 2) return current_tilt;
    const std::size_t n = history.size();
    const std::size_t first =
        n > static_cast<std::size_t>(params.barrier_window)
            ? n - static_cast<std::size_t>(params.barrier_window)
            : 0;
    const double oldest = history.at(first).second;
    const double newest = history.newest().second;
    const double rel = (newest - oldest) / std::max(oldest, 1.0);
    // the servo cannot slew arbitrarily fast; the cap also keeps regime flips
    // (occlusion flicker) from throwing the tilt to vertical in one step
    const double increment =
        std::min(params.tilt_gain * std::max(0.0, rel), params.tilt_step_max);
    return std::clamp(current_tilt + increment, 0.0, kPi / 2.0);
}

bool switch_check(double motorized, double downward_a, double downward_b,
                  const GuidanceParams& params) {
    return std::min(downward_a, downward_b) > motorized * (1.0 + params.switch_margin);
}

bool equal_intensity_check(const std::vector<double>& readings,
                           const GuidanceParams& params) {
    if (readings.size() < 2) return false;
    const auto [lo, hi] = std::minmax_element(readings.begin(), readings.end());
    if (*hi < params.min_signal) return false;
    return (*hi - *lo) / *hi <= params.equal_tol;
}

bool detect_barrier(const IntensityHistory& history, const GuidanceParams& params) {
    const int w = params.barrier_window;
    // the rolling-min filter smears a step over a few samples; keep a small
    // gap between the fitted window and the tested sample so the pre-jump
    // trend stays clean (exact extrapolation is unchanged on steady ramps)
    const int gap = 3;
    if (history.size() < static_cast<std::size_t>(w + gap) + 2) return false;
    const std::size_t n = history.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < w; ++i) {
        const double x = static_cast<double>(i);
        const double y =
            std::log(std::max(history.at(n - 1 - w - gap + i).second, 1.0));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = w * sxx - sx * sx;
    const double slope = denom != 0.0 ? (w * sxy - sx * sy) / denom : 0.0;
    const double intercept = (sy - slope * sx) / w;
    const double predicted = std::exp(intercept + slope * (w + gap));
    // the ratio test alone would fire on floor-level jitter; demand the jump
    // also clear the prediction by a couple of noise floors
    return history.newest().second > params.barrier_ratio * predicted &&
           history.newest().second - predicted >= 2.0 * params.min_signal;
}

namespace {

void enter_mode(ControllerState& ctrl, ControllerMode mode, const std::string& trigger,
                double now) {
    ctrl.mode = mode;
    ctrl.last_trigger = trigger;
    ctrl.steps_in_mode = 0;
    // staleness measures continuous darkness within one sensing configuration;
    // a mode change reconfigures the sensor, so the clock restarts
    ctrl.last_signal_time = std::max(ctrl.last_signal_time, now);
    if (mode == ControllerMode::YawSweep) {
        ctrl.sweep_samples.clear();
        ctrl.recent_aim.clear();
        ctrl.sweep_accum = 0.0;
        ctrl.prev_yaw_valid = false;
        ctrl.tilt = 0.0;  // side-facing maximizes range during the sweep
    } else if (mode == ControllerMode::PolarSweep) {
        ctrl.polar_samples.clear();
        ctrl.polar_index = 0;
        ctrl.polar_hold_count = 0;
        ctrl.polar_aligned = false;
        ctrl.tilt = 0.0;
    } else if (mode == ControllerMode::Approach) {
        ctrl.barrier_armed = true;
        // wait out the filter transient of the previous sweep before trusting
        // windowed trends again
        ctrl.tilt_window_countdown =
            ctrl.params.barrier_window + ctrl.params.filter_window;
    } else if (mode == ControllerMode::NearFieldArPD) {
        ctrl.tilt = kPi / 2.0;  // all mounts act as a downward array
    }
}

}  // namespace

ControllerState ControllerState::init(const PDLayout& layout, const GuidanceParams& params,
                                      double start_time) {
    layout.validate();
    ControllerState ctrl;
    ctrl.params = params;
    ctrl.history.assign(layout.mounts.size(), IntensityHistory(params.history_capacity));
    ctrl.last_signal_time = start_time;
    enter_mode(ctrl, ControllerMode::YawSweep, "start", start_time);
    return ctrl;
}

std::pair<ControllerState, ControlCommand> hybrid_step(
    ControllerState ctrl, const std::vector<double>& readings,
    const DroneState& drone, const PDLayout& layout) {
    if (readings.size() != layout.mounts.size())
        throw std::invalid_argument("hybrid_step: readings/mounts length mismatch");
    const GuidanceParams& p = ctrl.params;
    const double t = drone.time;

    for (std::size_t i = 0; i < readings.size(); ++i)
        ctrl.history[i].push(t, readings[i]);

    // global signal-lost watchdog. Sweeps are exempt while in progress: a
    // directional PD legitimately reads nothing for most of a revolution, so
    // the staleness test runs when the sweep completes instead.
    bool any_signal = false;
    for (double r : readings) any_signal = any_signal || r >= p.min_signal;
    if (any_signal) ctrl.last_signal_time = t;
    const bool terminal = ctrl.mode == ControllerMode::Landed ||
                          ctrl.mode == ControllerMode::Failed;
    const bool sweeping = ctrl.mode == ControllerMode::YawSweep ||
                          ctrl.mode == ControllerMode::PolarSweep;
    if (!terminal && !sweeping && t - ctrl.last_signal_time >= p.signal_lost_timeout) {
        ctrl.fail_reason = "signal lost";
        enter_mode(ctrl, ControllerMode::Failed, "signal lost", t);
        return {ctrl, ControlCommand::hover()};
    }

    const int motor = layout.motorized_index();
    const auto down = layout.downward_indices();
    const bool full_hybrid = motor >= 0 && down.size() == 2;

    // downward dominance can fire in any far-field mode: an overhead start
    // skips the sweeps entirely. Readings at the noise floor never qualify.
    const bool far_field = ctrl.mode == ControllerMode::YawSweep ||
                           ctrl.mode == ControllerMode::PolarSweep ||
                           ctrl.mode == ControllerMode::Approach;
    if (full_hybrid && far_field) {
        const double down_a = readings[static_cast<std::size_t>(down[0])];
        const double down_b = readings[static_cast<std::size_t>(down[1])];
        if (down_a >= p.min_signal && down_b >= p.min_signal &&
            switch_check(readings[static_cast<std::size_t>(motor)], down_a, down_b, p)) {
            enter_mode(ctrl, ControllerMode::NearFieldArPD, "switch_check", t);
            return {ctrl, ControlCommand::hover()};
        }
    }

    switch (ctrl.mode) {
        case ControllerMode::YawSweep: {
            // at run start the rolling-min window is still short and pulses
            // leak through; wait until the filter carries a full window
            if (motor >= 0 &&
                ctrl.history[static_cast<std::size_t>(motor)].size() <=
                    static_cast<std::size_t>(p.filter_window))
                return {ctrl, ControlCommand::hover()};
            if (ctrl.prev_yaw_valid)
                ctrl.sweep_accum += std::abs(wrap_pi(drone.yaw - ctrl.prev_yaw));
            ctrl.prev_yaw = drone.yaw;
            ctrl.prev_yaw_valid = true;

            const double aim = drone.yaw + (motor >= 0 ? layout.mounts[motor].azimuth : 0.0);
            const double motor_reading =
                motor >= 0 ? readings[static_cast<std::size_t>(motor)] : readings[0];
            // key each filtered sample at the aim from half a filter window ago:
            // the trailing rolling min lags a moving sweep by about that much
            ctrl.recent_aim.push_back(aim);
            const std::size_t lag = static_cast<std::size_t>((p.filter_window - 1) / 2);
            const double key = ctrl.recent_aim.size() > lag
                                   ? ctrl.recent_aim[ctrl.recent_aim.size() - 1 - lag]
                                   : ctrl.recent_aim.front();
            if (ctrl.recent_aim.size() > lag + 1) ctrl.recent_aim.pop_front();
            ctrl.sweep_samples.emplace_back(key, motor_reading);

            if (ctrl.sweep_accum >= 2.0 * kPi) {
                std::optional<double> bearing;
                if (ctrl.sweep_samples.size() >= 8)
                    bearing = spd_sweep_direction(ctrl.sweep_samples, p.min_signal);
                if (bearing) {
                    ctrl.heading = *bearing;
                    enter_mode(ctrl, ControllerMode::PolarSweep, "sweep_peak", t);
                } else if (t - ctrl.last_signal_time >= p.signal_lost_timeout) {
                    ctrl.fail_reason = "signal lost";
                    enter_mode(ctrl, ControllerMode::Failed, "signal lost", t);
                } else {
                    enter_mode(ctrl, ControllerMode::YawSweep, "sweep_flat", t);
                }
                return {ctrl, ControlCommand::hover()};
            }
            ++ctrl.steps_in_mode;
            return {ctrl, ControlCommand::yaw(p.yaw_rate)};
        }

        case ControllerMode::PolarSweep: {
            // first face the chosen bearing so the front mount points at it
            const double motor_azimuth = motor >= 0 ? layout.mounts[motor].azimuth : 0.0;
            if (!ctrl.polar_aligned) {
                const double err = wrap_pi(ctrl.heading - (drone.yaw + motor_azimuth));
                if (std::abs(err) > 0.04) {
                    ++ctrl.steps_in_mode;
                    return {ctrl, ControlCommand::yaw(err > 0 ? p.yaw_rate : -p.yaw_rate)};
                }
                ctrl.polar_aligned = true;
            }
            const double tilt_step = (kPi / 2.0) / (p.polar_steps - 1);
            ctrl.tilt = ctrl.polar_index * tilt_step;
            ++ctrl.polar_hold_count;
            if (ctrl.polar_hold_count >= p.polar_hold) {
                // record the settled (filtered) reading at this station
                const double v = motor >= 0 ? readings[static_cast<std::size_t>(motor)]
                                            : readings[0];
                ctrl.polar_samples.emplace_back(ctrl.tilt, v);
                ctrl.polar_hold_count = 0;
                ++ctrl.polar_index;
                if (ctrl.polar_index >= p.polar_steps) {
                    const auto best = polar_sweep_best_tilt(ctrl.polar_samples, p.min_signal);
                    if (best) {
                        ctrl.tilt = *best;
                        enter_mode(ctrl, ControllerMode::Approach, "polar_peak", t);
                    } else if (t - ctrl.last_signal_time >= p.signal_lost_timeout) {
                        ctrl.fail_reason = "signal lost";
                        enter_mode(ctrl, ControllerMode::Failed, "signal lost", t);
                    } else {
                        enter_mode(ctrl, ControllerMode::YawSweep, "polar_flat", t);
                    }
                }
            }
            ++ctrl.steps_in_mode;
            return {ctrl, ControlCommand::hover()};
        }

        case ControllerMode::Approach: {
            ++ctrl.steps_in_mode;
            if (motor >= 0) {
                if (--ctrl.tilt_window_countdown <= 0) {
                    ctrl.tilt = tilt_schedule(ctrl.tilt,
                                              ctrl.history[static_cast<std::size_t>(motor)], p);
                    ctrl.tilt_window_countdown = p.barrier_window;
                }
                if (ctrl.barrier_armed &&
                    ctrl.steps_in_mode >= p.barrier_window + p.filter_window + 2 &&
                    detect_barrier(ctrl.history[static_cast<std::size_t>(motor)], p)) {
                    ctrl.barrier_armed = false;
                    enter_mode(ctrl, ControllerMode::BarrierStop, "barrier_jump", t);
                    return {ctrl, ControlCommand::hover()};
                }
            }
            const Vec3 dir(std::cos(ctrl.heading), std::sin(ctrl.heading), 0.0);
            return {ctrl, ControlCommand::move_horizontal(dir, p.approach_speed)};
        }

        case ControllerMode::BarrierStop: {
            // carry a short distance past the shadow boundary so the
            // reorientation sweep sees the direct path solidly, then stop and
            // resweep from scratch
            if (!ctrl.stop_anchor_valid) {
                ctrl.stop_anchor = drone.position;
                ctrl.stop_anchor_valid = true;
            }
            if (horizontal_distance(drone.position, ctrl.stop_anchor) < p.barrier_advance) {
                const Vec3 dir(std::cos(ctrl.heading), std::sin(ctrl.heading), 0.0);
                return {ctrl, ControlCommand::move_horizontal(dir, p.approach_speed)};
            }
            ctrl.stop_anchor_valid = false;
            enter_mode(ctrl, ControllerMode::YawSweep, "reorient", t);
            return {ctrl, ControlCommand::hover()};
        }

        case ControllerMode::NearFieldArPD: {
            ++ctrl.steps_in_mode;
            // hold position until the rolling-min flushes the pre-switch
            // samples of the (re-tilted) motorized channel
            if (ctrl.steps_in_mode <= p.filter_window)
                return {ctrl, ControlCommand::hover()};
            const auto dir = arpd_direction(readings, layout, drone.yaw, p.min_signal);
            if (!dir || equal_intensity_check(readings, p)) {
                enter_mode(ctrl, ControllerMode::Descend,
                           dir ? "equal_intensity" : "balanced", t);
                return {ctrl, ControlCommand::descend(p.descend_speed)};
            }
            return {ctrl, ControlCommand::move_horizontal(*dir, p.near_speed)};
        }

        case ControllerMode::Descend: {
            ++ctrl.steps_in_mode;
            if (drone.position.z() <= p.z_land) {
                enter_mode(ctrl, ControllerMode::Landed, "touchdown", t);
                return {ctrl, ControlCommand::land()};
            }
            return {ctrl, ControlCommand::descend(p.descend_speed)};
        }

        case ControllerMode::Landed:
        case ControllerMode::Failed:
            return {ctrl, ControlCommand::hover()};
    }
    return {ctrl, ControlCommand::hover()};
}

}  // namespace luxland
