#include "luxland/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "luxland/rng.hpp"

namespace luxland {

namespace {

using nlohmann::json;

constexpr std::uint64_t kStreamReading = 1;
constexpr std::uint64_t kStreamActuation = 2;
constexpr std::uint64_t kStreamCell = 3;

}  // namespace

const char* controller_name(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::ArPD: return "arpd";
        case ControllerKind::SPD: return "spd";
        case ControllerKind::Hybrid: return "hybrid";
    }
    return "?";
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Landed: return "Landed";
        case Outcome::Failed: return "Failed";
        case Outcome::Timeout: return "Timeout";
    }
    return "?";
}

const char* range_variant_name(RangeVariant v) {
    switch (v) {
        case RangeVariant::DownwardArray: return "downward_array";
        case RangeVariant::SideFacing: return "side_facing";
        case RangeVariant::Hybrid: return "hybrid";
    }
    return "?";
}

void ScenarioConfig::validate() const {
    environment.validate();
    if (!(dt > 0.0 && dt <= kMaxStepDt))
        throw std::invalid_argument("ScenarioConfig: dt must be in (0, 0.1]");
    if (!(max_time > 0.0))
        throw std::invalid_argument("ScenarioConfig: max_time must be > 0");
    if (!(start.z() > 0.0) && !grid)
        throw std::invalid_argument("ScenarioConfig: start.z must be > 0");
    if (grid) {
        if (grid->nx < 2 || grid->ny < 2)
            throw std::invalid_argument("ScenarioConfig: grid resolution must be >= 2 per axis");
        if (!(grid->z > 0.0))
            throw std::invalid_argument("ScenarioConfig: grid.z must be > 0");
    }
    if (controller == ControllerKind::ArPD && pd_count < 2)
        throw std::invalid_argument("ScenarioConfig: pd_count must be >= 2 for arpd");
    if (!(array_radius > 0.0 && array_radius <= 0.2))
        throw std::invalid_argument("ScenarioConfig: array_radius must be in (0, 0.2]");
    response.validate();
    if (interference.amplitude > 0.0) interference.validate();
}

PDLayout ScenarioConfig::make_layout() const {
    switch (controller) {
        case ControllerKind::ArPD: return PDLayout::arpd(pd_count, response, array_radius);
        case ControllerKind::SPD: return PDLayout::spd(response, array_radius);
        case ControllerKind::Hybrid: return PDLayout::hybrid(response, array_radius);
    }
    throw std::invalid_argument("ScenarioConfig: unknown controller");
}

PDResponse calibrated_response() {
    PDResponse r;
    r.angular_exponent = 22.0;  // places the downward-array edge at the crossover
    r.gain = 1000.0;
    r.adc_bits = 16;
    r.full_scale = 2.0;
    r.noise_sigma = 5e-5;
    return r;
}

LightSource calibrated_bulb() {
    LightSource s;
    s.position = Vec3(0.0, 0.0, 0.05);
    s.axis = Vec3(0.0, 0.0, 1.0);
    s.power = 1.0;
    s.lambert_exponent = 1.3;
    return s;
}

ActuationNoise calibrated_noise() {
    ActuationNoise n;
    n.velocity_sigma = 0.02;
    n.yaw_sigma = 0.005;
    n.drift_sigma = 0.005;
    n.drift_interval = 5.0;
    return n;
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.environment.source = calibrated_bulb();
    cfg.response = calibrated_response();
    cfg.noise = calibrated_noise();
    cfg.params.min_signal = GuidanceParams::default_min_signal(cfg.response);
    return cfg;
}

namespace {

// ---------------------------------------------------------------------------
// run-loop controllers

struct StepOutput {
    ControlCommand cmd;
    const char* mode;
    const char* trigger = nullptr;  // set when the mode changed this step
    bool failed = false;
    std::string fail_reason;
};

class Runner {
public:
    virtual ~Runner() = default;
    virtual StepOutput step(const std::vector<double>& readings, const DroneState& drone) = 0;
    virtual double motor_tilt() const { return kPi / 2.0; }
    virtual const char* mode() const = 0;
};

class HybridRunner : public Runner {
public:
    HybridRunner(const PDLayout& layout, const GuidanceParams& params)
        : layout_(layout), state_(ControllerState::init(layout, params)) {}

    StepOutput step(const std::vector<double>& readings, const DroneState& drone) override {
        const ControllerMode before = state_.mode;
        auto [next, cmd] = hybrid_step(std::move(state_), readings, drone, layout_);
        state_ = std::move(next);
        StepOutput out{cmd, mode_name(state_.mode)};
        if (state_.mode != before) out.trigger = state_.last_trigger.c_str();
        if (state_.mode == ControllerMode::Failed) {
            out.failed = true;
            out.fail_reason = state_.fail_reason;
        }
        return out;
    }

    double motor_tilt() const override { return state_.tilt; }
    const char* mode() const override { return mode_name(state_.mode); }

private:
    PDLayout layout_;
    ControllerState state_;
};

// Plain downward array: follow the weighted vector sum, descend when the
// readings agree.
class ArpdRunner : public Runner {
public:
    ArpdRunner(const PDLayout& layout, const GuidanceParams& params)
        : layout_(layout), params_(params), warmup_(params.filter_window) {}

    StepOutput step(const std::vector<double>& readings, const DroneState& drone) override {
        const char* prev = mode_;
        if (warmup_ > 0) {
            --warmup_;  // let the rolling-min window fill before acting
            watchdog(readings, drone.time);
            return {ControlCommand::hover(), mode_, nullptr};
        }
        if (watchdog(readings, drone.time)) {
            mode_ = "Failed";
            return {ControlCommand::hover(), mode_, prev != mode_ ? "signal lost" : nullptr,
                    true, "signal lost"};
        }
        if (descending_) {
            if (drone.position.z() <= params_.z_land) {
                mode_ = "Landed";
                return {ControlCommand::land(), mode_, prev != mode_ ? "touchdown" : nullptr};
            }
            return {ControlCommand::descend(params_.descend_speed), mode_, nullptr};
        }
        const auto dir = arpd_direction(readings, layout_, drone.yaw, params_.min_signal);
        if (!dir || equal_intensity_check(readings, params_)) {
            descending_ = true;
            mode_ = "Descend";
            return {ControlCommand::descend(params_.descend_speed), mode_,
                    dir ? "equal_intensity" : "balanced"};
        }
        return {ControlCommand::move_horizontal(*dir, params_.approach_speed), mode_, nullptr};
    }

    const char* mode() const override { return mode_; }

private:
    bool watchdog(const std::vector<double>& readings, double t) {
        bool any = false;
        for (double r : readings) any = any || r >= params_.min_signal;
        if (any) last_signal_ = t;
        return t - last_signal_ >= params_.signal_lost_timeout;
    }

    PDLayout layout_;
    GuidanceParams params_;
    bool descending_ = false;
    const char* mode_ = "NearFieldArPD";
    int warmup_ = 0;
    double last_signal_ = 0.0;
};

// Single PD, virtual array by spinning: sweep, travel a leg, repeat; descend
// once the swept profile flattens out (the drone is on top of the source).
class SpdRunner : public Runner {
public:
    SpdRunner(const PDLayout& layout, const GuidanceParams& params)
        : layout_(layout), params_(params), warmup_(params.filter_window) {}

    StepOutput step(const std::vector<double>& readings, const DroneState& drone) override {
        const char* prev = mode_;
        if (warmup_ > 0) {
            --warmup_;  // let the rolling-min window fill before acting
            watchdog(readings, drone.time);
            return {ControlCommand::hover(), mode_, nullptr};
        }
        // the sweep phase is watchdog-exempt: an off-center PD reads nothing
        // for much of a revolution; staleness is judged when the sweep ends
        if (phase_ != Phase::Sweep && watchdog(readings, drone.time)) {
            mode_ = "Failed";
            return {ControlCommand::hover(), mode_, prev != mode_ ? "signal lost" : nullptr,
                    true, "signal lost"};
        }
        switch (phase_) {
            case Phase::Sweep: {
                watchdog(readings, drone.time);  // keep last_signal_ fresh
                if (prev_yaw_valid_)
                    accum_ += std::abs(wrap_pi(drone.yaw - prev_yaw_));
                prev_yaw_ = drone.yaw;
                prev_yaw_valid_ = true;
                samples_.emplace_back(drone.yaw + layout_.mounts[0].azimuth, readings[0]);
                if (accum_ >= 2.0 * kPi) {
                    double vmin = samples_[0].second, vmax = samples_[0].second;
                    for (const auto& s : samples_) {
                        vmin = std::min(vmin, s.second);
                        vmax = std::max(vmax, s.second);
                    }
                    const bool strong = vmax >= params_.min_signal;
                    // the ring spread reads ~2.5x the array's equal-check for
                    // the same center offset, since legs stop past the peak
                    if (strong &&
                        (vmax - vmin) / std::max(vmax, 1.0) <= 2.5 * params_.equal_tol) {
                        phase_ = Phase::Descend;  // flat profile: directly overhead
                        mode_ = "Descend";
                        reset_sweep();
                        return {ControlCommand::descend(params_.descend_speed), mode_, "flat_profile"};
                    }
                    const auto bearing = samples_.size() >= 8
                                             ? spd_sweep_direction(samples_, params_.min_signal)
                                             : std::nullopt;
                    reset_sweep();
                    if (bearing) {
                        heading_ = *bearing;
                        phase_ = Phase::Travel;
                        mode_ = "Approach";
                        leg_start_.reset();
                        leg_peak_ = 0.0;
                        return {ControlCommand::hover(), mode_, "sweep_peak"};
                    }
                    if (drone.time - last_signal_ >= params_.signal_lost_timeout) {
                        mode_ = "Failed";
                        return {ControlCommand::hover(), mode_, "signal lost", true,
                                "signal lost"};
                    }
                    return {ControlCommand::hover(), mode_, nullptr};  // flat+weak: resweep
                }
                return {ControlCommand::yaw(params_.yaw_rate), mode_, nullptr};
            }
            case Phase::Travel: {
                if (!leg_start_) leg_start_ = drone.position;
                leg_peak_ = std::max(leg_peak_, readings[0]);
                // stop the leg past the intensity peak (overshot the closest
                // approach) or after the configured distance
                const double drop = leg_peak_ - readings[0];
                const bool past_peak = leg_peak_ >= params_.min_signal &&
                                       drop >= std::max(0.02 * leg_peak_, 5.0);
                if (past_peak ||
                    horizontal_distance(drone.position, *leg_start_) >= params_.leg_distance) {
                    phase_ = Phase::Sweep;
                    mode_ = "YawSweep";
                    return {ControlCommand::hover(), mode_, "leg_done"};
                }
                const Vec3 dir(std::cos(heading_), std::sin(heading_), 0.0);
                return {ControlCommand::move_horizontal(dir, params_.near_speed), mode_, nullptr};
            }
            case Phase::Descend: {
                if (drone.position.z() <= params_.z_land) {
                    mode_ = "Landed";
                    return {ControlCommand::land(), mode_, prev != mode_ ? "touchdown" : nullptr};
                }
                return {ControlCommand::descend(params_.descend_speed), mode_, nullptr};
            }
        }
        return {ControlCommand::hover(), mode_, nullptr};
    }

    const char* mode() const override { return mode_; }

private:
    enum class Phase { Sweep, Travel, Descend };

    void reset_sweep() {
        samples_.clear();
        accum_ = 0.0;
        prev_yaw_valid_ = false;
    }

    bool watchdog(const std::vector<double>& readings, double t) {
        bool any = false;
        for (double r : readings) any = any || r >= params_.min_signal;
        if (any) last_signal_ = t;
        return t - last_signal_ >= params_.signal_lost_timeout;
    }

    PDLayout layout_;
    GuidanceParams params_;
    Phase phase_ = Phase::Sweep;
    const char* mode_ = "YawSweep";
    std::vector<std::pair<double, double>> samples_;
    double accum_ = 0.0;
    double prev_yaw_ = 0.0;
    bool prev_yaw_valid_ = false;
    double heading_ = 0.0;
    std::optional<Vec3> leg_start_;
    double leg_peak_ = 0.0;
    int warmup_ = 0;
    double last_signal_ = 0.0;
};

bool segment_hits_any_wall(const Vec3& a, const Vec3& b, const Environment& env) {
    if (env.surfaces.empty()) return false;
    return !los_visible(a, b, env);
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const Environment& env = cfg.environment;
    const PatchCache cache = PatchCache::build(env);
    const PDLayout layout = cfg.make_layout();
    const Vec3 station = env.station_center();

    std::unique_ptr<Runner> runner;
    switch (cfg.controller) {
        case ControllerKind::Hybrid:
            runner = std::make_unique<HybridRunner>(layout, cfg.params);
            break;
        case ControllerKind::ArPD:
            runner = std::make_unique<ArpdRunner>(layout, cfg.params);
            break;
        case ControllerKind::SPD:
            runner = std::make_unique<SpdRunner>(layout, cfg.params);
            break;
    }

    DroneState drone;
    drone.position = cfg.start;
    SplitMix64 act_rng(mix_seed(cfg.seed, kStreamActuation));
    DriftState drift;

    std::vector<RollingMin> filters;
    for (std::size_t i = 0; i < layout.mounts.size(); ++i)
        filters.emplace_back(cfg.params.filter_window);

    RunResult result;
    if (cfg.record_traces) {
        result.raw_traces.resize(layout.mounts.size());
        result.filtered_traces.resize(layout.mounts.size());
    }
    result.mode_log.push_back({0.0, "", runner->mode(), "start"});
    const int interference_add =
        static_cast<int>(std::lround(cfg.interference.amplitude * cfg.response.gain));
    double near_entry = -1.0;

    std::vector<double> readings(layout.mounts.size(), 0.0);
    const int max_steps = static_cast<int>(std::ceil(cfg.max_time / cfg.dt));
    for (int step_idx = 0; step_idx <= max_steps; ++step_idx) {
        const double t = drone.time;
        const Pose pose = drone.pose();

        for (std::size_t i = 0; i < layout.mounts.size(); ++i) {
            PDMount mount = layout.mounts[i];
            if (mount.motorized) mount.tilt = runner->motor_tilt();
            int raw = pd_reading(mount, layout.responses[i], pose, env, cache,
                                 mix_seed(cfg.seed, kStreamReading,
                                          static_cast<std::uint64_t>(step_idx), i));
            if (interference_add > 0 && cfg.interference.active(t))
                raw = std::min(raw + interference_add, layout.responses[i].max_count());
            const int filt = filters[i].push(raw);
            readings[i] = filt;
            if (cfg.record_traces) {
                result.raw_traces[i].timestamps.push_back(t);
                result.raw_traces[i].values.push_back(raw);
                result.filtered_traces[i].timestamps.push_back(t);
                result.filtered_traces[i].values.push_back(filt);
            }
        }

        const std::string mode_before = runner->mode();
        const StepOutput out = runner->step(readings, drone);
        if (out.trigger != nullptr && mode_before != out.mode)
            result.mode_log.push_back({t, mode_before, out.mode, out.trigger});
        if (cfg.record_trajectory)
            result.trajectory.push_back(
                {t, drone.position, drone.yaw, runner->motor_tilt(), out.mode});

        if (near_entry < 0.0 && (std::string(out.mode) == "NearFieldArPD" ||
                                 std::string(out.mode) == "Descend"))
            near_entry = t;

        if (out.failed) {
            result.outcome = Outcome::Failed;
            result.fail_reason = out.fail_reason;
            result.landing_time = t;
            return result;
        }

        drift.update(t, cfg.noise, act_rng);
        const Vec3 prev_pos = drone.position;
        drone = luxland::step(drone, out.cmd, cfg.noise, drift, cfg.dt, act_rng);

        if (out.cmd.kind == CommandKind::Land) {
            result.outcome = Outcome::Landed;
            result.landing_time = drone.time;
            result.landing_offset = horizontal_distance(drone.position, station);
            result.final_leg_time = near_entry >= 0.0 ? drone.time - near_entry : 0.0;
            if (cfg.record_trajectory)
                result.trajectory.push_back({drone.time, drone.position, drone.yaw,
                                             runner->motor_tilt(), "Landed"});
            return result;
        }
        if (segment_hits_any_wall(prev_pos, drone.position, env)) {
            result.outcome = Outcome::Failed;
            result.fail_reason = "collision";
            result.landing_time = drone.time;
            result.mode_log.push_back({drone.time, out.mode, "Failed", "collision"});
            return result;
        }
    }
    result.outcome = Outcome::Timeout;
    result.landing_time = cfg.max_time;
    return result;
}

SweepResult sweep_start_grid(const ScenarioConfig& cfg) {
    if (!cfg.grid) throw std::invalid_argument("sweep_start_grid: grid spec missing");
    cfg.validate();
    const StartGrid& g = *cfg.grid;
    const int cells = g.nx * g.ny;

    SweepResult sweep;
    sweep.cells.resize(static_cast<std::size_t>(cells));

    std::atomic<int> next{0};
    const unsigned n_threads =
        std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    auto worker = [&]() {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= cells) return;
            const int iy = idx / g.nx;
            const int ix = idx % g.nx;
            ScenarioConfig cell_cfg = cfg;
            cell_cfg.grid.reset();
            cell_cfg.record_trajectory = false;
            cell_cfg.record_traces = false;
            cell_cfg.start =
                Vec3(g.x0 + (g.x1 - g.x0) * ix / (g.nx - 1),
                     g.y0 + (g.y1 - g.y0) * iy / (g.ny - 1), g.z);
            cell_cfg.seed = mix_seed(cfg.seed, kStreamCell, static_cast<std::uint64_t>(idx));
            const RunResult r = run_scenario(cell_cfg);
            CellResult& c = sweep.cells[static_cast<std::size_t>(idx)];
            c.start = cell_cfg.start;
            c.outcome = r.outcome;
            c.landing_offset = r.landing_offset;
            c.landing_time = r.landing_time;
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::vector<double> offsets, times;
    for (const auto& c : sweep.cells) {
        if (c.outcome != Outcome::Landed) continue;
        offsets.push_back(c.landing_offset);
        times.push_back(c.landing_time);
    }
    sweep.stats.cells = cells;
    sweep.stats.success_rate = static_cast<double>(offsets.size()) / cells;
    if (!offsets.empty()) {
        sweep.stats.mean_offset =
            std::accumulate(offsets.begin(), offsets.end(), 0.0) / offsets.size();
        sweep.stats.mean_time =
            std::accumulate(times.begin(), times.end(), 0.0) / times.size();
        std::sort(offsets.begin(), offsets.end());
        sweep.stats.median_offset = offsets[offsets.size() / 2];
    }
    return sweep;
}

OperatingRange compute_operating_range(RangeVariant variant, double height,
                                       const Environment& env,
                                       const PDResponse& response, double r_limit) {
    PDResponse resp = response;
    resp.noise_sigma = 0.0;  // range is ADC-resolution-limited, not noise-limited
    const double min_counts = 2.0;
    const double err_limit = 30.0 * kPi / 180.0;
    const Vec3 station = env.station_center();
    const PatchCache cache = PatchCache::build(env);

    const PDLayout down3 = PDLayout::arpd(3, resp);
    PDMount side;
    side.offset = Vec3(0.04, 0.0, 0.0);
    side.azimuth = 0.0;
    side.tilt = 0.0;

    const auto bearing_error_down = [&](double r) -> double {
        const Pose pose{station + Vec3(r, 0.0, height), 0.0};
        std::vector<double> readings(down3.mounts.size());
        double vmax = 0.0;
        for (std::size_t i = 0; i < down3.mounts.size(); ++i) {
            readings[i] = pd_reading(down3.mounts[i], resp, pose, env, cache, 0);
            vmax = std::max(vmax, readings[i]);
        }
        if (vmax < min_counts) return kPi;
        const auto dir = arpd_direction(readings, down3, 0.0, min_counts);
        if (!dir) return kPi;
        return std::acos(std::clamp(dir->dot(Vec3(-1.0, 0.0, 0.0)), -1.0, 1.0));
    };

    const auto bearing_error_swept = [&](double r, double tilt) -> double {
        PDMount pd = side;
        pd.tilt = tilt;
        std::vector<std::pair<double, double>> samples;
        const int n = 64;
        double vmax = 0.0;
        for (int i = 0; i < n; ++i) {
            const double yaw = 2.0 * kPi * i / n;
            const Pose pose{station + Vec3(r, 0.0, height), yaw};
            const double v = pd_reading(pd, resp, pose, env, cache, 0);
            vmax = std::max(vmax, v);
            samples.emplace_back(yaw, v);
        }
        if (vmax < min_counts) return kPi;
        const auto bearing = spd_sweep_direction(samples, min_counts);
        if (!bearing) return kPi;
        return std::abs(wrap_pi(*bearing - kPi));  // true bearing is -x
    };

    const auto best_tilt_at = [&](double r) -> double {
        // aim straight at the station and pick the strongest polar station
        double best_v = -1.0, best = 0.0;
        for (int i = 0; i < 16; ++i) {
            const double tilt = (kPi / 2.0) * i / 15;
            PDMount pd = side;
            pd.tilt = tilt;
            const Pose pose{station + Vec3(r, 0.0, height), kPi};  // facing -x
            const double v = pd_signal(pd, resp, pose, env, cache);
            if (v > best_v) {
                best_v = v;
                best = tilt;
            }
        }
        return best;
    };

    OperatingRange out;
    double run_start = -1.0;
    double best_len = 0.0;
    double r = 0.05;
    for (; r <= r_limit + 1e-9; r += 0.01) {
        bool ok = false;
        switch (variant) {
            case RangeVariant::DownwardArray:
                ok = bearing_error_down(r) < err_limit;
                break;
            case RangeVariant::SideFacing:
                ok = bearing_error_swept(r, 0.0) < err_limit;
                break;
            case RangeVariant::Hybrid:
                ok = bearing_error_down(r) < err_limit ||
                     bearing_error_swept(r, best_tilt_at(r)) < err_limit;
                break;
        }
        if (ok && run_start < 0.0) run_start = r;
        if (!ok && run_start >= 0.0) {
            if (r - run_start > best_len) {
                best_len = r - run_start;
                out.r_min = run_start;
                out.r_max = r - 0.01;
                out.valid = true;
            }
            run_start = -1.0;
        }
    }
    if (run_start >= 0.0 && r - run_start > best_len) {
        out.r_min = run_start;
        out.r_max = r_limit;
        out.valid = true;
    }
    return out;
}

std::vector<NamedEnvironment> reference_environments() {
    std::vector<NamedEnvironment> envs;
    const double wall_top = 2.5;
    const auto base_env = [] {
        Environment env;
        env.source = calibrated_bulb();
        env.patch_edge = 0.15;
        return env;
    };

    {
        // env1 far_opening: 2.4 m opening in a wall 2.5 m from the station,
        // bright back wall 1.0 m behind the station. The near start senses the
        // lit back-wall strip through the opening; the far start is out of
        // range of any reflected path.
        NamedEnvironment e;
        e.name = "env1_far_opening";
        e.env = base_env();
        e.env.surfaces = {
            Surface::wall({-6.0, 2.5}, {-1.2, 2.5}, 0.0, wall_top, 0.7),
            Surface::wall({1.2, 2.5}, {6.0, 2.5}, 0.0, wall_top, 0.7),
            Surface::wall({-2.2, -1.0}, {6.0, -1.0}, 0.0, wall_top, 0.8),
        };
        e.start = Vec3(2.8, 5.2, 1.0);
        e.alt_start = Vec3(10.0, 20.0, 1.0);
        envs.push_back(e);
    }
    {
        // env2 partial_open: half-room wall open for x > -0.3; a bright cabinet
        // panel on the far wall guides the drone around the open end at a
        // healthy angle to the shadow boundary.
        NamedEnvironment e;
        e.name = "env2_partial_open";
        e.env = base_env();
        e.env.surfaces = {
            Surface::wall({-5.0, 2.5}, {-0.3, 2.5}, 0.0, wall_top, 0.7),
            Surface::wall({-5.0, -1.5}, {1.55, -1.5}, 0.0, wall_top, 0.15),
            Surface::wall({1.55, -1.5}, {2.8, -1.5}, 0.0, wall_top, 0.85),
        };
        e.start = Vec3(-0.6, 3.6, 1.0);
        envs.push_back(e);
    }
    {
        // env3 occluded: the start is boxed in on all four sides; no light
        // path reaches the drone at all.
        NamedEnvironment e;
        e.name = "env3_occluded";
        e.env = base_env();
        e.env.surfaces = {
            Surface::wall({3.2, -0.8}, {3.2, 0.8}, 0.0, wall_top, 0.0),
            Surface::wall({4.8, -0.8}, {4.8, 0.8}, 0.0, wall_top, 0.0),
            Surface::wall({3.2, -0.8}, {4.8, -0.8}, 0.0, wall_top, 0.0),
            Surface::wall({3.2, 0.8}, {4.8, 0.8}, 0.0, wall_top, 0.0),
        };
        e.start = Vec3(4.0, 0.0, 1.0);
        e.expect_success = false;
        envs.push_back(e);
    }
    {
        // env4 door: 0.9 m doorway at x in [0.3, 1.2]; bright back wall 1.5 m
        // behind the station seen through the door.
        NamedEnvironment e;
        e.name = "env4_door";
        e.env = base_env();
        e.env.surfaces = {
            Surface::wall({-5.0, 3.0}, {0.3, 3.0}, 0.0, wall_top, 0.7),
            Surface::wall({1.2, 3.0}, {5.0, 3.0}, 0.0, wall_top, 0.7),
            Surface::wall({-5.0, -1.5}, {5.0, -1.5}, 0.0, wall_top, 0.8),
        };
        e.start = Vec3(0.35, 4.6, 1.0);
        envs.push_back(e);
    }
    {
        // env5 corner: wall ending at x = 1.6 hides the station; the lit
        // back-wall strip beyond the corner pulls the drone around it.
        NamedEnvironment e;
        e.name = "env5_corner";
        e.env = base_env();
        e.env.surfaces = {
            Surface::wall({-6.0, 2.0}, {1.6, 2.0}, 0.0, wall_top, 0.7),
            Surface::wall({-6.0, -2.0}, {1.2, -2.0}, 0.0, wall_top, 0.8),
            Surface::wall({5.5, -2.0}, {5.5, 5.0}, 0.0, wall_top, 0.8),
        };
        e.start = Vec3(3.0, 4.1, 1.0);
        envs.push_back(e);
    }
    return envs;
}

MeasuredFieldGrid reference_field_grid(ReferenceField kind) {
    std::vector<LightSource> sources;
    std::string label;
    switch (kind) {
        case ReferenceField::Bulb:
            sources = {calibrated_bulb()};
            label = "bulb";
            break;
        case ReferenceField::NoLens: {
            // bimodal: two displaced narrow emitters, saddle at the station
            LightSource a = calibrated_bulb();
            a.power = 0.6;
            a.lambert_exponent = 6.0;
            a.position = Vec3(-1.7, 0.0, 0.05);
            LightSource b = a;
            b.position = Vec3(1.7, 0.0, 0.05);
            sources = {a, b};
            label = "no_lens";
            break;
        }
        case ReferenceField::Lens1: {
            // peaks diffused out along the diagonal, local minimum at center
            LightSource a = calibrated_bulb();
            a.power = 0.6;
            a.lambert_exponent = 6.0;
            a.position = Vec3(-1.35, -1.35, 0.05);
            LightSource b = a;
            b.position = Vec3(1.35, 1.35, 0.05);
            sources = {a, b};
            label = "lens1";
            break;
        }
        case ReferenceField::Lens2: {
            // ring of four peaks around the station
            sources.reserve(4);
            for (int i = 0; i < 4; ++i) {
                LightSource s = calibrated_bulb();
                s.power = 0.35;
                s.lambert_exponent = 6.0;
                const double a = kPi / 2.0 * i;
                s.position = Vec3(1.7 * std::cos(a), 1.7 * std::sin(a), 0.05);
                sources.push_back(s);
            }
            label = "lens2";
            break;
        }
    }

    // The bulb grid is sampled through the calibrated downward-PD response so
    // grid-backed runs behave exactly like the analytic calibration. The
    // lens/no-lens grids model the measured field *shapes* directly (broad
    // off-center lobes): they came from a different optical assembly and only
    // their shape matters here.
    const double k =
        kind == ReferenceField::Bulb ? calibrated_response().angular_exponent : 0.0;
    MeasuredFieldGrid grid;
    grid.origin = Vec3(-2.0, -2.0, 0.3);
    grid.spacing = Vec3(0.1, 0.1, 0.25);
    grid.nx = 41;
    grid.ny = 41;
    grid.nz = 5;
    grid.label = label;
    grid.samples.reserve(static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz);
    for (int iz = 0; iz < grid.nz; ++iz) {
        for (int iy = 0; iy < grid.ny; ++iy) {
            for (int ix = 0; ix < grid.nx; ++ix) {
                const Vec3 p = grid.origin + Vec3(ix * grid.spacing.x(),
                                                  iy * grid.spacing.y(),
                                                  iz * grid.spacing.z());
                double v = 0.0;
                for (const auto& s : sources) {
                    const Vec3 d = p - s.position;
                    const double r2 = d.squaredNorm();
                    const double r = std::sqrt(r2);
                    const double cos_emit = d.z() / r;
                    if (cos_emit <= 0.0) continue;
                    v += s.power * std::pow(cos_emit, s.lambert_exponent + k) / r2;
                }
                grid.samples.push_back(v);
            }
        }
    }
    grid.validate();
    return grid;
}

// ---------------------------------------------------------------------------
// report builders

std::string trajectory_csv(const RunResult& result) {
    std::ostringstream out;
    out << "t,x,y,z,yaw,mode\n";
    for (const auto& p : result.trajectory) {
        out << p.t << ',' << p.position.x() << ',' << p.position.y() << ','
            << p.position.z() << ',' << p.yaw << ',' << p.mode << '\n';
    }
    return out.str();
}

std::string mode_log_csv(const RunResult& result) {
    std::ostringstream out;
    out << "t,mode_from,mode_to,trigger\n";
    for (const auto& m : result.mode_log)
        out << m.t << ',' << m.from << ',' << m.to << ',' << m.trigger << '\n';
    return out.str();
}

std::string result_json(const RunResult& result) {
    json j;
    j["outcome"] = outcome_name(result.outcome);
    if (result.outcome == Outcome::Failed) j["fail_reason"] = result.fail_reason;
    if (result.outcome == Outcome::Landed) {
        j["landing_offset_m"] = result.landing_offset;
        j["final_leg_time_s"] = result.final_leg_time;
    }
    j["landing_time_s"] = result.landing_time;
    j["mode_transitions"] = result.mode_log.size();
    return j.dump(2) + "\n";
}

std::string heatmap_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "x,y,offset_m,time_s,outcome\n";
    for (const auto& c : sweep.cells) {
        out << c.start.x() << ',' << c.start.y() << ',';
        if (c.outcome == Outcome::Landed)
            out << c.landing_offset;
        else
            out << "nan";
        out << ',' << c.landing_time << ',' << outcome_name(c.outcome) << '\n';
    }
    return out.str();
}

std::string heatmap_svg(const SweepResult& sweep) {
    // cell colors scale blue (low offset) to red (high); failures are gray
    double max_offset = 1e-9;
    for (const auto& c : sweep.cells)
        if (c.outcome == Outcome::Landed) max_offset = std::max(max_offset, c.landing_offset);
    int nx = 0;
    for (const auto& c : sweep.cells) {
        if (c.start.y() != sweep.cells[0].start.y()) break;
        ++nx;
    }
    if (nx == 0) nx = 1;
    const int ny = static_cast<int>(sweep.cells.size()) / nx;
    const int cell_px = 24;
    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << nx * cell_px
        << "' height='" << ny * cell_px << "'>\n";
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const auto& c = sweep.cells[static_cast<std::size_t>(iy) * nx + ix];
            int rr = 128, gg = 128, bb = 128;
            if (c.outcome == Outcome::Landed) {
                const double f = std::clamp(c.landing_offset / max_offset, 0.0, 1.0);
                rr = static_cast<int>(255 * f);
                gg = 40;
                bb = static_cast<int>(255 * (1.0 - f));
            }
            out << "<rect x='" << ix * cell_px << "' y='" << (ny - 1 - iy) * cell_px
                << "' width='" << cell_px << "' height='" << cell_px << "' fill='rgb("
                << rr << ',' << gg << ',' << bb << ")'/>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string sweep_stats_json(const SweepResult& sweep) {
    json j;
    j["cells"] = sweep.stats.cells;
    j["success_rate"] = sweep.stats.success_rate;
    j["mean_offset_m"] = sweep.stats.mean_offset;
    j["median_offset_m"] = sweep.stats.median_offset;
    j["mean_time_s"] = sweep.stats.mean_time;
    return j.dump(2) + "\n";
}

}  // namespace luxland
