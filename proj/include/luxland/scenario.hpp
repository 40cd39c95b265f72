#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "luxland/guidance.hpp"
#include "luxland/lightfield.hpp"

namespace luxland {

enum class ControllerKind { ArPD, SPD, Hybrid };

const char* controller_name(ControllerKind kind);

// Rectangular grid of start positions at a fixed height.
struct StartGrid {
    double x0 = 0.05, x1 = 0.6;
    double y0 = 0.05, y1 = 0.6;
    int nx = 10, ny = 10;
    double z = 1.1;
};

struct ScenarioConfig {
    Environment environment;
    ControllerKind controller = ControllerKind::Hybrid;
    int pd_count = 3;             // ArPD array size
    double array_radius = 0.04;   // [m] mount circle radius
    PDResponse response;          // per-channel electro-optics
    Vec3 start{3.0, 0.0, 1.0};
    std::optional<StartGrid> grid;
    double dt = 0.02;             // [s]
    double max_time = 90.0;       // [s]
    std::uint64_t seed = 1;
    ActuationNoise noise;
    GuidanceParams params;
    InterferenceModel interference;  // amplitude 0 disables injection
    bool record_trajectory = true;
    bool record_traces = false;

    void validate() const;        // throws with the offending field name
    PDLayout make_layout() const;
};

// The documented calibration: these values reproduce the reference behaviors
// (crossover radius, operating-range ratio, landing accuracy scale).
PDResponse calibrated_response();
LightSource calibrated_bulb();
ActuationNoise calibrated_noise();
ScenarioConfig default_scenario();

enum class Outcome { Landed, Failed, Timeout };

const char* outcome_name(Outcome o);

struct ModeTransition {
    double t = 0.0;
    std::string from, to, trigger;
};

struct TrajectoryPoint {
    double t = 0.0;
    Vec3 position{0.0, 0.0, 0.0};
    double yaw = 0.0;
    double tilt = 0.0;  // commanded motorized tilt (hybrid); pi/2 otherwise
    std::string mode;
};

struct RunResult {
    Outcome outcome = Outcome::Timeout;
    std::string fail_reason;
    double landing_offset = 0.0;  // [m] horizontal, defined only for Landed
    double landing_time = 0.0;    // [s]
    double final_leg_time = 0.0;  // [s] NearFieldArPD entry -> touchdown (hybrid/ArPD)
    std::vector<TrajectoryPoint> trajectory;
    std::vector<ModeTransition> mode_log;
    std::vector<ReadingTrace> raw_traces;
    std::vector<ReadingTrace> filtered_traces;
};

// Steps sensing -> filter -> controller -> dynamics until touchdown, failure
// or max_time. Deterministic in cfg.seed, bitwise.
RunResult run_scenario(const ScenarioConfig& cfg);

struct CellResult {
    Vec3 start{0.0, 0.0, 0.0};
    Outcome outcome = Outcome::Timeout;
    double landing_offset = 0.0;
    double landing_time = 0.0;
};

struct SweepStats {
    double mean_offset = 0.0;    // over landed cells
    double median_offset = 0.0;
    double mean_time = 0.0;
    double success_rate = 0.0;
    int cells = 0;
};

struct SweepResult {
    std::vector<CellResult> cells;  // row-major, x fastest
    SweepStats stats;
};

// One run per grid cell with independent per-cell seeds; cells execute
// concurrently and merge by index, so results are order-independent.
SweepResult sweep_start_grid(const ScenarioConfig& cfg);

enum class RangeVariant { DownwardArray, SideFacing, Hybrid };

const char* range_variant_name(RangeVariant v);

struct OperatingRange {
    double r_min = 0.0;
    double r_max = 0.0;
    bool valid = false;  // false when no radius qualifies
};

// Brute-force radial sweep (1 cm steps) of the bearing-estimation error under
// the noise-free calibrated sensor model; the range is the longest contiguous
// band where the bearing error stays below 30 degrees and the signal clears
// the ADC floor (2 counts).
OperatingRange compute_operating_range(RangeVariant variant, double height,
                                       const Environment& env,
                                       const PDResponse& response,
                                       double r_limit = 30.0);

struct NamedEnvironment {
    std::string name;
    Environment env;
    Vec3 start;           // reference start position
    Vec3 alt_start;       // secondary start (env 1's far point); zero if unused
    bool expect_success = true;
};

// The five indoor NLOS reference scenes. Dimensions are documented constants:
// the originals give only mockups.
//   env1 far_opening: station room and a distant wall with a 0.9 m opening;
//        the near start senses the lit back wall through the opening, the far
//        start is beyond sensing range.
//   env2 partial_open: a half-room wall; the drone rounds its open end.
//   env3 occluded: the start is boxed in with no light path at all.
//   env4 door: two rooms joined by a 0.9 m doorway.
//   env5 corner: an L-shaped corridor; the lit far wall guides the drone
//        around the corner.
std::vector<NamedEnvironment> reference_environments();

enum class ReferenceField { Bulb, NoLens, Lens1, Lens2 };

// Synthesized measured-field grids for the field-shape study: each grid
// samples the downward-PD signal of its generating sources on a 3D lattice.
// Bulb is concave and centered; the others have off-center peaks with a local
// minimum or saddle at the station.
MeasuredFieldGrid reference_field_grid(ReferenceField kind);

// CSV/JSON/SVG report builders (strings; callers persist via atomic_write).
std::string trajectory_csv(const RunResult& result);
std::string mode_log_csv(const RunResult& result);
std::string result_json(const RunResult& result);
std::string heatmap_csv(const SweepResult& sweep);
std::string heatmap_svg(const SweepResult& sweep);
std::string sweep_stats_json(const SweepResult& sweep);

}  // namespace luxland
