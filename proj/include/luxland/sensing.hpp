#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "luxland/geometry.hpp"
#include "luxland/lightfield.hpp"

namespace luxland {

// One photodiode channel's mounting geometry in the drone body frame.
// tilt 0 is side-facing (normal in the azimuth direction), pi/2 is fully
// downward facing.
struct PDMount {
    Vec3 offset{0.0, 0.0, 0.0};  // [m], body frame, palm-size bound 0.2 m
    double azimuth = 0.0;        // [rad], body frame heading of the mount
    double tilt = kPi / 2.0;     // [rad] in [0, pi/2]
    bool motorized = false;

    void validate() const;

    Vec3 world_position(const Pose& drone) const {
        return drone.position + rotate_z(offset, drone.yaw);
    }

    // Outward direction the PD faces.
    Vec3 world_normal(const Pose& drone) const {
        const double a = drone.yaw + azimuth;
        const double ct = std::cos(tilt);
        return Vec3(ct * std::cos(a), ct * std::sin(a), -std::sin(tilt));
    }
};

// Electro-optical model of one PD channel including the ADC.
struct PDResponse {
    double angular_exponent = 1.0;  // k >= 1; reading ~ cos^k(incidence)
    double gain = 1000.0;           // counts per au (pre-ADC conversion)
    int adc_bits = 16;              // in [8, 16]
    double full_scale = 2.0;        // [au] mapped to the top ADC code
    double noise_sigma = 0.0;       // [au], additive gaussian before the ADC

    void validate() const;

    int max_count() const { return (1 << adc_bits) - 1; }

    int quantize(double signal_au) const {
        const double frac = std::clamp(signal_au / full_scale, 0.0, 1.0);
        return static_cast<int>(std::lround(frac * max_count()));
    }
};

// Square-pulse interference from the drone's own IR height sensor.
struct InterferenceModel {
    double amplitude = 0.0;  // [au] added while the pulse is on
    double period = 0.1;     // [s] > 0
    double duty = 0.5;       // on fraction in (0, 1)
    double phase = 0.0;      // [s]

    void validate() const;

    bool active(double t) const {
        double u = std::fmod(t - phase, period);
        if (u < 0.0) u += period;
        return u < duty * period;
    }
};

// Time series of ADC readings for one channel.
struct ReadingTrace {
    std::vector<double> timestamps;  // [s], strictly increasing
    std::vector<int> values;         // ADC counts

    void validate() const;
};

// Analog PD signal in au: every arriving light component weighted by
// cos^k(incidence) against the PD normal, plus the isotropic ambient at
// weight 1/2. No noise, no quantization.
double pd_signal(const PDMount& pd, const PDResponse& resp, const Pose& drone,
                 const Environment& env);

// Same, but with the environment's bounce patches precomputed.
double pd_signal(const PDMount& pd, const PDResponse& resp, const Pose& drone,
                 const Environment& env, const PatchCache& cache);

// Digital reading: quantize(signal + gaussian noise). Deterministic in the
// seed; identical inputs and seed give identical counts.
int pd_reading(const PDMount& pd, const PDResponse& resp, const Pose& drone,
               const Environment& env, std::uint64_t rng_seed);
int pd_reading(const PDMount& pd, const PDResponse& resp, const Pose& drone,
               const Environment& env, const PatchCache& cache,
               std::uint64_t rng_seed);

// Adds amplitude*gain counts to samples inside each duty-on window, clamped
// at the ADC ceiling.
ReadingTrace apply_interference(const ReadingTrace& trace, const InterferenceModel& model,
                                const PDResponse& resp);

// Trailing rolling minimum: output[i] = min(values[max(0, i-window+1) ..= i]).
// Captures the interference-off floor; causal so it can run online.
ReadingTrace rolling_min_filter(const ReadingTrace& trace, int window);

// Streaming form of the same filter for the simulation loop.
class RollingMin {
public:
    explicit RollingMin(int window);
    int push(int value);  // returns the filtered value at this sample

private:
    int window_;
    std::vector<int> recent_;  // ring of the last `window_` raw values
    std::size_t head_ = 0;
    std::size_t count_ = 0;
};

// CSV export: t,pd_id,raw,filtered.
std::string trace_csv(const std::vector<ReadingTrace>& raw,
                      const std::vector<ReadingTrace>& filtered);

}  // namespace luxland
