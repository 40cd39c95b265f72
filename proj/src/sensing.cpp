#include "luxland/sensing.hpp"

#include <deque>
#include <sstream>

#include "luxland/rng.hpp"

namespace luxland {

namespace {

double cos_pow(double c, double k) {
    if (c <= 0.0) return 0.0;
    if (k == 1.0) return c;
    return std::pow(c, k);
}

// Sum of arriving components weighted by cos^k against the PD normal.
// Grid-source direct light is normalized to the downward reference: the grids
// were measured with a downward-facing PD, so a downward mount reproduces the
// interpolated sample exactly and tilted mounts scale relative to that.
double weighted_components(const PDMount& pd, const PDResponse& resp, const Pose& drone,
                           const Environment& env, const PatchCache& cache) {
    const Vec3 pos = pd.world_position(drone);
    const Vec3 normal = pd.world_normal(drone);
    const double k = resp.angular_exponent;

    double acc = 0.0;
    const Vec3 src = env.source_position();
    if ((pos - src).squaredNorm() > 1e-18) {
        const double direct = direct_irradiance(pos, env);
        if (direct > 0.0) {
            const Vec3 toward_src = (src - pos).normalized();
            double w = cos_pow(normal.dot(toward_src), k);
            if (!env.has_analytic_source()) {
                const double down_ref = cos_pow(-toward_src.z(), k);
                w = down_ref > 1e-12 ? w / down_ref : 0.0;
            }
            acc += direct * w;
        }
    }

    std::vector<IrradianceContribution> bounce;
    cache.contributions(pos, env, bounce);
    for (const auto& part : bounce)
        acc += part.irradiance * cos_pow(normal.dot(part.toward_emitter), k);

    acc += 0.5 * env.ambient_dc;  // isotropic background
    return acc;
}

}  // namespace

void PDMount::validate() const {
    if (tilt < 0.0 || tilt > kPi / 2.0 + 1e-12)
        throw std::invalid_argument("PDMount: tilt must be in [0, pi/2]");
    if (offset.norm() > 0.2)
        throw std::invalid_argument("PDMount: offset exceeds the 0.2 m palm-size bound");
}

void PDResponse::validate() const {
    if (angular_exponent < 1.0)
        throw std::invalid_argument("PDResponse: angular_exponent must be >= 1");
    if (!(gain > 0.0)) throw std::invalid_argument("PDResponse: gain must be > 0");
    if (adc_bits < 8 || adc_bits > 16)
        throw std::invalid_argument("PDResponse: adc_bits must be in [8, 16]");
    if (!(full_scale > 0.0))
        throw std::invalid_argument("PDResponse: full_scale must be > 0");
    if (noise_sigma < 0.0)
        throw std::invalid_argument("PDResponse: noise_sigma must be >= 0");
}

void InterferenceModel::validate() const {
    if (amplitude < 0.0)
        throw std::invalid_argument("InterferenceModel: amplitude must be >= 0");
    if (!(period > 0.0))
        throw std::invalid_argument("InterferenceModel: period must be > 0");
    if (!(duty > 0.0 && duty < 1.0))
        throw std::invalid_argument("InterferenceModel: duty must be in (0, 1)");
}

void ReadingTrace::validate() const {
    if (timestamps.size() != values.size())
        throw std::invalid_argument("ReadingTrace: length mismatch");
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (!(timestamps[i] > timestamps[i - 1]))
            throw std::invalid_argument("ReadingTrace: timestamps must be strictly increasing");
    }
}

double pd_signal(const PDMount& pd, const PDResponse& resp, const Pose& drone,
                 const Environment& env) {
    return weighted_components(pd, resp, drone, env, PatchCache::build(env));
}

double pd_signal(const PDMount& pd, const PDResponse& resp, const Pose& drone,
                 const Environment& env, const PatchCache& cache) {
    return weighted_components(pd, resp, drone, env, cache);
}

int pd_reading(const PDMount& pd, const PDResponse& resp, const Pose& drone,
               const Environment& env, std::uint64_t rng_seed) {
    return pd_reading(pd, resp, drone, env, PatchCache::build(env), rng_seed);
}

int pd_reading(const PDMount& pd, const PDResponse& resp, const Pose& drone,
               const Environment& env, const PatchCache& cache,
               std::uint64_t rng_seed) {
    double signal = weighted_components(pd, resp, drone, env, cache);
    if (resp.noise_sigma > 0.0) {
        SplitMix64 rng(rng_seed);
        signal += resp.noise_sigma * rng.gaussian();
    }
    return resp.quantize(signal);
}

ReadingTrace apply_interference(const ReadingTrace& trace, const InterferenceModel& model,
                                const PDResponse& resp) {
    trace.validate();
    model.validate();
    if (trace.values.empty())
        throw std::invalid_argument("apply_interference: empty trace");
    ReadingTrace out = trace;
    const int add = static_cast<int>(std::lround(model.amplitude * resp.gain));
    if (add == 0) return out;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        if (model.active(out.timestamps[i]))
            out.values[i] = std::min(out.values[i] + add, resp.max_count());
    }
    return out;
}

ReadingTrace rolling_min_filter(const ReadingTrace& trace, int window) {
    trace.validate();
    if (window < 1)
        throw std::invalid_argument("rolling_min_filter: window must be >= 1");
    ReadingTrace out;
    out.timestamps = trace.timestamps;
    out.values.resize(trace.values.size());
    // monotonic deque of candidate minima indices
    std::deque<std::size_t> q;
    for (std::size_t i = 0; i < trace.values.size(); ++i) {
        while (!q.empty() && trace.values[q.back()] >= trace.values[i]) q.pop_back();
        q.push_back(i);
        if (q.front() + window <= i) q.pop_front();
        out.values[i] = trace.values[q.front()];
    }
    return out;
}

RollingMin::RollingMin(int window) : window_(window) {
    if (window < 1) throw std::invalid_argument("RollingMin: window must be >= 1");
    recent_.resize(static_cast<std::size_t>(window));
}

int RollingMin::push(int value) {
    recent_[head_] = value;
    head_ = (head_ + 1) % recent_.size();
    if (count_ < recent_.size()) ++count_;
    int best = value;
    for (std::size_t i = 0; i < count_; ++i) best = std::min(best, recent_[i]);
    return best;
}

std::string trace_csv(const std::vector<ReadingTrace>& raw,
                      const std::vector<ReadingTrace>& filtered) {
    std::ostringstream out;
    out << "t,pd_id,raw,filtered\n";
    for (std::size_t pd = 0; pd < raw.size(); ++pd) {
        const auto& r = raw[pd];
        const auto& f = filtered[pd];
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            out << r.timestamps[i] << ',' << pd << ',' << r.values[i] << ','
                << (i < f.values.size() ? f.values[i] : r.values[i]) << '\n';
        }
    }
    return out.str();
}

}  // namespace luxland
