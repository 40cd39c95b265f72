#include "luxland/lightfield.hpp"

#include <algorithm>
#include <cmath>

namespace luxland {

namespace {

constexpr double kSegmentEps = 1e-9;

// Segment a->b against one rectangle. Returns true when the segment pierces
// the rectangle's interior strictly between its endpoints. Edge grazing and
// endpoint contact do not count: occlusion is a measure-zero-open choice so
// that a patch never shadows itself.
bool segment_hits_surface(const Vec3& a, const Vec3& b, const Surface& s) {
    const Vec3 n = s.edge_u.cross(s.edge_v);
    const Vec3 d = b - a;
    const double denom = n.dot(d);
    if (std::abs(denom) < 1e-15) return false;  // parallel to the plane
    const double tau = n.dot(s.corner - a) / denom;
    if (tau <= kSegmentEps || tau >= 1.0 - kSegmentEps) return false;
    const Vec3 hit = a + tau * d - s.corner;
    const double uu = s.edge_u.squaredNorm();
    const double vv = s.edge_v.squaredNorm();
    const double u = hit.dot(s.edge_u) / uu;
    const double v = hit.dot(s.edge_v) / vv;
    const double eu = kSegmentEps;
    return u > eu && u < 1.0 - eu && v > eu && v < 1.0 - eu;
}

double cos_pow(double c, double m) {
    if (c <= 0.0) return 0.0;
    if (m == 0.0) return 1.0;
    if (m == 1.0) return c;
    return std::pow(c, m);
}

}  // namespace

void LightSource::validate() const {
    if (!(power > 0.0)) throw std::invalid_argument("LightSource: power must be > 0");
    if (!(lambert_exponent >= 0.0))
        throw std::invalid_argument("LightSource: lambert_exponent must be >= 0");
    if (std::abs(axis.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("LightSource: axis must be unit length");
}

void MeasuredFieldGrid::validate() const {
    if (nx < 2 || ny < 2 || nz < 1)
        throw std::invalid_argument("MeasuredFieldGrid: dims must be >= 2x2x1");
    if (!(spacing.x() > 0.0 && spacing.y() > 0.0 && spacing.z() > 0.0))
        throw std::invalid_argument("MeasuredFieldGrid: spacing must be > 0");
    if (samples.size() != static_cast<std::size_t>(nx) * ny * nz)
        throw std::invalid_argument("MeasuredFieldGrid: sample count mismatch");
    for (double v : samples) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("MeasuredFieldGrid: samples must be finite and >= 0");
    }
}

double MeasuredFieldGrid::interpolate(const Vec3& p) const {
    const Vec3 rel = p - origin;
    const double fx = rel.x() / spacing.x();
    const double fy = rel.y() / spacing.y();
    const double fz = nz > 1 ? rel.z() / spacing.z() : 0.0;
    const double tol = 1e-9;
    if (fx < -tol || fy < -tol || fz < -tol) return 0.0;
    if (fx > nx - 1 + tol || fy > ny - 1 + tol || fz > nz - 1 + tol) return 0.0;
    if (nz == 1 && std::abs(rel.z()) > tol) return 0.0;

    const auto cell = [](double f, int n) {
        int i = static_cast<int>(std::floor(f));
        i = std::clamp(i, 0, n - 2 >= 0 ? n - 2 : 0);
        return i;
    };
    const int ix = cell(fx, nx);
    const int iy = cell(fy, ny);
    const int iz = nz > 1 ? cell(fz, nz) : 0;
    const double tx = std::clamp(fx - ix, 0.0, 1.0);
    const double ty = std::clamp(fy - iy, 0.0, 1.0);
    const double tz = nz > 1 ? std::clamp(fz - iz, 0.0, 1.0) : 0.0;

    double acc = 0.0;
    for (int dz = 0; dz < (nz > 1 ? 2 : 1); ++dz) {
        const double wz = nz > 1 ? (dz ? tz : 1.0 - tz) : 1.0;
        for (int dy = 0; dy < 2; ++dy) {
            const double wy = dy ? ty : 1.0 - ty;
            for (int dx = 0; dx < 2; ++dx) {
                const double wx = dx ? tx : 1.0 - tx;
                acc += wx * wy * wz * at(ix + dx, iy + dy, iz + dz);
            }
        }
    }
    return acc;
}

Vec3 MeasuredFieldGrid::station_center() const {
    const Vec3 hi = max_corner();
    return {0.5 * (origin.x() + hi.x()), 0.5 * (origin.y() + hi.y()), 0.0};
}

Surface Surface::from_corners(const Vec3& c0, const Vec3& c1, const Vec3& c2,
                              const Vec3& c3, double reflectance, bool opaque) {
    Surface s;
    s.corner = c0;
    s.edge_u = c1 - c0;
    s.edge_v = c3 - c0;
    s.reflectance = reflectance;
    s.opaque = opaque;
    // c2 must close the parallelogram within the coplanarity tolerance
    if ((c0 + s.edge_u + s.edge_v - c2).norm() > 1e-6)
        throw std::invalid_argument("Surface: corners do not form a planar rectangle");
    s.validate();
    return s;
}

Surface Surface::wall(const Vec2& a, const Vec2& b, double z0, double z1,
                      double reflectance, bool opaque) {
    Surface s;
    s.corner = Vec3(a.x(), a.y(), z0);
    s.edge_u = Vec3(b.x() - a.x(), b.y() - a.y(), 0.0);
    s.edge_v = Vec3(0.0, 0.0, z1 - z0);
    s.reflectance = reflectance;
    s.opaque = opaque;
    s.validate();
    return s;
}

void Surface::validate() const {
    if (reflectance < 0.0 || reflectance > 1.0)
        throw std::invalid_argument("Surface: reflectance must be in [0, 1]");
    if (edge_u.norm() < 1e-9 || edge_v.norm() < 1e-9)
        throw std::invalid_argument("Surface: degenerate edges");
    if (std::abs(edge_u.normalized().dot(edge_v.normalized())) > 1e-6)
        throw std::invalid_argument("Surface: edges must be orthogonal (rectangle)");
}

void Environment::validate() const {
    if (ambient_dc < 0.0)
        throw std::invalid_argument("Environment: ambient_dc must be >= 0");
    if (!(patch_edge > 0.0))
        throw std::invalid_argument("Environment: patch_edge must be > 0");
    if (has_analytic_source())
        analytic_source().validate();
    else
        grid_source().validate();
    for (const auto& s : surfaces) s.validate();
}

Vec3 Environment::source_position() const {
    if (has_analytic_source()) return analytic_source().position;
    Vec3 c = grid_source().station_center();
    c.z() = 0.05;  // nominal bulb height above the pad
    return c;
}

Vec3 Environment::station_center() const {
    if (has_analytic_source()) {
        Vec3 c = analytic_source().position;
        c.z() = 0.0;
        return c;
    }
    return grid_source().station_center();
}

bool los_visible(const Vec3& a, const Vec3& b, const Environment& env) {
    for (const auto& s : env.surfaces) {
        if (!s.opaque) continue;
        if (segment_hits_surface(a, b, s)) return false;
    }
    return true;
}

double direct_irradiance(const Vec3& p, const Environment& env) {
    const Vec3 src = env.source_position();
    if ((p - src).squaredNorm() < 1e-18)
        throw std::invalid_argument("direct_irradiance: point coincides with the source");
    if (!los_visible(src, p, env)) return 0.0;
    if (!env.has_analytic_source()) return env.grid_source().interpolate(p);
    const LightSource& ls = env.analytic_source();
    const Vec3 d = p - ls.position;
    const double r2 = d.squaredNorm();
    const double c = ls.axis.dot(d) / std::sqrt(r2);
    return ls.power * cos_pow(c, ls.lambert_exponent) / r2;
}

PatchCache PatchCache::build(const Environment& env) {
    PatchCache cache;
    const Vec3 src = env.source_position();
    for (const auto& s : env.surfaces) {
        if (s.reflectance <= 0.0) continue;
        const double lu = s.edge_u.norm();
        const double lv = s.edge_v.norm();
        const int nu = std::max(1, static_cast<int>(std::ceil(lu / env.patch_edge)));
        const int nv = std::max(1, static_cast<int>(std::ceil(lv / env.patch_edge)));
        const double patch_area = s.area() / (nu * nv);
        const Vec3 n0 = s.normal();
        for (int iu = 0; iu < nu; ++iu) {
            for (int iv = 0; iv < nv; ++iv) {
                const Vec3 q = s.point_at((iu + 0.5) / nu, (iv + 0.5) / nv);
                Vec3 to_src = src - q;
                const double dist = to_src.norm();
                if (dist < 1e-9) continue;
                to_src /= dist;
                // orient the normal toward the source; back side stays dark
                Vec3 n = n0.dot(to_src) >= 0.0 ? n0 : Vec3(-n0);
                const double cos_in = n.dot(to_src);
                if (cos_in <= 0.0) continue;
                if (!los_visible(src, q, env)) continue;
                double incident = 0.0;
                try {
                    incident = direct_irradiance(q, env);
                } catch (const std::invalid_argument&) {
                    continue;  // patch on top of the source
                }
                if (incident <= 0.0) continue;
                Patch patch;
                patch.center = q;
                patch.normal = n;
                patch.emit = s.reflectance * incident * cos_in * patch_area / kPi;
                if (patch.emit > 0.0) cache.patches.push_back(patch);
            }
        }
    }
    return cache;
}

void PatchCache::contributions(const Vec3& p, const Environment& env,
                               std::vector<IrradianceContribution>& out) const {
    for (const auto& patch : patches) {
        Vec3 to_p = p - patch.center;
        const double r2 = to_p.squaredNorm();
        if (r2 < 1e-12) continue;
        const double r = std::sqrt(r2);
        to_p /= r;
        const double cos_out = patch.normal.dot(to_p);
        if (cos_out <= 0.0) continue;  // p behind the lit face
        if (!los_visible(patch.center, p, env)) continue;
        out.push_back({-to_p, patch.emit * cos_out / r2});
    }
}

double PatchCache::irradiance(const Vec3& p, const Environment& env) const {
    double acc = 0.0;
    for (const auto& patch : patches) {
        Vec3 to_p = p - patch.center;
        const double r2 = to_p.squaredNorm();
        if (r2 < 1e-12) continue;
        const double r = std::sqrt(r2);
        to_p /= r;
        const double cos_out = patch.normal.dot(to_p);
        if (cos_out <= 0.0) continue;
        if (!los_visible(patch.center, p, env)) continue;
        acc += patch.emit * cos_out / r2;
    }
    return acc;
}

double bounce_irradiance(const Vec3& p, const Environment& env) {
    return PatchCache::build(env).irradiance(p, env);
}

double total_irradiance(const Vec3& p, const Environment& env) {
    return direct_irradiance(p, env) + bounce_irradiance(p, env) + env.ambient_dc;
}

std::vector<IrradianceContribution> irradiance_contributions(
    const Vec3& p, const Environment& env) {
    std::vector<IrradianceContribution> out;
    const Vec3 src = env.source_position();
    const double direct = direct_irradiance(p, env);
    if (direct > 0.0) out.push_back({(src - p).normalized(), direct});
    PatchCache::build(env).contributions(p, env, out);
    return out;
}

Vec3 field_gradient(const Vec3& p, const Environment& env, double h) {
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
        Vec3 lo = p, hi = p;
        lo[i] -= h;
        hi[i] += h;
        g[i] = (total_irradiance(hi, env) - total_irradiance(lo, env)) / (2.0 * h);
    }
    return g;
}

}  // namespace luxland
