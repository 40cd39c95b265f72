#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "luxland/geometry.hpp"

namespace luxland {

// Generalized Lambertian point emitter: radiant intensity power * cos^m(theta)
// falling off as 1/d^2, zero behind the emission hemisphere.
struct LightSource {
    Vec3 position{0.0, 0.0, 0.0};
    Vec3 axis{0.0, 0.0, 1.0};    // emission axis, unit
    double power = 1.0;          // radiant intensity scale [au]
    double lambert_exponent = 1.0;  // m >= 0; m = 0 is isotropic

    void validate() const;
};

// Regular 3D grid of measured intensities, row-major with x fastest.
// Single-plane grids (nz == 1) are common: the measurement rig samples one
// height at a time, and interpolation degenerates to bilinear there.
struct MeasuredFieldGrid {
    Vec3 origin{0.0, 0.0, 0.0};
    Vec3 spacing{0.1, 0.1, 0.1};          // dx, dy, dz [m], > 0
    int nx = 2, ny = 2, nz = 1;
    std::vector<double> samples;          // nx*ny*nz, x fastest
    std::string label;

    void validate() const;

    double at(int ix, int iy, int iz) const {
        return samples[static_cast<std::size_t>((iz * ny + iy) * nx + ix)];
    }

    // Trilinear interpolation; points outside the grid return 0 (no invented
    // light beyond the measured volume).
    double interpolate(const Vec3& p) const;

    // Horizontal center of the grid at ground level; the landing station sits
    // in the middle of the measurement frame.
    Vec3 station_center() const;

    Vec3 max_corner() const {
        return origin + Vec3((nx - 1) * spacing.x(), (ny - 1) * spacing.y(),
                             (nz - 1) * spacing.z());
    }
};

// Rectangular wall/obstacle panel. Stored as an origin corner plus two edge
// vectors; a point on the surface is corner + s*edge_u + t*edge_v, s,t in [0,1].
struct Surface {
    Vec3 corner{0.0, 0.0, 0.0};
    Vec3 edge_u{1.0, 0.0, 0.0};
    Vec3 edge_v{0.0, 0.0, 1.0};
    double reflectance = 0.0;  // rho in [0, 1]
    bool opaque = true;

    static Surface from_corners(const Vec3& c0, const Vec3& c1, const Vec3& c2,
                                const Vec3& c3, double reflectance,
                                bool opaque = true);

    // Axis-aligned helper: vertical wall from (x0,y0) to (x1,y1) spanning
    // heights [z0, z1].
    static Surface wall(const Vec2& a, const Vec2& b, double z0, double z1,
                        double reflectance, bool opaque = true);

    Vec3 normal() const { return edge_u.cross(edge_v).normalized(); }
    double area() const { return edge_u.cross(edge_v).norm(); }
    Vec3 point_at(double s, double t) const {
        return corner + s * edge_u + t * edge_v;
    }

    void validate() const;
};

// Scene: one source (analytic or measured), reflecting/occluding surfaces and
// a uniform ambient background (sun/lamp residual after optical filtering).
struct Environment {
    std::variant<LightSource, MeasuredFieldGrid> source{LightSource{}};
    std::vector<Surface> surfaces;
    double ambient_dc = 0.0;   // [au]
    double patch_edge = 0.05;  // surface discretization edge [m]

    void validate() const;

    bool has_analytic_source() const {
        return std::holds_alternative<LightSource>(source);
    }
    const LightSource& analytic_source() const {
        return std::get<LightSource>(source);
    }
    const MeasuredFieldGrid& grid_source() const {
        return std::get<MeasuredFieldGrid>(source);
    }

    // Anchor for occlusion rays and arrival directions; for grids this is the
    // station center raised to a nominal bulb height.
    Vec3 source_position() const;

    // Landing station center on the ground plane.
    Vec3 station_center() const;
};

// One arriving light component at a query point: unit direction from the
// point toward the emitter (or reflecting patch) and its irradiance.
struct IrradianceContribution {
    Vec3 toward_emitter{0.0, 0.0, 1.0};
    double irradiance = 0.0;  // [au]
};

// True iff the open segment a->b crosses no opaque surface interior. Grazing
// contact at a surface edge counts as visible.
bool los_visible(const Vec3& a, const Vec3& b, const Environment& env);

// Irradiance at p from the source alone (occlusion applied); grid sources are
// interpolated, analytic sources use power*cos^m(theta)/d^2.
double direct_irradiance(const Vec3& p, const Environment& env);

// Single diffuse bounce summed over all surface patches; each patch acts as a
// pseudo source re-emitting rho * incident * cos_in * cos_out * A / (pi r^2).
double bounce_irradiance(const Vec3& p, const Environment& env);

// direct + bounce + ambient_dc.
double total_irradiance(const Vec3& p, const Environment& env);

// Directional breakdown (direct + per-patch bounce, ambient excluded); used
// by the sensing module to weight components by incidence angle.
std::vector<IrradianceContribution> irradiance_contributions(
    const Vec3& p, const Environment& env);

// Central finite-difference gradient of total_irradiance.
Vec3 field_gradient(const Vec3& p, const Environment& env, double h = 1e-4);

// Precomputed lit patches of an environment. bounce_irradiance rebuilds this
// per call; long simulation loops should build it once.
struct PatchCache {
    struct Patch {
        Vec3 center;
        Vec3 normal;          // oriented toward the source
        double emit;          // rho * direct * cos_in * area / pi
    };
    std::vector<Patch> patches;

    static PatchCache build(const Environment& env);

    // Bounce contributions at p given the cache; appends to out.
    void contributions(const Vec3& p, const Environment& env,
                       std::vector<IrradianceContribution>& out) const;
    double irradiance(const Vec3& p, const Environment& env) const;
};

}  // namespace luxland
