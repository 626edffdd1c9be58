#pragma once

// Geometry and metrics of the two benchmarks: the breaking dam and the
// Gresho vortex.

#include <rsph/bench/grid.hpp>
#include <rsph/config.hpp>
#include <rsph/fixed_point.hpp>
#include <rsph/particles.hpp>
#include <rsph/sph.hpp>
#include <rsph/vec2.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace rsph::bench {

/// Lennard-Jones wall particles, spacing dr, sitting dr/2 outside the box
/// [0, width] x [0, height] so that a fluid lattice at (i + 1/2) dr starts
/// exactly one spacing away (outside the force range r_wall < dr).
inline std::vector<Vec2> lj_wall_ring(double width, double height, double dr) {
    std::vector<Vec2> out;
    const auto nx = std::lround(width / dr);
    const auto ny = std::lround(height / dr);
    const double x0 = -0.5 * dr;
    const double y0 = -0.5 * dr;
    const double x1 = width + 0.5 * dr;
    const double y1 = height + 0.5 * dr;
    for (long i = 0; i <= nx + 1; ++i) {
        const double x = x0 + static_cast<double>(i) * dr;
        out.push_back({x, y0});
        out.push_back({x, y1});
    }
    for (long j = 1; j <= ny; ++j) {
        const double y = y0 + static_cast<double>(j) * dr;
        out.push_back({x0, y});
        out.push_back({x1, y});
    }
    return out;
}

/// `layers` rings of square-lattice dummy particles outside the box
/// [lo, hi], aligned with an interior (i + 1/2) dr lattice.
inline std::vector<Vec2> dummy_wall_layers(Vec2 lo, Vec2 hi, double dr, int layers) {
    std::vector<Vec2> out;
    const auto nx = std::lround((hi.x - lo.x) / dr);
    const auto ny = std::lround((hi.y - lo.y) / dr);
    for (long j = -layers; j < ny + layers; ++j) {
        for (long i = -layers; i < nx + layers; ++i) {
            if (i >= 0 && i < nx && j >= 0 && j < ny) continue;
            out.push_back({lo.x + (static_cast<double>(i) + 0.5) * dr, lo.y + (static_cast<double>(j) + 0.5) * dr});
        }
    }
    return out;
}

/// Rounds positions to the fixed-point grid so that both arithmetic modes
/// start from the identical, exactly representable state.
inline void quantize_positions(ParticleSystem& ps) {
    for (auto& p : ps.position) p = decode(encode(p));
    for (auto& v : ps.velocity) v = decode(encode(v));
}

inline SphModel make_model(const ScenarioConfig& cfg) {
    SphModel m;
    m.kernel = Kernel(cfg.kernel, cfg.h());
    m.params.rho0 = cfg.rho0;
    m.params.c = cfg.c;
    m.params.g = cfg.g;
    m.params.e_wall = cfg.walls == WallModel::lennard_jones ? cfg.e_wall() : 0.0;
    m.params.r_wall = cfg.r_wall();
    m.params.p0 = cfg.p0;
    if (cfg.p0 > 0.0) m.anticlump = make_anticlump_kernel(cfg.dr, cfg.kernel);
    m.density_mode = cfg.density_mode;
    m.validate();
    return m;
}

/// Fluid column in the lower-left corner of the box, at rest.
inline ParticleSystem build_dambreak(const ScenarioConfig& cfg, WorkerPool* pool = nullptr,
                                     std::optional<IscReport>* isc_report = nullptr) {
    ParticleSystem ps;
    GridSpec spec;
    spec.arrangement = Arrangement::square;
    spec.dr = cfg.dr;
    spec.region = Region::rectangle({0.0, 0.0}, {cfg.column_width, cfg.column_height});
    spec.rho0 = cfg.rho0;
    spec.apply_isc = cfg.isc;
    spec.kernel = cfg.kernel;
    spec.h_factor = cfg.h_factor;
    spec.isc_seed = cfg.isc_seed;
    spec.isc_tol = cfg.isc_tol;
    spec.isc_max_iterations = cfg.isc_max_iterations;
    std::vector<Vec2> walls;
    if (cfg.walls == WallModel::lennard_jones) {
        walls = lj_wall_ring(cfg.box_width, cfg.box_height, cfg.dr);
    } else {
        walls = dummy_wall_layers({0.0, 0.0}, {cfg.box_width, cfg.box_height}, cfg.dr, cfg.wall_layers);
    }
    // LJ walls never enter density sums, so ISC sees them as absent.
    const std::span<const Vec2> fixed =
        cfg.walls == WallModel::dummy ? std::span<const Vec2>(walls) : std::span<const Vec2>();
    GridPoints grid = build_grid(spec, fixed, cfg.particle_mass(), pool);
    if (isc_report) *isc_report = grid.isc;
    for (std::size_t a = 0; a < grid.positions.size(); ++a) {
        ps.add(ParticleKind::fluid, grid.positions[a], {}, grid.masses[a]);
    }
    const ParticleKind wall_kind = cfg.walls == WallModel::lennard_jones ? ParticleKind::wall_lj : ParticleKind::wall_dummy;
    for (const Vec2& w : walls) ps.add(wall_kind, w, {}, cfg.particle_mass());
    return ps;
}

/// Tangential velocity of the Gresho vortex.
inline double gresho_velocity(double r) {
    require(r >= 0.0, "radius must be non-negative");
    if (r < 0.2) return 5.0 * r;
    if (r < 0.4) return 2.0 - 5.0 * r;
    return 0.0;
}

inline Vec2 gresho_velocity_field(const Vec2& p) {
    const double r = norm(p);
    if (r == 0.0) return {};
    const double u = gresho_velocity(r);
    return {-u * p.y / r, u * p.x / r};
}

/// Vortex in the box (-1/2, 1/2)^2 with layers of dummy wall particles.
inline ParticleSystem build_gresho(const ScenarioConfig& cfg, WorkerPool* pool = nullptr,
                                   std::optional<IscReport>* isc_report = nullptr) {
    const Vec2 lo{-0.5 * cfg.box_width, -0.5 * cfg.box_height};
    const Vec2 hi{0.5 * cfg.box_width, 0.5 * cfg.box_height};
    const std::vector<Vec2> walls = dummy_wall_layers(lo, hi, cfg.dr, cfg.wall_layers);
    GridSpec spec;
    spec.arrangement = cfg.arrangement;
    spec.dr = cfg.dr;
    spec.region = Region::rectangle(lo, hi);
    spec.rho0 = cfg.rho0;
    spec.apply_isc = cfg.isc;
    spec.kernel = cfg.kernel;
    spec.h_factor = cfg.h_factor;
    spec.isc_seed = cfg.isc_seed;
    spec.isc_tol = cfg.isc_tol;
    spec.isc_max_iterations = cfg.isc_max_iterations;
    spec.isc_enclosed = true;
    GridPoints grid = build_grid(spec, walls, cfg.particle_mass(), pool);
    if (isc_report) *isc_report = grid.isc;
    ParticleSystem ps;
    for (std::size_t a = 0; a < grid.positions.size(); ++a) {
        ps.add(ParticleKind::fluid, grid.positions[a], gresho_velocity_field(grid.positions[a]), grid.masses[a]);
    }
    for (const Vec2& w : walls) ps.add(ParticleKind::wall_dummy, w, {}, cfg.particle_mass() * grid.mass_scale);
    return ps;
}

/// sqrt(75 / (4 pi) sum_a V_a |u_a - u0(r_a)|^2) over fluid particles, with
/// V_a = m_a / rho_a. Zero velocity on an exact volume partition gives 1.
inline double gresho_error_at(const ParticleSystem& ps, std::span<const Vec2> velocity) {
    double s = 0.0;
    for (std::size_t a = 0; a < ps.size(); ++a) {
        if (!ps.is_fluid(a)) continue;
        const Vec2 d = velocity[a] - gresho_velocity_field(ps.position[a]);
        s += ps.mass[a] / ps.density[a] * dot(d, d);
    }
    return std::sqrt(75.0 / (4.0 * std::numbers::pi) * s);
}

struct VelocitySnapshot {
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    std::vector<double> volumes;
};

/// Max over snapshots of the discrete (L-infinity in time, L2 in space) error.
inline double gresho_error(std::span<const VelocitySnapshot> snapshots) {
    double e = 0.0;
    for (const auto& snap : snapshots) {
        double s = 0.0;
        for (std::size_t a = 0; a < snap.positions.size(); ++a) {
            const Vec2 d = snap.velocities[a] - gresho_velocity_field(snap.positions[a]);
            s += snap.volumes[a] * dot(d, d);
        }
        e = std::max(e, std::sqrt(75.0 / (4.0 * std::numbers::pi) * s));
    }
    return e;
}

/// Maximum fluid x-coordinate (plus an optional particle half-width),
/// normalized by the column width.
inline double leading_edge(const ParticleSystem& ps, double column_width, double half_width = 0.0) {
    double xmax = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < ps.size(); ++a) {
        if (ps.is_fluid(a)) xmax = std::max(xmax, ps.position[a].x);
    }
    require(std::isfinite(xmax), "leading edge needs at least one fluid particle");
    return (xmax + half_width) / column_width;
}

/// T = t sqrt(g / l).
inline double dimensionless_time(double t, double g, double column_width) {
    return t * std::sqrt(g / column_width);
}

} // namespace rsph::bench
