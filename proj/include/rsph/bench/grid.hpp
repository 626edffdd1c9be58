#pragma once

#include <rsph/config.hpp>
#include <rsph/error.hpp>
#include <rsph/isc.hpp>
#include <rsph/kernel.hpp>
#include <rsph/vec2.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace rsph::bench {

struct Region {
    enum class Shape { rectangle, disk };
    Shape shape = Shape::rectangle;
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 1.0};
    Vec2 center{0.0, 0.0};
    double radius = 0.0;

    static Region rectangle(Vec2 lo, Vec2 hi) { return {Shape::rectangle, lo, hi, 0.5 * (lo + hi), 0.0}; }
    static Region disk(Vec2 center, double radius) {
        return {Shape::disk, center - Vec2{radius, radius}, center + Vec2{radius, radius}, center, radius};
    }

    bool contains(const Vec2& p) const noexcept {
        if (shape == Shape::rectangle) {
            return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y;
        }
        const Vec2 d = p - center;
        return dot(d, d) < radius * radius;
    }

    double area() const noexcept {
        return shape == Shape::rectangle ? (hi.x - lo.x) * (hi.y - lo.y) : std::numbers::pi * radius * radius;
    }
};

struct GridSpec {
    Arrangement arrangement = Arrangement::square;
    double dr = 0.1;
    Region region = Region::rectangle({0.0, 0.0}, {1.0, 1.0});
    double rho0 = 1.0;
    bool apply_isc = false;
    // ISC settings, used when apply_isc is set.
    KernelFamily kernel = KernelFamily::wendland2;
    double h_factor = 3.0;
    std::uint64_t isc_seed = 0;
    double isc_tol = 1e-10;
    int isc_max_iterations = 30;
    // Fluid enclosed by fixed points: converge to a uniform density level,
    // then rescale all masses (fixed ones included) so that level is rho0.
    bool isc_enclosed = false;
    int isc_relax_iterations = 5000; // pre-relaxation limit, enclosed only
};

struct GridPoints {
    std::vector<Vec2> positions;
    std::vector<double> masses;
    std::optional<IscReport> isc;
    double mass_scale = 1.0; // factor applied to the fixed points' masses as well
};

inline std::vector<Vec2> square_lattice(double dr, const Region& region) {
    std::vector<Vec2> out;
    const auto nx = static_cast<long>(std::llround((region.hi.x - region.lo.x) / dr));
    const auto ny = static_cast<long>(std::llround((region.hi.y - region.lo.y) / dr));
    for (long j = 0; j < ny; ++j) {
        for (long i = 0; i < nx; ++i) {
            const Vec2 p{region.lo.x + (static_cast<double>(i) + 0.5) * dr,
                         region.lo.y + (static_cast<double>(j) + 0.5) * dr};
            if (region.contains(p)) out.push_back(p);
        }
    }
    return out;
}

/// Triangular lattice with one point per dr^2: nearest spacing
/// dr * sqrt(2 / sqrt(3)), alternate rows shifted by half a spacing.
inline std::vector<Vec2> hexagonal_lattice(double dr, const Region& region) {
    const double s = dr * std::sqrt(2.0 / std::sqrt(3.0));
    const double width = region.hi.x - region.lo.x;
    const double height = region.hi.y - region.lo.y;
    const auto nx = std::max<long>(1, std::lround(width / s));
    const auto ny = std::max<long>(1, std::lround(height / (s * std::sqrt(3.0) / 2.0)));
    const double sx = width / static_cast<double>(nx);
    const double sy = height / static_cast<double>(ny);
    std::vector<Vec2> out;
    for (long j = 0; j < ny; ++j) {
        const double shift = (j % 2 == 0) ? 0.25 : 0.75;
        for (long i = 0; i < nx; ++i) {
            const Vec2 p{region.lo.x + (static_cast<double>(i) + shift) * sx,
                         region.lo.y + (static_cast<double>(j) + 0.5) * sy};
            if (region.contains(p)) out.push_back(p);
        }
    }
    return out;
}

namespace detail {

inline std::vector<Vec2> sunflower(double spacing, const Region& inset) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const double cover = inset.shape == Region::Shape::disk ? inset.radius : norm(inset.hi - inset.center);
    const auto kmax =
        static_cast<long>(std::ceil(std::numbers::pi * (cover + spacing) * (cover + spacing) / (spacing * spacing)));
    std::vector<Vec2> out;
    for (long k = 0; k <= kmax; ++k) {
        const double r = spacing * std::sqrt(static_cast<double>(k) / std::numbers::pi);
        const double t = static_cast<double>(k) * golden;
        const Vec2 p = inset.center + Vec2{r * std::cos(t), r * std::sin(t)};
        if (inset.contains(p)) out.push_back(p);
    }
    return out;
}

} // namespace detail

/// Golden-angle sunflower clipped to the region inset by dr/2 (like the
/// lattices, no point closer than dr/2 to the boundary). The spiral spacing
/// is tuned so the point count is round(area / dr^2): with fixed walls
/// around the region, uniform density rho0 is only reachable with exactly
/// that many particles of mass rho0 dr^2.
inline std::vector<Vec2> vogel_spiral(double dr, const Region& region) {
    Region inset = region;
    if (region.shape == Region::Shape::disk) {
        require(region.radius > dr, "region too small for the spiral");
        inset = Region::disk(region.center, region.radius - 0.5 * dr);
    } else {
        require(region.hi.x - region.lo.x > dr && region.hi.y - region.lo.y > dr, "region too small for the spiral");
        inset = Region::rectangle(region.lo + Vec2{0.5 * dr, 0.5 * dr}, region.hi - Vec2{0.5 * dr, 0.5 * dr});
    }
    const auto target = static_cast<std::size_t>(std::llround(region.area() / (dr * dr)));
    // Count grows as spacing shrinks; bisect for the target count.
    double lo = 0.8 * dr * std::sqrt(inset.area() / region.area());
    double hi = 1.2 * dr * std::sqrt(inset.area() / region.area());
    std::vector<Vec2> best = detail::sunflower(0.5 * (lo + hi), inset);
    for (int it = 0; it < 60 && best.size() != target; ++it) {
        const double mid = 0.5 * (lo + hi);
        best = detail::sunflower(mid, inset);
        if (best.size() > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return best;
}

/// Positions and masses (rho0 dr^2) for the requested arrangement; with
/// apply_isc the points are corrected so the raw density is rho0, treating
/// `fixed` (e.g. wall particles of mass fixed_mass) as immobile contributors.
inline GridPoints build_grid(const GridSpec& spec, std::span<const Vec2> fixed = {}, double fixed_mass = 0.0,
                             WorkerPool* pool = nullptr) {
    require(spec.dr > 0.0, "grid spacing must be positive");
    GridPoints g;
    switch (spec.arrangement) {
    case Arrangement::square: g.positions = square_lattice(spec.dr, spec.region); break;
    case Arrangement::hexagonal: g.positions = hexagonal_lattice(spec.dr, spec.region); break;
    case Arrangement::vogel: g.positions = vogel_spiral(spec.dr, spec.region); break;
    }
    const double m = spec.rho0 * spec.dr * spec.dr;
    g.masses.assign(g.positions.size(), m);
    if (spec.apply_isc) {
        IscProblem p;
        p.positions = g.positions;
        p.masses = g.masses;
        p.fixed_positions.assign(fixed.begin(), fixed.end());
        p.fixed_masses.assign(fixed.size(), fixed_mass > 0.0 ? fixed_mass : m);
        p.kernel = Kernel(spec.kernel, spec.h_factor * spec.dr);
        p.rho0 = spec.rho0;
        p.dr = spec.dr;
        p.seed = spec.isc_seed;
        p.density_tol = spec.isc_tol;
        p.max_iterations = spec.isc_max_iterations;
        p.relax_iterations = spec.isc_enclosed ? spec.isc_relax_iterations : 0;
        p.relax_tol = 0.01;
        p.min_separation = 0.5;
        p.free_level = spec.isc_enclosed;
        IscResult r = solve_isc(p, pool);
        g.positions = std::move(r.positions);
        if (spec.isc_enclosed) {
            g.mass_scale = spec.rho0 / r.report.density_level;
            for (double& mass : g.masses) mass *= g.mass_scale;
        }
        g.isc = std::move(r.report);
    }
    return g;
}

} // namespace rsph::bench
