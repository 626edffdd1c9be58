#pragma once

// Right-hand side of weakly compressible SPH with closed-form density.
//
// Conventions: e_ab = (r_a - r_b) / r_ab, w' <= 0. The pressure term is
// written so that two compressed particles repel each other.

#include <rsph/error.hpp>
#include <rsph/kernel.hpp>
#include <rsph/neighbors.hpp>
#include <rsph/parallel.hpp>
#include <rsph/particles.hpp>
#include <rsph/vec2.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace rsph {

/// Barotropic (Tait, gamma = 7) equation of state.
inline double eos_pressure(double rho, const FluidParams& p) {
    require(rho > 0.0, "pressure requested for non-positive density");
    const double x = rho / p.rho0;
    const double x2 = x * x;
    const double x7 = x2 * x2 * x2 * x;
    return p.c * p.c * p.rho0 / 7.0 * (x7 - 1.0);
}

/// Specific internal energy with d(eps)/d(rho) = p / rho^2.
inline double internal_energy_density(double rho, const FluidParams& p) {
    require(rho > 0.0, "internal energy requested for non-positive density");
    const double x = rho / p.rho0;
    const double x2 = x * x;
    return p.c * p.c / 42.0 * (x2 * x2 * x2 + 6.0 / x);
}

/// Repulsive wall force magnitude, directed from the wall particle towards the
/// fluid particle. Zero at and beyond r_wall.
inline double lj_wall_force(double r, const FluidParams& p) {
    if (r == 0.0) {
        throw Error("fluid particle coincides with a wall particle");
    }
    require(r > 0.0, "wall distance must be positive");
    if (r >= p.r_wall) {
        return 0.0;
    }
    const double s = p.r_wall / r;
    const double s2 = s * s;
    return -(p.e_wall / r) * s2 * (1.0 - s2);
}

/// Potential with -dPhi/dr == lj_wall_force; vanishes continuously at r_wall.
inline double lj_wall_potential(double r, const FluidParams& p) {
    require(r > 0.0, "wall distance must be positive");
    if (r >= p.r_wall) {
        return 0.0;
    }
    const double s = p.r_wall / r;
    const double s2 = s * s;
    return p.e_wall * (0.25 * s2 * s2 - 0.5 * s2 + 0.25);
}

struct DiagnosticsRecord {
    std::size_t step = 0;
    double t = 0.0;
    double kinetic = 0.0;
    double internal = 0.0;
    double gravitational = 0.0;
    double wall = 0.0;
    double total = 0.0;
    double dissipated = 0.0; // kinetic energy annulled at dummy walls, cumulative
    Vec2 momentum;
    double angular_momentum = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    std::optional<double> entropy_reduced;
    std::optional<double> temperature_fit;
    std::optional<double> entropy_eq_t;
    std::optional<double> entropy_eq_e;
};

/// Everything the right-hand side needs besides the particle state.
struct SphModel {
    Kernel kernel{KernelFamily::wendland2, 1.0};
    FluidParams params;
    std::optional<Kernel> anticlump;
    DensityMode density_mode = DensityMode::offset;

    void validate() const {
        params.validate();
        if (params.e_wall > 0.0) {
            require(params.r_wall <= kernel.support_radius(), "r_wall must not exceed the kernel support");
        }
        if (anticlump) {
            require(anticlump->support_radius() <= kernel.support_radius(),
                    "anti-clump support must not exceed the kernel support");
        }
    }
};

/// Cell grid plus per-particle neighbor lists at the kernel support radius.
struct Neighborhood {
    CellGrid grid;
    NeighborList list;

    void rebuild(std::span<const Vec2> positions, double radius, WorkerPool* pool = nullptr) {
        grid = CellGrid(positions, radius);
        list = NeighborList(grid, radius, pool);
    }
};

namespace detail {

template <class Body>
void for_particles(std::size_t n, WorkerPool* pool, Body&& body) {
    if (pool) {
        pool->parallel_for(n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t a = begin; a < end; ++a) body(a);
        });
    } else {
        for (std::size_t a = 0; a < n; ++a) body(a);
    }
}

} // namespace detail

/// Kernel-sum density (self term included, wall_lj neighbors excluded) for
/// every fluid and dummy particle, without the C_a offset.
inline std::vector<double> raw_density(const ParticleSystem& ps, const NeighborList& nl, const Kernel& k,
                                       WorkerPool* pool = nullptr) {
    std::vector<double> rho(ps.size(), 0.0);
    const double w0 = k.w(0.0);
    detail::for_particles(ps.size(), pool, [&](std::size_t a) {
        if (ps.kind[a] == ParticleKind::wall_lj) {
            return;
        }
        double sum = 0.0;
        bool self_added = false;
        const Vec2 ra = ps.position[a];
        for (std::uint32_t b : nl[a]) {
            if (!self_added && b > a) {
                sum += ps.mass[a] * w0;
                self_added = true;
            }
            if (ps.kind[b] == ParticleKind::wall_lj) {
                continue;
            }
            sum += ps.mass[b] * k.w(norm(ra - ps.position[b]));
        }
        if (!self_added) {
            sum += ps.mass[a] * w0;
        }
        rho[a] = sum;
    });
    return rho;
}

/// Fills ps.density. wall_lj particles get rho0 (they never enter a sum).
inline void compute_density(ParticleSystem& ps, const NeighborList& nl, const Kernel& k, DensityMode mode,
                            const FluidParams& params, WorkerPool* pool = nullptr) {
    std::vector<double> rho = raw_density(ps, nl, k, pool);
    for (std::size_t a = 0; a < ps.size(); ++a) {
        if (ps.kind[a] == ParticleKind::wall_lj) {
            ps.density[a] = params.rho0;
            continue;
        }
        const double value = mode == DensityMode::offset ? rho[a] + ps.offset[a] : rho[a];
        if (!(value > 0.0)) {
            throw DensityError(a, value);
        }
        ps.density[a] = value;
    }
}

/// Sets C_a = rho0 - raw density at the current configuration, nudged by
/// ulps where needed so that raw + C_a == rho0 holds exactly in floating point.
inline void initialize_offsets(ParticleSystem& ps, const NeighborList& nl, const Kernel& k,
                               const FluidParams& params, WorkerPool* pool = nullptr) {
    const std::vector<double> rho = raw_density(ps, nl, k, pool);
    for (std::size_t a = 0; a < ps.size(); ++a) {
        if (ps.kind[a] == ParticleKind::wall_lj) {
            ps.offset[a] = 0.0;
            continue;
        }
        double c = params.rho0 - rho[a];
        for (int i = 0; i < 8 && rho[a] + c != params.rho0; ++i) {
            c = std::nextafter(c, rho[a] + c < params.rho0 ? HUGE_VAL : -HUGE_VAL);
        }
        ps.offset[a] = c;
    }
}

struct AccelerationStats {
    std::size_t coincident_pairs = 0;
};

/// Pressure, wall, anti-clump and gravity accelerations. Entries for wall_lj
/// particles are zero; entries for dummy particles are computed (the caller
/// discards them).
inline AccelerationStats compute_acceleration(const ParticleSystem& ps, const NeighborList& nl,
                                              const SphModel& model, std::vector<Vec2>& acc,
                                              WorkerPool* pool = nullptr) {
    const std::size_t n = ps.size();
    const FluidParams& prm = model.params;
    acc.assign(n, Vec2{});
    std::vector<double> p_over_rho2(n, 0.0);
    std::vector<double> inv_rho2(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        if (ps.kind[a] == ParticleKind::wall_lj) {
            continue;
        }
        const double rho = ps.density[a];
        if (!(rho > 0.0)) {
            throw DensityError(a, rho);
        }
        inv_rho2[a] = 1.0 / (rho * rho);
        p_over_rho2[a] = eos_pressure(rho, prm) * inv_rho2[a];
    }
    const Kernel& k = model.kernel;
    const Kernel* ac = model.anticlump ? &*model.anticlump : nullptr;
    const double ac_radius = ac ? ac->support_radius() : 0.0;
    const bool walls = prm.e_wall > 0.0;

    const std::size_t chunks = pool ? pool->chunk_count(n) : 1;
    std::vector<std::size_t> coincident(chunks, 0);
    auto body = [&](std::size_t c, std::size_t begin, std::size_t end) {
        for (std::size_t a = begin; a < end; ++a) {
            const ParticleKind ka = ps.kind[a];
            if (ka == ParticleKind::wall_lj) {
                continue;
            }
            const Vec2 ra = ps.position[a];
            Vec2 sum;
            for (std::uint32_t b : nl[a]) {
                const Vec2 d = ra - ps.position[b];
                const double r = norm(d);
                if (r == 0.0) {
                    ++coincident[c];
                    continue;
                }
                const Vec2 e = (1.0 / r) * d;
                if (ps.kind[b] == ParticleKind::wall_lj) {
                    if (walls && ka == ParticleKind::fluid && r < prm.r_wall) {
                        sum += (lj_wall_force(r, prm) / ps.mass[a]) * e;
                    }
                    continue;
                }
                const double mb = ps.mass[b];
                sum -= (mb * (p_over_rho2[a] + p_over_rho2[b]) * k.dw(r)) * e;
                if (ac && r < ac_radius) {
                    sum -= (mb * prm.p0 * (inv_rho2[a] + inv_rho2[b]) * ac->dw(r)) * e;
                }
            }
            if (ka == ParticleKind::fluid) {
                sum.y -= prm.g;
            }
            acc[a] = sum;
        }
    };
    if (pool) {
        pool->for_chunks(n, body);
    } else {
        body(0, 0, n);
    }
    AccelerationStats stats;
    for (std::size_t v : coincident) stats.coincident_pairs += v;
    return stats;
}

/// Standard-scheme density rate d(rho_a)/dt = sum_b m_b (u_a - u_b) . w'(r_ab) e_ab.
inline std::vector<double> standard_density_rate(const ParticleSystem& ps, const NeighborList& nl,
                                                 const Kernel& k, WorkerPool* pool = nullptr) {
    std::vector<double> rate(ps.size(), 0.0);
    detail::for_particles(ps.size(), pool, [&](std::size_t a) {
        if (ps.kind[a] == ParticleKind::wall_lj) {
            return;
        }
        const Vec2 ra = ps.position[a];
        const Vec2 ua = ps.velocity[a];
        double sum = 0.0;
        for (std::uint32_t b : nl[a]) {
            if (ps.kind[b] == ParticleKind::wall_lj) {
                continue;
            }
            const Vec2 d = ra - ps.position[b];
            const double r = norm(d);
            if (r == 0.0) {
                continue;
            }
            sum += ps.mass[b] * k.dw(r) * dot(ua - ps.velocity[b], d) / r;
        }
        rate[a] = sum;
    });
    return rate;
}

/// Shepard-normalized velocity field for fluid particles; walls keep their
/// velocity. Uses V_b = m_b / rho_b from ps.density.
inline std::vector<Vec2> shepard_filter(const ParticleSystem& ps, const NeighborList& nl, const Kernel& k,
                                        WorkerPool* pool = nullptr) {
    std::vector<Vec2> out = ps.velocity;
    const double w0 = k.w(0.0);
    detail::for_particles(ps.size(), pool, [&](std::size_t a) {
        if (!ps.is_fluid(a)) {
            return;
        }
        const Vec2 ra = ps.position[a];
        double gamma = 0.0;
        Vec2 num;
        bool self_added = false;
        bool has_neighbors = false;
        auto add = [&](std::size_t b, double w) {
            const double vw = ps.mass[b] / ps.density[b] * w;
            gamma += vw;
            num += vw * ps.velocity[b];
        };
        for (std::uint32_t b : nl[a]) {
            if (!self_added && b > a) {
                add(a, w0);
                self_added = true;
            }
            if (ps.kind[b] == ParticleKind::wall_lj) {
                continue;
            }
            const double w = k.w(norm(ra - ps.position[b]));
            if (w > 0.0) {
                has_neighbors = true;
            }
            add(b, w);
        }
        if (!self_added) {
            add(a, w0);
        }
        if (!has_neighbors || !(gamma > 0.0)) {
            return;
        }
        out[a] = (1.0 / gamma) * num;
    });
    return out;
}

/// Energy budget and conserved quantities over fluid particles; the wall term
/// sums the LJ potential over (wall_lj, fluid) pairs.
inline DiagnosticsRecord total_energy(const ParticleSystem& ps, const NeighborList& nl, const SphModel& model) {
    const FluidParams& prm = model.params;
    DiagnosticsRecord rec;
    rec.rho_min = std::numeric_limits<double>::infinity();
    rec.rho_max = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < ps.size(); ++a) {
        if (ps.kind[a] == ParticleKind::wall_lj && prm.e_wall > 0.0) {
            for (std::uint32_t b : nl[a]) {
                if (!ps.is_fluid(b)) {
                    continue;
                }
                const double r = norm(ps.position[a] - ps.position[b]);
                if (r < prm.r_wall) {
                    rec.wall += lj_wall_potential(r, prm);
                }
            }
        }
        if (!ps.is_fluid(a)) {
            continue;
        }
        const double m = ps.mass[a];
        const Vec2 u = ps.velocity[a];
        const double rho = ps.density[a];
        rec.kinetic += 0.5 * m * dot(u, u);
        rec.internal += m * internal_energy_density(rho, prm);
        rec.gravitational += m * prm.g * ps.position[a].y;
        rec.momentum += m * u;
        rec.angular_momentum += m * cross(ps.position[a], u);
        rec.rho_min = std::min(rec.rho_min, rho);
        rec.rho_max = std::max(rec.rho_max, rho);
    }
    rec.total = rec.kinetic + rec.internal + rec.gravitational + rec.wall;
    return rec;
}

} // namespace rsph
