#pragma once

// Initial state correction: Newton iteration on particle positions so that the
// raw kernel density equals rho0 at every mobile particle.
//
// Each Newton step solves the block system
//     [ I          (1/rho) G ] [dx ]   [ 0          ]
//     [ -rho D     0         ] [phi] = [ rho0 - rho ]
// Since the upper-left block is the identity, dx = -(1/rho) G phi eliminates
// exactly, leaving S phi = rho0 - rho with S = rho D (1/rho) G. S is
// self-adjoint and negative semidefinite in the inner product weighted by
// m_a / rho_a^2, so -W S is solved with matrix-free preconditioned CG.

#include <rsph/error.hpp>
#include <rsph/kernel.hpp>
#include <rsph/krylov.hpp>
#include <rsph/neighbors.hpp>
#include <rsph/parallel.hpp>
#include <rsph/particles.hpp>
#include <rsph/sph.hpp>
#include <rsph/vec2.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rsph {

/// Discrete divergence and gradient of the linearized density constraint.
/// Particles [0, mobile) are unknowns; the rest are fixed contributors with
/// dx = 0 and phi = 0.
class IscOperators {
public:
    IscOperators(std::span<const Vec2> positions, std::span<const double> density, std::span<const double> masses,
                 const Kernel& k, const NeighborList& nl, std::size_t mobile)
        : pos_(positions), rho_(density), mass_(masses), k_(k), nl_(nl), mobile_(mobile) {}

    std::size_t mobile() const noexcept { return mobile_; }

    /// D_a dx = -(1/rho_a) sum_b m_b (dx_a - dx_b) . w'(r_ab) e_ab
    std::vector<double> div(std::span<const Vec2> dx) const {
        std::vector<double> out(mobile_, 0.0);
        for (std::size_t a = 0; a < mobile_; ++a) {
            double s = 0.0;
            for (std::uint32_t b : nl_[a]) {
                const Vec2 d = pos_[a] - pos_[b];
                const double r = norm(d);
                if (r == 0.0) continue;
                const Vec2 diff = b < mobile_ ? dx[a] - dx[b] : dx[a];
                s += mass_[b] * k_.dw(r) * dot(diff, d) / r;
            }
            out[a] = -s / rho_[a];
        }
        return out;
    }

    /// G_a phi = rho_a sum_b m_b (phi_a/rho_a^2 + phi_b/rho_b^2) w'(r_ab) e_ab
    std::vector<Vec2> grad(std::span<const double> phi) const {
        std::vector<Vec2> out(mobile_);
        for (std::size_t a = 0; a < mobile_; ++a) {
            const double pa = phi[a] / (rho_[a] * rho_[a]);
            Vec2 s;
            for (std::uint32_t b : nl_[a]) {
                const Vec2 d = pos_[a] - pos_[b];
                const double r = norm(d);
                if (r == 0.0) continue;
                const double pb = b < mobile_ ? phi[b] / (rho_[b] * rho_[b]) : 0.0;
                s += (mass_[b] * (pa + pb) * k_.dw(r) / r) * d;
            }
            out[a] = rho_[a] * s;
        }
        return out;
    }

    /// dx = -(1/rho) G phi
    std::vector<Vec2> displacement(std::span<const double> phi) const {
        std::vector<Vec2> dx = grad(phi);
        for (std::size_t a = 0; a < mobile_; ++a) dx[a] *= -1.0 / rho_[a];
        return dx;
    }

    /// S phi = rho D (1/rho) G phi
    std::vector<double> schur(std::span<const double> phi) const {
        std::vector<Vec2> g = grad(phi);
        for (std::size_t a = 0; a < mobile_; ++a) g[a] *= 1.0 / rho_[a];
        std::vector<double> out = div(g);
        for (std::size_t a = 0; a < mobile_; ++a) out[a] *= rho_[a];
        return out;
    }

    /// Diagonal of S without assembling it.
    std::vector<double> schur_diagonal() const {
        std::vector<double> diag(mobile_, 0.0);
        for (std::size_t a = 0; a < mobile_; ++a) {
            Vec2 g;
            double self = 0.0;
            for (std::uint32_t b : nl_[a]) {
                const Vec2 d = pos_[a] - pos_[b];
                const double r = norm(d);
                if (r == 0.0) continue;
                const double dw = k_.dw(r);
                g += (mass_[b] * dw / r) * d;
                if (b < mobile_) self += mass_[b] * dw * dw;
            }
            diag[a] = -(dot(g, g) + mass_[a] * self) / (rho_[a] * rho_[a]);
        }
        return diag;
    }

private:
    std::span<const Vec2> pos_;
    std::span<const double> rho_;
    std::span<const double> mass_;
    const Kernel& k_;
    const NeighborList& nl_;
    std::size_t mobile_;
};

/// One-shot helpers over a full particle set (all particles mobile).
inline std::vector<double> apply_div(std::span<const Vec2> positions, std::span<const double> rho,
                                     std::span<const double> masses, const Kernel& k, std::span<const Vec2> dx) {
    NeighborList nl(CellGrid(positions, k.support_radius()), k.support_radius());
    return IscOperators(positions, rho, masses, k, nl, positions.size()).div(dx);
}

inline std::vector<Vec2> apply_grad(std::span<const Vec2> positions, std::span<const double> rho,
                                    std::span<const double> masses, const Kernel& k, std::span<const double> phi) {
    NeighborList nl(CellGrid(positions, k.support_radius()), k.support_radius());
    return IscOperators(positions, rho, masses, k, nl, positions.size()).grad(phi);
}

struct IscProblem {
    std::vector<Vec2> positions; // mobile particles
    std::vector<double> masses;
    std::vector<Vec2> fixed_positions; // e.g. dummy walls; contribute to density only
    std::vector<double> fixed_masses;
    Kernel kernel{KernelFamily::wendland2, 1.0};
    double rho0 = 1.0;
    double dr = 1.0;
    double noise_amplitude = -1.0; // negative selects dr/10
    bool add_noise = true;
    std::uint64_t seed = 0;
    int max_iterations = 30;
    double density_tol = 1e-10;
    double solver_tol = 1e-12;
    int max_linear_iterations = 20000;
    bool backtracking = true; // halve steps that raise the L2 density residual
    int max_backtracks = 8;
    // Drive the density to a uniform level (the current mean) instead of rho0.
    // Fluid enclosed by fixed walls cannot in general reach rho0 exactly.
    bool free_level = false;
    // Backtracking also rejects steps that bring two particles closer than
    // this fraction of dr; the flat kernel core otherwise admits merged pairs.
    double min_separation = 0.0;
    // Optional diffusive pre-relaxation: dx_a = -c H^2 sum_b V_b grad W_ab
    // (H the kernel support), repeated until the density error is below
    // relax_tol. Brings irregular starts such as a clipped spiral into the
    // Newton basin.
    int relax_iterations = 0;
    double relax_coefficient = 0.1;
    double relax_tol = 0.03;

    double effective_noise() const { return noise_amplitude < 0.0 ? 0.1 * dr : noise_amplitude; }

    void validate() const {
        require(positions.size() == masses.size(), "ISC: positions and masses differ in length");
        require(fixed_positions.size() == fixed_masses.size(), "ISC: fixed positions and masses differ in length");
        require(positions.size() >= 2, "ISC needs at least two particles");
        require(density_tol > 0.0 && solver_tol > 0.0, "ISC tolerances must be positive");
        require(rho0 > 0.0 && dr > 0.0, "ISC: rho0 and dr must be positive");
        require(effective_noise() < dr, "ISC noise amplitude must be below dr");
        require(max_iterations >= 0, "ISC: negative iteration limit");
    }
};

struct IscReport {
    int iterations = 0;                  // Newton solves performed
    std::vector<double> errors;          // max |rho - rho0| / rho0 before each solve, plus final
    std::vector<int> linear_iterations;  // CG iterations per solve
    std::vector<double> linear_residuals; // block residual / rhs norm per solve
    std::vector<double> step_lengths;     // Newton step fraction taken per solve
    int relax_iterations = 0;             // pre-relaxation sweeps performed
    double density_level = 0.0;           // uniform density reached (rho0 unless free_level)
    bool converged = false;
    std::vector<Vec2> displacements;     // final minus input positions
};

class IscError : public Error {
public:
    IscError(const std::string& what, IscReport report) : Error(what), report_(std::move(report)) {}
    const IscReport& report() const noexcept { return report_; }

private:
    IscReport report_;
};

struct IscResult {
    std::vector<Vec2> positions;
    IscReport report;
};

inline double mean_density(std::span<const double> rho, std::size_t mobile) {
    double s = 0.0;
    for (std::size_t a = 0; a < mobile; ++a) s += rho[a];
    return s / static_cast<double>(mobile);
}

inline double residual_norm(std::span<const double> r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return std::sqrt(s);
}

/// Uniform samples in the disk of the given radius.
inline std::vector<Vec2> disk_noise(std::size_t n, double radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Vec2> out(n);
    for (auto& v : out) {
        const double r = radius * std::sqrt(uni(rng));
        const double t = 2.0 * std::numbers::pi * uni(rng);
        v = {r * std::cos(t), r * std::sin(t)};
    }
    return out;
}

inline IscResult solve_isc(const IscProblem& p, WorkerPool* pool = nullptr) {
    p.validate();
    const std::size_t m = p.positions.size();
    const std::size_t n = m + p.fixed_positions.size();
    const double h = p.kernel.support_radius();

    std::vector<Vec2> pos(p.positions);
    pos.insert(pos.end(), p.fixed_positions.begin(), p.fixed_positions.end());
    std::vector<double> mass(p.masses);
    mass.insert(mass.end(), p.fixed_masses.begin(), p.fixed_masses.end());

    if (p.add_noise) {
        const auto noise = disk_noise(m, p.effective_noise(), p.seed);
        for (std::size_t a = 0; a < m; ++a) pos[a] += noise[a];
    }

    ParticleSystem ps;
    for (std::size_t a = 0; a < n; ++a) {
        ps.add(a < m ? ParticleKind::fluid : ParticleKind::wall_dummy, pos[a], {}, mass[a]);
    }

    IscReport report;
    for (int it = 0; it < p.relax_iterations; ++it) {
        const NeighborList nl(CellGrid(ps.position, h), h, pool);
        const std::vector<double> rho = raw_density(ps, nl, p.kernel, pool);
        const double target = p.free_level ? mean_density(rho, m) : p.rho0;
        double err = 0.0;
        for (std::size_t a = 0; a < m; ++a) err = std::max(err, std::fabs(rho[a] - target) / target);
        if (err <= p.relax_tol) break;
        std::vector<Vec2> next(ps.position.begin(), ps.position.begin() + static_cast<std::ptrdiff_t>(m));
        const double c = p.relax_coefficient * h * h;
        for (std::size_t a = 0; a < m; ++a) {
            Vec2 g{};
            for (std::uint32_t b : nl[a]) {
                if (b == a) continue;
                const Vec2 d = ps.position[a] - ps.position[b];
                const double r = norm(d);
                if (r > 0.0) g += (ps.mass[b] / p.rho0 * p.kernel.dw(r) / r) * d;
            }
            next[a] -= c * g;
        }
        std::copy(next.begin(), next.end(), ps.position.begin());
        ++report.relax_iterations;
    }
    auto finish = [&] {
        report.displacements.resize(m);
        for (std::size_t a = 0; a < m; ++a) report.displacements[a] = ps.position[a] - p.positions[a];
    };

    int growth = 0;
    for (int it = 0;; ++it) {
        NeighborList nl(CellGrid(ps.position, h), h, pool);
        const std::vector<double> rho = raw_density(ps, nl, p.kernel, pool);
        const double target = p.free_level ? mean_density(rho, m) : p.rho0;
        double err = 0.0;
        std::vector<double> rhs(m);
        for (std::size_t a = 0; a < m; ++a) {
            rhs[a] = target - rho[a];
            err = std::max(err, std::fabs(rhs[a]) / target);
        }
        if (!report.errors.empty() && err > report.errors.back()) {
            ++growth;
        } else {
            growth = 0;
        }
        report.errors.push_back(err);
        if (err <= p.density_tol) {
            report.converged = true;
            report.density_level = target;
            finish();
            return {std::vector<Vec2>(ps.position.begin(), ps.position.begin() + static_cast<std::ptrdiff_t>(m)),
                    std::move(report)};
        }
        if (growth >= 3) {
            finish();
            throw IscError("ISC diverged: density error grew for 3 consecutive iterations", std::move(report));
        }
        if (it >= p.max_iterations) {
            finish();
            throw IscError("ISC did not converge within " + std::to_string(p.max_iterations) + " iterations",
                           std::move(report));
        }

        IscOperators ops(ps.position, rho, ps.mass, p.kernel, nl, m);
        // K = -W S, W_a = m_a / rho_a^2, is symmetric positive definite.
        std::vector<double> weight(m), b(m), inv_diag(m);
        const std::vector<double> sdiag = ops.schur_diagonal();
        for (std::size_t a = 0; a < m; ++a) {
            weight[a] = ps.mass[a] / (rho[a] * rho[a]);
            b[a] = -weight[a] * rhs[a];
            const double kd = -weight[a] * sdiag[a];
            if (!(kd > 0.0)) {
                finish();
                throw IscError("ISC: singular linear system (isolated particle " + std::to_string(a) + ")",
                               std::move(report));
            }
            inv_diag[a] = 1.0 / kd;
        }
        auto apply = [&](std::span<const double> in, std::span<double> out) {
            const std::vector<double> s = ops.schur(in);
            for (std::size_t a = 0; a < m; ++a) out[a] = -weight[a] * s[a];
        };
        std::vector<double> phi(m, 0.0);
        double block_rel = 0.0;
        int lin_its = 0;
        bool ok = false;
        // The CG stopping test is on the weighted residual; iterate until the
        // unweighted block residual also meets the tolerance.
        for (int pass = 0; pass < 4 && !ok; ++pass) {
            KrylovResult kr;
            try {
                kr = conjugate_gradient(apply, b, phi, inv_diag, 0.1 * p.solver_tol,
                                        p.max_linear_iterations);
            } catch (const Error& e) {
                finish();
                throw IscError(std::string("ISC: ") + e.what(), std::move(report));
            }
            lin_its += kr.iterations;
            const std::vector<double> s = ops.schur(phi);
            double rn = 0.0, bn = 0.0;
            for (std::size_t a = 0; a < m; ++a) {
                rn += (s[a] - rhs[a]) * (s[a] - rhs[a]);
                bn += rhs[a] * rhs[a];
            }
            block_rel = std::sqrt(rn / bn);
            ok = block_rel <= p.solver_tol;
            if (kr.iterations == 0 && !ok) break; // stagnated at round-off level
        }
        report.linear_iterations.push_back(lin_its);
        report.linear_residuals.push_back(block_rel);
        if (!ok && block_rel > 1e3 * p.solver_tol) {
            finish();
            throw IscError("ISC: linear solve failed (relative residual " + std::to_string(block_rel) + ")",
                           std::move(report));
        }
        const std::vector<Vec2> dx = ops.displacement(phi);
        const std::vector<Vec2> start(ps.position.begin(), ps.position.begin() + static_cast<std::ptrdiff_t>(m));
        // Full Newton steps unless one would raise the L2 density residual;
        // then halve (far from the basin only, e.g. a spiral meeting walls).
        double alpha = 1.0;
        const double merit = residual_norm(rhs);
        for (int k = 0;; ++k) {
            for (std::size_t a = 0; a < m; ++a) ps.position[a] = start[a] + alpha * dx[a];
            if (!p.backtracking || k >= p.max_backtracks) break;
            const NeighborList trial_nl(CellGrid(ps.position, h), h, pool);
            const std::vector<double> trial = raw_density(ps, trial_nl, p.kernel, pool);
            double s = 0.0;
            const double t = p.free_level ? mean_density(trial, m) : p.rho0;
            for (std::size_t a = 0; a < m; ++a) s += (t - trial[a]) * (t - trial[a]);
            bool spaced = true;
            if (p.min_separation > 0.0) {
                const double lim2 = (p.min_separation * p.dr) * (p.min_separation * p.dr);
                for (std::size_t a = 0; a < m && spaced; ++a) {
                    for (std::uint32_t b : trial_nl[a]) {
                        if (b != a && dot(ps.position[a] - ps.position[b], ps.position[a] - ps.position[b]) < lim2) {
                            spaced = false;
                            break;
                        }
                    }
                }
            }
            if (spaced && std::sqrt(s) < merit) break;
            alpha *= 0.5;
        }
        report.step_lengths.push_back(alpha);
        ++report.iterations;
    }
}

} // namespace rsph
