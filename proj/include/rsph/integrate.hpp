#pragma once

// Kick-drift-kick time stepping. The canonical state (positions, velocities)
// lives in an arithmetic policy type; a real-valued mirror in ParticleSystem is
// what the force routines read.
//
// In fixed-point mode every increment (dt/2 * a, dt * u) is formed in floating
// point from decoded state, rounded once with the odd-symmetric encoder and
// added exactly. Negating all velocities then replays the steps backwards bit
// for bit.

#include <rsph/error.hpp>
#include <rsph/fixed_point.hpp>
#include <rsph/kernel.hpp>
#include <rsph/neighbors.hpp>
#include <rsph/parallel.hpp>
#include <rsph/particles.hpp>
#include <rsph/sph.hpp>
#include <rsph/vec2.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rsph {

enum class Arithmetic { fixpa, flopa };
enum class Scheme { sym, std };

inline std::string_view to_string(Arithmetic a) { return a == Arithmetic::fixpa ? "fixpa" : "flopa"; }
inline std::string_view to_string(Scheme s) { return s == Scheme::sym ? "sym" : "std"; }

struct FixedArithmetic {
    using value_type = FixedVector2;
    static constexpr Arithmetic kind = Arithmetic::fixpa;
    static value_type from_real(const Vec2& v) { return encode(v); }
    static Vec2 to_real(const value_type& v) noexcept { return decode(v); }
    static value_type add(const value_type& s, const Vec2& increment) { return s + encode(increment); }
    static value_type negate(const value_type& v) noexcept { return -v; }
};

struct FloatArithmetic {
    using value_type = Vec2;
    static constexpr Arithmetic kind = Arithmetic::flopa;
    static value_type from_real(const Vec2& v) noexcept { return v; }
    static Vec2 to_real(const value_type& v) noexcept { return v; }
    static value_type add(const value_type& s, const Vec2& increment) noexcept { return s + increment; }
    static value_type negate(const value_type& v) noexcept { return -v; }
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t step, double time)
        : Error(what), step_(step), time_(time) {}
    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

struct IntegratorConfig {
    double dt = 1e-4;
    Arithmetic arithmetic = Arithmetic::fixpa;
    Scheme scheme = Scheme::sym;
    DensityMode density_mode = DensityMode::offset;
    std::optional<double> reverse_at;
    std::optional<int> active_filter_every;

    /// Number of whole steps in a time span; throws unless span is a multiple of dt.
    std::size_t steps_for(double span) const {
        require(span >= 0.0, "negative time span");
        const double k = std::round(span / dt);
        if (std::fabs(span / dt - k) > 1e-6 * std::max(1.0, k)) {
            throw ContractViolation("time " + std::to_string(span) + " is not a multiple of dt = " +
                                    std::to_string(dt));
        }
        return static_cast<std::size_t>(k);
    }

    void validate() const {
        require(dt > 0.0, "dt must be > 0");
        if (reverse_at) {
            (void)steps_for(*reverse_at);
        }
        if (active_filter_every) {
            require(*active_filter_every > 0, "active filter interval must be > 0");
        }
    }
};

/// Model plus neighbor workspace; evaluates accelerations for the stepper.
struct Physics {
    SphModel model;
    WorkerPool* pool = nullptr;
    Neighborhood neighbors;
    std::size_t coincident_pairs = 0;

    void rebuild(const ParticleSystem& ps) {
        neighbors.rebuild(ps.position, model.kernel.support_radius(), pool);
    }

    /// Symplectic scheme: density from positions, then accelerations.
    void evaluate_sym(ParticleSystem& ps, std::vector<Vec2>& acc) {
        rebuild(ps);
        compute_density(ps, neighbors.list, model.kernel, model.density_mode, model.params, pool);
        coincident_pairs += compute_acceleration(ps, neighbors.list, model, acc, pool).coincident_pairs;
    }

    /// Standard scheme: density is state, taken as is from ps.density.
    void evaluate_std(ParticleSystem& ps, std::vector<Vec2>& acc) {
        coincident_pairs += compute_acceleration(ps, neighbors.list, model, acc, pool).coincident_pairs;
    }
};

template <class Arith>
struct SimState {
    ParticleSystem ps; // real-valued mirror; for the std scheme ps.density is state
    std::vector<typename Arith::value_type> position;
    std::vector<typename Arith::value_type> velocity;
    std::vector<Vec2> acceleration;
    bool acceleration_current = false;
    std::size_t step = 0; // since start or last reversal
    double dissipated = 0.0;

    void sync_positions() {
        for (std::size_t a = 0; a < position.size(); ++a) ps.position[a] = Arith::to_real(position[a]);
    }
    void sync_velocities() {
        for (std::size_t a = 0; a < velocity.size(); ++a) ps.velocity[a] = Arith::to_real(velocity[a]);
    }
};

/// Converts a particle system into integrator state. The mirror is replaced by
/// the decoded (quantized) values so forces see exactly the stored state.
template <class Arith>
SimState<Arith> make_state(ParticleSystem ps) {
    SimState<Arith> s;
    s.position.reserve(ps.size());
    s.velocity.reserve(ps.size());
    for (std::size_t a = 0; a < ps.size(); ++a) {
        s.position.push_back(Arith::from_real(ps.position[a]));
        s.velocity.push_back(Arith::from_real(ps.is_fluid(a) ? ps.velocity[a] : Vec2{}));
    }
    s.ps = std::move(ps);
    s.sync_positions();
    s.sync_velocities();
    return s;
}

namespace detail {

template <class Arith>
void ensure_acceleration(SimState<Arith>& s, const IntegratorConfig& cfg, Physics& phys) {
    if (s.acceleration_current) {
        return;
    }
    s.sync_positions();
    if (cfg.scheme == Scheme::sym) {
        phys.evaluate_sym(s.ps, s.acceleration);
    } else {
        phys.rebuild(s.ps);
        phys.evaluate_std(s.ps, s.acceleration);
    }
    s.acceleration_current = true;
}

template <class Arith>
void kick(SimState<Arith>& s, double half_dt) {
    for (std::size_t a = 0; a < s.velocity.size(); ++a) {
        if (s.ps.is_fluid(a)) {
            s.velocity[a] = Arith::add(s.velocity[a], half_dt * s.acceleration[a]);
        }
    }
}

template <class Arith>
void drift(SimState<Arith>& s, double dt) {
    for (std::size_t a = 0; a < s.position.size(); ++a) {
        if (s.ps.is_fluid(a)) {
            s.position[a] = Arith::add(s.position[a], dt * Arith::to_real(s.velocity[a]));
        }
    }
    s.sync_positions();
}

// Dummy walls would pick up velocity dt * a; pinning them discards that energy.
template <class Arith>
void log_wall_dissipation(SimState<Arith>& s, double dt) {
    for (std::size_t a = 0; a < s.ps.size(); ++a) {
        if (s.ps.kind[a] == ParticleKind::wall_dummy) {
            const Vec2 v = dt * s.acceleration[a];
            s.dissipated += 0.5 * s.ps.mass[a] * dot(v, v);
        }
    }
}

} // namespace detail

/// One symplectic velocity-Verlet step with closed-form density.
template <class Arith>
void verlet_step(SimState<Arith>& s, const IntegratorConfig& cfg, Physics& phys) {
    detail::ensure_acceleration(s, cfg, phys);
    const double half_dt = 0.5 * cfg.dt;
    detail::kick(s, half_dt);
    detail::drift(s, cfg.dt);
    phys.evaluate_sym(s.ps, s.acceleration);
    detail::log_wall_dissipation(s, cfg.dt);
    detail::kick(s, half_dt);
    s.sync_velocities();
    ++s.step;
}

/// One step of the standard scheme: density is a state variable advanced
/// alongside the drift, rho += dt * drho/dt(r(t_m), u(t_m+1/2)). No
/// stabilization of any kind; this is what makes the scheme blow up.
template <class Arith>
void std_step(SimState<Arith>& s, const IntegratorConfig& cfg, Physics& phys) {
    detail::ensure_acceleration(s, cfg, phys);
    const double half_dt = 0.5 * cfg.dt;
    detail::kick(s, half_dt);
    s.sync_velocities();
    const std::vector<double> rate =
        standard_density_rate(s.ps, phys.neighbors.list, phys.model.kernel, phys.pool);
    detail::drift(s, cfg.dt);
    for (std::size_t a = 0; a < s.ps.size(); ++a) {
        if (s.ps.kind[a] == ParticleKind::wall_lj) {
            continue;
        }
        const double rho = s.ps.density[a] + cfg.dt * rate[a];
        if (!(rho > 0.0)) {
            throw DensityError(a, rho);
        }
        s.ps.density[a] = rho;
    }
    phys.rebuild(s.ps);
    phys.evaluate_std(s.ps, s.acceleration);
    detail::log_wall_dissipation(s, cfg.dt);
    detail::kick(s, half_dt);
    s.sync_velocities();
    ++s.step;
}

template <class Arith>
void advance(SimState<Arith>& s, const IntegratorConfig& cfg, Physics& phys) {
    if (cfg.scheme == Scheme::sym) {
        verlet_step(s, cfg, phys);
    } else {
        std_step(s, cfg, phys);
    }
}

/// u -> -u (exact in fixed point); resets the step counter and forces a fresh
/// acceleration evaluation at the (unchanged) positions.
template <class Arith>
void reverse_velocities(SimState<Arith>& s) {
    for (auto& v : s.velocity) {
        v = Arith::negate(v);
    }
    s.sync_velocities();
    s.step = 0;
    s.acceleration_current = false;
}

/// In-loop Shepard filter on fluid velocities; irreversible.
template <class Arith>
void apply_active_filter(SimState<Arith>& s, Physics& phys) {
    const std::vector<Vec2> filtered = shepard_filter(s.ps, phys.neighbors.list, phys.model.kernel, phys.pool);
    for (std::size_t a = 0; a < s.velocity.size(); ++a) {
        if (s.ps.is_fluid(a)) {
            s.velocity[a] = Arith::from_real(filtered[a]);
        }
    }
    s.sync_velocities();
}

template <class Arith>
DiagnosticsRecord diagnostics(const SimState<Arith>& s, const Physics& phys, std::size_t global_step, double dt) {
    DiagnosticsRecord rec = total_energy(s.ps, phys.neighbors.list, phys.model);
    rec.step = global_step;
    rec.t = static_cast<double>(global_step) * dt;
    rec.dissipated = s.dissipated;
    return rec;
}

struct RunOptions {
    double end_time = 0.0;
    std::size_t diagnostics_every = 50;
    double watchdog_factor = 1e3; // abort when total energy > factor * |initial|
    bool force_irreversible = false;
};

template <class Arith>
struct RunHooks {
    std::function<void(const DiagnosticsRecord&, const SimState<Arith>&)> on_diagnostics;
    std::size_t snapshot_every = 0;
    std::function<void(const SimState<Arith>&, std::size_t global_step, double t)> on_snapshot;
};

/// Steps until end_time. Reverses velocities at reverse_at and applies the
/// active filter every M steps when configured. Returns the diagnostics series.
template <class Arith>
std::vector<DiagnosticsRecord> run(SimState<Arith>& s, const IntegratorConfig& cfg, Physics& phys,
                                   const RunOptions& opt, const RunHooks<Arith>& hooks = {}) {
    cfg.validate();
    require(opt.diagnostics_every > 0, "diagnostics interval must be > 0");
    const bool irreversible = cfg.active_filter_every.has_value() || s.ps.count(ParticleKind::wall_dummy) > 0;
    if (cfg.reverse_at && irreversible && !opt.force_irreversible) {
        throw ContractViolation(
            "reverse_at combined with an irreversible operation (active filter or dummy walls); use --force");
    }
    require(opt.end_time >= 0.0, "negative end time");
    // The run covers [0, end_time]; a partial last step is rounded up.
    const double q = opt.end_time / cfg.dt;
    const auto total = static_cast<std::size_t>(std::fabs(q - std::round(q)) <= 1e-6 * std::max(1.0, q)
                                                    ? std::round(q)
                                                    : std::ceil(q));
    constexpr std::size_t no_reversal = std::numeric_limits<std::size_t>::max();
    const std::size_t reverse_step = cfg.reverse_at ? cfg.steps_for(*cfg.reverse_at) : no_reversal;

    std::vector<DiagnosticsRecord> series;
    detail::ensure_acceleration(s, cfg, phys);
    double initial_energy = 0.0;
    auto record = [&](std::size_t k) {
        DiagnosticsRecord rec = diagnostics(s, phys, k, cfg.dt);
        if (series.empty()) {
            initial_energy = rec.total;
        } else if (!std::isfinite(rec.total) || rec.total > opt.watchdog_factor * std::fabs(initial_energy)) {
            series.push_back(rec);
            if (hooks.on_diagnostics) hooks.on_diagnostics(rec, s);
            throw DivergenceError("energy watchdog: total energy " + std::to_string(rec.total) + " exceeds " +
                                      std::to_string(opt.watchdog_factor) + " x initial " +
                                      std::to_string(initial_energy),
                                  k, rec.t);
        }
        series.push_back(rec);
        if (hooks.on_diagnostics) hooks.on_diagnostics(rec, s);
    };
    record(0);
    if (hooks.on_snapshot && hooks.snapshot_every > 0) hooks.on_snapshot(s, 0, 0.0);
    for (std::size_t k = 1; k <= total; ++k) {
        try {
            advance(s, cfg, phys);
        } catch (const Error& e) {
            throw DivergenceError(std::string(e.what()) + " at step " + std::to_string(k), k,
                                  static_cast<double>(k) * cfg.dt);
        }
        if (cfg.active_filter_every && k % static_cast<std::size_t>(*cfg.active_filter_every) == 0) {
            apply_active_filter(s, phys);
        }
        if (k == reverse_step) {
            reverse_velocities(s);
            detail::ensure_acceleration(s, cfg, phys);
        }
        if (k % opt.diagnostics_every == 0 || k == total) {
            record(k);
        }
        if (hooks.on_snapshot && hooks.snapshot_every > 0 && (k % hooks.snapshot_every == 0 || k == total)) {
            hooks.on_snapshot(s, k, static_cast<double>(k) * cfg.dt);
        }
    }
    return series;
}

} // namespace rsph
