#pragma once

// Full parameterization of a benchmark run. Defaults reproduce the published
// parameter tables for each scenario; see defaults_for().

#include <rsph/error.hpp>
#include <rsph/integrate.hpp>
#include <rsph/kernel.hpp>
#include <rsph/particles.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rsph {

enum class Arrangement { square, hexagonal, vogel };
enum class WallModel { lennard_jones, dummy };
enum class FilterMode { none, passive, active };

inline std::string_view to_string(Arrangement a) {
    switch (a) {
    case Arrangement::square: return "square";
    case Arrangement::hexagonal: return "hexagonal";
    case Arrangement::vogel: return "vogel";
    }
    return "?";
}
inline std::string_view to_string(WallModel w) { return w == WallModel::lennard_jones ? "lj" : "dummy"; }
inline std::string_view to_string(FilterMode f) {
    switch (f) {
    case FilterMode::none: return "none";
    case FilterMode::passive: return "passive";
    case FilterMode::active: return "active";
    }
    return "?";
}

template <class E>
E parse_enum(std::string_view s, std::initializer_list<E> values, std::string_view what) {
    for (E v : values) {
        if (to_string(v) == s) return v;
    }
    std::string options;
    for (E v : values) {
        if (!options.empty()) options += " | ";
        options += to_string(v);
    }
    throw std::invalid_argument(std::string(what) + ": unknown value '" + std::string(s) + "' (expected " +
                                options + ")");
}

struct ScenarioConfig {
    // [scenario]
    std::string name = "dambreak"; // dambreak | gresho
    double dr = 0.005;
    Arrangement arrangement = Arrangement::square;
    WallModel walls = WallModel::lennard_jones;
    int wall_layers = 3;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    // [physics]
    double rho0 = 1000.0;
    double c = 120.0;
    double g = 9.8;
    double h_factor = 3.0;      // h = h_factor * dr
    double r_wall_factor = 0.95; // r_wall = r_wall_factor * dr
    double e_wall_factor = 10.0; // E_wall = e_wall_factor * m g l_wch
    double p0 = 0.0;
    KernelFamily kernel = KernelFamily::wendland2;
    double column_width = 1.0;
    double column_height = 2.0;
    double box_width = 4.0;
    double box_height = 3.0;

    // [integrator]
    Arithmetic arithmetic = Arithmetic::fixpa;
    Scheme scheme = Scheme::sym;
    DensityMode density_mode = DensityMode::offset;
    double dt_factor = 0.2; // dt = dt_factor * h / c
    double end_time = 1.0;
    std::optional<double> reverse_at;
    FilterMode filter = FilterMode::none;
    int filter_every = 30;
    bool force = false;
    double watchdog = 1e3;

    // [isc]
    bool isc = false;
    double isc_tol = 1e-10;
    std::uint64_t isc_seed = 0;
    int isc_max_iterations = 30;

    // [output]
    std::string output_dir;
    std::size_t diag_every = 50;
    std::size_t snapshot_every = 0;
    std::size_t histogram_bins = 50;
    bool snapshot_text = false;

    bool operator==(const ScenarioConfig&) const = default;

    double h() const { return h_factor * dr; }
    double dt() const { return dt_factor * h() / c; }
    double particle_mass() const { return rho0 * dr * dr; }
    double r_wall() const { return r_wall_factor * dr; }
    double e_wall() const { return e_wall_factor * particle_mass() * g * column_height; }

    IntegratorConfig integrator() const {
        IntegratorConfig ic;
        ic.dt = dt();
        ic.arithmetic = arithmetic;
        ic.scheme = scheme;
        ic.density_mode = density_mode;
        ic.reverse_at = reverse_at;
        if (filter == FilterMode::active) ic.active_filter_every = filter_every;
        return ic;
    }

    void validate() const {
        auto fail = [](const std::string& key, const std::string& constraint) {
            throw std::invalid_argument("config key '" + key + "': " + constraint);
        };
        if (name != "dambreak" && name != "gresho") fail("scenario.name", "must be dambreak | gresho");
        if (!(dr > 0.0)) fail("scenario.dr", "must be > 0");
        if (wall_layers < 1) fail("scenario.wall_layers", "must be >= 1");
        if (threads < 1) fail("scenario.threads", "must be >= 1");
        if (!(rho0 > 0.0)) fail("physics.rho0", "must be > 0");
        if (!(c > 0.0)) fail("physics.c", "must be > 0");
        if (!(g >= 0.0)) fail("physics.g", "must be >= 0");
        if (!(h_factor > 0.0)) fail("physics.h_factor", "must be > 0");
        if (!(r_wall_factor > 0.0)) fail("physics.r_wall_factor", "must be > 0");
        if (r_wall_factor > h_factor) fail("physics.r_wall_factor", "must not exceed h_factor");
        if (!(e_wall_factor >= 0.0)) fail("physics.e_wall_factor", "must be >= 0");
        if (!(p0 >= 0.0)) fail("physics.p0", "must be >= 0");
        if (!(column_width > 0.0 && column_height > 0.0)) fail("physics.column_width", "column must be non-empty");
        if (column_width > box_width || column_height > box_height) fail("physics.box_width", "column must fit inside the box");
        if (!(dt_factor > 0.0)) fail("integrator.dt_factor", "dt must be > 0 (dt_factor > 0)");
        if (!(end_time >= 0.0)) fail("integrator.end_time", "must be >= 0");
        if (reverse_at) {
            if (!(*reverse_at > 0.0)) fail("integrator.reverse_at", "must be > 0");
            try {
                (void)integrator().steps_for(*reverse_at);
            } catch (const ContractViolation&) {
                fail("integrator.reverse_at", "must be a multiple of dt");
            }
        }
        if (filter_every < 1) fail("integrator.filter_every", "must be >= 1");
        if (!(watchdog > 1.0)) fail("integrator.watchdog", "must be > 1");
        if (!(isc_tol > 0.0)) fail("isc.tol", "must be > 0");
        if (isc_max_iterations < 1) fail("isc.max_iterations", "must be >= 1");
        if (diag_every < 1) fail("output.diag_every", "must be >= 1");
        if (histogram_bins < 2) fail("output.histogram_bins", "must be >= 2");
    }
};

/// Dam break: parameter table of the breaking-dam test. Gresho: parameter
/// table of the vortex test (dimensionless, no gravity, dummy walls).
inline ScenarioConfig defaults_for(std::string_view scenario) {
    ScenarioConfig c;
    if (scenario == "dambreak") {
        return c;
    }
    if (scenario == "gresho") {
        c.name = "gresho";
        c.dr = 1e-2;
        c.walls = WallModel::dummy;
        c.wall_layers = 2;
        c.rho0 = 1.0;
        c.c = 20.0;
        c.g = 0.0;
        c.p0 = 10.0;
        c.e_wall_factor = 0.0;
        c.box_width = 1.0;
        c.box_height = 1.0;
        c.column_width = 1.0;
        c.column_height = 1.0;
        c.arithmetic = Arithmetic::flopa;
        c.dt_factor = 0.1;
        c.end_time = 1.0;
        c.filter = FilterMode::passive;
        c.filter_every = 30;
        return c;
    }
    throw std::invalid_argument("unknown scenario '" + std::string(scenario) + "' (expected dambreak | gresho)");
}

} // namespace rsph
