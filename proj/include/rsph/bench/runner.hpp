#pragma once

// End-to-end benchmark runs: build the scenario, initialize densities, step,
// and collect metrics; optionally write them to an output directory.

#include <rsph/bench/reversal.hpp>
#include <rsph/bench/scenarios.hpp>
#include <rsph/config.hpp>
#include <rsph/integrate.hpp>
#include <rsph/io/checkpoint.hpp>
#include <rsph/io/config_file.hpp>
#include <rsph/io/csv.hpp>
#include <rsph/parallel.hpp>
#include <rsph/thermo.hpp>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rsph::bench {

struct GreshoSample {
    double t = 0.0;
    double error = 0.0;         // raw velocities
    double error_passive = 0.0; // Shepard-filtered copy (post-processing)
};

struct ScenarioOutcome {
    ScenarioConfig config;
    std::size_t particles = 0;
    std::size_t fluid_particles = 0;
    std::optional<IscReport> isc;
    std::vector<DiagnosticsRecord> diagnostics;
    std::vector<EntropySample> entropy;
    std::vector<std::array<double, 2>> leading_edge; // (T, X)
    std::vector<GreshoSample> gresho;
    std::optional<ReversalReport> reversal;
    // Last forward-leg speed histogram and its Maxwell-Boltzmann fit.
    std::optional<VelocityHistogram> histogram;
    double histogram_time = 0.0;
    double histogram_temperature = 0.0;
    double histogram_chi_square = 0.0;
    bool diverged = false;
    std::string divergence;
    double divergence_time = 0.0;
    std::size_t coincident_pairs = 0;

    std::optional<double> gresho_error() const {
        if (gresho.empty()) return std::nullopt;
        double e = 0.0;
        for (const auto& g : gresho) e = std::max(e, g.error);
        return e;
    }
    std::optional<double> gresho_error_passive() const {
        if (gresho.empty()) return std::nullopt;
        double e = 0.0;
        for (const auto& g : gresho) e = std::max(e, g.error_passive);
        return e;
    }
};

/// max_t |H(t) - H(0)| / |H(0)| over a diagnostics series.
inline double relative_energy_drift(std::span<const DiagnosticsRecord> series) {
    require(!series.empty(), "empty diagnostics series");
    const double h0 = series.front().total;
    double d = 0.0;
    for (const auto& r : series) d = std::max(d, std::fabs(r.total - h0));
    return d / std::fabs(h0);
}

/// Builds the particles of a scenario with positions on the fixed-point grid
/// and initial densities (and offsets C_a in offset mode) in place.
inline ParticleSystem prepare_particles(const ScenarioConfig& cfg, WorkerPool* pool,
                                        std::optional<IscReport>* isc = nullptr) {
    ParticleSystem ps = cfg.name == "gresho" ? build_gresho(cfg, pool, isc) : build_dambreak(cfg, pool, isc);
    quantize_positions(ps);
    const SphModel model = make_model(cfg);
    Neighborhood nb;
    nb.rebuild(ps.position, model.kernel.support_radius(), pool);
    if (cfg.density_mode == DensityMode::offset) {
        initialize_offsets(ps, nb.list, model.kernel, model.params, pool);
    }
    compute_density(ps, nb.list, model.kernel, cfg.density_mode, model.params, pool);
    return ps;
}

namespace detail {

inline std::string step_name(const char* stem, std::size_t step, const char* ext) {
    return fmt::format("{}_{:08d}.{}", stem, step, ext);
}

} // namespace detail

/// Runs a prepared particle system to cfg.end_time. Divergence is reported
/// in the outcome, not thrown.
template <class Arith>
ScenarioOutcome run_prepared(const ScenarioConfig& cfg, ParticleSystem ps, WorkerPool& pool) {
    namespace fs = std::filesystem;
    ScenarioOutcome out;
    out.config = cfg;
    out.particles = ps.size();
    out.fluid_particles = ps.count(ParticleKind::fluid);
    const bool gresho = cfg.name == "gresho";
    const std::string dir = cfg.output_dir;
    const std::uint32_t hash = io::config_hash(cfg);
    const IntegratorConfig ic = cfg.integrator();
    const std::optional<std::size_t> reverse_step =
        ic.reverse_at ? std::optional<std::size_t>(ic.steps_for(*ic.reverse_at)) : std::nullopt;

    Physics phys;
    phys.model = make_model(cfg);
    phys.pool = &pool;
    SimState<Arith> state = make_state<Arith>(std::move(ps));
    const SimState<Arith> initial = state;
    const double mass = fluid_particle_mass(state.ps);

    RunHooks<Arith> hooks;
    hooks.on_diagnostics = [&](const DiagnosticsRecord& rec, const SimState<Arith>& s) {
        DiagnosticsRecord r = rec;
        const std::vector<double> speeds = fluid_speeds(s.ps);
        const EntropySample e = entropy_sample(speeds, mass, cfg.histogram_bins, rec.t);
        r.entropy_reduced = e.reduced;
        r.temperature_fit = e.temperature;
        r.entropy_eq_t = e.eq_from_t;
        r.entropy_eq_e = e.eq_from_e;
        out.diagnostics.push_back(r);
        out.entropy.push_back(e);
        if (!reverse_step || rec.step <= *reverse_step) {
            VelocityHistogram h = build_histogram(speeds, cfg.histogram_bins, mass);
            out.histogram_time = rec.t;
            out.histogram_temperature = e.temperature;
            out.histogram_chi_square = e.temperature > 0.0 ? chi_square(h, e.temperature) : 0.0;
            out.histogram = std::move(h);
        }
        if (gresho) {
            GreshoSample g;
            g.t = rec.t;
            g.error = gresho_error_at(s.ps, s.ps.velocity);
            const std::vector<Vec2> filtered =
                shepard_filter(s.ps, phys.neighbors.list, phys.model.kernel, phys.pool);
            g.error_passive = gresho_error_at(s.ps, filtered);
            out.gresho.push_back(g);
        } else if (cfg.g > 0.0) {
            out.leading_edge.push_back({dimensionless_time(rec.t, cfg.g, cfg.column_width),
                                        leading_edge(s.ps, cfg.column_width, 0.5 * cfg.dr)});
        }
    };
    if (!dir.empty() && cfg.snapshot_every > 0) {
        hooks.snapshot_every = cfg.snapshot_every;
        hooks.on_snapshot = [&](const SimState<Arith>& s, std::size_t step, double t) {
            io::write_checkpoint((fs::path(dir) / detail::step_name("checkpoint", step, "bin")).string(), s,
                                 cfg.scheme, t, hash);
            if (cfg.snapshot_text) {
                auto f = io::open_output((fs::path(dir) / detail::step_name("particles", step, "csv")).string());
                io::write_particles(f, s.ps);
            }
        };
    }

    RunOptions opt;
    opt.end_time = cfg.end_time;
    opt.diagnostics_every = cfg.diag_every;
    opt.watchdog_factor = cfg.watchdog;
    opt.force_irreversible = cfg.force;
    try {
        (void)run(state, ic, phys, opt, hooks);
    } catch (const DivergenceError& e) {
        out.diverged = true;
        out.divergence = e.what();
        out.divergence_time = e.time();
    }
    out.coincident_pairs = phys.coincident_pairs;
    if (!out.diverged && reverse_step) {
        out.reversal = compare_reversal(initial, state);
    }

    if (!dir.empty()) {
        {
            auto f = io::open_output((fs::path(dir) / "diagnostics.csv").string());
            io::write_diagnostics(f, out.diagnostics);
        }
        {
            auto f = io::open_output((fs::path(dir) / "entropy.csv").string());
            io::write_entropy(f, out.entropy);
        }
        if (out.histogram) {
            auto f = io::open_output((fs::path(dir) / "histogram.csv").string());
            io::write_histogram(f, *out.histogram, out.histogram_temperature);
        }
        if (!out.leading_edge.empty()) {
            auto f = io::open_output((fs::path(dir) / "leading_edge.csv").string());
            f << "T,X\n";
            for (const auto& p : out.leading_edge) f << io::num(p[0]) << ',' << io::num(p[1]) << '\n';
        }
        if (gresho) {
            auto f = io::open_output((fs::path(dir) / "gresho_error.csv").string());
            f << "t,error_raw,error_passive\n";
            for (const auto& g : out.gresho) {
                f << io::num(g.t) << ',' << io::num(g.error) << ',' << io::num(g.error_passive) << '\n';
            }
        }
        if (!out.diverged) {
            io::write_checkpoint((fs::path(dir) / "final.bin").string(), state, cfg.scheme,
                                 static_cast<double>(out.diagnostics.empty() ? 0 : out.diagnostics.back().step) * ic.dt,
                                 hash);
        }
        auto f = io::open_output((fs::path(dir) / "summary.txt").string());
        f << "particles " << out.particles << "\nfluid_particles " << out.fluid_particles << '\n';
        f << "status " << (out.diverged ? "diverged: " + out.divergence : std::string("completed")) << '\n';
        if (!out.diagnostics.empty()) {
            f << "energy_drift " << io::num(relative_energy_drift(out.diagnostics)) << '\n';
        }
        if (out.reversal) f << "reversal " << out.reversal->summary() << '\n';
        if (auto e = out.gresho_error()) f << "gresho_error " << io::num(*e) << '\n';
        if (auto e = out.gresho_error_passive()) f << "gresho_error_passive " << io::num(*e) << '\n';
        if (out.histogram) f << "histogram_chi_square " << io::num(out.histogram_chi_square) << '\n';
        f << "coincident_pairs " << out.coincident_pairs << '\n';
    }
    return out;
}

/// Prepares and runs a scenario in the configured arithmetic. Writes
/// metadata.txt (the only file carrying wall-clock information) when an
/// output directory is set.
inline ScenarioOutcome run_scenario(const ScenarioConfig& cfg) {
    namespace fs = std::filesystem;
    cfg.validate();
    const auto started = std::chrono::system_clock::now();
    if (!cfg.output_dir.empty()) fs::create_directories(cfg.output_dir);
    WorkerPool pool(cfg.threads);
    std::optional<IscReport> isc;
    ParticleSystem ps;
    try {
        ps = prepare_particles(cfg, &pool, &isc);
    } catch (const std::exception& e) {
        throw Error("scenario '" + cfg.name + "' setup failed: " + e.what());
    }
    ScenarioOutcome out = cfg.arithmetic == Arithmetic::fixpa ? run_prepared<FixedArithmetic>(cfg, std::move(ps), pool)
                                                              : run_prepared<FloatArithmetic>(cfg, std::move(ps), pool);
    out.isc = std::move(isc);
    if (!cfg.output_dir.empty()) {
        const auto finished = std::chrono::system_clock::now();
        auto f = io::open_output((fs::path(cfg.output_dir) / "metadata.txt").string());
        f << fmt::format("started {:%Y-%m-%dT%H:%M:%S}\n", fmt::localtime(std::chrono::system_clock::to_time_t(started)));
        f << fmt::format("wall_seconds {:.3f}\n", std::chrono::duration<double>(finished - started).count());
        f << "threads " << cfg.threads << '\n';
        f << fmt::format("config_crc32 {:08x}\n", io::config_hash(cfg));
        f << "config:\n" << io::render_config(cfg);
    }
    return out;
}

struct GreshoTableRow {
    std::string grid;
    double no_filter = 0.0;
    double passive = 0.0;
    double active = 0.0;
};

/// Sweeps square, hexagonal, Vogel and Vogel + ISC grids; the no-filter and
/// passive columns come from one run, the active column from a second run.
inline std::vector<GreshoTableRow> gresho_table(const ScenarioConfig& base,
                                                const std::function<void(const std::string&)>& progress = {}) {
    struct Grid {
        const char* name;
        Arrangement arrangement;
        bool isc;
    };
    const std::array<Grid, 4> grids{{{"square", Arrangement::square, false},
                                     {"hexagonal", Arrangement::hexagonal, false},
                                     {"vogel", Arrangement::vogel, false},
                                     {"vogel+isc", Arrangement::vogel, true}}};
    std::vector<GreshoTableRow> rows;
    for (const Grid& g : grids) {
        GreshoTableRow row;
        row.grid = g.name;
        for (FilterMode mode : {FilterMode::passive, FilterMode::active}) {
            ScenarioConfig cfg = base;
            cfg.name = "gresho";
            cfg.arrangement = g.arrangement;
            cfg.isc = g.isc;
            cfg.filter = mode;
            if (!base.output_dir.empty()) {
                cfg.output_dir = (std::filesystem::path(base.output_dir) /
                                  (std::string(g.name == std::string("vogel+isc") ? "vogel_isc" : g.name) + "_" +
                                   std::string(to_string(mode))))
                                     .string();
            }
            if (progress) progress(std::string(g.name) + " / " + std::string(to_string(mode)));
            const ScenarioOutcome o = run_scenario(cfg);
            if (o.diverged) throw Error("gresho " + std::string(g.name) + " run diverged: " + o.divergence);
            if (mode == FilterMode::passive) {
                row.no_filter = *o.gresho_error();
                row.passive = *o.gresho_error_passive();
            } else {
                row.active = *o.gresho_error();
            }
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_gresho_table(std::ostream& os, std::span<const GreshoTableRow> rows) {
    os << "grid,no_filter,passive,active\n";
    for (const auto& r : rows) {
        os << r.grid << ',' << io::num(r.no_filter) << ',' << io::num(r.passive) << ',' << io::num(r.active) << '\n';
    }
}

} // namespace rsph::bench
