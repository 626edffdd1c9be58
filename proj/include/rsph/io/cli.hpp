#pragma once

// Command-line driver: run, isc, reverse-check, analyze-entropy, gresho-table.

#include <rsph/bench/runner.hpp>
#include <rsph/io/checkpoint.hpp>
#include <rsph/io/config_file.hpp>
#include <rsph/io/csv.hpp>
#include <rsph/isc.hpp>
#include <rsph/thermo.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

namespace rsph::io {

namespace detail {

/// Options shared by the scenario-driven subcommands.
struct ScenarioOptions {
    std::string config_file;
    std::string scenario;
    std::vector<std::string> overrides;
    std::optional<std::string> arith, scheme, filter, walls, arrangement, kernel;
    std::optional<double> dr, end_time, reverse_at;
    std::optional<std::size_t> threads, diag_every, snapshot_every;
    std::optional<std::uint64_t> seed;
    bool isc = false;
    bool force = false;
    bool snapshot_text = false;
    std::string out;

    void attach(CLI::App& app, bool with_reverse) {
        app.add_option("--config", config_file, "YAML configuration file")->check(CLI::ExistingFile);
        app.add_option("--scenario", scenario, "dambreak | gresho (selects the defaults)");
        app.add_option("--arith", arith, "fixpa | flopa");
        app.add_option("--scheme", scheme, "sym | std");
        app.add_option("--filter", filter, "none | passive | active");
        app.add_option("--walls", walls, "lj | dummy");
        app.add_option("--arrangement", arrangement, "square | hexagonal | vogel");
        app.add_option("--kernel", kernel, "wendland2 | cubic_spline");
        app.add_option("--dr", dr, "particle spacing");
        app.add_option("--end-time", end_time, "simulated time");
        if (with_reverse) app.add_option("--reverse-at", reverse_at, "reverse velocities at this time");
        app.add_option("--threads", threads, "worker threads");
        app.add_option("--diag-every", diag_every, "steps between diagnostics records");
        app.add_option("--snapshot-every", snapshot_every, "steps between checkpoints (0 = none)");
        app.add_option("--seed", seed, "random seed (ISC noise)");
        app.add_flag("--isc", isc, "apply initial state correction");
        app.add_flag("--force", force, "allow reversal with irreversible operations");
        app.add_flag("--snapshot-text", snapshot_text, "also write particle tables with each checkpoint");
        app.add_option("--set", overrides, "override any key: section.key=value")->take_all();
        app.add_option("--out", out, "output directory");
    }

    ScenarioConfig build() const {
        ScenarioConfig cfg;
        if (!config_file.empty()) {
            cfg = load_config(config_file);
            if (!scenario.empty() && scenario != cfg.name) {
                throw std::invalid_argument("--scenario " + scenario + " conflicts with config file scenario " +
                                            cfg.name);
            }
        } else {
            cfg = defaults_for(scenario.empty() ? "dambreak" : scenario);
        }
        auto set = [&cfg](const std::string& key, const std::string& value) { apply_override(cfg, key + "=" + value); };
        if (arith) set("integrator.arithmetic", *arith);
        if (scheme) set("integrator.scheme", *scheme);
        if (filter) set("integrator.filter", *filter);
        if (walls) set("scenario.walls", *walls);
        if (arrangement) set("scenario.arrangement", *arrangement);
        if (kernel) set("physics.kernel", *kernel);
        if (dr) cfg.dr = *dr;
        if (end_time) cfg.end_time = *end_time;
        if (reverse_at) cfg.reverse_at = *reverse_at;
        if (threads) cfg.threads = *threads;
        if (diag_every) cfg.diag_every = *diag_every;
        if (snapshot_every) cfg.snapshot_every = *snapshot_every;
        if (seed) {
            cfg.seed = *seed;
            cfg.isc_seed = *seed;
        }
        if (isc) cfg.isc = true;
        if (force) cfg.force = true;
        if (snapshot_text) cfg.snapshot_text = true;
        if (!out.empty()) cfg.output_dir = out;
        for (const auto& o : overrides) apply_override(cfg, o);
        cfg.validate();
        return cfg;
    }
};

inline void print_outcome(std::ostream& os, const bench::ScenarioOutcome& o) {
    os << fmt::format("scenario {} ({} / {}), {} particles ({} fluid), dt = {:.6g}\n", o.config.name,
                      to_string(o.config.arithmetic), to_string(o.config.scheme), o.particles, o.fluid_particles,
                      o.config.dt());
    if (o.isc) {
        os << fmt::format("isc: {} after {} iterations, final error {:.3e}\n",
                          o.isc->converged ? "converged" : "not converged", o.isc->iterations,
                          o.isc->errors.empty() ? 0.0 : o.isc->errors.back());
    }
    if (!o.diagnostics.empty()) {
        os << fmt::format("records {}, final t = {:.6g}, relative energy drift {:.3e}\n", o.diagnostics.size(),
                          o.diagnostics.back().t, bench::relative_energy_drift(o.diagnostics));
    }
    if (auto e = o.gresho_error()) {
        os << fmt::format("gresho error: raw {:.2f}%, passive filter {:.2f}%\n", 100.0 * *e,
                          100.0 * *o.gresho_error_passive());
    }
    if (o.diverged) os << "DIVERGED: " << o.divergence << '\n';
    if (o.reversal) os << o.reversal->summary() << '\n';
}

template <class Arith>
std::vector<EntropySample> entropy_from_checkpoints(const std::vector<std::filesystem::path>& files, std::size_t bins) {
    std::vector<EntropySample> out;
    for (const auto& p : files) {
        CheckpointHeader h;
        const SimState<Arith> s = read_checkpoint<Arith>(p.string(), &h);
        const std::vector<double> v = fluid_speeds(s.ps);
        out.push_back(entropy_sample(v, fluid_particle_mass(s.ps), bins, h.time));
    }
    return out;
}

} // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Reversible symplectic weakly compressible SPH"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for all subcommands");

    detail::ScenarioOptions run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "run a scenario and write diagnostics");
    run_opts.attach(*run_cmd, true);

    detail::ScenarioOptions rev_opts;
    CLI::App* rev_cmd = app.add_subcommand("reverse-check", "forward run, velocity reversal, backward run; PASS/FAIL");
    rev_opts.attach(*rev_cmd, true);

    CLI::App* isc_cmd = app.add_subcommand("isc", "initial state correction on an n x n square of fluid");
    std::size_t isc_n = 30;
    double isc_dr = 0.01;
    double isc_tol = 1e-10;
    int isc_iters = 30;
    std::uint64_t isc_seed = 0;
    bool isc_no_noise = false;
    std::string isc_out;
    isc_cmd->add_option("--n", isc_n, "particles per side")->check(CLI::Range(2, 100000));
    isc_cmd->add_option("--dr", isc_dr, "spacing")->check(CLI::PositiveNumber);
    isc_cmd->add_option("--tol", isc_tol, "relative density tolerance")->check(CLI::PositiveNumber);
    isc_cmd->add_option("--max-iterations", isc_iters, "Newton iteration limit");
    isc_cmd->add_option("--seed", isc_seed, "noise seed");
    isc_cmd->add_flag("--no-noise", isc_no_noise, "start from the exact lattice");
    isc_cmd->add_option("--out", isc_out, "CSV of per-iteration errors");

    CLI::App* ent_cmd = app.add_subcommand("analyze-entropy", "entropy series from checkpoint files");
    std::vector<std::string> ent_inputs;
    std::size_t ent_bins = 50;
    std::string ent_out;
    ent_cmd->add_option("inputs", ent_inputs, "checkpoint files or directories")->required();
    ent_cmd->add_option("--bins", ent_bins, "histogram bins")->check(CLI::Range(2, 1000000));
    ent_cmd->add_option("--out", ent_out, "output CSV (default stdout)");

    CLI::App* table_cmd = app.add_subcommand("gresho-table", "Gresho error for 4 grids x 3 filter modes");
    std::optional<double> table_dr, table_end;
    std::size_t table_threads = 1;
    std::string table_out;
    std::vector<std::string> table_overrides;
    table_cmd->add_option("--dr", table_dr, "particle spacing");
    table_cmd->add_option("--end-time", table_end, "simulated time");
    table_cmd->add_option("--threads", table_threads, "worker threads");
    table_cmd->add_option("--set", table_overrides, "override any key: section.key=value")->take_all();
    table_cmd->add_option("--out", table_out, "output directory (per-run files and gresho_table.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (run_cmd->parsed()) {
            const ScenarioConfig cfg = run_opts.build();
            const bench::ScenarioOutcome o = bench::run_scenario(cfg);
            detail::print_outcome(out, o);
            return o.diverged ? 3 : 0;
        }
        if (rev_cmd->parsed()) {
            ScenarioConfig cfg = rev_opts.build();
            if (!cfg.reverse_at) cfg.reverse_at = 0.5 * cfg.end_time;
            cfg.end_time = 2.0 * *cfg.reverse_at;
            cfg.validate();
            const bench::ScenarioOutcome o = bench::run_scenario(cfg);
            detail::print_outcome(out, o);
            if (!o.reversal) return 3;
            return o.reversal->bitwise_equal ? 0 : 1;
        }
        if (isc_cmd->parsed()) {
            IscProblem p;
            const double side = static_cast<double>(isc_n) * isc_dr;
            p.positions = bench::square_lattice(isc_dr, bench::Region::rectangle({0.0, 0.0}, {side, side}));
            p.masses.assign(p.positions.size(), isc_dr * isc_dr);
            p.kernel = Kernel(KernelFamily::wendland2, 3.0 * isc_dr);
            p.rho0 = 1.0;
            p.dr = isc_dr;
            p.add_noise = !isc_no_noise;
            p.seed = isc_seed;
            p.density_tol = isc_tol;
            p.max_iterations = isc_iters;
            IscReport report;
            bool ok = true;
            try {
                report = solve_isc(p).report;
            } catch (const IscError& e) {
                report = e.report();
                ok = false;
                err << "isc: " << e.what() << '\n';
            }
            std::string csv = "iteration,max_relative_error,linear_iterations,linear_residual\n";
            for (std::size_t i = 0; i < report.errors.size(); ++i) {
                const bool has_solve = i < report.linear_iterations.size();
                csv += fmt::format("{},{},{},{}\n", i, num(report.errors[i]),
                                   has_solve ? std::to_string(report.linear_iterations[i]) : std::string(),
                                   has_solve ? num(report.linear_residuals[i]) : std::string());
                out << fmt::format("iteration {:2d}: max relative density error {:.3e}", i, report.errors[i]);
                if (i > 0 && report.errors[i - 1] > 0.0) {
                    out << fmt::format("  (ratio {:.3e})", report.errors[i] / report.errors[i - 1]);
                }
                out << '\n';
            }
            out << (ok ? "converged" : "FAILED") << " after " << report.iterations << " iterations\n";
            if (!isc_out.empty()) {
                auto f = open_output(isc_out);
                f << csv;
            }
            return ok ? 0 : 1;
        }
        if (ent_cmd->parsed()) {
            std::vector<std::filesystem::path> files;
            for (const auto& in : ent_inputs) {
                if (std::filesystem::is_directory(in)) {
                    for (const auto& e : std::filesystem::directory_iterator(in)) {
                        const std::string name = e.path().filename().string();
                        if (name.starts_with("checkpoint_") && name.ends_with(".bin")) files.push_back(e.path());
                    }
                } else {
                    files.emplace_back(in);
                }
            }
            if (files.empty()) throw Error("no checkpoint files found");
            std::sort(files.begin(), files.end());
            const CheckpointHeader h = read_checkpoint_header(read_file_bytes(files.front().string()));
            std::vector<EntropySample> samples = h.arithmetic == Arithmetic::fixpa
                                                     ? detail::entropy_from_checkpoints<FixedArithmetic>(files, ent_bins)
                                                     : detail::entropy_from_checkpoints<FloatArithmetic>(files, ent_bins);
            std::stable_sort(samples.begin(), samples.end(),
                             [](const EntropySample& a, const EntropySample& b) { return a.t < b.t; });
            if (ent_out.empty()) {
                write_entropy(out, samples);
            } else {
                auto f = open_output(ent_out);
                write_entropy(f, samples);
                out << "wrote " << samples.size() << " samples to " << ent_out << '\n';
            }
            return 0;
        }
        if (table_cmd->parsed()) {
            ScenarioConfig cfg = defaults_for("gresho");
            if (table_dr) cfg.dr = *table_dr;
            if (table_end) cfg.end_time = *table_end;
            cfg.threads = table_threads;
            cfg.output_dir = table_out;
            for (const auto& o : table_overrides) apply_override(cfg, o);
            cfg.validate();
            const auto rows = bench::gresho_table(cfg, [&out](const std::string& s) { out << "running " << s << '\n'; });
            bench::write_gresho_table(out, rows);
            if (!table_out.empty()) {
                auto f = open_output((std::filesystem::path(table_out) / "gresho_table.csv").string());
                bench::write_gresho_table(f, rows);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 2;
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<const char*> argv;
    argv.push_back("rsph");
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace rsph::io
