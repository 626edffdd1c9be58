#pragma once

// YAML configuration files:
//
//   scenario:   { name, dr, arrangement, walls, wall_layers, seed, threads }
//   physics:    { rho0, c, g, h_factor, r_wall_factor, e_wall_factor, p0, kernel,
//                 column_width, column_height, box_width, box_height }
//   integrator: { arithmetic, scheme, density_mode, dt_factor, end_time,
//                 reverse_at, filter, filter_every, force, watchdog }
//   isc:        { enabled, tol, seed, max_iterations }
//   output:     { dir, diag_every, snapshot_every, histogram_bins, snapshot_text }
//
// Missing keys take the defaults of the named scenario; unknown keys are
// errors.

#include <rsph/config.hpp>
#include <rsph/io/checkpoint.hpp>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsph::io {

namespace detail {

struct Field {
    std::string section;
    std::string key;
    std::function<void(ScenarioConfig&, const YAML::Node&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

[[noreturn]] inline void type_error(const std::string& name, const char* expected) {
    throw std::invalid_argument("config key '" + name + "': expected " + expected);
}

template <class T>
T scalar_as(const YAML::Node& n, const std::string& name, const char* expected) {
    if (!n.IsScalar()) type_error(name, expected);
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        type_error(name, expected);
    }
}

inline double as_double(const YAML::Node& n, const std::string& name) {
    return scalar_as<double>(n, name, "a number");
}

inline long long as_integer(const YAML::Node& n, const std::string& name) {
    return scalar_as<long long>(n, name, "an integer");
}

inline std::uint64_t as_unsigned(const YAML::Node& n, const std::string& name) {
    const std::string text = scalar_as<std::string>(n, name, "a non-negative integer");
    if (text.empty() || text.front() == '-') type_error(name, "a non-negative integer");
    return scalar_as<std::uint64_t>(n, name, "a non-negative integer");
}

inline std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

inline const std::vector<Field>& fields() {
    using C = ScenarioConfig;
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        auto dbl = [&f](std::string sec, std::string key, double C::*m) {
            const std::string name = sec + "." + key;
            f.push_back({sec, key, [m, name](C& c, const YAML::Node& n) { c.*m = as_double(n, name); },
                         [m](const C& c) { return fmt_double(c.*m); }});
        };
        auto integer = [&f](std::string sec, std::string key, int C::*m) {
            const std::string name = sec + "." + key;
            f.push_back({sec, key,
                         [m, name](C& c, const YAML::Node& n) {
                             const long long v = as_integer(n, name);
                             if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
                                 type_error(name, "an integer in int range");
                             }
                             c.*m = static_cast<int>(v);
                         },
                         [m](const C& c) { return std::to_string(c.*m); }});
        };
        auto size = [&f](std::string sec, std::string key, std::size_t C::*m) {
            const std::string name = sec + "." + key;
            f.push_back({sec, key, [m, name](C& c, const YAML::Node& n) { c.*m = as_unsigned(n, name); },
                         [m](const C& c) { return std::to_string(c.*m); }});
        };
        auto u64 = [&f](std::string sec, std::string key, std::uint64_t C::*m) {
            const std::string name = sec + "." + key;
            f.push_back({sec, key, [m, name](C& c, const YAML::Node& n) { c.*m = as_unsigned(n, name); },
                         [m](const C& c) { return std::to_string(c.*m); }});
        };
        auto boolean = [&f](std::string sec, std::string key, bool C::*m) {
            const std::string name = sec + "." + key;
            f.push_back({sec, key,
                         [m, name](C& c, const YAML::Node& n) { c.*m = scalar_as<bool>(n, name, "true | false"); },
                         [m](const C& c) { return std::string(c.*m ? "true" : "false"); }});
        };
        auto text = [&f](std::string sec, std::string key, std::string C::*m) {
            const std::string name = sec + "." + key;
            f.push_back({sec, key,
                         [m, name](C& c, const YAML::Node& n) { c.*m = scalar_as<std::string>(n, name, "a string"); },
                         [m](const C& c) { return YAML::Dump(YAML::Node(c.*m)); }});
        };
        auto choice = [&f]<class E>(std::string sec, std::string key, E C::*m, std::initializer_list<E> values) {
            const std::string name = sec + "." + key;
            std::vector<E> vals(values);
            f.push_back({sec, key,
                         [m, name, vals](C& c, const YAML::Node& n) {
                             const std::string s = scalar_as<std::string>(n, name, "a string");
                             for (E v : vals) {
                                 if (to_string(v) == s) {
                                     c.*m = v;
                                     return;
                                 }
                             }
                             std::string opts;
                             for (E v : vals) opts += (opts.empty() ? "" : " | ") + std::string(to_string(v));
                             throw std::invalid_argument("config key '" + name + "': unknown value '" + s +
                                                         "' (expected " + opts + ")");
                         },
                         [m](const C& c) { return std::string(to_string(c.*m)); }});
        };

        f.push_back({"scenario", "name",
                     [](C& c, const YAML::Node& n) { c.name = scalar_as<std::string>(n, "scenario.name", "a string"); },
                     [](const C& c) { return c.name; }});
        dbl("scenario", "dr", &C::dr);
        choice("scenario", "arrangement", &C::arrangement,
               {Arrangement::square, Arrangement::hexagonal, Arrangement::vogel});
        choice("scenario", "walls", &C::walls, {WallModel::lennard_jones, WallModel::dummy});
        integer("scenario", "wall_layers", &C::wall_layers);
        u64("scenario", "seed", &C::seed);
        size("scenario", "threads", &C::threads);

        dbl("physics", "rho0", &C::rho0);
        dbl("physics", "c", &C::c);
        dbl("physics", "g", &C::g);
        dbl("physics", "h_factor", &C::h_factor);
        dbl("physics", "r_wall_factor", &C::r_wall_factor);
        dbl("physics", "e_wall_factor", &C::e_wall_factor);
        dbl("physics", "p0", &C::p0);
        choice("physics", "kernel", &C::kernel, {KernelFamily::wendland2, KernelFamily::cubic_spline});
        dbl("physics", "column_width", &C::column_width);
        dbl("physics", "column_height", &C::column_height);
        dbl("physics", "box_width", &C::box_width);
        dbl("physics", "box_height", &C::box_height);

        choice("integrator", "arithmetic", &C::arithmetic, {Arithmetic::fixpa, Arithmetic::flopa});
        choice("integrator", "scheme", &C::scheme, {Scheme::sym, Scheme::std});
        choice("integrator", "density_mode", &C::density_mode, {DensityMode::raw, DensityMode::offset});
        dbl("integrator", "dt_factor", &C::dt_factor);
        dbl("integrator", "end_time", &C::end_time);
        f.push_back({"integrator", "reverse_at",
                     [](C& c, const YAML::Node& n) {
                         if (n.IsNull()) {
                             c.reverse_at.reset();
                         } else {
                             c.reverse_at = as_double(n, "integrator.reverse_at");
                         }
                     },
                     [](const C& c) { return c.reverse_at ? fmt_double(*c.reverse_at) : std::string("null"); }});
        choice("integrator", "filter", &C::filter, {FilterMode::none, FilterMode::passive, FilterMode::active});
        integer("integrator", "filter_every", &C::filter_every);
        boolean("integrator", "force", &C::force);
        dbl("integrator", "watchdog", &C::watchdog);

        boolean("isc", "enabled", &C::isc);
        dbl("isc", "tol", &C::isc_tol);
        u64("isc", "seed", &C::isc_seed);
        integer("isc", "max_iterations", &C::isc_max_iterations);

        text("output", "dir", &C::output_dir);
        size("output", "diag_every", &C::diag_every);
        size("output", "snapshot_every", &C::snapshot_every);
        size("output", "histogram_bins", &C::histogram_bins);
        boolean("output", "snapshot_text", &C::snapshot_text);
        return f;
    }();
    return table;
}

inline const Field* find_field(const std::string& section, const std::string& key) {
    for (const Field& f : fields()) {
        if (f.section == section && f.key == key) return &f;
    }
    return nullptr;
}

} // namespace detail

/// Parses and validates; throws std::invalid_argument naming the key.
inline ScenarioConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument(std::string("config is not valid YAML: ") + e.what());
    }
    if (root.IsNull()) return defaults_for("dambreak");
    if (!root.IsMap()) throw std::invalid_argument("config: top level must be a mapping of sections");

    std::string name = "dambreak";
    if (const YAML::Node sc = root["scenario"]; sc && sc.IsMap() && sc["name"]) {
        name = detail::scalar_as<std::string>(sc["name"], "scenario.name", "a string");
    }
    ScenarioConfig cfg;
    try {
        cfg = defaults_for(name);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("config key 'scenario.name': must be dambreak | gresho");
    }

    for (const auto& sec : root) {
        const std::string section = sec.first.as<std::string>();
        if (sec.second.IsNull()) continue;
        if (!sec.second.IsMap()) throw std::invalid_argument("config section '" + section + "': expected a mapping");
        bool known_section = false;
        for (const auto& f : detail::fields()) known_section = known_section || f.section == section;
        if (!known_section) throw std::invalid_argument("config: unknown section '" + section + "'");
        for (const auto& kv : sec.second) {
            const std::string key = kv.first.as<std::string>();
            const detail::Field* f = detail::find_field(section, key);
            if (!f) throw std::invalid_argument("config: unknown key '" + section + "." + key + "'");
            f->set(cfg, kv.second);
        }
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file '" + path + "'");
    return parse_config(std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()));
}

/// Applies one "section.key=value" assignment (value in YAML syntax) and
/// revalidates. Changing scenario.name this way keeps the current values;
/// pick defaults with defaults_for() first.
inline void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw std::invalid_argument("override '" + assignment + "': expected section.key=value");
    }
    const std::string section = assignment.substr(0, dot);
    const std::string key = assignment.substr(dot + 1, eq - dot - 1);
    const detail::Field* f = detail::find_field(section, key);
    if (!f) throw std::invalid_argument("config: unknown key '" + section + "." + key + "'");
    YAML::Node value;
    try {
        value = YAML::Load(assignment.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument("override '" + assignment + "': " + e.what());
    }
    f->set(cfg, value);
    cfg.validate();
}

/// Every key, in a fixed order; parse_config(render_config(c)) == c.
inline std::string render_config(const ScenarioConfig& cfg) {
    std::string out;
    std::string current;
    for (const auto& f : detail::fields()) {
        if (f.section != current) {
            current = f.section;
            out += current + ":\n";
        }
        out += "  " + f.key + ": " + f.get(cfg) + "\n";
    }
    return out;
}

/// Identifies the physics of a run: thread count and output location are
/// excluded so that they cannot change checkpoint bytes.
inline std::uint32_t config_hash(ScenarioConfig cfg) {
    cfg.threads = 1;
    cfg.output_dir.clear();
    return crc32_of(render_config(cfg));
}

} // namespace rsph::io
