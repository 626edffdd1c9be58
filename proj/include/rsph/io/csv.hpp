#pragma once

// Plain CSV emitters. Every float is printed with 17 significant digits so
// that a file is a lossless, byte-stable function of the values.

#include <rsph/error.hpp>
#include <rsph/sph.hpp>
#include <rsph/thermo.hpp>

#include <fmt/format.h>

#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace rsph::io {

inline std::string num(double x) { return fmt::format("{:.17g}", x); }
inline std::string num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

inline constexpr const char* kDiagnosticsHeader =
    "step,t,kinetic,internal,gravitational,wall,total,dissipated,momentum_x,momentum_y,angular_momentum,"
    "rho_min,rho_max,entropy_reduced,temperature_fit,entropy_eq_t,entropy_eq_e";

inline void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& r) {
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.step, num(r.t), num(r.kinetic),
                      num(r.internal), num(r.gravitational), num(r.wall), num(r.total), num(r.dissipated),
                      num(r.momentum.x), num(r.momentum.y), num(r.angular_momentum), num(r.rho_min),
                      num(r.rho_max), num(r.entropy_reduced), num(r.temperature_fit), num(r.entropy_eq_t),
                      num(r.entropy_eq_e));
}

inline void write_diagnostics(std::ostream& os, std::span<const DiagnosticsRecord> series) {
    os << kDiagnosticsHeader << '\n';
    for (const auto& r : series) write_diagnostics_row(os, r);
}

inline void write_entropy(std::ostream& os, std::span<const EntropySample> samples) {
    os << "t,entropy_reduced,temperature_fit,entropy_eq_t,entropy_eq_e\n";
    for (const auto& s : samples) {
        os << fmt::format("{},{},{},{},{}\n", num(s.t), num(s.reduced), num(s.temperature), num(s.eq_from_t),
                          num(s.eq_from_e));
    }
}

/// Histogram next to the fitted Maxwell-Boltzmann density at the bin centers.
inline void write_histogram(std::ostream& os, const VelocityHistogram& h, double temperature) {
    os << "v_lo,v_center,count,density,mb_density\n";
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double mb = temperature > 0.0 ? maxwell_boltzmann_density(h.center(i), temperature, h.mass) : 0.0;
        os << fmt::format("{},{},{},{},{}\n", num(h.lower_edge(i)), num(h.center(i)), h.counts[i],
                          num(h.density[i]), num(mb));
    }
}

inline void write_particles(std::ostream& os, const ParticleSystem& ps) {
    os << "index,kind,x,y,u,v,mass,density\n";
    for (std::size_t a = 0; a < ps.size(); ++a) {
        os << fmt::format("{},{},{},{},{},{},{},{}\n", a, static_cast<int>(ps.kind[a]), num(ps.position[a].x),
                          num(ps.position[a].y), num(ps.velocity[a].x), num(ps.velocity[a].y), num(ps.mass[a]),
                          num(ps.density[a]));
    }
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    return f;
}

} // namespace rsph::io
