#pragma once

// Speed-distribution diagnostics in 2D with k_B = 1: histogram estimate of the
// Maxwell-Boltzmann density f_MB(v), reduced Boltzmann entropy
// -int f ln(f / v) dv, and its equilibrium values.

#include <rsph/error.hpp>
#include <rsph/particles.hpp>
#include <rsph/vec2.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rsph {

struct VelocityHistogram {
    double bin_width = 0.0;
    std::vector<std::size_t> counts;
    std::vector<double> density; // f_MB estimate per bin, 1/(m/s)
    std::size_t n = 0;
    double mass = 1.0;
    bool degenerate = false; // all speeds zero

    std::size_t bins() const noexcept { return counts.size(); }
    double center(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * bin_width; }
    double lower_edge(std::size_t i) const noexcept { return static_cast<double>(i) * bin_width; }
};

/// Uniform bins on [0, max speed]; density = count / (N dv).
inline VelocityHistogram build_histogram(std::span<const double> speeds, std::size_t bins, double mass = 1.0) {
    require(bins >= 2, "histogram needs at least two bins");
    VelocityHistogram h;
    h.n = speeds.size();
    h.mass = mass;
    h.counts.assign(bins, 0);
    h.density.assign(bins, 0.0);
    double vmax = 0.0;
    for (double v : speeds) {
        require(v >= 0.0, "speeds must be non-negative");
        vmax = std::max(vmax, v);
    }
    if (h.n == 0 || vmax == 0.0) {
        h.degenerate = true;
        h.bin_width = 0.0;
        if (h.n > 0) h.counts[0] = h.n;
        return h;
    }
    h.bin_width = vmax / static_cast<double>(bins);
    for (double v : speeds) {
        const auto i = std::min(static_cast<std::size_t>(v / h.bin_width), bins - 1);
        ++h.counts[i];
    }
    const double scale = 1.0 / (static_cast<double>(h.n) * h.bin_width);
    for (std::size_t i = 0; i < bins; ++i) h.density[i] = static_cast<double>(h.counts[i]) * scale;
    return h;
}

/// Midpoint rule over non-empty bins; absent for degenerate histograms.
inline std::optional<double> reduced_entropy(const VelocityHistogram& h) {
    if (h.degenerate || h.bins() < 2) {
        return std::nullopt;
    }
    bool beyond_first = false;
    for (std::size_t i = 1; i < h.bins(); ++i) beyond_first = beyond_first || h.density[i] > 0.0;
    if (!beyond_first) {
        return std::nullopt;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double f = h.density[i];
        if (f > 0.0) {
            s -= f * std::log(f / h.center(i)) * h.bin_width;
        }
    }
    return s;
}

/// Moment fit T = (sum m v^2 / 2) / N, exact for the 2D Maxwell-Boltzmann law.
inline double kinetic_energy(std::span<const double> speeds, double mass) {
    double e = 0.0;
    for (double v : speeds) e += 0.5 * mass * v * v;
    return e;
}

inline double fit_temperature(std::span<const double> speeds, double mass) {
    require(!speeds.empty(), "temperature fit needs at least one particle");
    return kinetic_energy(speeds, mass) / static_cast<double>(speeds.size());
}

/// f_MB,eq(T, v) = (m / T) v exp(-m v^2 / (2 T)).
inline double maxwell_boltzmann_density(double v, double temperature, double mass) {
    return mass / temperature * v * std::exp(-mass * v * v / (2.0 * temperature));
}

inline double maxwell_boltzmann_cdf(double v, double temperature, double mass) {
    return -std::expm1(-mass * v * v / (2.0 * temperature));
}

inline std::optional<double> equilibrium_entropy_from_temperature(double temperature, double mass) {
    if (!(temperature > 0.0)) return std::nullopt;
    return 1.0 + std::log(temperature / mass);
}

/// 1 + ln(E / (N m)); evaluated through T = E / N so that it agrees bit for
/// bit with the temperature form when T comes from fit_temperature.
inline std::optional<double> equilibrium_entropy_from_energy(double energy, std::size_t n, double mass) {
    if (!(energy > 0.0) || n == 0) return std::nullopt;
    return equilibrium_entropy_from_temperature(energy / static_cast<double>(n), mass);
}

/// Pearson chi-square of the histogram against the fitted equilibrium law,
/// over bins with expected count >= 5 (reported only, never thresholded).
inline double chi_square(const VelocityHistogram& h, double temperature) {
    double chi2 = 0.0;
    if (h.degenerate || !(temperature > 0.0)) return chi2;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double lo = h.lower_edge(i);
        const double hi = lo + h.bin_width;
        const double expected = static_cast<double>(h.n) * (maxwell_boltzmann_cdf(hi, temperature, h.mass) -
                                                             maxwell_boltzmann_cdf(lo, temperature, h.mass));
        if (expected >= 5.0) {
            const double d = static_cast<double>(h.counts[i]) - expected;
            chi2 += d * d / expected;
        }
    }
    return chi2;
}

struct EntropySample {
    double t = 0.0;
    std::optional<double> reduced;
    double temperature = 0.0;
    std::optional<double> eq_from_t;
    std::optional<double> eq_from_e;
};

struct EntropySeries {
    std::vector<EntropySample> samples;
};

/// Fluid-particle speeds; all fluid particles are assumed to share the mass
/// of the first one.
inline std::vector<double> fluid_speeds(const ParticleSystem& ps) {
    std::vector<double> v;
    for (std::size_t a = 0; a < ps.size(); ++a) {
        if (ps.is_fluid(a)) v.push_back(norm(ps.velocity[a]));
    }
    return v;
}

inline double fluid_particle_mass(const ParticleSystem& ps) {
    for (std::size_t a = 0; a < ps.size(); ++a) {
        if (ps.is_fluid(a)) return ps.mass[a];
    }
    return 1.0;
}

inline EntropySample entropy_sample(std::span<const double> speeds, double mass, std::size_t bins, double t) {
    EntropySample s;
    s.t = t;
    const VelocityHistogram h = build_histogram(speeds, bins, mass);
    s.reduced = reduced_entropy(h);
    s.temperature = speeds.empty() ? 0.0 : fit_temperature(speeds, mass);
    s.eq_from_t = equilibrium_entropy_from_temperature(s.temperature, mass);
    s.eq_from_e = equilibrium_entropy_from_energy(kinetic_energy(speeds, mass), speeds.size(), mass);
    return s;
}

/// Least-squares slope of y against x.
inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "slope needs two or more aligned samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace rsph
