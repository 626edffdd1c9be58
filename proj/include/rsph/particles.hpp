#pragma once

#include <rsph/error.hpp>
#include <rsph/vec2.hpp>

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rsph {

enum class ParticleKind : std::uint8_t { fluid = 0, wall_dummy = 1, wall_lj = 2 };

enum class DensityMode { raw, offset };

inline std::string_view to_string(DensityMode m) { return m == DensityMode::raw ? "raw" : "offset"; }

/// Structure-of-arrays particle store. Fluid and both wall kinds share one
/// index space so every neighbor sum has a single canonical order.
struct ParticleSystem {
    std::vector<Vec2> position;
    std::vector<Vec2> velocity;
    std::vector<double> mass;
    std::vector<double> density;
    std::vector<double> offset; // C_a; fixed after initialization
    std::vector<ParticleKind> kind;

    std::size_t size() const noexcept { return position.size(); }

    std::size_t add(ParticleKind k, Vec2 r, Vec2 u, double m) {
        require(m > 0.0, "particle mass must be positive");
        position.push_back(r);
        velocity.push_back(k == ParticleKind::fluid ? u : Vec2{});
        mass.push_back(m);
        density.push_back(0.0);
        offset.push_back(0.0);
        kind.push_back(k);
        return position.size() - 1;
    }

    std::size_t count(ParticleKind k) const {
        return static_cast<std::size_t>(std::count(kind.begin(), kind.end(), k));
    }

    bool is_fluid(std::size_t a) const noexcept { return kind[a] == ParticleKind::fluid; }
};

struct FluidParams {
    double rho0 = 1000.0;
    double c = 120.0;
    double g = 9.8;
    double e_wall = 0.0;
    double r_wall = 1.0;
    double p0 = 0.0; // anti-clump pressure, 0 disables

    void validate() const {
        if (!(rho0 > 0.0)) throw ContractViolation("rho0 must be > 0");
        if (!(c > 0.0)) throw ContractViolation("sound speed c must be > 0");
        if (!(g >= 0.0)) throw ContractViolation("g must be >= 0");
        if (!(e_wall >= 0.0)) throw ContractViolation("e_wall must be >= 0");
        if (!(r_wall > 0.0)) throw ContractViolation("r_wall must be > 0");
        if (!(p0 >= 0.0)) throw ContractViolation("p0 must be >= 0");
    }
};

} // namespace rsph
