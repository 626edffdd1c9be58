#pragma once

#include <rsph/fixed_point.hpp>
#include <rsph/integrate.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

namespace rsph::bench {

/// Outcome of a forward/reverse round trip: final positions against the
/// initial ones, final velocities against the negated initial ones.
struct ReversalReport {
    bool bitwise_equal = true;
    std::size_t mismatched_particles = 0;
    double max_position_mismatch = 0.0; // m
    double max_velocity_mismatch = 0.0; // m/s

    std::string summary() const {
        return std::string(bitwise_equal ? "PASS" : "FAIL") + " bitwise round trip: " +
               std::to_string(mismatched_particles) + " mismatched particles, max position mismatch " +
               fmt_g(max_position_mismatch) + " m, max velocity mismatch " + fmt_g(max_velocity_mismatch) + " m/s";
    }

private:
    static std::string fmt_g(double x) { return fmt::format("{:.6g}", x); }
};

namespace detail {

inline bool same_bits(const FixedVector2& a, const FixedVector2& b) { return a.x.raw() == b.x.raw() && a.y.raw() == b.y.raw(); }
inline bool same_bits(const Vec2& a, const Vec2& b) {
    return std::bit_cast<std::uint64_t>(a.x) == std::bit_cast<std::uint64_t>(b.x) &&
           std::bit_cast<std::uint64_t>(a.y) == std::bit_cast<std::uint64_t>(b.y);
}
inline double distance(const FixedVector2& a, const FixedVector2& b) {
    // Raw differences are exact in int64 for |values| < 2^31.
    const double dx = static_cast<double>(a.x.raw() - b.x.raw()) * FixedValue::kInvScale;
    const double dy = static_cast<double>(a.y.raw() - b.y.raw()) * FixedValue::kInvScale;
    return std::hypot(dx, dy);
}
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

} // namespace detail

template <class Arith>
ReversalReport compare_reversal(const SimState<Arith>& initial, const SimState<Arith>& final_state) {
    require(initial.position.size() == final_state.position.size(), "round trip changed the particle count");
    ReversalReport r;
    for (std::size_t a = 0; a < initial.position.size(); ++a) {
        const auto back = Arith::negate(initial.velocity[a]);
        const bool ok = detail::same_bits(initial.position[a], final_state.position[a]) &&
                        detail::same_bits(back, final_state.velocity[a]);
        if (!ok) {
            r.bitwise_equal = false;
            ++r.mismatched_particles;
        }
        r.max_position_mismatch =
            std::max(r.max_position_mismatch, detail::distance(initial.position[a], final_state.position[a]));
        r.max_velocity_mismatch = std::max(r.max_velocity_mismatch, detail::distance(back, final_state.velocity[a]));
    }
    return r;
}

} // namespace rsph::bench
