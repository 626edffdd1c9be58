#pragma once

#include <rsph/error.hpp>

#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rsph {

enum class KernelFamily { wendland2, cubic_spline };

inline std::string_view to_string(KernelFamily f) {
    return f == KernelFamily::wendland2 ? "wendland2" : "cubic_spline";
}

inline KernelFamily parse_kernel_family(std::string_view s) {
    if (s == "wendland2") {
        return KernelFamily::wendland2;
    }
    if (s == "cubic_spline") {
        return KernelFamily::cubic_spline;
    }
    throw std::invalid_argument("unknown kernel '" + std::string(s) +
                                "' (expected wendland2 | cubic_spline)");
}

/// Radial 2D smoothing kernel with compact support h. Both w and w' vanish
/// for r >= h and w' <= 0 on [0, h].
class Kernel {
public:
    Kernel(KernelFamily family, double support_radius)
        : family_(family), h_(support_radius), inv_h_(1.0 / support_radius) {
        require(support_radius > 0.0, "kernel support radius must be positive");
        if (family_ == KernelFamily::wendland2) {
            norm_ = 7.0 / (std::numbers::pi * h_ * h_);
        } else {
            // Classic M4 spline written with smoothing length H = h/2.
            const double big_h = 0.5 * h_;
            norm_ = 10.0 / (7.0 * std::numbers::pi * big_h * big_h);
        }
    }

    KernelFamily family() const noexcept { return family_; }
    double support_radius() const noexcept { return h_; }
    double normalization() const noexcept { return norm_; }

    double w(double r) const {
        require(r >= 0.0, "kernel evaluated at negative radius");
        if (r >= h_) {
            return 0.0;
        }
        const double q = r * inv_h_;
        if (family_ == KernelFamily::wendland2) {
            const double t = 1.0 - q;
            const double t2 = t * t;
            return norm_ * t2 * t2 * (1.0 + 4.0 * q);
        }
        const double s = 2.0 * q;
        if (s < 1.0) {
            return norm_ * (1.0 - 1.5 * s * s + 0.75 * s * s * s);
        }
        const double t = 2.0 - s;
        return norm_ * 0.25 * t * t * t;
    }

    /// dw/dr; defined as 0 at r = 0.
    double dw(double r) const {
        require(r >= 0.0, "kernel derivative evaluated at negative radius");
        if (r >= h_) {
            return 0.0;
        }
        const double q = r * inv_h_;
        if (family_ == KernelFamily::wendland2) {
            const double t = 1.0 - q;
            return -20.0 * norm_ * inv_h_ * q * t * t * t;
        }
        const double s = 2.0 * q;
        const double ds = 2.0 * inv_h_;
        if (s < 1.0) {
            return norm_ * ds * (-3.0 * s + 2.25 * s * s);
        }
        const double t = 2.0 - s;
        return -norm_ * ds * 0.75 * t * t;
    }

private:
    KernelFamily family_;
    double h_;
    double inv_h_;
    double norm_ = 0.0;
};

/// Short-range kernel for the anti-clump term: same family, support dr/2.
inline Kernel make_anticlump_kernel(double dr, KernelFamily family = KernelFamily::wendland2) {
    require(dr > 0.0, "anti-clump spacing must be positive");
    return Kernel(family, 0.5 * dr);
}

} // namespace rsph
