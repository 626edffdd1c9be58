#pragma once

// Matrix-free Krylov solvers. Operators are callables
//   void apply(std::span<const double> in, std::span<double> out)
// so nothing is ever assembled.

#include <rsph/error.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rsph {

struct KrylovResult {
    int iterations = 0;
    double residual_norm = 0.0;
    double rhs_norm = 0.0;
    bool converged = false;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite
/// operator. x holds the initial guess on entry. Stops when
/// ||b - A x|| <= rel_tol * ||b||. Throws if the operator shows a non-positive
/// curvature direction (singular or indefinite system).
template <class Apply>
KrylovResult conjugate_gradient(Apply&& apply, std::span<const double> b, std::span<double> x,
                                std::span<const double> inv_diag, double rel_tol, int max_iterations) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), q(n);
    KrylovResult res;
    res.rhs_norm = norm2(b);
    apply(std::span<const double>(x.data(), n), std::span<double>(q));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    res.residual_norm = norm2(r);
    const double target = rel_tol * res.rhs_norm;
    if (res.residual_norm <= target) {
        res.converged = true;
        return res;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iterations; ++it) {
        apply(std::span<const double>(p), std::span<double>(q));
        const double curvature = dot(p, q);
        if (!(curvature > 0.0)) {
            throw Error("conjugate gradients: singular or indefinite operator (p'Ap = " +
                        std::to_string(curvature) + ")");
        }
        const double alpha = rz / curvature;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res.iterations = it;
        res.residual_norm = norm2(r);
        if (res.residual_norm <= target) {
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // Recurrence drift: report the true residual.
    apply(std::span<const double>(x.data(), n), std::span<double>(q));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    res.residual_norm = norm2(r);
    res.converged = res.residual_norm <= target;
    return res;
}

} // namespace rsph
