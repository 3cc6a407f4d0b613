#pragma once

#include <cmath>
#include <limits>

#include "sqb/common.hpp"

namespace sqb {

// Angle dynamics of the f2 branch: the affine contraction
// g_lambda(theta) = lambda (pi/2 - theta), with fixed point
// theta_lambda = pi lambda / (2 (1 + lambda)).

inline double theta_fixed(Lambda lambda) {
    return kPi * lambda.value() / (2.0 * (1.0 + lambda.value()));
}

inline double g_contract(double theta, Lambda lambda) {
    return lambda.value() * (kHalfPi - theta);
}

// k-fold composition in closed form: g^k(x) = theta_l + (-lambda)^k (x - theta_l).
inline double g_iterate(double theta, Lambda lambda, int k) {
    double tl = theta_fixed(lambda);
    return tl + std::pow(-lambda.value(), k) * (theta - tl);
}

struct SeriesEval {
    double value = 0.0;
    int terms_used = 0;
    double tail_bound = 0.0;
};

// Stable-manifold height of the fixed point p_lambda:
//   h_lambda(theta) = sum_{n>=0} (-1)^n prod_{i<n} tan(g^i(theta)).
// The factors tan(g^n(theta)) converge to tan(theta_lambda) < 1, so the
// terms eventually decay geometrically. Truncation uses the alternating
// geometric tail with ratio max(tan x_n, tan x_{n+1}); the iterates x_n
// approach theta_lambda monotonically in modulus and alternate sides, so
// that maximum dominates every later ratio.
inline SeriesEval h_lambda(double theta, Lambda lambda) {
    lambda.require_contracting();
    if (!(theta >= 0.0 && theta < kHalfPi - kAngleGuard))
        throw std::domain_error("h_lambda: theta out of [0, pi/2)");

    constexpr double kOverflow = 1e100;
    constexpr int kMaxTerms = 200000;

    SeriesEval out;
    double sum = 0.0;
    double prod = 1.0;
    double sign = 1.0;
    double x = theta;
    for (int n = 0; n < kMaxTerms; ++n) {
        sum += sign * prod;
        prod *= std::tan(x);
        x = g_contract(x, lambda);
        sign = -sign;
        if (!(std::abs(prod) < kOverflow))
            throw ConvergenceError("h_lambda: partial product overflow before contraction");

        // prod now holds the magnitude of the first omitted term. Once every
        // later ratio is < 1 (certified by the max of the next two, which
        // dominates the rest), the alternating tail is bounded by prod.
        double r = std::max(std::tan(x), std::tan(g_contract(x, lambda)));
        if (r < 1.0 && std::abs(prod) < kTolSeries) {
            out.value = sum;
            out.terms_used = n + 1;
            out.tail_bound = std::abs(prod);
            return out;
        }
    }
    throw ConvergenceError("h_lambda: series did not converge");
}

// Height of the forward-invariant curve S_infinity:
//   sigma(theta) = 1 - sum_{i>=0} tan(lambda^i theta).
// sigma <= 0 simply means the curve has left the phase space; it is a valid
// result, not an error.
inline SeriesEval sigma_curve(double theta, Lambda lambda) {
    lambda.require_contracting();
    if (!(theta >= 0.0 && theta < kHalfPi - kAngleGuard))
        throw std::domain_error("sigma_curve: theta out of [0, pi/2)");

    constexpr int kMaxTerms = 200000;
    SeriesEval out;
    double acc = 0.0;
    double x = theta;
    for (int n = 0; n < kMaxTerms; ++n) {
        acc += std::tan(x);
        x *= lambda.value();
        // tan is convex on [0, pi/2), so tan(lambda^k x) <= lambda^k tan(x)
        // and the remaining sum is bounded by tan(x)/(1-lambda).
        double tail = std::tan(x) / (1.0 - lambda.value());
        if (tail < kTolSeries) {
            out.value = 1.0 - acc;
            out.terms_used = n + 1;
            out.tail_bound = tail;
            return out;
        }
    }
    throw ConvergenceError("sigma_curve: series did not converge");
}

// Membership test for B = {(s,theta) : sigma(theta) > 0 and s < sigma(theta)},
// written as s + sum tan(lambda^i theta) < 1 with early exit; meant for hot
// orbit-classification loops.
inline bool in_basin_core(double s, double theta, double lambda) noexcept {
    double acc = s;
    double x = theta;
    for (int i = 0; i < 500; ++i) {
        acc += std::tan(x);
        if (acc >= 1.0) return false;
        x *= lambda;
        if (acc + std::tan(x) / (1.0 - lambda) < 1.0) return true;
    }
    return acc < 1.0;
}

// Finite pieces used by the periodic-orbit composition formulas. Index
// conventions: S_0 = tan(theta), h_0 = 1, gamma_0 = 1 (empty product).
inline double s_partial(int n, double theta, Lambda lambda) {
    double acc = 0.0;
    double x = theta;
    for (int i = 0; i <= n; ++i) {
        acc += std::tan(x);
        x *= lambda.value();
    }
    return acc;
}

inline double h_partial(int n, double theta, Lambda lambda) {
    double acc = 0.0;
    double prod = 1.0;
    double sign = 1.0;
    double x = theta;
    for (int i = 0; i <= n; ++i) {
        acc += sign * prod;
        prod *= std::tan(x);
        x = g_contract(x, lambda);
        sign = -sign;
    }
    return acc;
}

inline double gamma_partial(int n, double theta, Lambda lambda) {
    double prod = 1.0;
    double x = theta;
    for (int i = 0; i < n; ++i) {
        prod /= std::tan(x);
        x = g_contract(x, lambda);
    }
    return prod;
}

// sigma_n(theta) = 1 - S_{n-1}(theta); the curves s = sigma_n(theta) bound
// the strip of M1 points that f1 maps n times before reaching M2. sigma_0 = 1.
inline double sigma_partial(int n, double theta, Lambda lambda) {
    return n == 0 ? 1.0 : 1.0 - s_partial(n - 1, theta, lambda);
}

}  // namespace sqb
