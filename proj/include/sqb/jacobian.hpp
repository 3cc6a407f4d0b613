#pragma once

#include <cmath>
#include <type_traits>
#include <vector>

#include "sqb/common.hpp"
#include "sqb/full_map.hpp"
#include "sqb/reduced_map.hpp"

namespace sqb {

// Derivative of one map step. The matrix is sign * [[a11, a12], [0, a22]]
// with all entries positive; the orientation factor (the (-1)^n of the full
// map, per-branch for the reduced one) is kept in `sign` so that eigenvalue
// moduli and log-sums can use the entries directly.
struct TriJacobian {
    double a11 = 1.0;  // cos(theta_0) / cos(lambda^{-1} theta_1)
    double a12 = 0.0;  // flight / cos(lambda^{-1} theta_1)
    double a22 = 1.0;  // lambda per step, lambda^n after n steps
    int sign = 1;

    TriJacobian times(const TriJacobian& rhs) const {
        // this * rhs, both upper triangular
        return TriJacobian{a11 * rhs.a11, a11 * rhs.a12 + a12 * rhs.a22,
                           a22 * rhs.a22, sign * rhs.sign};
    }
};

namespace detail {

inline TriJacobian step_entries(double theta0, double theta1, double flight,
                                Lambda lambda, int sign) {
    double pre = lambda.inverse() * theta1;  // reflection angle before contraction
    double c = std::cos(pre);
    if (!(c > 0.0))
        throw std::range_error("step_jacobian: lambda^{-1} theta_1 at pi/2");
    return TriJacobian{std::cos(theta0) / c, flight / c, lambda.value(), sign};
}

}  // namespace detail

inline TriJacobian step_jacobian(const FullPoint& p, Lambda lambda) {
    FullStep step = full_map(p, lambda);
    return detail::step_entries(p.theta, step.image.theta, step.flight_length,
                                lambda, -1);
}

inline TriJacobian step_jacobian(const ReducedPoint& p, Lambda lambda) {
    ReducedStep step = reduced_map(p, lambda);
    // The quotient flips orientation on the f2 branch only.
    int sign = step.branch == RegionTag::Reduced_M1 ? 1 : -1;
    return detail::step_entries(p.theta, step.image.theta, step.flight_length,
                                lambda, sign);
}

// Product of step Jacobians along the forward orbit. Reports the step index
// if the orbit dies on the singular set.
template <typename Point>
TriJacobian cocycle(Point p, Lambda lambda, int n) {
    TriJacobian acc;
    for (int i = 0; i < n; ++i) {
        MapStep<Point> step;
        try {
            if constexpr (std::is_same_v<Point, FullPoint>)
                step = full_map(p, lambda);
            else
                step = reduced_map(p, lambda);
        } catch (const SingularPointError& e) {
            throw SingularPointError(std::string(e.what()) + " (cocycle)", i);
        }
        int sign = std::is_same_v<Point, FullPoint>
                       ? -1
                       : (step.branch == RegionTag::Reduced_M1 ? 1 : -1);
        acc = detail::step_entries(p.theta, step.image.theta, step.flight_length,
                                   lambda, sign)
                  .times(acc);
        p = step.image;
    }
    return acc;
}

struct StabilityClass {
    enum Kind { Parabolic, Hyperbolic } kind = Parabolic;
    double alpha_mod = 1.0;  // |alpha_n|, the expanding eigenvalue modulus
    double beta_mod = 1.0;   // lambda^n
};

// Classification of a verified periodic orbit from the angle sequence alone:
// alpha_n = prod cos(theta_i)/cos(lambda^{-1} theta_i), which is 1 exactly
// when every collision is perpendicular (the period-2 family) and > 1
// otherwise.
inline StabilityClass classify_periodic(const std::vector<ReducedPoint>& orbit,
                                        Lambda lambda, double residual) {
    lambda.require_contracting();
    if (orbit.empty() || !(residual < kTolFixed))
        throw std::invalid_argument("classify_periodic: orbit not verified periodic");
    double log_alpha = 0.0;
    for (const ReducedPoint& q : orbit) {
        double pre = lambda.inverse() * q.theta;
        if (pre >= kHalfPi - kAngleGuard)
            throw std::range_error("classify_periodic: lambda^{-1} theta at pi/2");
        log_alpha += std::log(std::cos(q.theta)) - std::log(std::cos(pre));
    }
    StabilityClass out;
    out.alpha_mod = std::exp(log_alpha);
    out.beta_mod = std::pow(lambda.value(), static_cast<double>(orbit.size()));
    out.kind = std::abs(out.alpha_mod - 1.0) <= kTolEigen
                   ? StabilityClass::Parabolic
                   : StabilityClass::Hyperbolic;
    return out;
}

struct LyapunovEstimate {
    double upper = 0.0;     // lim (1/n) log alpha_n
    double lower = 0.0;     // log lambda, exact for every orbit
    long steps = 0;         // steps actually accumulated
    bool died = false;      // orbit hit the singular set
    int death_step = -1;
};

// Exponent estimates from the triangular cocycle, accumulated in logs since
// alpha_n grows exponentially.
inline LyapunovEstimate lyapunov(ReducedPoint p, Lambda lambda, long n_max) {
    lambda.require_contracting();
    LyapunovEstimate est;
    est.lower = std::log(lambda.value());
    double log_alpha = 0.0;
    double s = p.s, theta = p.theta;
    for (long i = 0; i < n_max; ++i) {
        double theta0 = theta;
        if (!reduced_step_fast(s, theta, lambda.value())) {
            est.died = true;
            est.death_step = static_cast<int>(i);
            break;
        }
        double pre = lambda.inverse() * theta;
        log_alpha += std::log(std::cos(theta0)) - std::log(std::cos(pre));
        ++est.steps;
    }
    est.upper = est.steps > 0 ? log_alpha / static_cast<double>(est.steps) : 0.0;
    return est;
}

}  // namespace sqb
