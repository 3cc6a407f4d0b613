#pragma once

#include <array>
#include <cmath>

#include "sqb/common.hpp"
#include "sqb/full_map.hpp"

namespace sqb {

// Reduced billiard map phi_lambda on M = (0,1) x [0, pi/2), obtained from the
// full map by the quotient pi(s,theta) = ({s},theta) for theta >= 0 and
// (1-{s},-theta) for theta < 0. Branch f1 (below S+: s + tan(theta) < 1)
// sends the orbit to the opposite side; branch f2 (above S+) to an adjacent
// side. Both branches contract the angle by lambda.

inline ReducedPoint project(const FullPoint& p) {
    check_angle_domain(p.theta);
    double fs = fractional(p.s);
    if (std::min(fs, 1.0 - fs) <= kTolSingular)
        throw std::domain_error("project: corner point ({s} = 0)");
    if (p.theta >= 0.0) return ReducedPoint{fs, p.theta};
    return ReducedPoint{1.0 - fs, -p.theta};
}

// The 8 preimages of a reduced point under the quotient map.
inline std::array<FullPoint, 8> preimages(const ReducedPoint& p) {
    std::array<FullPoint, 8> out;
    for (int k = 0; k < 4; ++k) {
        out[k] = FullPoint{k + p.s, p.theta};
        out[4 + k] = FullPoint{k + 1.0 - p.s, -p.theta};
    }
    return out;
}

inline void check_reduced_domain(const ReducedPoint& p) {
    if (!(p.s > 0.0 && p.s < 1.0))
        throw std::domain_error("reduced point: s out of (0,1)");
    if (!(p.theta >= 0.0 && p.theta < kHalfPi - kAngleGuard))
        throw std::domain_error("reduced point: theta out of [0, pi/2)");
}

inline RegionTag classify_reduced(const ReducedPoint& p) {
    check_reduced_domain(p);
    double x = p.s + std::tan(p.theta);
    if (std::abs(x - 1.0) <= kTolSingular) return RegionTag::OnSingularPlus;
    return x < 1.0 ? RegionTag::Reduced_M1 : RegionTag::Reduced_M2;
}

inline ReducedStep reduced_map(const ReducedPoint& p, Lambda lambda) {
    RegionTag tag = classify_reduced(p);
    if (tag == RegionTag::OnSingularPlus)
        throw SingularPointError("reduced_map: point on S+");

    ReducedStep step;
    step.branch = tag;
    if (tag == RegionTag::Reduced_M1) {
        step.image = ReducedPoint{p.s + std::tan(p.theta), lambda.value() * p.theta};
        step.flight_length = 1.0 / std::cos(p.theta);
    } else {
        step.image = ReducedPoint{(1.0 - p.s) / std::tan(p.theta),
                                  lambda.value() * (kHalfPi - p.theta)};
        step.flight_length = (1.0 - p.s) / std::sin(p.theta);
    }
    return step;
}

// Non-throwing variant for hot loops (basins, attractor sampling). Returns
// false when the point is within the singular tolerance of S+.
inline bool reduced_step_fast(double& s, double& theta, double lambda) noexcept {
    double t = std::tan(theta);
    double x = s + t;
    if (std::abs(x - 1.0) <= kTolSingular) return false;
    if (x < 1.0) {
        s = x;
        theta *= lambda;
    } else {
        s = (1.0 - s) / t;
        theta = lambda * (kHalfPi - theta);
    }
    return true;
}

// Signed distance to the reduced singular curve S- = {s = tan(lambda^-1 theta)}.
inline double reduced_sminus_distance(const ReducedPoint& p, Lambda lambda) {
    double pre_angle = lambda.inverse() * p.theta;
    if (pre_angle >= kHalfPi - kAngleGuard) return std::abs(p.s);  // curve left the space
    return std::abs(p.s - std::tan(pre_angle));
}

// Inverts the branch that maps onto p. Exactly one branch applies off S-:
// f1^{-1} when s > tan(lambda^{-1} theta), f2^{-1} when s < tan(...).
inline ReducedStep reduced_inverse(const ReducedPoint& p, Lambda lambda) {
    check_reduced_domain(p);
    double pre_angle = lambda.inverse() * p.theta;
    if (pre_angle >= kHalfPi - kAngleGuard)
        throw NoPreimageError("reduced_inverse: theta >= lambda*pi/2, not in the image");
    double tp = std::tan(pre_angle);
    if (std::abs(p.s - tp) <= kTolSingular)
        throw SingularPointError("reduced_inverse: point on S-");

    ReducedStep step;
    if (p.s > tp) {
        step.branch = RegionTag::Reduced_M1;
        step.image = ReducedPoint{p.s - tp, pre_angle};
        step.flight_length = 1.0 / std::cos(pre_angle);
    } else {
        step.branch = RegionTag::Reduced_M2;
        step.image = ReducedPoint{1.0 - p.s / tp, kHalfPi - pre_angle};
        step.flight_length = p.s / std::sin(pre_angle);
    }
    return step;
}

}  // namespace sqb
