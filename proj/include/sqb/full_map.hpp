#pragma once

#include <algorithm>
#include <cmath>

#include "sqb/common.hpp"

namespace sqb {

// Full billiard map Phi_lambda = R_lambda o B on the perimeter of the unit
// square, parametrized counterclockwise: side 0 is the bottom (y=0), side 1
// the right (x=1), side 2 the top (y=1), side 3 the left (x=0). The angle is
// measured from the inward normal, positive toward increasing arclength.

// Distance from (s,theta) to the singular set S+ in the coordinates used by
// its defining equations ({s} = 0 or {s}+tan(theta) in {0,1}).
inline double splus_distance(const FullPoint& p) {
    double fs = fractional(p.s);
    double x = fs + std::tan(p.theta);
    double corner = std::min(fs, 1.0 - fs);
    return std::min({corner, std::abs(x), std::abs(x - 1.0)});
}

inline RegionTag classify_full(const FullPoint& p) {
    check_angle_domain(p.theta);
    if (splus_distance(p) <= kTolSingular) return RegionTag::OnSingularPlus;
    double x = fractional(p.s) + std::tan(p.theta);
    if (x > 1.0) return RegionTag::Full_M1;
    if (x > 0.0) return RegionTag::Full_M2;
    return RegionTag::Full_M3;
}

// One step of the bare (specular) billiard map B.
inline FullStep billiard_step(const FullPoint& p) {
    RegionTag tag = classify_full(p);
    if (tag == RegionTag::OnSingularPlus)
        throw SingularPointError("billiard map: point on S+ (corner orbit)");

    double fs = fractional(p.s);
    double is = std::floor(p.s);
    double t = std::tan(p.theta);
    FullStep step;
    step.branch = tag;
    switch (tag) {
        case RegionTag::Full_M1:
            step.image.s = wrap4(is + 1.0 + (1.0 - fs) / t);
            step.image.theta = kHalfPi - p.theta;
            step.flight_length = (1.0 - fs) / std::sin(p.theta);
            break;
        case RegionTag::Full_M2:
            step.image.s = wrap4(is - 1.0 - fs - t);
            step.image.theta = -p.theta;
            step.flight_length = 1.0 / std::cos(p.theta);
            break;
        default:  // Full_M3
            step.image.s = wrap4(is + fs / t);
            step.image.theta = -kHalfPi - p.theta;
            step.flight_length = -fs / std::sin(p.theta);
            break;
    }
    return step;
}

// Phi_lambda = R_lambda o B. Accepts lambda > 1 (the expanding regime used
// by the conjugacy identity); images whose angle then escapes (-pi/2, pi/2)
// raise a range error (a "hole" of the expanding map).
inline FullStep full_map(const FullPoint& p, Lambda lambda) {
    FullStep step = billiard_step(p);
    step.image.theta *= lambda.value();
    if (!(std::abs(step.image.theta) < kHalfPi - kAngleGuard))
        throw std::range_error("full_map: image angle escapes (-pi/2, pi/2)");
    return step;
}

inline double sminus_distance(const FullPoint& p, Lambda lambda) {
    return splus_distance(FullPoint{p.s, -lambda.inverse() * p.theta});
}

// Phi_lambda^{-1} = B^{-1} o R_lambda^{-1} with B^{-1} = T o B o T and
// T(s,theta) = (s,-theta).
inline FullStep full_inverse(const FullPoint& p, Lambda lambda) {
    double pre_angle = lambda.inverse() * p.theta;
    if (!(std::abs(pre_angle) < kHalfPi - kAngleGuard))
        throw std::range_error("full_inverse: lambda^{-1} theta out of range");
    if (sminus_distance(p, lambda) <= kTolSingular)
        throw SingularPointError("full_inverse: point on S-");

    FullStep step = billiard_step(FullPoint{p.s, -pre_angle});
    step.image.theta = -step.image.theta;
    return step;
}

// Max-norm discrepancy (s on the circle of length 4) between
// Phi_{1/lambda}(p) and (R_lambda T)^{-1} o Phi_lambda^{-1} o (R_lambda T)(p).
inline double conjugacy_check(const FullPoint& p, Lambda lambda) {
    lambda.require_contracting();
    FullStep lhs = full_map(p, Lambda(lambda.inverse()));

    FullPoint conj{p.s, -lambda.value() * p.theta};
    FullStep mid = full_inverse(conj, lambda);
    FullPoint rhs{mid.image.s, -mid.image.theta / lambda.value()};

    double ds = std::abs(lhs.image.s - rhs.s);
    ds = std::min(ds, 4.0 - ds);
    return std::max(ds, std::abs(lhs.image.theta - rhs.theta));
}

}  // namespace sqb
