#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sqb/common.hpp"
#include "sqb/full_map.hpp"
#include "sqb/jacobian.hpp"
#include "sqb/reduced_map.hpp"
#include "sqb/rootfind.hpp"
#include "sqb/series.hpp"

namespace sqb {

enum class OrbitFamily { PLine, FixedPoint, QFamily, PFamily, Other };

inline const char* to_string(OrbitFamily family) {
    switch (family) {
        case OrbitFamily::PLine: return "P";
        case OrbitFamily::FixedPoint: return "p_lambda";
        case OrbitFamily::QFamily: return "q";
        case OrbitFamily::PFamily: return "p";
        case OrbitFamily::Other: return "other";
    }
    return "?";
}

struct PeriodicOrbitRecord {
    std::vector<ReducedPoint> points;  // one per period, points[0] is the base
    int period = 0;
    std::string itinerary;  // branch labels over {1,2}, one per step
    OrbitFamily family = OrbitFamily::Other;
    int family_index = 0;  // the n of q_n / p_n
    double residual = 0.0;  // max-norm closure error
    StabilityClass stability;
};

struct OrbitValidation {
    bool ok = false;
    int failed_step = -1;     // step where the itinerary or closure broke
    std::string reason;
    double residual = 0.0;
    std::vector<ReducedPoint> points;
};

// Follows the orbit of `start` for itinerary.size() steps, requiring each
// step to use the declared branch, and measures the closure error. Closed
// forms are accepted only after passing through here: their admissibility is
// exactly the existence question.
inline OrbitValidation validate_orbit(const ReducedPoint& start,
                                      const std::string& itinerary,
                                      Lambda lambda) {
    OrbitValidation v;
    if (!(start.s > 0.0 && start.s < 1.0) ||
        !(start.theta >= 0.0 && start.theta < kHalfPi - kAngleGuard)) {
        v.reason = "start outside the reduced phase space";
        v.failed_step = 0;
        return v;
    }
    ReducedPoint p = start;
    v.points.push_back(p);
    for (std::size_t i = 0; i < itinerary.size(); ++i) {
        ReducedStep step;
        try {
            step = reduced_map(p, lambda);
        } catch (const SingularPointError&) {
            v.reason = "orbit hit the singular set";
            v.failed_step = static_cast<int>(i);
            return v;
        }
        char want = itinerary[i];
        char got = step.branch == RegionTag::Reduced_M1 ? '1' : '2';
        if (want != got) {
            v.reason = std::string("branch mismatch: expected ") + want + ", got " + got;
            v.failed_step = static_cast<int>(i);
            return v;
        }
        p = step.image;
        if (i + 1 < itinerary.size()) v.points.push_back(p);
    }
    v.residual = std::max(std::abs(p.s - start.s), std::abs(p.theta - start.theta));
    if (!(v.residual < kTolFixed)) {
        v.reason = "orbit does not close";
        v.failed_step = static_cast<int>(itinerary.size());
        return v;
    }
    v.ok = true;
    return v;
}

// One-dimensional Newton polish of the s-coordinate of a formal periodic
// point. The angle sequence never depends on s, so along a fixed itinerary
// the s-dynamics is exactly affine: slope 1 per f1 step, -cot(theta) per f2
// step. A couple of corrections push the closure residual down to the
// double-precision floor of the return map's multiplier.
inline ReducedPoint polish_periodic_s(ReducedPoint p, const std::string& itinerary,
                                      Lambda lambda) {
    for (int round = 0; round < 3; ++round) {
        double s = p.s, theta = p.theta;
        double slope = 1.0;
        bool ok = true;
        for (char c : itinerary) {
            double t = std::tan(theta);
            double x = s + t;
            if (c == '1') {
                if (!(x < 1.0)) { ok = false; break; }
                s = x;
                theta *= lambda.value();
            } else {
                if (!(x > 1.0)) { ok = false; break; }
                slope *= -1.0 / t;
                s = (1.0 - s) / t;
                theta = lambda.value() * (kHalfPi - theta);
            }
        }
        if (!ok || slope == 1.0) return p;
        double correction = (s - p.s) / (slope - 1.0);
        p.s -= correction;
        if (std::abs(correction) < 1e-17) break;
    }
    return p;
}

// Magnitude of the affine return-map slope along an itinerary started at the
// given angle; used to recognize closure residuals that sit at the
// double-precision floor rather than indicating a genuinely open orbit.
inline double return_slope_magnitude(double theta, const std::string& itinerary,
                                     Lambda lambda) {
    double slope = 1.0;
    for (char c : itinerary) {
        if (c == '1') {
            theta *= lambda.value();
        } else {
            slope /= std::tan(theta);
            theta = lambda.value() * (kHalfPi - theta);
        }
    }
    return std::abs(slope);
}

// The hyperbolic fixed point p_lambda = (1/(1+tan theta_l), theta_l) with
// theta_l = pi lambda / (2(1+lambda)); it lifts to the two period-4 orbits
// of the square hitting adjacent sides at equal angles.
inline PeriodicOrbitRecord fixed_point_p(Lambda lambda) {
    lambda.require_contracting();
    double tl = theta_fixed(lambda);
    ReducedPoint p{1.0 / (1.0 + std::tan(tl)), tl};
    OrbitValidation v = validate_orbit(p, "2", lambda);
    if (!v.ok) throw std::logic_error("fixed_point_p: closed form failed validation");
    PeriodicOrbitRecord rec;
    rec.points = v.points;
    rec.period = 1;
    rec.itinerary = "2";
    rec.family = OrbitFamily::FixedPoint;
    rec.residual = v.residual;
    rec.stability = classify_periodic(rec.points, lambda, rec.residual);
    return rec;
}

// Closed form of f2^n o f1^m through Upsilon_{n,m}; the angle component is
// the affine iterate g^n(lambda^m theta). Valid as a map formula whenever the
// orbit really follows 1^m 2^n, which `validate` enforces step by step.
inline ReducedPoint compose_f2n_f1m(const ReducedPoint& p, Lambda lambda, int n,
                                    int m, bool validate = false) {
    lambda.require_contracting();
    if (n < 0 || m < 0)
        throw std::invalid_argument("compose_f2n_f1m: n, m must be >= 0");
    if (validate) {
        std::string itinerary(m, '1');
        itinerary.append(n, '2');
        OrbitValidation v = validate_orbit(p, itinerary, lambda);
        // closure is irrelevant here; only steps leaving the declared branch
        if (!v.ok && v.failed_step < static_cast<int>(itinerary.size()))
            throw ItineraryError("compose_f2n_f1m: " + v.reason, v.failed_step);
    }
    double lm = std::pow(lambda.value(), m);
    double sm = m == 0 ? 0.0 : s_partial(m - 1, p.theta, lambda);
    if (n == 0) return ReducedPoint{p.s + sm, lm * p.theta};

    double x = lm * p.theta;
    double upsilon = (h_partial(n - 1, x, lambda) - p.s - sm) * gamma_partial(n, x, lambda);
    double sign = n % 2 == 1 ? 1.0 : -1.0;  // (-1)^(n-1)
    return ReducedPoint{sign * upsilon, g_iterate(x, lambda, n)};
}

// Distinguishes a genuinely open orbit from a closure residual pinned at the
// floor reachable in double precision for the orbit's multiplier.
inline std::string annotate_conditioning(const OrbitValidation& v, double theta,
                                         const std::string& itinerary,
                                         Lambda lambda) {
    if (v.failed_step != static_cast<int>(itinerary.size())) return v.reason;
    double slope = return_slope_magnitude(theta, itinerary, lambda);
    if (v.residual < slope * 1e-13)
        return v.reason + " (residual at the double-precision floor of return slope " +
               std::to_string(slope) + ")";
    return v.reason;
}

// Result of solving for a member of the q_n / p_n families. Nonexistence is a
// value, not an error: the bifurcation scan consumes the failure location.
struct OrbitSolveResult {
    std::optional<PeriodicOrbitRecord> orbit;
    int failed_step = -1;
    std::string reason;
    ReducedPoint closed_form;  // the formal solution, even when invalid

    bool exists() const { return orbit.has_value(); }
};

inline double q_theta(int n, Lambda lambda) {
    double l = lambda.value();
    return kHalfPi * l * (1.0 - l) / (1.0 - std::pow(l, n + 2));
}

// q_n solves f2^2 o f1^n (q) = q, period n+2, itinerary 1^n 2 2. The formal
// coordinates come from the affine angle equation and the Upsilon fixed-point
// relation; existence holds exactly when the orbit passes validation
// (equivalently lambda < c_n).
inline OrbitSolveResult solve_qn(int n, Lambda lambda) {
    lambda.require_contracting();
    if (n < 0) throw std::invalid_argument("solve_qn: n >= 0 required");
    if (n == 0) {  // q_0 = p_lambda by convention
        OrbitSolveResult r;
        r.orbit = fixed_point_p(lambda);
        r.orbit->family = OrbitFamily::QFamily;
        r.orbit->family_index = 0;
        r.closed_form = r.orbit->points[0];
        return r;
    }

    double theta = q_theta(n, lambda);
    double x = std::pow(lambda.value(), n) * theta;
    double g2 = gamma_partial(2, x, lambda);
    double s = (1.0 - s_partial(n, theta, lambda)) * g2 / (g2 - 1.0);

    OrbitSolveResult r;
    r.closed_form = ReducedPoint{s, theta};
    std::string itinerary(n, '1');
    itinerary.append(2, '2');
    OrbitValidation v = validate_orbit(
        polish_periodic_s(r.closed_form, itinerary, lambda), itinerary, lambda);
    if (!v.ok) {
        r.failed_step = v.failed_step;
        r.reason = annotate_conditioning(v, theta, itinerary, lambda);
        return r;
    }
    PeriodicOrbitRecord rec;
    rec.points = v.points;
    rec.period = n + 2;
    rec.itinerary = itinerary;
    rec.family = OrbitFamily::QFamily;
    rec.family_index = n;
    rec.residual = v.residual;
    rec.stability = classify_periodic(rec.points, lambda, rec.residual);
    r.orbit = std::move(rec);
    return r;
}

// p_n solves f2^(2n-1) o f1 (p) = p, period 2n, itinerary 1 2^(2n-1).
inline OrbitSolveResult solve_pn(int n, Lambda lambda) {
    lambda.require_contracting();
    if (n < 1) throw std::invalid_argument("solve_pn: n >= 1 required");
    double l = lambda.value();
    double theta = theta_fixed(lambda) * (1.0 + std::pow(l, 2 * n - 1)) /
                   (1.0 + std::pow(l, 2 * n));
    double x = l * theta;
    double gamma = gamma_partial(2 * n - 1, x, lambda);
    double s = (h_partial(2 * n - 2, x, lambda) - std::tan(theta)) * gamma / (1.0 + gamma);

    OrbitSolveResult r;
    r.closed_form = ReducedPoint{s, theta};
    std::string itinerary = "1";
    itinerary.append(2 * n - 1, '2');
    OrbitValidation v = validate_orbit(
        polish_periodic_s(r.closed_form, itinerary, lambda), itinerary, lambda);
    if (!v.ok) {
        r.failed_step = v.failed_step;
        r.reason = annotate_conditioning(v, theta, itinerary, lambda);
        return r;
    }
    PeriodicOrbitRecord rec;
    rec.points = v.points;
    rec.period = 2 * n;
    rec.itinerary = itinerary;
    rec.family = OrbitFamily::PFamily;
    rec.family_index = n;
    rec.residual = v.residual;
    rec.stability = classify_periodic(rec.points, lambda, rec.residual);
    r.orbit = std::move(rec);
    return r;
}

// Existence threshold of q_n: the unique root of S_n(theta_n(lambda)) = 1.
// The left side is strictly increasing in lambda, so a fixed bracket that
// spans every c_n (they decrease from c_1 toward lambda_1) is safe.
inline RootResult cn_threshold_root(int n) {
    if (n < 1) throw std::invalid_argument("cn_threshold: n >= 1 required");
    auto fn = [n](double l) {
        Lambda lam(l);
        return s_partial(n, q_theta(n, lam), lam) - 1.0;
    };
    return find_root(fn, 0.55, 0.90, 1e-13);
}

inline double cn_threshold(int n) { return cn_threshold_root(n).x; }

// Lift of a reduced periodic orbit through the 8-fold quotient: pick the
// preimage on side 0 and iterate the full map until it closes. The factor
// full period / reduced period is one of 1, 2, 4, 8.
struct LiftResult {
    std::vector<FullPoint> points;
    int full_period = 0;
};

inline LiftResult lift_orbit(const PeriodicOrbitRecord& rec, Lambda lambda,
                             double tol = 1e-9) {
    LiftResult lift;
    FullPoint start{rec.points[0].s, rec.points[0].theta};
    FullPoint p = start;
    for (int i = 0; i < 8 * rec.period; ++i) {
        lift.points.push_back(p);
        p = full_map(p, lambda).image;
        double ds = std::abs(p.s - start.s);
        ds = std::min(ds, 4.0 - ds);
        if (ds < tol && std::abs(p.theta - start.theta) < tol) {
            lift.full_period = static_cast<int>(lift.points.size());
            return lift;
        }
    }
    throw std::logic_error("lift_orbit: lifted orbit did not close within 8x period");
}

}  // namespace sqb
