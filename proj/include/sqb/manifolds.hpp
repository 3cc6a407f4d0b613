#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sqb/common.hpp"
#include "sqb/reduced_map.hpp"
#include "sqb/rng.hpp"
#include "sqb/series.hpp"

namespace sqb {

enum class CurveKind : std::uint8_t {
    StableLocal,
    UnstableLocal,
    SInfinity,
    SingularPlus,
    SingularMinus,
    IterateOfSingular,
};

inline const char* to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::StableLocal: return "stable_local";
        case CurveKind::UnstableLocal: return "unstable_local";
        case CurveKind::SInfinity: return "s_infinity";
        case CurveKind::SingularPlus: return "s_plus";
        case CurveKind::SingularMinus: return "s_minus";
        case CurveKind::IterateOfSingular: return "singular_iterate";
    }
    return "?";
}

// A curve sampled as a graph s(theta) over a strictly increasing theta grid.
struct Curve {
    CurveKind kind = CurveKind::StableLocal;
    std::vector<double> theta;
    std::vector<double> s;

    std::size_t size() const { return theta.size(); }
};

inline std::vector<double> make_theta_grid(std::size_t n = 2048,
                                           double theta_max = kHalfPi - 1e-6) {
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = theta_max * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

// Monotone cubic (Fritsch-Carlson) interpolation of a sampled graph. h_lambda
// is smooth and concave, so a shape-preserving low-order scheme avoids the
// ringing a global fit would introduce.
class MonotoneCubic {
public:
    MonotoneCubic(const std::vector<double>& x, const std::vector<double>& y)
        : x_(x), y_(y), d_(x.size(), 0.0) {
        std::size_t n = x.size();
        if (n < 2 || y.size() != n)
            throw std::invalid_argument("MonotoneCubic: need matching grids, size >= 2");
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        d_[0] = delta[0];
        d_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i)
            d_[i] = delta[i - 1] * delta[i] > 0.0 ? 0.5 * (delta[i - 1] + delta[i]) : 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (delta[i] == 0.0) {
                d_[i] = d_[i + 1] = 0.0;
                continue;
            }
            double a = d_[i] / delta[i];
            double b = d_[i + 1] / delta[i];
            double r = a * a + b * b;
            if (r > 9.0) {
                double tau = 3.0 / std::sqrt(r);
                d_[i] = tau * a * delta[i];
                d_[i + 1] = tau * b * delta[i];
            }
        }
    }

    double operator()(double x) const {
        if (x < x_.front() - 1e-12 || x > x_.back() + 1e-12)
            throw std::range_error("MonotoneCubic: query outside the sampled range");
        x = std::clamp(x, x_.front(), x_.back());
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        if (i + 1 >= x_.size()) i = x_.size() - 2;
        double h = x_[i + 1] - x_[i];
        double t = (x - x_[i]) / h;
        double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] +
               (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * d_[i + 1];
    }

private:
    std::vector<double> x_, y_;
    std::vector<double> d_;
};

// Graph transform of the f2 branch: Gamma(h)(theta) = 1 - h(g(theta)) tan(theta).
// Iterating it from the zero function produces the partial sums of the
// h_lambda series; its fixed graph is the local stable manifold of p_lambda.
inline Curve graph_transform(const Curve& h, Lambda lambda) {
    lambda.require_contracting();
    MonotoneCubic interp(h.theta, h.s);
    Curve out;
    out.kind = h.kind;
    out.theta = h.theta;
    out.s.resize(h.theta.size());
    for (std::size_t i = 0; i < h.theta.size(); ++i) {
        double th = h.theta[i];
        out.s[i] = 1.0 - interp(g_contract(th, lambda)) * std::tan(th);
    }
    return out;
}

// Local stable manifold of p_lambda sampled from the series. The graph
// represents the manifold only where 0 < h < 1; that region is an interval
// around theta_lambda but need not reach theta = 0 (for lambda beyond ~0.62
// the series exceeds 1 near the origin because h(g(0)) < 0), so both ends of
// the valid interval are reported.
struct StableLocalCurve {
    Curve curve;  // full sampled graph
    double theta_valid_lo = 0.0;
    double theta_valid_hi = 0.0;  // 0 < h < 1 holds on [lo, hi]
};

inline StableLocalCurve sample_stable_local(Lambda lambda,
                                            std::size_t n = 2048,
                                            double theta_max = kHalfPi - 1e-6) {
    StableLocalCurve out;
    out.curve.kind = CurveKind::StableLocal;
    out.curve.theta = make_theta_grid(n, theta_max);
    out.curve.s.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.curve.s[i] = h_lambda(out.curve.theta[i], lambda).value;

    auto in_range = [&](std::size_t i) {
        return out.curve.s[i] > 0.0 && out.curve.s[i] < 1.0;
    };
    double tl = theta_fixed(lambda);
    std::size_t anchor = static_cast<std::size_t>(tl / theta_max * (n - 1));
    anchor = std::min(anchor, n - 1);
    std::size_t lo = anchor, hi = anchor;
    while (lo > 0 && in_range(lo - 1)) --lo;
    while (hi + 1 < n && in_range(hi + 1)) ++hi;
    out.theta_valid_lo = out.curve.theta[lo];
    out.theta_valid_hi = out.curve.theta[hi];
    return out;
}

inline Curve sample_sinfinity(Lambda lambda, std::size_t n = 512) {
    // only the part with sigma > 0 lies in the phase space
    Curve out;
    out.kind = CurveKind::SInfinity;
    std::vector<double> grid = make_theta_grid(4 * n);
    for (double th : grid) {
        double v = sigma_curve(th, lambda).value;
        if (v <= 0.0) break;
        out.theta.push_back(th);
        out.s.push_back(v);
        if (out.theta.size() == n) break;
    }
    return out;
}

inline Curve sample_splus(std::size_t n = 512) {
    Curve out;
    out.kind = CurveKind::SingularPlus;
    out.theta = make_theta_grid(n, kPi / 4.0 - 1e-9);
    out.s.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.s[i] = 1.0 - std::tan(out.theta[i]);
    return out;
}

inline Curve sample_sminus(Lambda lambda, std::size_t n = 512) {
    Curve out;
    out.kind = CurveKind::SingularMinus;
    out.theta = make_theta_grid(n, lambda.value() * kPi / 4.0 - 1e-9);
    out.s.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.s[i] = std::tan(lambda.inverse() * out.theta[i]);
    return out;
}

// Backward iterates of the singular curve S+ (the curves along which phi^k
// loses smoothness). Samples of S+ are pulled back through reduced_inverse;
// samples without a preimage are dropped.
inline std::vector<Curve> singular_preimages(Lambda lambda, int depth,
                                             std::size_t n = 1024) {
    std::vector<Curve> out;
    Curve prev = sample_splus(n);
    for (int k = 1; k <= depth; ++k) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < prev.size(); ++i) {
            ReducedPoint p{prev.s[i], prev.theta[i]};
            if (!(p.s > 0.0 && p.s < 1.0)) continue;
            try {
                ReducedPoint q = reduced_inverse(p, lambda).image;
                pts.emplace_back(q.theta, q.s);
            } catch (const NoPreimageError&) {
            } catch (const SingularPointError&) {
            }
        }
        std::sort(pts.begin(), pts.end());
        Curve cur;
        cur.kind = CurveKind::IterateOfSingular;
        for (auto& [th, s] : pts) {
            if (!cur.theta.empty() && th <= cur.theta.back()) continue;
            cur.theta.push_back(th);
            cur.s.push_back(s);
        }
        if (cur.size() < 2) break;
        out.push_back(cur);
        prev = out.back();
    }
    return out;
}

// --- unstable manifold of p_lambda -----------------------------------------

// Horizontal piece of the unstable set: [s_lo, s_hi] x {theta}, produced at
// the given image depth (depth 0 is the local manifold itself).
struct HorizontalSegment {
    double theta = 0.0;
    double s_lo = 0.0;
    double s_hi = 0.0;
    int depth = 0;

    double length() const { return s_hi - s_lo; }
};

struct UnstableSegments {
    std::vector<HorizontalSegment> segments;
    int dropped = 0;  // pieces shorter than the resolution cutoff
};

inline constexpr int kMaxUnstableDepth = 12;
inline constexpr double kSegmentCutoff = 1e-9;

// The map sends horizontal lines to horizontal lines, so the global unstable
// set is grown by cutting each segment at S+ and pushing the pieces through
// the matching branch (f2 reverses the s-orientation).
inline UnstableSegments unstable_segments(Lambda lambda, int depth) {
    lambda.require_contracting();
    if (depth < 0 || depth > kMaxUnstableDepth)
        throw std::invalid_argument("unstable_segments: depth out of [0, 12]");

    UnstableSegments out;
    std::vector<HorizontalSegment> frontier{
        HorizontalSegment{theta_fixed(lambda), 0.0, 1.0, 0}};
    out.segments = frontier;
    for (int d = 1; d <= depth; ++d) {
        std::vector<HorizontalSegment> next;
        for (const HorizontalSegment& seg : frontier) {
            double t = std::tan(seg.theta);
            double cut = 1.0 - t;  // S+ crossing on this horizontal line
            double lo1 = seg.s_lo, hi1 = std::min(seg.s_hi, cut);
            if (hi1 - lo1 > 0.0) {
                HorizontalSegment img{lambda.value() * seg.theta, lo1 + t, hi1 + t, d};
                if (img.length() >= kSegmentCutoff)
                    next.push_back(img);
                else
                    ++out.dropped;
            }
            double lo2 = std::max(seg.s_lo, cut), hi2 = seg.s_hi;
            if (hi2 - lo2 > 0.0) {
                HorizontalSegment img{g_contract(seg.theta, lambda),
                                      (1.0 - hi2) / t, (1.0 - lo2) / t, d};
                if (img.length() >= kSegmentCutoff)
                    next.push_back(img);
                else
                    ++out.dropped;
            }
        }
        out.segments.insert(out.segments.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

// --- homoclinic criterion ---------------------------------------------------

struct HomoclinicTest {
    bool intersects = false;
    double margin_lower = 0.0;  // h_lambda(lambda theta_lambda) - tan(theta_lambda)
    double margin_upper = 0.0;  // 1 - h_lambda(lambda theta_lambda)
};

// The first image of the unstable piece in M1 is (tan theta_l, 1) x {lambda
// theta_l}; it crosses the stable graph exactly when
// tan(theta_l) < h_lambda(lambda theta_l) < 1.
inline HomoclinicTest homoclinic_test(Lambda lambda) {
    lambda.require_contracting();
    double tl = theta_fixed(lambda);
    double h = h_lambda(lambda.value() * tl, lambda).value;
    HomoclinicTest out;
    out.margin_lower = h - std::tan(tl);
    out.margin_upper = 1.0 - h;
    out.intersects = out.margin_lower > 0.0 && out.margin_upper > 0.0;
    return out;
}

// --- trapping region of Prop-3 type ----------------------------------------

// Delta is the closed region bounded by the two local manifolds of p_lambda:
// the union of {theta <= theta_l, s >= h(theta)} and its half-turn partner
// {theta >= theta_l, s <= h(theta)}. f2 reverses orientation in both
// coordinates, so only this two-sided set can be forward invariant.
enum class DeltaMembership { Interior, Boundary, Outside };

inline DeltaMembership delta_membership(const ReducedPoint& p, Lambda lambda,
                                        double margin = 1e-9) {
    double tl = theta_fixed(lambda);
    double h = h_lambda(p.theta, lambda).value;
    bool interior = (p.theta < tl - margin && p.s > h + margin && p.s < 1.0) ||
                    (p.theta > tl + margin && p.s < h - margin && p.s > 0.0);
    if (interior) return DeltaMembership::Interior;
    bool closure = (p.theta <= tl + margin && p.s >= h - margin) ||
                   (p.theta >= tl - margin && p.s <= h + margin);
    return closure ? DeltaMembership::Boundary : DeltaMembership::Outside;
}

inline bool in_delta_closure(const ReducedPoint& p, Lambda lambda,
                             double margin = 1e-6) {
    return delta_membership(p, lambda, margin) != DeltaMembership::Outside;
}

struct DeltaTrappingReport {
    int samples = 0;
    int interior = 0;
    int boundary = 0;
    double fraction = 0.0;  // interior / samples
};

// Samples Delta cap M1 (which lies in the upper lobe: theta > theta_l,
// s < 1 - tan(theta) < h(theta)), applies f1 and reports how many images
// land strictly inside Delta. Expected 1.0 exactly for lambda > lambda_2.
inline DeltaTrappingReport delta_trapping_check(Lambda lambda, int n_samples,
                                                std::uint64_t seed = 20240901) {
    lambda.require_contracting();
    double tl = theta_fixed(lambda);
    SplitMix64 rng(seed);
    DeltaTrappingReport report;
    report.samples = n_samples;
    for (int i = 0; i < n_samples; ++i) {
        double theta = tl + (kPi / 4.0 - tl) * rng.uniform();
        double smax = 1.0 - std::tan(theta);
        double s = smax * rng.uniform();
        if (!(s > 0.0)) { --i; continue; }
        ReducedStep step = reduced_map(ReducedPoint{s, theta}, lambda);
        switch (delta_membership(step.image, lambda)) {
            case DeltaMembership::Interior: ++report.interior; break;
            case DeltaMembership::Boundary: ++report.boundary; break;
            case DeltaMembership::Outside: break;
        }
    }
    report.fraction = static_cast<double>(report.interior) /
                      static_cast<double>(report.samples);
    return report;
}

// --- stable graphs of the q_m family ----------------------------------------

// Fixed graph of the return map f2^2 o f1^m associated with q_m. Solving the
// invariance equation for the s-component (affine in s) gives the transform
//   (G h)(theta) = 1 - S_m(theta) + h(g^2(lambda^m theta))
//                    * tan(lambda^m theta) tan(g(lambda^m theta)),
// whose fixed point passes through q_m. For m = 0 this is Gamma^2, so the
// same routine recovers the stable graph of p_lambda.
inline Curve stable_graph_qm(int m, Lambda lambda, std::size_t n = 1024,
                             int max_iter = 2000, double tol = 1e-13) {
    lambda.require_contracting();
    if (m < 0) throw std::invalid_argument("stable_graph_qm: m >= 0 required");

    Curve h;
    h.kind = CurveKind::StableLocal;
    h.theta = make_theta_grid(n);
    h.s.assign(n, 0.0);
    for (int it = 0; it < max_iter; ++it) {
        MonotoneCubic interp(h.theta, h.s);
        double change = 0.0;
        Curve next = h;
        for (std::size_t i = 0; i < n; ++i) {
            double th = h.theta[i];
            double x = std::pow(lambda.value(), m) * th;
            double query = g_iterate(x, lambda, 2);
            double v = 1.0 - s_partial(m, th, lambda) +
                       interp(query) * std::tan(x) * std::tan(g_contract(x, lambda));
            change = std::max(change, std::abs(v - h.s[i]));
            next.s[i] = v;
        }
        h = std::move(next);
        if (change < tol) return h;
    }
    throw ConvergenceError("stable_graph_qm: graph transform did not converge");
}

}  // namespace sqb
