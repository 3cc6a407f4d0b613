#pragma once

#include <cmath>
#include <utility>

#include "sqb/common.hpp"

namespace sqb {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
};

// Bracketed scalar root finding: secant steps accepted only while they stay
// inside the current bracket, bisection otherwise. Guaranteed on the monotone
// one-dimensional problems this project solves; no unguarded Newton anywhere.
template <typename Fn>
RootResult find_root(Fn&& f, double lo, double hi, double xtol = 1e-13,
                     int max_iter = 256) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, 0};
    if (fhi == 0.0) return {hi, 0.0, 0};
    if (flo * fhi > 0.0)
        throw BracketError("find_root: endpoints do not bracket a sign change");

    RootResult out;
    double x = lo, fx = flo;
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        double width = hi - lo;
        x = 0.5 * (lo + hi);
        // periodic forced bisection keeps the bracket shrinking even when the
        // secant hugs one endpoint
        if (fhi != flo && it % 3 != 2) {
            double secant = hi - fhi * width / (fhi - flo);
            if (secant > lo + 0.01 * width && secant < hi - 0.01 * width) x = secant;
        }
        fx = f(x);
        if (fx == 0.0 || hi - lo <= xtol) break;
        if (flo * fx < 0.0) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
    }
    out.x = x;
    out.fx = fx;
    return out;
}

}  // namespace sqb
