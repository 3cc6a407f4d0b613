#pragma once

// Test-only geometric oracle: traces the billiard ray through the unit square
// with explicit segment/side intersections and vector reflection. Written
// against the boundary parametrization alone; shares no code with the map
// formulas it checks.

#include <cmath>
#include <optional>
#include <stdexcept>

namespace oracle {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct Frame {
    Vec2 origin, tangent, normal;  // tangent points toward increasing s
};

inline Frame side_frame(int side) {
    switch (side) {
        case 0: return {{0, 0}, {1, 0}, {0, 1}};    // bottom
        case 1: return {{1, 0}, {0, 1}, {-1, 0}};   // right
        case 2: return {{1, 1}, {-1, 0}, {0, -1}};  // top
        default: return {{0, 1}, {0, -1}, {1, 0}};  // left
    }
}

struct TraceResult {
    double s = 0.0;      // arclength of the landing collision
    double theta = 0.0;  // reflected angle, before any contraction
    double flight = 0.0;
};

inline TraceResult trace(double s, double theta) {
    int side = static_cast<int>(std::floor(s)) % 4;
    double f = s - std::floor(s);
    Frame frame = side_frame(side);
    Vec2 pos{frame.origin.x + f * frame.tangent.x,
             frame.origin.y + f * frame.tangent.y};
    Vec2 vel{std::cos(theta) * frame.normal.x + std::sin(theta) * frame.tangent.x,
             std::cos(theta) * frame.normal.y + std::sin(theta) * frame.tangent.y};

    // first positive intersection with x=0, x=1, y=0 or y=1
    double best_t = 0.0;
    int wall = -1;
    auto consider = [&](int w, double t) {
        if (t > 1e-12 && (wall < 0 || t < best_t)) {
            best_t = t;
            wall = w;
        }
    };
    if (vel.y != 0.0) {
        consider(0, (0.0 - pos.y) / vel.y);
        consider(2, (1.0 - pos.y) / vel.y);
    }
    if (vel.x != 0.0) {
        consider(1, (1.0 - pos.x) / vel.x);
        consider(3, (0.0 - pos.x) / vel.x);
    }
    if (wall < 0) throw std::runtime_error("oracle: ray left the square");

    Vec2 hit{pos.x + best_t * vel.x, pos.y + best_t * vel.y};
    Frame target = side_frame(wall);
    double dot = vel.x * target.normal.x + vel.y * target.normal.y;
    Vec2 refl{vel.x - 2.0 * dot * target.normal.x,
              vel.y - 2.0 * dot * target.normal.y};

    TraceResult out;
    out.flight = best_t;  // |vel| = 1
    out.theta = std::atan2(refl.x * target.tangent.x + refl.y * target.tangent.y,
                           refl.x * target.normal.x + refl.y * target.normal.y);
    double along = (hit.x - target.origin.x) * target.tangent.x +
                   (hit.y - target.origin.y) * target.tangent.y;
    out.s = wall + along;
    if (out.s >= 4.0) out.s -= 4.0;
    return out;
}

}  // namespace oracle
