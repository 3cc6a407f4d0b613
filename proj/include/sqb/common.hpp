#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sqb {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = kPi / 2.0;

// Tolerances used throughout. Singular-set proximity is absolute; the maps
// are analytic away from the singular curves, so double precision leaves
// ample headroom above 1e-12.
inline constexpr double kTolSingular = 1e-12;
inline constexpr double kTolEigen = 1e-9;
inline constexpr double kTolFixed = 1e-11;
inline constexpr double kTolSeries = 1e-13;
// Reject angles this close to +-pi/2, where tan/cot blow up.
inline constexpr double kAngleGuard = 1e-9;

struct SingularPointError : std::runtime_error {
    int step = 0;
    explicit SingularPointError(const std::string& what, int step_index = 0)
        : std::runtime_error(what), step(step_index) {}
};

struct NoPreimageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ItineraryError : std::runtime_error {
    int step = 0;
    explicit ItineraryError(const std::string& what, int step_index = 0)
        : std::runtime_error(what), step(step_index) {}
};

// Contraction factor of the reflection law theta' = lambda * theta.
// Values in (0,1) are the standard dissipative regime; values > 1 are
// admitted only so the lambda <-> 1/lambda conjugacy can be exercised.
class Lambda {
public:
    explicit Lambda(double value) : value_(value) {
        if (!(value > 0.0) || value == 1.0)
            throw std::domain_error("Lambda: factor must be positive and != 1");
    }

    double value() const { return value_; }
    double inverse() const { return 1.0 / value_; }
    bool contracting() const { return value_ < 1.0; }

    void require_contracting() const {
        if (!contracting())
            throw std::domain_error("Lambda: operation requires 0 < lambda < 1");
    }

private:
    double value_;
};

// State of the unreduced billiard map: arclength on the unit-square
// perimeter, s in [0,4), and reflection angle theta in (-pi/2, pi/2).
struct FullPoint {
    double s = 0.0;
    double theta = 0.0;
};

// State of the reduced map on M = (0,1) x [0, pi/2).
struct ReducedPoint {
    double s = 0.0;
    double theta = 0.0;
};

enum class RegionTag {
    Full_M1,          // {s} + tan(theta) > 1, adjacent side, counterclockwise
    Full_M2,          // 0 < {s} + tan(theta) < 1, opposite side
    Full_M3,          // {s} + tan(theta) < 0, adjacent side, clockwise
    Reduced_M1,       // s + tan(theta) < 1, branch f1
    Reduced_M2,       // s + tan(theta) > 1, branch f2
    OnSingularPlus,
    OnSingularMinus,
};

inline const char* to_string(RegionTag tag) {
    switch (tag) {
        case RegionTag::Full_M1: return "M1";
        case RegionTag::Full_M2: return "M2";
        case RegionTag::Full_M3: return "M3";
        case RegionTag::Reduced_M1: return "f1";
        case RegionTag::Reduced_M2: return "f2";
        case RegionTag::OnSingularPlus: return "S+";
        case RegionTag::OnSingularMinus: return "S-";
    }
    return "?";
}

template <typename Point>
struct MapStep {
    Point image;
    RegionTag branch = RegionTag::OnSingularPlus;
    double flight_length = 0.0;  // Euclidean distance between collisions
};

using FullStep = MapStep<FullPoint>;
using ReducedStep = MapStep<ReducedPoint>;

inline double fractional(double s) { return s - std::floor(s); }

inline double wrap4(double s) {
    double m = std::fmod(s, 4.0);
    return m < 0.0 ? m + 4.0 : m;
}

inline void check_angle_domain(double theta) {
    if (!(std::abs(theta) < kHalfPi - kAngleGuard))
        throw std::domain_error("angle out of (-pi/2, pi/2)");
}

}  // namespace sqb
