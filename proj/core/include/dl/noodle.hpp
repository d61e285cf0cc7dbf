#pragma once
// Curve-crossing counts for polyline noodles, plus Monte Carlo checks of the
// two classical crossing identities: dropping one curve on another at a
// uniform rotation and translation, and dropping a curve on a ruled floor.

#include <vector>

#include "dl/geometry.hpp"
#include "dl/rng.hpp"
#include "dl/stats.hpp"

namespace dl {

struct Polyline {
    std::vector<Vec2> vertices;
    bool closed = false;

    double length() const;
    size_t segment_count() const;
    Segment segment(size_t i) const;
    double reach() const;  // max vertex distance from the origin
    Polyline transformed(double theta, const Vec2& shift) const;  // rotate, then shift
};

struct CrossingCount {
    long crossings = 0;  // transversal intersection points
    long touches = 0;    // grazing contacts within tolerance, kept out of crossings
};

CrossingCount crossings(const Polyline& a, const Polyline& b, double tol = 1e-12);

// mean of 2pi |B| crossings(a, rotated b + x) over random placements, which
// targets 4 len(a) len(b); B is the bounding box of a grown by b's reach
EstimateReport poincare_mc(const Polyline& a, const Polyline& b, long samples, RngStream& rng,
                           double* touch_rate = nullptr);

// crossings with the horizontal grid {y = i spacing} under a random rotation
// and vertical shift; targets (2 / (pi spacing)) len(a)
EstimateReport buffon_noodle_mc(const Polyline& a, double line_spacing, long samples,
                                RngStream& rng);

Polyline segment_noodle(const Vec2& p, const Vec2& q);

// half circle of the requested arc length, centred on the origin; vertices
// are rescaled so the polyline length equals the target exactly
Polyline semicircle_noodle(double arc_length, int segments = 256);

}  // namespace dl
