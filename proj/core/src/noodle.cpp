#include "dl/noodle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dl {

namespace {

double point_segment_distance(const Vec2& p, const Segment& s) {
    Vec2 d = s.b - s.a;
    double len2 = d.dot(d);
    if (len2 <= 0.0) return (p - s.a).norm();
    double t = std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
    return (p - s.at(t)).norm();
}

double segment_distance(const Segment& u, const Segment& v) {
    double d1 = (u.b - u.a).cross(v.a - u.a);
    double d2 = (u.b - u.a).cross(v.b - u.a);
    double d3 = (v.b - v.a).cross(u.a - v.a);
    double d4 = (v.b - v.a).cross(u.b - v.a);
    if (((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0))) return 0.0;
    return std::min(std::min(point_segment_distance(v.a, u), point_segment_distance(v.b, u)),
                    std::min(point_segment_distance(u.a, v), point_segment_distance(u.b, v)));
}

// -1 below, +1 above, 0 within tol of the supporting line of s (distances
// are geometric, so tol is a length)
int side_of(const Vec2& p, const Segment& s, double tol) {
    Vec2 d = s.b - s.a;
    double len = d.norm();
    if (len <= 0.0) return 0;
    double h = d.cross(p - s.a) / len;
    if (h > tol) return 1;
    if (h < -tol) return -1;
    return 0;
}

}  // namespace

double Polyline::length() const {
    double total = 0.0;
    for (size_t i = 0; i < segment_count(); ++i) total += segment(i).length();
    return total;
}

size_t Polyline::segment_count() const {
    if (vertices.size() < 2) return 0;
    return closed ? vertices.size() : vertices.size() - 1;
}

Segment Polyline::segment(size_t i) const {
    return {vertices[i], vertices[(i + 1) % vertices.size()]};
}

double Polyline::reach() const {
    double r = 0.0;
    for (auto& v : vertices) r = std::max(r, v.norm());
    return r;
}

Polyline Polyline::transformed(double theta, const Vec2& shift) const {
    Polyline out;
    out.closed = closed;
    out.vertices.reserve(vertices.size());
    for (auto& v : vertices) out.vertices.push_back(v.rotated(theta) + shift);
    return out;
}

CrossingCount crossings(const Polyline& a, const Polyline& b, double tol) {
    CrossingCount out;
    for (size_t i = 0; i < a.segment_count(); ++i) {
        Segment u = a.segment(i);
        for (size_t j = 0; j < b.segment_count(); ++j) {
            Segment v = b.segment(j);
            int s1 = side_of(v.a, u, tol);
            int s2 = side_of(v.b, u, tol);
            int t1 = side_of(u.a, v, tol);
            int t2 = side_of(u.b, v, tol);
            if (s1 * s2 < 0 && t1 * t2 < 0) {
                ++out.crossings;
            } else if (segment_distance(u, v) < tol) {
                ++out.touches;
            }
        }
    }
    return out;
}

EstimateReport poincare_mc(const Polyline& a, const Polyline& b, long samples, RngStream& rng,
                           double* touch_rate) {
    if (a.segment_count() == 0 || b.segment_count() == 0 || !(a.length() > 0.0) ||
        !(b.length() > 0.0))
        throw std::invalid_argument("poincare_mc: degenerate curve");
    if (samples < 2) throw std::invalid_argument("poincare_mc: need at least 2 samples");

    double inf = std::numeric_limits<double>::infinity();
    double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
    for (auto& v : a.vertices) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    double grow = b.reach() + 1e-6;
    x0 -= grow;
    x1 += grow;
    y0 -= grow;
    y1 += grow;
    double area = (x1 - x0) * (y1 - y0);
    double scale = 2.0 * kPi * area;

    double sum = 0.0, sum2 = 0.0;
    long touched = 0;
    for (long i = 0; i < samples; ++i) {
        double theta = rng.uniform(-kPi, kPi);
        Vec2 shift{rng.uniform(x0, x1), rng.uniform(y0, y1)};
        CrossingCount c = crossings(a, b.transformed(theta, shift));
        double val = scale * double(c.crossings);
        sum += val;
        sum2 += val * val;
        if (c.touches > 0) ++touched;
    }
    double n = double(samples);
    double mean = sum / n;
    double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
    if (touch_rate) *touch_rate = double(touched) / n;
    return make_report(mean, std::sqrt(var / n), samples, 4.0 * a.length() * b.length());
}

EstimateReport buffon_noodle_mc(const Polyline& a, double line_spacing, long samples,
                                RngStream& rng) {
    if (!(line_spacing > 0.0)) throw std::invalid_argument("buffon_noodle_mc: spacing must be positive");
    if (a.segment_count() == 0 || !(a.length() > 0.0))
        throw std::invalid_argument("buffon_noodle_mc: degenerate curve");
    if (samples < 2) throw std::invalid_argument("buffon_noodle_mc: need at least 2 samples");

    double sum = 0.0, sum2 = 0.0;
    for (long i = 0; i < samples; ++i) {
        double theta = rng.uniform(-kPi, kPi);
        double shift = rng.uniform(0.0, line_spacing);
        Polyline placed = a.transformed(theta, {0.0, shift});
        long count = 0;
        for (size_t s = 0; s < placed.segment_count(); ++s) {
            Segment seg = placed.segment(s);
            double lo = std::min(seg.a.y, seg.b.y) / line_spacing;
            double hi = std::max(seg.a.y, seg.b.y) / line_spacing;
            count += long(std::floor(hi)) - long(std::floor(lo));
        }
        sum += double(count);
        sum2 += double(count) * double(count);
    }
    double n = double(samples);
    double mean = sum / n;
    double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
    return make_report(mean, std::sqrt(var / n), samples,
                       2.0 / (kPi * line_spacing) * a.length());
}

Polyline segment_noodle(const Vec2& p, const Vec2& q) { return Polyline{{p, q}, false}; }

Polyline semicircle_noodle(double arc_length, int segments) {
    if (!(arc_length > 0.0) || segments < 1)
        throw std::invalid_argument("semicircle_noodle: bad parameters");
    double r = arc_length / kPi;
    Polyline out;
    out.vertices.reserve(size_t(segments) + 1);
    for (int i = 0; i <= segments; ++i) {
        double th = kPi * double(i) / double(segments);
        out.vertices.push_back({r * std::cos(th), r * std::sin(th)});
    }
    double chord_len = out.length();
    double fix = arc_length / chord_len;
    for (auto& v : out.vertices) v = v * fix;
    return out;
}

}  // namespace dl
