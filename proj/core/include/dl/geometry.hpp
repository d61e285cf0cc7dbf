#pragma once
// Planar geometry kernel: interval bookkeeping on circles and segments,
// convex polygon clipping, intersection points, and Green's-theorem pieces.
// All coverage tests treat grazing contacts (tangencies, shared endpoints)
// as non-covering; those events have probability zero and are only ever hit
// through rounding, which the tolerances below absorb.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace dl {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGeomTol = 1e-9;    // point comparisons / merge radius
constexpr double kParamTol = 1e-12;  // interval dust threshold

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    Vec2 rotated(double th) const {
        double c = std::cos(th), s = std::sin(th);
        return {c * x - s * y, s * x + c * y};
    }
};

struct Box2 {
    Vec2 lo, hi;
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double area() const { return width() * height(); }
    bool contains(const Vec2& p, double inset = 0.0) const {
        return p.x >= lo.x + inset && p.x <= hi.x - inset &&
               p.y >= lo.y + inset && p.y <= hi.y - inset;
    }
    Box2 expanded(double m) const { return {{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}}; }
    Box2 shrunk(double m) const { return expanded(-m); }
    bool overlaps(const Box2& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
    }
};

struct Circle {
    Vec2 c;
    double r = 0.0;
};

struct Segment {
    Vec2 a, b;
    Vec2 at(double t) const { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }
    double length() const { return (b - a).norm(); }
};

// -------------------- interval sets --------------------

// Sorted disjoint intervals on a line parameter. Used for segment visibility
// ([0,1] parameters) and, via AngleSet, for circle visibility.
class IntervalSet {
public:
    static IntervalSet full(double a, double b) {
        IntervalSet s;
        if (b - a > kParamTol) s.iv.push_back({a, b});
        return s;
    }

    void add(double a, double b);
    void subtract(double a, double b);
    void intersect(const IntervalSet& other);
    void clip(double a, double b);

    double measure() const {
        double m = 0.0;
        for (auto& p : iv) m += p.second - p.first;
        return m;
    }
    bool empty() const { return iv.empty(); }
    const std::vector<std::pair<double, double>>& parts() const { return iv; }
    void clear() { iv.clear(); }

private:
    std::vector<std::pair<double, double>> iv;
};

// Interval set on the circle, domain [-pi, pi). Insertions are given as a
// CCW sweep from th0 of given positive extent and are split at the seam.
class AngleSet {
public:
    static AngleSet full() {
        AngleSet s;
        s.set = IntervalSet::full(-kPi, kPi);
        return s;
    }
    static AngleSet none() { return AngleSet{}; }

    void subtract_arc(double th0, double extent);
    void add_arc(double th0, double extent);
    void intersect(const AngleSet& o) { set.intersect(o.set); }

    double measure() const { return set.measure(); }
    bool empty() const { return set.empty(); }
    const std::vector<std::pair<double, double>>& parts() const { return set.parts(); }
    // does the (open) set contain this angle?
    bool contains(double th) const;

private:
    IntervalSet set;
};

double norm_angle(double th);  // into [-pi, pi)

// -------------------- convex polygons --------------------

using Polygon = std::vector<Vec2>;  // CCW

double polygon_area(const Polygon& p);
double polygon_perimeter(const Polygon& p);
Vec2 polygon_centroid(const Polygon& p);
void ensure_ccw(Polygon& p);
Polygon rotated(const Polygon& p, double th);
Polygon translated(const Polygon& p, const Vec2& d);
Polygon box_polygon(const Box2& b);
double max_vertex_norm(const Polygon& p);

// signed distance of p to each edge >= inset (inset>0: strict interior margin)
bool point_in_convex(const Vec2& q, const Polygon& p, double inset = 0.0);

Polygon clip_convex(const Polygon& subject, const Polygon& clip);
double convex_intersection_area(const Polygon& a, const Polygon& b);
Polygon minkowski_sum_convex(const Polygon& a, const Polygon& b);

// area of intersection of two translates of a disk of radius r at centre
// distance d (the disk set covariance)
double disk_covariogram(double r, double d);

// -------------------- coverage intervals --------------------

// angular part of circle `on` lying strictly inside the disk `inside`
AngleSet angles_inside_disk(const Circle& on, const Circle& inside);
// angular part of circle `on` lying inside the convex polygon
AngleSet angles_inside_convex(const Circle& on, const Polygon& poly);
// parameter interval of segment inside the disk
IntervalSet params_inside_disk(const Segment& s, const Circle& disk);
// parameter interval of segment inside the convex polygon
IntervalSet params_inside_convex(const Segment& s, const Polygon& poly);

// -------------------- intersection points --------------------

int circle_circle_points(const Circle& a, const Circle& b, Vec2 out[2]);
int circle_segment_points(const Circle& c, const Segment& s, Vec2 out[2]);
bool segment_segment_point(const Segment& a, const Segment& b, Vec2& out);

// -------------------- Green's theorem pieces --------------------
// contribution of a CCW piece to  A = closed-contour integral of x dy

double green_arc(const Circle& c, double th0, double th1);
double green_seg(const Vec2& p, const Vec2& q);

}  // namespace dl
