#include "dl/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace dl {

// -------------------- IntervalSet --------------------

void IntervalSet::add(double a, double b) {
    if (b - a <= kParamTol) return;
    // find insertion window of intervals overlapping [a,b]
    size_t i = 0, n = iv.size();
    while (i < n && iv[i].second < a) ++i;
    size_t j = i;
    while (j < n && iv[j].first <= b) {
        a = std::min(a, iv[j].first);
        b = std::max(b, iv[j].second);
        ++j;
    }
    iv.erase(iv.begin() + i, iv.begin() + j);
    iv.insert(iv.begin() + i, {a, b});
}

void IntervalSet::subtract(double a, double b) {
    if (b - a <= 0.0 || iv.empty()) return;
    std::vector<std::pair<double, double>> out;
    out.reserve(iv.size() + 1);
    for (auto& p : iv) {
        if (p.second <= a || p.first >= b) {
            out.push_back(p);
            continue;
        }
        if (p.first < a && a - p.first > kParamTol) out.push_back({p.first, a});
        if (p.second > b && p.second - b > kParamTol) out.push_back({b, p.second});
    }
    iv.swap(out);
}

void IntervalSet::intersect(const IntervalSet& other) {
    std::vector<std::pair<double, double>> out;
    size_t i = 0, j = 0;
    const auto& ov = other.iv;
    while (i < iv.size() && j < ov.size()) {
        double lo = std::max(iv[i].first, ov[j].first);
        double hi = std::min(iv[i].second, ov[j].second);
        if (hi - lo > kParamTol) out.push_back({lo, hi});
        if (iv[i].second < ov[j].second) ++i; else ++j;
    }
    iv.swap(out);
}

void IntervalSet::clip(double a, double b) {
    IntervalSet w = IntervalSet::full(a, b);
    intersect(w);
}

// -------------------- AngleSet --------------------

double norm_angle(double th) {
    th = std::fmod(th + kPi, 2.0 * kPi);
    if (th < 0.0) th += 2.0 * kPi;
    return th - kPi;
}

void AngleSet::subtract_arc(double th0, double extent) {
    if (extent <= 0.0) return;
    if (extent >= 2.0 * kPi - kParamTol) {
        set.clear();
        return;
    }
    th0 = norm_angle(th0);
    double th1 = th0 + extent;
    if (th1 <= kPi) {
        set.subtract(th0, th1);
    } else {
        set.subtract(th0, kPi);
        set.subtract(-kPi, th1 - 2.0 * kPi);
    }
}

void AngleSet::add_arc(double th0, double extent) {
    if (extent <= 0.0) return;
    if (extent >= 2.0 * kPi - kParamTol) {
        set = IntervalSet::full(-kPi, kPi);
        return;
    }
    th0 = norm_angle(th0);
    double th1 = th0 + extent;
    if (th1 <= kPi) {
        set.add(th0, th1);
    } else {
        set.add(th0, kPi);
        set.add(-kPi, th1 - 2.0 * kPi);
    }
}

bool AngleSet::contains(double th) const {
    th = norm_angle(th);
    for (auto& p : set.parts())
        if (th > p.first && th < p.second) return true;
    return false;
}

// -------------------- polygons --------------------

double polygon_area(const Polygon& p) {
    double a = 0.0;
    size_t n = p.size();
    for (size_t i = 0; i < n; ++i) a += p[i].cross(p[(i + 1) % n]);
    return 0.5 * a;
}

double polygon_perimeter(const Polygon& p) {
    double l = 0.0;
    size_t n = p.size();
    for (size_t i = 0; i < n; ++i) l += (p[(i + 1) % n] - p[i]).norm();
    return l;
}

Vec2 polygon_centroid(const Polygon& p) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    size_t n = p.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& u = p[i];
        const Vec2& v = p[(i + 1) % n];
        double w = u.cross(v);
        a += w;
        cx += (u.x + v.x) * w;
        cy += (u.y + v.y) * w;
    }
    a *= 0.5;
    return {cx / (6.0 * a), cy / (6.0 * a)};
}

void ensure_ccw(Polygon& p) {
    if (polygon_area(p) < 0.0) std::reverse(p.begin(), p.end());
}

Polygon rotated(const Polygon& p, double th) {
    Polygon out;
    out.reserve(p.size());
    for (auto& v : p) out.push_back(v.rotated(th));
    return out;
}

Polygon translated(const Polygon& p, const Vec2& d) {
    Polygon out;
    out.reserve(p.size());
    for (auto& v : p) out.push_back(v + d);
    return out;
}

Polygon box_polygon(const Box2& b) {
    return {{b.lo.x, b.lo.y}, {b.hi.x, b.lo.y}, {b.hi.x, b.hi.y}, {b.lo.x, b.hi.y}};
}

double max_vertex_norm(const Polygon& p) {
    double m = 0.0;
    for (auto& v : p) m = std::max(m, v.norm());
    return m;
}

bool point_in_convex(const Vec2& q, const Polygon& p, double inset) {
    size_t n = p.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 e = p[(i + 1) % n] - p[i];
        double len = e.norm();
        if (len <= 0.0) continue;
        // signed distance of q to edge line, positive inside for CCW
        double d = e.cross(q - p[i]) / len;
        if (d < inset) return false;
    }
    return true;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
    Polygon poly = subject;
    size_t n = clip.size();
    for (size_t i = 0; i < n && !poly.empty(); ++i) {
        const Vec2& a = clip[i];
        Vec2 e = clip[(i + 1) % n] - a;
        Polygon next;
        size_t m = poly.size();
        for (size_t j = 0; j < m; ++j) {
            const Vec2& u = poly[j];
            const Vec2& v = poly[(j + 1) % m];
            double du = e.cross(u - a);
            double dv = e.cross(v - a);
            if (du >= 0.0) next.push_back(u);
            if ((du > 0.0 && dv < 0.0) || (du < 0.0 && dv > 0.0)) {
                double t = du / (du - dv);
                next.push_back({u.x + t * (v.x - u.x), u.y + t * (v.y - u.y)});
            }
        }
        poly.swap(next);
    }
    return poly;
}

double convex_intersection_area(const Polygon& a, const Polygon& b) {
    Polygon c = clip_convex(a, b);
    if (c.size() < 3) return 0.0;
    return std::abs(polygon_area(c));
}

Polygon minkowski_sum_convex(const Polygon& a, const Polygon& b) {
    auto lowest = [](const Polygon& p) {
        size_t best = 0;
        for (size_t i = 1; i < p.size(); ++i)
            if (p[i].y < p[best].y || (p[i].y == p[best].y && p[i].x < p[best].x)) best = i;
        return best;
    };
    size_t ia = lowest(a), ib = lowest(b);
    size_t na = a.size(), nb = b.size();
    Polygon out;
    out.reserve(na + nb);
    Vec2 cur = a[ia] + b[ib];
    size_t i = 0, j = 0;
    while (i < na || j < nb) {
        out.push_back(cur);
        Vec2 ea = a[(ia + i + 1) % na] - a[(ia + i) % na];
        Vec2 eb = b[(ib + j + 1) % nb] - b[(ib + j) % nb];
        double cr = ea.cross(eb);
        if (j >= nb || (i < na && cr > 0.0)) {
            cur = cur + ea;
            ++i;
        } else if (i >= na || cr < 0.0) {
            cur = cur + eb;
            ++j;
        } else {  // parallel edges: advance both
            cur = cur + ea + eb;
            ++i;
            ++j;
        }
    }
    return out;
}

double disk_covariogram(double r, double d) {
    if (d >= 2.0 * r) return 0.0;
    if (d <= 0.0) return kPi * r * r;
    double q = d / (2.0 * r);
    return 2.0 * r * r * std::acos(q) - 0.5 * d * std::sqrt(4.0 * r * r - d * d);
}

// -------------------- coverage intervals --------------------

AngleSet angles_inside_disk(const Circle& on, const Circle& inside) {
    Vec2 dvec = inside.c - on.c;
    double d = dvec.norm();
    if (d + on.r <= inside.r) return AngleSet::full();          // circle swallowed
    if (d >= on.r + inside.r || d + inside.r <= on.r) return AngleSet::none();
    double co = (d * d + on.r * on.r - inside.r * inside.r) / (2.0 * d * on.r);
    co = std::clamp(co, -1.0, 1.0);
    double w = std::acos(co);
    double phi = std::atan2(dvec.y, dvec.x);
    AngleSet s;
    s.add_arc(phi - w, 2.0 * w);
    return s;
}

AngleSet angles_inside_convex(const Circle& on, const Polygon& poly) {
    std::vector<double> cross;
    size_t n = poly.size();
    Vec2 pts[2];
    for (size_t i = 0; i < n; ++i) {
        Segment e{poly[i], poly[(i + 1) % n]};
        int k = circle_segment_points(on, e, pts);
        for (int t = 0; t < k; ++t)
            cross.push_back(std::atan2(pts[t].y - on.c.y, pts[t].x - on.c.x));
    }
    if (cross.empty()) {
        Vec2 probe{on.c.x + on.r, on.c.y};
        return point_in_convex(probe, poly) ? AngleSet::full() : AngleSet::none();
    }
    std::sort(cross.begin(), cross.end());
    cross.erase(std::unique(cross.begin(), cross.end(),
                            [](double a, double b) { return b - a < 1e-12; }),
                cross.end());
    AngleSet s;
    size_t m = cross.size();
    for (size_t i = 0; i < m; ++i) {
        double a = cross[i];
        double b = (i + 1 < m) ? cross[i + 1] : cross[0] + 2.0 * kPi;
        double mid = 0.5 * (a + b);
        Vec2 probe{on.c.x + on.r * std::cos(mid), on.c.y + on.r * std::sin(mid)};
        if (point_in_convex(probe, poly)) s.add_arc(a, b - a);
    }
    return s;
}

IntervalSet params_inside_disk(const Segment& s, const Circle& disk) {
    Vec2 d = s.b - s.a;
    Vec2 f = s.a - disk.c;
    double A = d.dot(d);
    if (A <= 0.0) return {};
    double B = 2.0 * f.dot(d);
    double C = f.dot(f) - disk.r * disk.r;
    double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0) return {};
    double sq = std::sqrt(disc);
    double t0 = (-B - sq) / (2.0 * A);
    double t1 = (-B + sq) / (2.0 * A);
    t0 = std::max(t0, 0.0);
    t1 = std::min(t1, 1.0);
    if (t1 - t0 <= kParamTol) return {};
    return IntervalSet::full(t0, t1);
}

IntervalSet params_inside_convex(const Segment& s, const Polygon& poly) {
    double lo = 0.0, hi = 1.0;
    Vec2 d = s.b - s.a;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        Vec2 e = poly[(i + 1) % n] - a;
        // inside means e cross (x - a) >= 0
        double c0 = e.cross(s.a - a);
        double cd = e.cross(d);
        if (std::abs(cd) < 1e-300) {
            if (c0 < 0.0) return {};
            continue;
        }
        double t = -c0 / cd;
        if (cd > 0.0) lo = std::max(lo, t);
        else hi = std::min(hi, t);
        if (hi - lo <= kParamTol) return {};
    }
    return IntervalSet::full(lo, hi);
}

// -------------------- intersection points --------------------

int circle_circle_points(const Circle& a, const Circle& b, Vec2 out[2]) {
    Vec2 dv = b.c - a.c;
    double d2 = dv.norm2();
    double d = std::sqrt(d2);
    if (d <= 0.0) return 0;
    if (d >= a.r + b.r || d <= std::abs(a.r - b.r)) return 0;
    double x = (d2 + a.r * a.r - b.r * b.r) / (2.0 * d);
    double h2 = a.r * a.r - x * x;
    if (h2 <= 0.0) return 0;
    double h = std::sqrt(h2);
    Vec2 u{dv.x / d, dv.y / d};
    Vec2 base{a.c.x + u.x * x, a.c.y + u.y * x};
    out[0] = {base.x - u.y * h, base.y + u.x * h};
    out[1] = {base.x + u.y * h, base.y - u.x * h};
    return 2;
}

int circle_segment_points(const Circle& c, const Segment& s, Vec2 out[2]) {
    Vec2 d = s.b - s.a;
    Vec2 f = s.a - c.c;
    double A = d.dot(d);
    if (A <= 0.0) return 0;
    double B = 2.0 * f.dot(d);
    double C = f.dot(f) - c.r * c.r;
    double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0) return 0;
    double sq = std::sqrt(disc);
    int k = 0;
    for (double t : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)}) {
        if (t >= -kParamTol && t <= 1.0 + kParamTol) out[k++] = s.at(std::clamp(t, 0.0, 1.0));
    }
    return k;
}

bool segment_segment_point(const Segment& a, const Segment& b, Vec2& out) {
    Vec2 r = a.b - a.a;
    Vec2 s = b.b - b.a;
    double denom = r.cross(s);
    if (std::abs(denom) < 1e-300) return false;
    Vec2 qp = b.a - a.a;
    double t = qp.cross(s) / denom;
    double u = qp.cross(r) / denom;
    if (t <= 0.0 || t >= 1.0 || u <= 0.0 || u >= 1.0) return false;
    out = a.at(t);
    return true;
}

// -------------------- Green's theorem pieces --------------------

double green_arc(const Circle& c, double th0, double th1) {
    // integral of x dy with x = cx + r cos t, dy = r cos t dt
    double r = c.r;
    double lin = c.c.x * r * (std::sin(th1) - std::sin(th0));
    double quad = r * r * (0.5 * (th1 - th0) + 0.25 * (std::sin(2.0 * th1) - std::sin(2.0 * th0)));
    return lin + quad;
}

double green_seg(const Vec2& p, const Vec2& q) {
    return 0.5 * (p.x + q.x) * (q.y - p.y);
}

}  // namespace dl
