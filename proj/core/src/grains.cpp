#include "dl/grains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "quadrature.hpp"

namespace dl {

static constexpr double kTailMass = 1e-9;  // unbounded laws sample below the 1-1e-9 quantile

// -------------------- ScalarLaw --------------------

ScalarLaw ScalarLaw::fixed(double v) {
    if (!(v > 0.0)) throw std::invalid_argument("scalar law: fixed value must be positive");
    ScalarLaw s;
    s.kind = Kind::fixed;
    s.a = s.b = v;
    return s;
}

ScalarLaw ScalarLaw::uniform(double lo, double hi) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("scalar law: need 0 < lo < hi");
    ScalarLaw s;
    s.kind = Kind::uniform;
    s.a = lo;
    s.b = hi;
    return s;
}

ScalarLaw ScalarLaw::exponential_mean(double mean) {
    if (!(mean > 0.0)) throw std::invalid_argument("scalar law: exponential mean must be positive");
    ScalarLaw s;
    s.kind = Kind::exponential;
    s.a = s.b = mean;
    return s;
}

ScalarLaw ScalarLaw::discrete(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty()) throw std::invalid_argument("scalar law: empty atom list");
    double total = 0.0;
    for (auto& [v, p] : atoms) {
        if (!(v > 0.0) || !(p > 0.0)) throw std::invalid_argument("scalar law: atoms need positive value and mass");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("scalar law: atom masses must sum to 1");
    for (auto& [v, p] : atoms) p /= total;
    std::sort(atoms.begin(), atoms.end());
    ScalarLaw s;
    s.kind = Kind::discrete;
    s.atom_list = std::move(atoms);
    s.a = s.atom_list.front().first;
    s.b = s.atom_list.back().first;
    return s;
}

double ScalarLaw::mean() const {
    switch (kind) {
        case Kind::fixed: return a;
        case Kind::uniform: return 0.5 * (a + b);
        case Kind::exponential: return a;
        case Kind::discrete: {
            double m = 0.0;
            for (auto& [v, p] : atom_list) m += v * p;
            return m;
        }
    }
    return 0.0;
}

double ScalarLaw::second_moment() const {
    switch (kind) {
        case Kind::fixed: return a * a;
        case Kind::uniform: return (a * a + a * b + b * b) / 3.0;
        case Kind::exponential: return 2.0 * a * a;
        case Kind::discrete: {
            double m = 0.0;
            for (auto& [v, p] : atom_list) m += v * v * p;
            return m;
        }
    }
    return 0.0;
}

double ScalarLaw::cdf(double x) const {
    switch (kind) {
        case Kind::fixed: return x >= a ? 1.0 : 0.0;
        case Kind::uniform:
            if (x <= a) return 0.0;
            if (x >= b) return 1.0;
            return (x - a) / (b - a);
        case Kind::exponential: return x <= 0.0 ? 0.0 : -std::expm1(-x / a);
        case Kind::discrete: {
            double f = 0.0;
            for (auto& [v, p] : atom_list)
                if (v <= x) f += p;
            return f;
        }
    }
    return 0.0;
}

double ScalarLaw::pdf(double x) const {
    switch (kind) {
        case Kind::uniform: return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
        case Kind::exponential: return x >= 0.0 ? std::exp(-x / a) / a : 0.0;
        default: return 0.0;
    }
}

const std::vector<std::pair<double, double>>& ScalarLaw::atoms() const {
    static const std::vector<std::pair<double, double>> none;
    if (kind == Kind::discrete) return atom_list;
    if (kind == Kind::fixed) {
        // fixed value behaves as a single atom; cached per instance
        if (atom_list.empty()) const_cast<ScalarLaw*>(this)->atom_list = {{a, 1.0}};
        return atom_list;
    }
    return none;
}

double ScalarLaw::quantile(double q) const {
    q = std::clamp(q, 0.0, 1.0);
    switch (kind) {
        case Kind::fixed: return a;
        case Kind::uniform: return a + (b - a) * q;
        case Kind::exponential: return -a * std::log1p(-std::min(q, 1.0 - 1e-16));
        case Kind::discrete: {
            double acc = 0.0;
            for (auto& [v, p] : atom_list) {
                acc += p;
                if (acc >= q - 1e-15) return v;
            }
            return atom_list.back().first;
        }
    }
    return a;
}

double ScalarLaw::sup() const {
    switch (kind) {
        case Kind::fixed: return a;
        case Kind::uniform: return b;
        case Kind::exponential: return std::numeric_limits<double>::infinity();
        case Kind::discrete: return atom_list.back().first;
    }
    return a;
}

bool ScalarLaw::unbounded() const { return kind == Kind::exponential; }

double ScalarLaw::sample_cap() const {
    return unbounded() ? quantile(1.0 - kTailMass) : sup();
}

double ScalarLaw::sample(RngStream& rng) const {
    switch (kind) {
        case Kind::fixed: return a;
        case Kind::uniform: return rng.uniform(a, b);
        case Kind::exponential: return std::min(-a * std::log1p(-rng.u01()), sample_cap());
        case Kind::discrete: {
            double u = rng.u01();
            double acc = 0.0;
            for (auto& [v, p] : atom_list) {
                acc += p;
                if (u < acc) return v;
            }
            return atom_list.back().first;
        }
    }
    return a;
}

double ScalarLaw::expect(const std::function<double(double)>& g, double tol) const {
    double s = 0.0;
    for (auto& [v, p] : atoms()) s += p * g(v);
    if (has_density()) {
        double hi = unbounded() ? quantile(1.0 - 1e-14) : sup();
        s += integrate([&](double x) { return g(x) * pdf(x); }, kind == Kind::uniform ? a : 0.0, hi, tol);
    }
    return s;
}

double ScalarLaw::mean_min(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind) {
        case Kind::fixed: return std::min(x, a);
        case Kind::uniform:
            if (x <= a) return x;
            if (x >= b) return mean();
            return x - 0.5 * (x - a) * (x - a) / (b - a);
        case Kind::exponential: return a * -std::expm1(-x / a);
        case Kind::discrete: {
            double m = 0.0;
            for (auto& [v, p] : atom_list) m += p * std::min(x, v);
            return m;
        }
    }
    return 0.0;
}

// -------------------- GrainLaw1D --------------------

GrainLaw1D GrainLaw1D::interval(ScalarLaw length) {
    GrainLaw1D g;
    g.kind = Kind::interval;
    g.length = std::move(length);
    return g;
}

GrainLaw1D GrainLaw1D::multi(std::vector<Component> components) {
    if (components.empty() || components.size() > 8)
        throw std::invalid_argument("grain law: 1 to 8 components");
    if (components.front().offset != 0.0)
        throw std::invalid_argument("grain law: first component must be anchored at offset 0");
    double total = 0.0;
    for (size_t i = 0; i < components.size(); ++i) {
        if (components[i].length < 0.0) throw std::invalid_argument("grain law: negative component length");
        total += components[i].length;
        if (i > 0 && components[i].offset <= components[i - 1].offset + components[i - 1].length)
            throw std::invalid_argument("grain law: components must be disjoint and sorted");
    }
    if (!(total > 0.0)) throw std::invalid_argument("grain law: total length must be positive");
    GrainLaw1D g;
    g.kind = Kind::multi_component;
    g.components = std::move(components);
    return g;
}

double GrainLaw1D::mean_measure() const {
    if (kind == Kind::interval) return length.mean();
    double t = 0.0;
    for (auto& c : components) t += c.length;
    return t;
}

double GrainLaw1D::boundary_mass_mean() const {
    if (kind == Kind::interval) return 2.0;
    return 2.0 * component_count() - zero_length_component_count();
}

int GrainLaw1D::component_count() const {
    return kind == Kind::interval ? 1 : int(components.size());
}

int GrainLaw1D::zero_length_component_count() const {
    if (kind == Kind::interval) return 0;
    int z = 0;
    for (auto& c : components)
        if (c.length == 0.0) ++z;
    return z;
}

double GrainLaw1D::lambda_x(double x) const {
    x = std::abs(x);
    if (kind == Kind::interval) return length.mean() + length.mean_min(x);
    // union length of the fixed component set with its translate
    std::vector<std::pair<double, double>> iv;
    for (auto& c : components) {
        if (c.length <= 0.0) continue;
        iv.push_back({c.offset, c.offset + c.length});
        iv.push_back({c.offset + x, c.offset + c.length + x});
    }
    std::sort(iv.begin(), iv.end());
    double total = 0.0, cur_lo = 0.0, cur_hi = -1.0;
    for (auto& [lo, hi] : iv) {
        if (lo > cur_hi) {
            if (cur_hi > cur_lo) total += cur_hi - cur_lo;
            cur_lo = lo;
            cur_hi = hi;
        } else {
            cur_hi = std::max(cur_hi, hi);
        }
    }
    if (cur_hi > cur_lo) total += cur_hi - cur_lo;
    return total;
}

double GrainLaw1D::radius_bound() const {
    if (kind == Kind::interval) return length.sample_cap();
    auto& last = components.back();
    return last.offset + last.length;
}

bool GrainLaw1D::truncated() const { return kind == Kind::interval && length.unbounded(); }

GrainQuantities GrainLaw1D::quantities() const {
    return {mean_measure(), boundary_mass_mean(), radius_bound(), truncated()};
}

GrainLaw1D::Shape GrainLaw1D::sample(RngStream& rng) const {
    Shape s;
    if (kind == Kind::interval) {
        s.parts.push_back({0.0, length.sample(rng)});
    } else {
        s.parts.reserve(components.size());
        for (auto& c : components) s.parts.push_back({c.offset, c.offset + c.length});
    }
    return s;
}

// -------------------- GrainLaw2D --------------------

GrainLaw2D GrainLaw2D::disk(ScalarLaw radius) {
    GrainLaw2D g;
    g.kind = Kind::disk;
    g.radius = std::move(radius);
    return g;
}

GrainLaw2D GrainLaw2D::polygon(Polygon verts, bool random_rotation) {
    if (verts.size() < 3) throw std::invalid_argument("grain law: polygon needs at least 3 vertices");
    ensure_ccw(verts);
    // strict convexity
    size_t n = verts.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 e1 = verts[(i + 1) % n] - verts[i];
        Vec2 e2 = verts[(i + 2) % n] - verts[(i + 1) % n];
        if (e1.cross(e2) <= 0.0) throw std::invalid_argument("grain law: polygon must be strictly convex");
    }
    Vec2 c = polygon_centroid(verts);
    for (auto& v : verts) v = v - c;
    GrainLaw2D g;
    g.kind = Kind::polygon;
    g.verts = std::move(verts);
    g.random_rotation = random_rotation;
    return g;
}

GrainLaw2D GrainLaw2D::square(double side, bool random_rotation) {
    if (!(side > 0.0)) throw std::invalid_argument("grain law: square side must be positive");
    double h = 0.5 * side;
    return polygon({{-h, -h}, {h, -h}, {h, h}, {-h, h}}, random_rotation);
}

double GrainLaw2D::mean_area() const {
    if (kind == Kind::disk) return kPi * radius.second_moment();
    return polygon_area(verts);
}

double GrainLaw2D::mean_boundary() const {
    if (kind == Kind::disk) return 2.0 * kPi * radius.mean();
    return polygon_perimeter(verts);
}

bool GrainLaw2D::constant_area() const {
    if (kind == Kind::disk) return radius.kind == ScalarLaw::Kind::fixed;
    return true;
}

bool GrainLaw2D::fixed_shape() const {
    if (kind == Kind::disk) return radius.kind == ScalarLaw::Kind::fixed;
    return !random_rotation;
}

double GrainLaw2D::lambda_x(const Vec2& x) const {
    if (kind == Kind::disk || random_rotation) return lambda_r(x.norm());
    double a = polygon_area(verts);
    return 2.0 * a - convex_intersection_area(verts, translated(verts, x));
}

double GrainLaw2D::rotation_avg_cov(const Vec2& x) const {
    constexpr int kGrid = 256;
    double acc = 0.0;
    for (int k = 0; k < kGrid; ++k) {
        double th = -kPi + (k + 0.5) * (2.0 * kPi / kGrid);
        Polygon p = rotated(verts, th);
        acc += convex_intersection_area(p, translated(p, x));
    }
    return acc / kGrid;
}

double GrainLaw2D::lambda_r(double dist) const {
    dist = std::abs(dist);
    if (kind == Kind::disk) {
        double lam = mean_area();
        double half = 0.5 * dist;
        double ecov = 0.0;
        for (auto& [r, p] : radius.atoms()) ecov += p * disk_covariogram(r, dist);
        if (radius.has_density()) {
            double hi = radius.unbounded() ? radius.quantile(1.0 - 1e-14) : radius.sup();
            if (hi > half)
                ecov += integrate([&](double r) { return disk_covariogram(r, dist) * radius.pdf(r); },
                                  half, hi, 1e-12);
        }
        return 2.0 * lam - ecov;
    }
    if (!random_rotation)
        throw std::logic_error("lambda_r: radial form needs a rotation-invariant law");
    return 2.0 * mean_area() - rotation_avg_cov({dist, 0.0});
}

double GrainLaw2D::radius_bound() const {
    if (kind == Kind::disk) return radius.sample_cap();
    return max_vertex_norm(verts);
}

bool GrainLaw2D::truncated() const { return kind == Kind::disk && radius.unbounded(); }

GrainQuantities GrainLaw2D::quantities() const {
    return {mean_area(), mean_boundary(), radius_bound(), truncated()};
}

GrainLaw2D::Shape GrainLaw2D::sample(RngStream& rng) const {
    Shape s;
    if (kind == Kind::disk) {
        s.r = radius.sample(rng);
        s.area = kPi * s.r * s.r;
        s.perimeter = 2.0 * kPi * s.r;
        s.circumradius = s.r;
    } else {
        double th = random_rotation ? rng.uniform(-kPi, kPi) : 0.0;
        s.verts = random_rotation ? rotated(verts, th) : verts;
        s.area = polygon_area(verts);
        s.perimeter = polygon_perimeter(verts);
        s.circumradius = max_vertex_norm(verts);
    }
    return s;
}

}  // namespace dl
