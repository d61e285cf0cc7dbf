#pragma once
// Grain (leaf shape) laws. Shapes are anchored: intervals start at 0, disks
// are centred, polygons are centred at their centroid. The key law-level
// quantities are the mean shape measure, the mean measure of a shape united
// with its own translate (lambda_x), and a hard radius bound used to size
// simulation halos. Laws with unbounded support are truncated at the
// 1 - 1e-9 quantile for sampling; `truncated` records that this happened.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dl/geometry.hpp"
#include "dl/rng.hpp"

namespace dl {

struct GrainQuantities {
    double mean_measure = 0.0;   // expected length (1d) / area (2d)
    double boundary_mass = 0.0;  // expected endpoint count (1d) / perimeter (2d)
    double radius_bound = 0.0;
    bool truncated = false;
};

// law of one positive scalar (interval length, disk radius)
struct ScalarLaw {
    enum class Kind { fixed, uniform, exponential, discrete };
    Kind kind = Kind::fixed;
    double a = 1.0, b = 1.0;  // fixed: value a; uniform: [a,b]; exponential: mean a
    std::vector<std::pair<double, double>> atom_list;  // discrete (value, prob)

    static ScalarLaw fixed(double v);
    static ScalarLaw uniform(double lo, double hi);
    static ScalarLaw exponential_mean(double mean);
    static ScalarLaw discrete(std::vector<std::pair<double, double>> atoms);

    double mean() const;
    double second_moment() const;
    double cdf(double x) const;
    double pdf(double x) const;  // continuous-part density
    bool has_density() const { return kind == Kind::uniform || kind == Kind::exponential; }
    const std::vector<std::pair<double, double>>& atoms() const;
    double quantile(double q) const;
    double sup() const;          // may be +inf
    bool unbounded() const;
    double sample_cap() const;   // sup, or truncation cutoff when unbounded
    double sample(RngStream& rng) const;

    // E[g(H)] over atoms plus continuous part (quadrature)
    double expect(const std::function<double(double)>& g, double tol = 1e-12) const;

    // E[min(x, H)]
    double mean_min(double x) const;
};

// -------------------- 1D --------------------

struct GrainLaw1D {
    enum class Kind { interval, multi_component };
    struct Component {
        double offset = 0.0;
        double length = 0.0;  // zero length allowed: an isolated point
    };
    struct Shape {
        // sorted disjoint closed intervals [first,second], second>=first
        std::vector<std::pair<double, double>> parts;
    };

    Kind kind = Kind::interval;
    ScalarLaw length;                    // interval kind
    std::vector<Component> components;   // multi_component kind (fixed layout)

    static GrainLaw1D interval(ScalarLaw length);
    static GrainLaw1D multi(std::vector<Component> components);

    double mean_measure() const;
    double boundary_mass_mean() const;
    double lambda_x(double x) const;
    double covariogram(double x) const { return 2.0 * mean_measure() - lambda_x(x); }
    double radius_bound() const;
    bool truncated() const;
    GrainQuantities quantities() const;
    int component_count() const;
    int zero_length_component_count() const;

    Shape sample(RngStream& rng) const;
};

// -------------------- 2D --------------------

struct GrainLaw2D {
    enum class Kind { disk, polygon };
    struct Shape {
        double r = 0.0;      // disk radius; 0 for polygons
        Polygon verts;       // empty for disks
        bool is_disk() const { return verts.empty(); }
        double area = 0.0, perimeter = 0.0, circumradius = 0.0;
    };

    Kind kind = Kind::disk;
    ScalarLaw radius;          // disk kind
    Polygon verts;             // polygon kind, centroid at origin, CCW
    bool random_rotation = false;

    static GrainLaw2D disk(ScalarLaw radius);
    static GrainLaw2D polygon(Polygon verts, bool random_rotation);
    static GrainLaw2D square(double side, bool random_rotation);

    double mean_area() const;
    double mean_boundary() const;
    bool rotation_invariant() const { return kind == Kind::disk || random_rotation; }
    // all shapes have the same measure, so no shape can strictly contain another
    bool constant_area() const;
    bool fixed_shape() const;  // a single deterministic shape (no radius or rotation randomness)

    double lambda_x(const Vec2& x) const;
    double lambda_r(double dist) const;  // radial form, requires rotation_invariant()
    double covariogram_r(double dist) const { return 2.0 * mean_area() - lambda_r(dist); }
    double radius_bound() const;
    bool truncated() const;
    GrainQuantities quantities() const;

    Shape sample(RngStream& rng) const;

private:
    double rotation_avg_cov(const Vec2& x) const;  // 256-angle grid
};

}  // namespace dl
