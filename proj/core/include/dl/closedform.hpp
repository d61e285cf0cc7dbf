#pragma once
// Reference values computed by closed form or deterministic quadrature:
// boundary intensities, the pair correlation of cell endpoints on the line,
// asymptotic window variances in one and two dimensions, visible-interval
// length laws, vacancy probabilities, branch point and cell intensities,
// and space-time covariance kernels. These numbers serve as targets for the
// Monte Carlo estimators, so quadrature tolerances are kept far below any
// simulation noise.

#include <functional>
#include <vector>

#include "dl/grains.hpp"

namespace dl {

// one point mass of a mixed distribution
struct Atom {
    double x = 0.0;
    double mass = 0.0;
};

// density plus point masses; density vanishes outside (0, support_end)
struct MixedLaw {
    std::function<double(double)> density;
    double support_end = 0.0;
    std::vector<Atom> atoms;

    double continuous_mass() const;
    double total_mass() const;
    double mean() const;
    double cdf(double x) const;  // includes atoms at exactly x
    double expect(const std::function<double(double)>& g) const;
};

// expected ordered pairs of cell endpoints at an exact separation, per unit
// window length; nonempty only when the length law has point masses
struct PairAtom {
    double separation = 0.0;
    double rate = 0.0;
};

// mark measure a leaf carries in the marked (random measure) model
enum class MarkKind {
    boundary_surface,  // endpoint count (1d) / boundary length (2d) on the leaf edge
    colour_lebesgue,   // Lebesgue on the leaf when an independent coin lands 1
    corner_counting,   // unit atoms at the polygon corners
    seeds,             // some arrivals are a bare atom pattern instead of a leaf
    density,           // constant random grey level times Lebesgue on the leaf
};

struct MarkSpec {
    MarkKind kind = MarkKind::boundary_surface;
    double colour_p = 1.0;   // colour_lebesgue: P[colour = 1]
    double seed_mix = 0.5;   // seeds: P[an arrival is a seed event]
    std::vector<Vec2> seed_offsets{{0.0, 0.0}};  // seed atom pattern (x only in 1d)
    double level_lo = 1.0, level_hi = 1.0;       // density: uniform level range
};

// -------------------- line --------------------

double intensity_1d(const GrainLaw1D& law);             // mean endpoints per unit length
double pcf_1d(const GrainLaw1D& law, double z);         // continuous part, z > 0
std::vector<PairAtom> pcf_atoms_1d(const GrainLaw1D& law);
double sigma1_sq(const GrainLaw1D& law);                // lim Var[count on [0,n]] / n
MixedLaw exposed_interval_law(const GrainLaw1D& law);   // interval covering a fixed point
MixedLaw typical_interval_law(const GrainLaw1D& law);   // uniformly chosen interval
double vacancy_1d(const GrainLaw1D& law, double h);     // P[no endpoint in a span of h]

// -------------------- plane --------------------

struct Variance2D {
    double value = 0.0;  // v1 + v2 - v3
    double v1 = 0.0, v2 = 0.0, v3 = 0.0;
};
Variance2D sigma2_sq(const GrainLaw2D& law);  // lim Var[boundary length in window]/area

double beta3(const GrainLaw2D& law);  // mean branch points per unit area
double beta1(const GrainLaw2D& law);  // mean cells per unit area, beta3 / 2

// -------------------- marked measures --------------------

struct Variance0 {
    double value = 0.0;  // v4 + v5 - v6
    double v4 = 0.0, v5 = 0.0, v6 = 0.0;
};

// stationary mean mark mass per unit length/area
double mark_intensity(const GrainLaw1D& law, const MarkSpec& mark);
double mark_intensity(const GrainLaw2D& law, const MarkSpec& mark);
// asymptotic window variance of the marked measure
Variance0 sigma0_sq(const GrainLaw1D& law, const MarkSpec& mark);
Variance0 sigma0_sq(const GrainLaw2D& law, const MarkSpec& mark);

// -------------------- space-time covariance --------------------

// covariance limit for window totals at two instants: sigma_sq times a
// spatial factor (min of the two window scales, or a supplied test-function
// inner product) times exp(-lambda |u - t|)
struct Kernel {
    double sigma_sq = 0.0;
    double lambda = 0.0;

    double at(double r, double t, double s, double u) const;
    double at_inner(double inner, double t, double u) const;
};

Kernel kernel_k1(const GrainLaw1D& law);
Kernel kernel_k2(const GrainLaw2D& law);
Kernel kernel_k0(const GrainLaw1D& law, const MarkSpec& mark);
Kernel kernel_k0(const GrainLaw2D& law, const MarkSpec& mark);

}  // namespace dl
