#include "dl/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dl/errors.hpp"
#include "quadrature.hpp"

namespace dl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const ScalarLaw& interval_length(const GrainLaw1D& law, const char* what) {
    if (law.kind != GrainLaw1D::Kind::interval)
        throw UnsupportedError(std::string(what) + ": needs single-interval leaves");
    return law.length;
}

// ---------- shared 1d pieces ----------

// integral over the whole line of (2 lambda / lambda_x - 1); the integrand
// is even and vanishes once translates of the leaf can no longer overlap
double plane_deficit_1d(const GrainLaw1D& law) {
    double lam = law.mean_measure();
    double cap = kInf;
    if (law.kind == GrainLaw1D::Kind::multi_component || !law.length.unbounded())
        cap = law.radius_bound();
    return 2.0 * integrate(
                     [&](double u) { return 2.0 * lam / law.lambda_x(u) - 1.0; }, 0.0, cap);
}

// E over a leaf of the double integral over the leaf of 1/lambda_{y-x}
double leaf_pair_mass_1d(const GrainLaw1D& law) {
    const ScalarLaw& len = interval_length(law, "leaf pair mass");
    return len.expect([&](double h) {
        return 2.0 * integrate([&](double s) { return (h - s) / law.lambda_x(s); }, 0.0, h);
    });
}

// endpoint set of a deterministic multi-component leaf (one point per
// zero-length component)
std::vector<double> multi_endpoints(const GrainLaw1D& law) {
    std::vector<double> pts;
    for (auto& c : law.components) {
        pts.push_back(c.offset);
        if (c.length > 0.0) pts.push_back(c.offset + c.length);
    }
    return pts;
}

// uniform level moments for the grey-level mark
void level_moments(const MarkSpec& mark, double& m1, double& m2) {
    double lo = mark.level_lo, hi = mark.level_hi;
    if (!(lo >= 0.0) || !(hi >= lo)) throw std::invalid_argument("bad grey level range");
    m1 = 0.5 * (lo + hi);
    m2 = (lo * lo + lo * hi + hi * hi) / 3.0;
}

void check_seed_spec(const MarkSpec& mark) {
    if (!(mark.seed_mix > 0.0) || !(mark.seed_mix < 1.0))
        throw UnsupportedError("seed mix must leave both seeds and leaves possible");
    if (mark.seed_offsets.empty()) throw std::invalid_argument("empty seed pattern");
}

void check_colour(const MarkSpec& mark) {
    if (!(mark.colour_p >= 0.0) || !(mark.colour_p <= 1.0))
        throw std::invalid_argument("colour probability outside [0,1]");
}

// ---------- shared 2d pieces ----------

Polygon reflected(const Polygon& p) {
    Polygon out;
    out.reserve(p.size());
    for (auto& v : p) out.push_back(-v);
    ensure_ccw(out);
    return out;
}

// vertical extent of a convex polygon at abscissa x
bool poly_y_range(const Polygon& poly, double x, double& y0, double& y1) {
    y0 = kInf;
    y1 = -kInf;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        if ((a.x - x) * (b.x - x) > 0.0) continue;
        double y;
        if (a.x == b.x) {
            if (a.x != x) continue;
            y0 = std::min({y0, a.y, b.y});
            y1 = std::max({y1, a.y, b.y});
            continue;
        }
        y = a.y + (x - a.x) / (b.x - a.x) * (b.y - a.y);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    return y1 > y0;
}

// integral of f over a convex region, inner integral clipped to the exact
// vertical extent so the quadrature never chases zero tails
template <class F>
double convex_region_integral(const Polygon& poly, F&& f, double outer_tol, double inner_tol) {
    double x0 = kInf, x1 = -kInf;
    for (auto& v : poly) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
    }
    return integrate(
        [&](double x) {
            double y0 = 0.0, y1 = 0.0;
            if (!poly_y_range(poly, x, y0, y1)) return 0.0;
            return integrate([&](double y) { return f(Vec2{x, y}); }, y0, y1, inner_tol);
        },
        x0, x1, outer_tol);
}

// integral over the plane of (2 lambda / lambda_x - 1)
double plane_deficit_2d(const GrainLaw2D& law) {
    double lam = law.mean_area();
    if (law.rotation_invariant()) {
        double cap = 2.0 * law.radius_bound();
        return 2.0 * kPi *
               integrate([&](double s) { return (2.0 * lam / law.lambda_r(s) - 1.0) * s; },
                         0.0, cap);
    }
    // fixed shape: the integrand lives exactly on the difference body
    Polygon support = minkowski_sum_convex(law.verts, reflected(law.verts));
    return convex_region_integral(
        support, [&](const Vec2& z) { return 2.0 * lam / law.lambda_x(z) - 1.0; }, 1e-9, 1e-10);
}

// E over a leaf of the double integral over the leaf of 1/lambda_{y-x},
// written through the set covariance of the leaf
double leaf_pair_mass_2d(const GrainLaw2D& law) {
    if (law.kind == GrainLaw2D::Kind::disk) {
        return law.radius.expect([&](double r) {
            return 2.0 * kPi *
                   integrate(
                       [&](double s) { return disk_covariogram(r, s) / law.lambda_r(s) * s; },
                       0.0, 2.0 * r);
        });
    }
    auto recip = [&](const Vec2& z) {
        return law.rotation_invariant() ? 1.0 / law.lambda_r(z.norm()) : 1.0 / law.lambda_x(z);
    };
    Polygon support = minkowski_sum_convex(law.verts, reflected(law.verts));
    return convex_region_integral(
        support,
        [&](const Vec2& z) {
            double cov = convex_intersection_area(law.verts, translated(law.verts, z));
            return cov > 0.0 ? cov * recip(z) : 0.0;
        },
        1e-9, 1e-10);
}

// integral over the base polygon of g(|y - x0|)
double polygon_radial_integral(const Polygon& poly, const Vec2& x0,
                               const std::function<double(double)>& g, double tol) {
    double reach = 0.0;
    for (auto& v : poly) reach = std::max(reach, (v - x0).norm());
    return integrate(
        [&](double s) {
            double arc = angles_inside_convex(Circle{x0, s}, poly).measure();
            return arc > 0.0 ? g(s) * arc * s : 0.0;
        },
        0.0, reach, tol);
}

// E of the double integral over the leaf boundary of 1/lambda_{y-x}
double boundary_pair_mass(const GrainLaw2D& law) {
    if (law.kind == GrainLaw2D::Kind::disk) {
        return law.radius.expect([&](double r) {
            return 4.0 * kPi * r * r *
                   integrate(
                       [&](double psi) {
                           return 1.0 / law.lambda_r(2.0 * r * std::sin(0.5 * psi));
                       },
                       0.0, kPi);
        });
    }
    // polygon: edge-pair double quadrature; distances within one leaf do not
    // change under its own rotation, so the base polygon serves for both the
    // fixed and the rotated law
    auto recip = [&](const Vec2& z) {
        return law.rotation_invariant() ? 1.0 / law.lambda_r(z.norm()) : 1.0 / law.lambda_x(z);
    };
    size_t n = law.verts.size();
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        Segment e{law.verts[i], law.verts[(i + 1) % n]};
        for (size_t j = i; j < n; ++j) {
            Segment f{law.verts[j], law.verts[(j + 1) % n]};
            // for parallel edges the integrand kinks where the offset aligns
            // with the shape; pin those points to panel boundaries
            double part =
                e.length() * f.length() *
                integrate(
                    [&](double t) {
                        Vec2 p = e.at(t);
                        auto g = [&](double s) { return recip(f.at(s) - p); };
                        double cuts[2] = {t, 1.0 - t};
                        std::sort(cuts, cuts + 2);
                        double acc = 0.0, lo = 0.0;
                        for (double c : cuts)
                            if (c > lo && c < 1.0) {
                                acc += integrate(g, lo, c, 1e-9);
                                lo = c;
                            }
                        return acc + integrate(g, lo, 1.0, 1e-9);
                    },
                    0.0, 1.0, 1e-8);
            total += j == i ? part : 2.0 * part;
        }
    }
    return total;
}

// E of the boundary integral of (integral over the leaf of 2/lambda_{y-x})
double boundary_to_leaf_mass(const GrainLaw2D& law) {
    if (law.kind == GrainLaw2D::Kind::disk) {
        // from a point on the rim, the chord reach in direction phi is
        // 2 r cos(phi); swapping the order of integration turns the area
        // integral into a single radial one with angular weight 2 acos(s/2r)
        return law.radius.expect([&](double r) {
            return 2.0 * kPi * r *
                   integrate(
                       [&](double s) {
                           return (2.0 / law.lambda_r(s)) * 2.0 * std::acos(s / (2.0 * r)) * s;
                       },
                       0.0, 2.0 * r);
        });
    }
    size_t n = law.verts.size();
    double total = 0.0;
    if (law.rotation_invariant()) {
        for (size_t i = 0; i < n; ++i) {
            Segment e{law.verts[i], law.verts[(i + 1) % n]};
            total += e.length() * integrate(
                                      [&](double t) {
                                          return polygon_radial_integral(
                                              law.verts, e.at(t),
                                              [&](double s) { return 2.0 / law.lambda_r(s); },
                                              1e-9);
                                      },
                                      0.0, 1.0, 1e-7);
        }
        return total;
    }
    // fixed shape: swap the order so the boundary integral becomes the exact
    // length of boundary sitting inside the shifted polygon
    auto bcov = [&](const Vec2& z) {
        double len = 0.0;
        for (size_t i = 0; i < n; ++i) {
            Segment e{law.verts[i] + z, law.verts[(i + 1) % n] + z};
            len += e.length() * params_inside_convex(e, law.verts).measure();
        }
        return len;
    };
    Polygon support = minkowski_sum_convex(law.verts, reflected(law.verts));
    total = convex_region_integral(
        support, [&](const Vec2& z) { return 2.0 / law.lambda_x(z) * bcov(z); }, 1e-8, 1e-9);
    return total;
}

}  // namespace

// -------------------- mixed law --------------------

double MixedLaw::continuous_mass() const {
    if (!density) return 0.0;
    return integrate(density, 0.0, support_end);
}

double MixedLaw::total_mass() const {
    double m = continuous_mass();
    for (auto& a : atoms) m += a.mass;
    return m;
}

double MixedLaw::mean() const {
    return expect([](double x) { return x; });
}

double MixedLaw::expect(const std::function<double(double)>& g) const {
    double m = 0.0;
    if (density)
        m += integrate([&](double x) { return g(x) * density(x); }, 0.0, support_end);
    for (auto& a : atoms) m += g(a.x) * a.mass;
    return m;
}

double MixedLaw::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    double m = 0.0;
    if (density) m += integrate(density, 0.0, std::min(x, support_end));
    for (auto& a : atoms)
        if (a.x <= x + kParamTol) m += a.mass;
    return m;
}

// -------------------- line --------------------

double intensity_1d(const GrainLaw1D& law) {
    return law.boundary_mass_mean() / law.mean_measure();
}

double pcf_1d(const GrainLaw1D& law, double z) {
    const ScalarLaw& len = interval_length(law, "pair correlation");
    if (!(z > 0.0)) throw std::invalid_argument("pair correlation needs z > 0");
    double lam = len.mean();
    double lz = law.lambda_x(z);
    double f = len.has_density() ? len.pdf(z) : 0.0;
    return lam * (1.0 + len.cdf(z)) / lz + lam * lam * f / (4.0 * lz);
}

std::vector<PairAtom> pcf_atoms_1d(const GrainLaw1D& law) {
    const ScalarLaw& len = interval_length(law, "pair correlation");
    std::vector<PairAtom> out;
    for (auto& [x, m] : len.atoms()) out.push_back({x, m / law.lambda_x(x)});
    return out;
}

double sigma1_sq(const GrainLaw1D& law) {
    const ScalarLaw& len = interval_length(law, "asymptotic variance");
    double lam = len.mean();
    double t1 = 2.0 / lam;
    double t2 = 2.0 * len.expect([&](double h) { return 1.0 / law.lambda_x(h); });
    // the raw integrand subtracts two nearly equal terms once the length cdf
    // saturates, so past the 0.99 quantile switch to the rearranged form
    // whose numerator is a difference of tail quantities
    double q99 = len.quantile(0.99);
    auto raw = [&](double u) {
        return (1.0 + len.cdf(u)) / (lam * law.lambda_x(u)) - 1.0 / (lam * lam);
    };
    auto tail = [&](double u) {
        double partial = lam - len.mean_min(u);  // E[(H-u)^+]
        double bar = 1.0 - len.cdf(u);
        return (partial - lam * bar) / (lam * lam * law.lambda_x(u));
    };
    double upper = len.unbounded() ? kInf : len.sup();
    double t3 = 8.0 * (integrate(raw, 0.0, q99) + integrate(tail, q99, upper));
    return t1 + t2 + t3;
}

MixedLaw exposed_interval_law(const GrainLaw1D& law) {
    const ScalarLaw len = interval_length(law, "exposed interval law");
    double lam = len.mean();
    MixedLaw out;
    out.support_end = len.sample_cap();
    out.density = [len, lam](double x) {
        if (x <= 0.0) return 0.0;
        double bar = 1.0 - len.cdf(x);
        double tail_first = (len.mean() - len.mean_min(x)) + x * bar;  // E[H 1{H>x}]
        double d = lam + x;
        double v = 2.0 * x * (lam * bar + tail_first) / (d * d * d);
        // the chance that the covering leaf is exposed over its full length
        if (len.has_density()) v += x * len.pdf(x) / (x + lam);
        return v;
    };
    for (auto& [x, m] : len.atoms()) out.atoms.push_back({x, x * m / (x + lam)});
    return out;
}

MixedLaw typical_interval_law(const GrainLaw1D& law) {
    const ScalarLaw len = interval_length(law, "typical interval law");
    double lam = len.mean();
    MixedLaw out;
    out.support_end = len.sample_cap();
    out.density = [len, lam](double y) {
        if (y <= 0.0) return 0.0;
        double bar = 1.0 - len.cdf(y);
        double tail_first = (len.mean() - len.mean_min(y)) + y * bar;
        double d = lam + y;
        double v = lam * (lam * bar + tail_first) / (d * d * d);
        if (len.has_density()) v += lam * len.pdf(y) / (2.0 * (y + lam));
        return v;
    };
    for (auto& [x, m] : len.atoms()) out.atoms.push_back({x, lam * m / (2.0 * (x + lam))});
    return out;
}

double vacancy_1d(const GrainLaw1D& law, double h) {
    const ScalarLaw& len = interval_length(law, "vacancy");
    if (!(h >= 0.0)) throw std::invalid_argument("vacancy needs h >= 0");
    double lam = len.mean();
    return (lam - len.mean_min(h)) / (lam + h);
}

// -------------------- plane --------------------

Variance2D sigma2_sq(const GrainLaw2D& law) {
    double lam = law.mean_area();
    double bnd = law.mean_boundary();
    Variance2D out;
    out.v1 = boundary_pair_mass(law);
    out.v2 = (bnd * bnd) / (lam * lam) * plane_deficit_2d(law);
    out.v3 = bnd / lam * boundary_to_leaf_mass(law);
    out.value = out.v1 + out.v2 - out.v3;
    return out;
}

double beta3(const GrainLaw2D& law) {
    double lam = law.mean_area();
    if (law.rotation_invariant()) {
        double bnd = law.mean_boundary();
        return 2.0 / (kPi * lam * lam) * bnd * bnd;
    }
    if (law.fixed_shape()) {
        double sum_area = polygon_area(minkowski_sum_convex(law.verts, reflected(law.verts)));
        return 2.0 * sum_area / (lam * lam);
    }
    throw UnsupportedError("branch point intensity: need a rotation-invariant or fixed shape");
}

double beta1(const GrainLaw2D& law) {
    // halving branch points counts cells only when no leaf can hide entirely
    // inside another, which constant leaf area guarantees
    if (!law.constant_area())
        throw UnsupportedError("cell intensity: needs leaves of constant area");
    return 0.5 * beta3(law);
}

// -------------------- marked measures --------------------

double mark_intensity(const GrainLaw1D& law, const MarkSpec& mark) {
    double lam = law.mean_measure();
    switch (mark.kind) {
        case MarkKind::boundary_surface:
            return law.boundary_mass_mean() / lam;
        case MarkKind::colour_lebesgue:
            check_colour(mark);
            return mark.colour_p;
        case MarkKind::density: {
            double m1 = 0.0, m2 = 0.0;
            level_moments(mark, m1, m2);
            return m1;
        }
        case MarkKind::seeds: {
            check_seed_spec(mark);
            double q = mark.seed_mix;
            return q * double(mark.seed_offsets.size()) / ((1.0 - q) * lam);
        }
        case MarkKind::corner_counting:
            throw UnsupportedError("corner marks need polygon leaves");
    }
    throw std::logic_error("unreachable");
}

double mark_intensity(const GrainLaw2D& law, const MarkSpec& mark) {
    double lam = law.mean_area();
    switch (mark.kind) {
        case MarkKind::boundary_surface:
            return law.mean_boundary() / lam;
        case MarkKind::colour_lebesgue:
            check_colour(mark);
            return mark.colour_p;
        case MarkKind::density: {
            double m1 = 0.0, m2 = 0.0;
            level_moments(mark, m1, m2);
            return m1;
        }
        case MarkKind::seeds: {
            check_seed_spec(mark);
            double q = mark.seed_mix;
            return q * double(mark.seed_offsets.size()) / ((1.0 - q) * lam);
        }
        case MarkKind::corner_counting:
            if (law.kind != GrainLaw2D::Kind::polygon)
                throw UnsupportedError("corner marks need polygon leaves");
            return double(law.verts.size()) / lam;
    }
    throw std::logic_error("unreachable");
}

Variance0 sigma0_sq(const GrainLaw1D& law, const MarkSpec& mark) {
    double lam = law.mean_measure();
    Variance0 out;
    switch (mark.kind) {
        case MarkKind::boundary_surface: {
            if (law.kind == GrainLaw1D::Kind::interval) {
                out.v4 = 2.0 / lam +
                         2.0 * law.length.expect([&](double h) { return 1.0 / law.lambda_x(h); });
                out.v5 = 4.0 / (lam * lam) * plane_deficit_1d(law);
                out.v6 = 8.0 / lam *
                         law.length.expect([&](double h) {
                             return integrate([&](double s) { return 1.0 / law.lambda_x(s); },
                                              0.0, h);
                         });
            } else {
                auto pts = multi_endpoints(law);
                double mass = law.boundary_mass_mean();
                for (double p : pts)
                    for (double q : pts) out.v4 += 1.0 / law.lambda_x(p - q);
                out.v5 = mass * mass / (lam * lam) * plane_deficit_1d(law);
                double per = 0.0;
                for (double p : pts)
                    for (auto& c : law.components)
                        per += integrate(
                            [&](double y) { return 2.0 / law.lambda_x(y - p); }, c.offset,
                            c.offset + c.length);
                out.v6 = mass / lam * per;
            }
            break;
        }
        case MarkKind::colour_lebesgue: {
            check_colour(mark);
            double p = mark.colour_p;
            double c = leaf_pair_mass_1d(law);
            out.v4 = p * c;
            out.v5 = p * p * plane_deficit_1d(law);
            out.v6 = 2.0 * p * p * c;
            break;
        }
        case MarkKind::density: {
            double m1 = 0.0, m2 = 0.0;
            level_moments(mark, m1, m2);
            double c = leaf_pair_mass_1d(law);
            out.v4 = m2 * c;
            out.v5 = m1 * m1 * plane_deficit_1d(law);
            out.v6 = 2.0 * m1 * m1 * c;
            break;
        }
        case MarkKind::seeds: {
            check_seed_spec(mark);
            double q = mark.seed_mix, keep = 1.0 - q;
            double k = double(mark.seed_offsets.size());
            for (auto& a : mark.seed_offsets)
                for (auto& b : mark.seed_offsets)
                    out.v4 += q / (keep * law.lambda_x(a.x - b.x));
            out.v5 = (q * k) * (q * k) / (keep * keep * lam * lam) * plane_deficit_1d(law);
            out.v6 = 0.0;  // seed events carry no leaf, leaf events carry no mark
            break;
        }
        case MarkKind::corner_counting:
            throw UnsupportedError("corner marks need polygon leaves");
    }
    out.value = out.v4 + out.v5 - out.v6;
    return out;
}

Variance0 sigma0_sq(const GrainLaw2D& law, const MarkSpec& mark) {
    double lam = law.mean_area();
    Variance0 out;
    switch (mark.kind) {
        case MarkKind::boundary_surface: {
            Variance2D s2 = sigma2_sq(law);
            return {s2.value, s2.v1, s2.v2, s2.v3};
        }
        case MarkKind::colour_lebesgue: {
            check_colour(mark);
            double p = mark.colour_p;
            double c = leaf_pair_mass_2d(law);
            out.v4 = p * c;
            out.v5 = p * p * plane_deficit_2d(law);
            out.v6 = 2.0 * p * p * c;
            break;
        }
        case MarkKind::density: {
            double m1 = 0.0, m2 = 0.0;
            level_moments(mark, m1, m2);
            double c = leaf_pair_mass_2d(law);
            out.v4 = m2 * c;
            out.v5 = m1 * m1 * plane_deficit_2d(law);
            out.v6 = 2.0 * m1 * m1 * c;
            break;
        }
        case MarkKind::corner_counting: {
            if (law.kind != GrainLaw2D::Kind::polygon)
                throw UnsupportedError("corner marks need polygon leaves");
            auto recip = [&](const Vec2& z) {
                return law.rotation_invariant() ? 1.0 / law.lambda_r(z.norm())
                                                : 1.0 / law.lambda_x(z);
            };
            double k = double(law.verts.size());
            for (auto& a : law.verts)
                for (auto& b : law.verts) out.v4 += recip(a - b);
            out.v5 = k * k / (lam * lam) * plane_deficit_2d(law);
            double per = 0.0;
            for (auto& v : law.verts) {
                if (law.rotation_invariant())
                    per += polygon_radial_integral(
                        law.verts, v, [&](double s) { return 2.0 / law.lambda_r(s); }, 1e-9);
                else
                    per += convex_region_integral(
                        law.verts, [&](const Vec2& y) { return 2.0 / law.lambda_x(y - v); },
                        1e-8, 1e-9);
            }
            out.v6 = k / lam * per;
            break;
        }
        case MarkKind::seeds: {
            check_seed_spec(mark);
            double q = mark.seed_mix, keep = 1.0 - q;
            double k = double(mark.seed_offsets.size());
            auto recip = [&](const Vec2& z) {
                return law.rotation_invariant() ? 1.0 / law.lambda_r(z.norm())
                                                : 1.0 / law.lambda_x(z);
            };
            for (auto& a : mark.seed_offsets)
                for (auto& b : mark.seed_offsets) out.v4 += q / keep * recip(a - b);
            out.v5 = (q * k) * (q * k) / (keep * keep * lam * lam) * plane_deficit_2d(law);
            out.v6 = 0.0;
            break;
        }
    }
    out.value = out.v4 + out.v5 - out.v6;
    return out;
}

// -------------------- kernels --------------------

double Kernel::at(double r, double t, double s, double u) const {
    return sigma_sq * std::min(r, s) * std::exp(-lambda * std::abs(u - t));
}

double Kernel::at_inner(double inner, double t, double u) const {
    return sigma_sq * inner * std::exp(-lambda * std::abs(u - t));
}

Kernel kernel_k1(const GrainLaw1D& law) { return {sigma1_sq(law), law.mean_measure()}; }

Kernel kernel_k2(const GrainLaw2D& law) { return {sigma2_sq(law).value, law.mean_area()}; }

Kernel kernel_k0(const GrainLaw1D& law, const MarkSpec& mark) {
    double lam = law.mean_measure();
    if (mark.kind == MarkKind::seeds) lam *= 1.0 - mark.seed_mix;
    return {sigma0_sq(law, mark).value, lam};
}

Kernel kernel_k0(const GrainLaw2D& law, const MarkSpec& mark) {
    double lam = law.mean_area();
    if (mark.kind == MarkKind::seeds) lam *= 1.0 - mark.seed_mix;
    return {sigma0_sq(law, mark).value, lam};
}

}  // namespace dl
