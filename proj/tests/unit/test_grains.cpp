#include <doctest.h>

#include <cmath>

#include "dl/grains.hpp"

using namespace dl;

TEST_CASE("scalar law moments and quantiles") {
    auto f = ScalarLaw::fixed(2.0);
    CHECK(f.mean() == 2.0);
    CHECK(f.second_moment() == 4.0);
    CHECK(f.cdf(1.9) == 0.0);
    CHECK(f.cdf(2.0) == 1.0);
    CHECK(f.sup() == 2.0);

    auto u = ScalarLaw::uniform(0.5, 1.5);
    CHECK(u.mean() == doctest::Approx(1.0));
    CHECK(u.second_moment() == doctest::Approx((0.25 + 0.75 + 2.25) / 3.0));
    CHECK(u.cdf(1.0) == doctest::Approx(0.5));
    CHECK(u.quantile(0.25) == doctest::Approx(0.75));

    auto e = ScalarLaw::exponential_mean(2.0);
    CHECK(e.mean() == 2.0);
    CHECK(e.second_moment() == doctest::Approx(8.0));
    CHECK(e.unbounded());
    CHECK(std::isinf(e.sup()));
    CHECK(e.sample_cap() == doctest::Approx(-2.0 * std::log(1e-9)).epsilon(1e-6));

    auto d = ScalarLaw::discrete({{2.0, 0.75}, {1.0, 0.25}});
    CHECK(d.mean() == doctest::Approx(1.75));
    CHECK(d.cdf(1.0) == doctest::Approx(0.25));
    CHECK(d.quantile(0.2) == 1.0);
    CHECK(d.quantile(0.9) == 2.0);

    CHECK_THROWS(ScalarLaw::fixed(0.0));
    CHECK_THROWS(ScalarLaw::uniform(1.0, 0.5));
    CHECK_THROWS(ScalarLaw::discrete({{1.0, 0.4}}));
}

TEST_CASE("scalar law expectation helper") {
    auto u = ScalarLaw::uniform(0.5, 1.5);
    CHECK(u.expect([](double x) { return x; }) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(u.expect([](double x) { return x * x; }) == doctest::Approx(u.second_moment()).epsilon(1e-10));
    auto e = ScalarLaw::exponential_mean(1.0);
    CHECK(e.expect([](double x) { return x * x; }) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(u.mean_min(0.75) == doctest::Approx(0.75 - 0.5 * 0.0625).epsilon(1e-12));
    CHECK(e.mean_min(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("1d interval law quantities") {
    auto g = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    CHECK(g.mean_measure() == 1.0);
    CHECK(g.boundary_mass_mean() == 2.0);
    CHECK(g.lambda_x(0.0) == doctest::Approx(1.0));
    CHECK(g.lambda_x(0.5) == doctest::Approx(1.5));
    CHECK(g.lambda_x(-0.5) == doctest::Approx(1.5));  // symmetric
    CHECK(g.lambda_x(2.0) == doctest::Approx(2.0));
    CHECK(g.covariogram(0.5) == doctest::Approx(0.5));
    CHECK(g.radius_bound() == 1.0);
    CHECK(!g.truncated());

    auto q = g.quantities();
    CHECK(q.mean_measure == 1.0);
    CHECK(q.boundary_mass == 2.0);

    // monotone and bounded between lambda and 2 lambda
    auto u = GrainLaw1D::interval(ScalarLaw::uniform(0.5, 1.5));
    double prev = u.lambda_x(0.0);
    CHECK(prev == doctest::Approx(1.0));
    for (double x = 0.1; x <= 2.0; x += 0.1) {
        double v = u.lambda_x(x);
        CHECK(v >= prev - 1e-12);
        CHECK(v >= u.mean_measure() - 1e-12);
        CHECK(v <= 2.0 * u.mean_measure() + 1e-12);
        prev = v;
    }

    auto e = GrainLaw1D::interval(ScalarLaw::exponential_mean(1.0));
    CHECK(e.truncated());
    CHECK(e.radius_bound() == doctest::Approx(-std::log(1e-9)).epsilon(1e-6));
    CHECK(e.lambda_x(1.0) == doctest::Approx(1.0 + (1.0 - std::exp(-1.0))).epsilon(1e-9));
}

TEST_CASE("1d multi component law") {
    auto g = GrainLaw1D::multi({{0.0, 0.5}, {1.0, 0.5}});
    CHECK(g.mean_measure() == doctest::Approx(1.0));
    CHECK(g.boundary_mass_mean() == 4.0);
    CHECK(g.radius_bound() == doctest::Approx(1.5));
    // union with own translate: shift by 0.25 overlaps each component by 0.25
    CHECK(g.lambda_x(0.25) == doctest::Approx(1.5));
    // shift by 1.0 overlaps second with first's translate
    CHECK(g.lambda_x(1.0) == doctest::Approx(1.5));
    CHECK(g.lambda_x(3.0) == doctest::Approx(2.0));

    auto z = GrainLaw1D::multi({{0.0, 1.0}, {2.0, 0.0}});
    CHECK(z.boundary_mass_mean() == doctest::Approx(3.0));
    CHECK(z.zero_length_component_count() == 1);
    CHECK(z.mean_measure() == doctest::Approx(1.0));

    CHECK_THROWS(GrainLaw1D::multi({{0.5, 1.0}}));               // not anchored
    CHECK_THROWS(GrainLaw1D::multi({{0.0, 1.0}, {0.5, 1.0}}));   // overlapping
    CHECK_THROWS(GrainLaw1D::multi({{0.0, 0.0}}));               // zero total
    CHECK_THROWS(GrainLaw1D::multi(std::vector<GrainLaw1D::Component>(9, {0.0, 1.0})));
}

TEST_CASE("2d disk law quantities and the lens value") {
    auto g = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    CHECK(g.mean_area() == doctest::Approx(kPi));
    CHECK(g.mean_boundary() == doctest::Approx(2.0 * kPi));
    CHECK(g.radius_bound() == 1.0);
    CHECK(g.constant_area());
    CHECK(g.rotation_invariant());
    CHECK(g.lambda_r(0.0) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(g.lambda_r(1.0) == doctest::Approx(4.0 * kPi / 3.0 + std::sqrt(3.0) / 2.0).epsilon(1e-12));
    CHECK(g.lambda_r(2.0) == doctest::Approx(2.0 * kPi));
    CHECK(g.lambda_x({0.6, -0.8}) == doctest::Approx(g.lambda_r(1.0)).epsilon(1e-12));

    // independent check: grid Monte Carlo of the union area at distance 1
    RngStream r = RngStream::keyed(99, 0, 0, 0);
    int hit = 0;
    const int n = 2000000;
    for (int i = 0; i < n; ++i) {
        double x = r.uniform(-1.0, 2.0), y = r.uniform(-1.5, 1.5);
        if (x * x + y * y <= 1.0 || (x - 1.0) * (x - 1.0) + y * y <= 1.0) ++hit;
    }
    double mc = 9.0 * double(hit) / n;
    CHECK(std::abs(mc - g.lambda_r(1.0)) < 0.02);

    auto mix = GrainLaw2D::disk(ScalarLaw::discrete({{0.5, 0.5}, {1.0, 0.5}}));
    CHECK(mix.mean_area() == doctest::Approx(kPi * (0.25 + 1.0) * 0.5));
    CHECK(!mix.constant_area());
    CHECK(mix.lambda_r(0.0) == doctest::Approx(mix.mean_area()).epsilon(1e-12));
    CHECK(mix.lambda_r(5.0) == doctest::Approx(2.0 * mix.mean_area()).epsilon(1e-12));
}

TEST_CASE("2d polygon law quantities") {
    auto sq = GrainLaw2D::square(1.0, false);
    CHECK(sq.mean_area() == doctest::Approx(1.0));
    CHECK(sq.mean_boundary() == doctest::Approx(4.0));
    CHECK(sq.radius_bound() == doctest::Approx(std::sqrt(0.5)));
    CHECK(sq.constant_area());
    CHECK(!sq.rotation_invariant());
    CHECK(sq.lambda_x({0.5, 0.0}) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(sq.lambda_x({0.5, 0.5}) == doctest::Approx(2.0 - 0.25).epsilon(1e-12));

    auto rsq = GrainLaw2D::square(1.0, true);
    CHECK(rsq.rotation_invariant());
    CHECK(rsq.lambda_r(0.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rsq.lambda_r(3.0) == doctest::Approx(2.0));
    // radial average of the square covariogram at distance 0.5, MC oracle
    RngStream r = RngStream::keyed(7, 1, 0, 0);
    double acc = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double th = r.uniform(-kPi, kPi);
        Polygon p = rotated(Polygon{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}, th);
        acc += convex_intersection_area(p, translated(p, {0.5, 0.0}));
    }
    CHECK(std::abs(rsq.covariogram_r(0.5) - acc / n) < 0.01);

    CHECK_THROWS(GrainLaw2D::polygon({{0, 0}, {1, 0}, {2, 0}, {1, 1}}, false));  // collinear
    CHECK_THROWS(sq.lambda_r(0.5));  // not rotation invariant
}

TEST_CASE("shape sampling is deterministic and anchored") {
    auto g1 = GrainLaw1D::interval(ScalarLaw::uniform(0.5, 1.5));
    auto r1 = RngStream::keyed(3, 0, 0, 0);
    auto r2 = RngStream::keyed(3, 0, 0, 0);
    for (int i = 0; i < 50; ++i) {
        auto s1 = g1.sample(r1);
        auto s2 = g1.sample(r2);
        REQUIRE(s1.parts.size() == 1);
        CHECK(s1.parts[0].first == 0.0);
        CHECK(s1.parts[0] == s2.parts[0]);
    }

    auto g2 = GrainLaw2D::square(1.0, true);
    auto r3 = RngStream::keyed(4, 0, 0, 0);
    auto s = g2.sample(r3);
    CHECK(s.verts.size() == 4);
    CHECK(std::abs(polygon_area(s.verts) - 1.0) < 1e-12);
    CHECK(s.area == doctest::Approx(1.0));
    CHECK(s.circumradius == doctest::Approx(std::sqrt(0.5)));
}
