#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "dl/closedform.hpp"
#include "dl/dlrm.hpp"
#include "dl/errors.hpp"

using namespace dl;

namespace {

constexpr uint64_t kSeed = 20260814;

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

double stderr_of(const std::vector<double>& v) {
    double m = mean_of(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1) / double(v.size()));
}

}  // namespace

TEST_CASE("dlrm: test functions scale and integrate") {
    TestFunction1D f;
    f.pieces.push_back({1.0, 2.0, 2.0});
    f.pieces.push_back({3.0, 4.0, -1.0});
    f.validate();
    CHECK(f.at(1.5) == 2.0);
    CHECK(f.at(2.5) == 0.0);
    CHECK(f.at(3.0) == -1.0);
    CHECK(f.at(4.0) == 0.0);  // half-open pieces
    CHECK(f.integral() == doctest::Approx(1.0));
    CHECK(f.support_lo() == 1.0);
    CHECK(f.support_hi() == 4.0);

    f.scale = 4.0;  // dilation by n in one dimension
    CHECK(f.at(6.0) == 2.0);
    CHECK(f.at(1.5) == 0.0);
    CHECK(f.support_lo() == 4.0);
    CHECK(f.support_hi() == 16.0);
    CHECK(f.integral() == doctest::Approx(4.0));

    TestFunction2D g;
    g.pieces.push_back({{{1.0, 0.0}, {2.0, 1.0}}, 3.0});
    g.scale = 9.0;  // dilation by sqrt(n) per axis
    g.validate();
    CHECK(g.dilation() == doctest::Approx(3.0));
    CHECK(g.at({4.5, 1.5}) == 3.0);
    CHECK(g.at({1.5, 0.5}) == 0.0);
    Box2 sup = g.support();
    CHECK(sup.lo.x == doctest::Approx(3.0));
    CHECK(sup.hi.x == doctest::Approx(6.0));
    CHECK(sup.hi.y == doctest::Approx(3.0));
    CHECK(g.integral() == doctest::Approx(27.0));

    TestFunction1D bad;
    bad.pieces.push_back({0.0, 2.0, 1.0});
    bad.pieces.push_back({1.0, 3.0, 1.0});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    TestFunction1D inverted;
    inverted.pieces.push_back({2.0, 1.0, 1.0});
    CHECK_THROWS_AS(inverted.validate(), std::invalid_argument);
    TestFunction2D overlap2;
    overlap2.pieces.push_back({{{0.0, 0.0}, {2.0, 2.0}}, 1.0});
    overlap2.pieces.push_back({{{1.0, 1.0}, {3.0, 3.0}}, 1.0});
    CHECK_THROWS_AS(overlap2.validate(), std::invalid_argument);
    TestFunction2D touch;  // shared edge is allowed
    touch.pieces.push_back({{{0.0, 0.0}, {2.0, 2.0}}, 1.0});
    touch.pieces.push_back({{{2.0, 0.0}, {4.0, 2.0}}, 1.0});
    CHECK_NOTHROW(touch.validate());
    TestFunction1D zero_scale = TestFunction1D::indicator(0.0, 1.0);
    zero_scale.scale = 0.0;
    CHECK_THROWS_AS(zero_scale.validate(), std::invalid_argument);
}

TEST_CASE("dlrm: linearity is exact on a shared realization") {
    auto law1 = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    MarkSpec colour{MarkKind::colour_lebesgue, 0.6};
    RngKey key{kSeed, 40, 0};
    XiState1D s = xi_state_1d(30.0, law1, colour, key);

    TestFunction1D f;
    f.pieces.push_back({2.0, 10.0, 1.5});
    TestFunction1D g;
    g.pieces.push_back({10.0, 21.0, -0.7});
    TestFunction1D h;
    h.pieces = f.pieces;
    h.pieces.insert(h.pieces.end(), g.pieces.begin(), g.pieces.end());
    CHECK(xi_value(s, h) == xi_value(s, f) + xi_value(s, g));

    MarkSpec boundary{MarkKind::boundary_surface};
    XiState1D sb = xi_state_1d(30.0, law1, boundary, key);
    CHECK(xi_value(sb, h) == xi_value(sb, f) + xi_value(sb, g));

    auto law2 = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    MarkSpec colour2{MarkKind::colour_lebesgue, 0.5};
    Box2 win{{0.0, 0.0}, {8.0, 8.0}};
    XiState2D s2 = xi_state_2d(win, law2, colour2, RngKey{kSeed, 40, 1});
    TestFunction2D f2;
    f2.pieces.push_back({{{1.0, 1.0}, {4.0, 4.0}}, 2.0});
    TestFunction2D g2;
    g2.pieces.push_back({{{4.5, 1.0}, {7.0, 6.0}}, 1.0});
    TestFunction2D h2;
    h2.pieces = f2.pieces;
    h2.pieces.insert(h2.pieces.end(), g2.pieces.begin(), g2.pieces.end());
    CHECK(xi_value(s2, h2) == xi_value(s2, f2) + xi_value(s2, g2));

    // same key, same number
    XiResult r1 = evaluate_xi(30.0, law1, colour, f, key);
    XiResult r2 = evaluate_xi(30.0, law1, colour, f, key);
    CHECK(r1.value == r2.value);
    CHECK(r1.arrivals_used == r2.arrivals_used);
}

TEST_CASE("dlrm: boundary marks match the tessellations exactly") {
    auto law1 = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    MarkSpec boundary{MarkKind::boundary_surface};
    RngKey key{kSeed, 41, 0};
    auto t = simulate1d(200.0, law1, key);
    TestFunction1D f = TestFunction1D::indicator(30.0, 170.0);
    XiResult r = evaluate_xi(200.0, law1, boundary, f, key);
    double manual = 0.0;
    for (double x : t.eta)
        if (x >= 30.0 && x < 170.0) manual += 1.0;
    CHECK(r.value == manual);
    CHECK(r.coverage_time == t.coverage_time);
    CHECK(r.arrivals_used == t.arrivals_used);

    auto law2 = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    RngKey key2{kSeed, 41, 1};
    Box2 win{{0.0, 0.0}, {10.0, 10.0}};
    auto t2 = simulate2d(win, law2, key2);
    Box2 inner{{2.0, 2.0}, {8.0, 8.0}};
    XiResult r2 = evaluate_xi(win, law2, boundary, TestFunction2D::indicator(inner), key2);
    CHECK(r2.value == boundary_length_in(t2, inner));
    XiResult rall = evaluate_xi(win, law2, boundary, TestFunction2D::indicator(win), key2);
    CHECK(rall.value == boundary_length_in(t2, win));
    CHECK(rall.coverage_time == t2.coverage_time);
}

TEST_CASE("dlrm: colour and grey level masses tile and thin the window") {
    auto law1 = GrainLaw1D::interval(ScalarLaw::fixed(1.0));

    // everything coloured: the full Lebesgue mass is visible
    MarkSpec all{MarkKind::colour_lebesgue, 1.0};
    XiResult rfull =
        evaluate_xi(40.0, law1, all, TestFunction1D::indicator(0.0, 40.0), RngKey{kSeed, 42, 0});
    CHECK(rfull.value == doctest::Approx(40.0).epsilon(1e-12));

    auto law2 = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    Box2 win7{{0.0, 0.0}, {7.0, 7.0}};
    XiResult rfull2 =
        evaluate_xi(win7, law2, all, TestFunction2D::indicator(win7), RngKey{kSeed, 42, 1});
    CHECK(rfull2.value == doctest::Approx(49.0).epsilon(1e-9));

    // fraction p of the area keeps its colour
    MarkSpec p3{MarkKind::colour_lebesgue, 0.3};
    TestFunction1D fw = TestFunction1D::indicator(0.0, 300.0);
    std::vector<double> frac;
    for (uint64_t r = 0; r < 40; ++r)
        frac.push_back(evaluate_xi(300.0, law1, p3, fw, RngKey{kSeed, 43, r}).value / 300.0);
    CHECK(std::abs(mean_of(frac) - 0.3) < 3.0 * stderr_of(frac) + 1e-3);

    // independent thinning in the plane
    MarkSpec p6{MarkKind::colour_lebesgue, 0.6};
    Box2 win10{{0.0, 0.0}, {10.0, 10.0}};
    TestFunction2D fw2 = TestFunction2D::indicator(win10);
    std::vector<double> frac2;
    for (uint64_t r = 0; r < 10; ++r)
        frac2.push_back(evaluate_xi(win10, law2, p6, fw2, RngKey{kSeed, 44, r}).value / 100.0);
    CHECK(std::abs(mean_of(frac2) - 0.6) < 3.0 * stderr_of(frac2) + 5e-3);

    // grey levels: stationary mass density is the mean level
    MarkSpec grey{MarkKind::density};
    grey.level_lo = 0.5;
    grey.level_hi = 1.5;
    CHECK(mark_intensity(law1, grey) == doctest::Approx(1.0));
    std::vector<double> dens;
    for (uint64_t r = 0; r < 32; ++r)
        dens.push_back(evaluate_xi(300.0, law1, grey, fw, RngKey{kSeed, 45, r}).value / 300.0);
    CHECK(std::abs(mean_of(dens) - 1.0) < 3.0 * stderr_of(dens) + 1e-3);
}

TEST_CASE("dlrm: seed atoms survive at the stationary rate") {
    auto law1 = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    MarkSpec seeds{MarkKind::seeds};
    seeds.seed_mix = 0.5;
    double alpha = mark_intensity(law1, seeds);
    CHECK(alpha == doctest::Approx(1.0));

    TestFunction1D fw = TestFunction1D::indicator(0.0, 250.0);
    std::vector<double> rate;
    for (uint64_t r = 0; r < 40; ++r)
        rate.push_back(evaluate_xi(250.0, law1, seeds, fw, RngKey{kSeed, 46, r}).value / 250.0);
    CHECK(std::abs(mean_of(rate) - alpha) < 3.0 * stderr_of(rate) + 5e-3);

    // a two-atom pattern doubles the rate
    MarkSpec pair = seeds;
    pair.seed_offsets = {{-0.3, 0.0}, {0.4, 0.0}};
    double alpha2 = mark_intensity(law1, pair);
    CHECK(alpha2 == doctest::Approx(2.0));
    std::vector<double> rate2;
    for (uint64_t r = 0; r < 24; ++r)
        rate2.push_back(evaluate_xi(250.0, law1, pair, fw, RngKey{kSeed, 47, r}).value / 250.0);
    CHECK(std::abs(mean_of(rate2) - alpha2) < 3.0 * stderr_of(rate2) + 1e-2);

    // planar version
    auto law2 = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    MarkSpec seeds2{MarkKind::seeds};
    seeds2.seed_mix = 0.4;
    double alpha3 = mark_intensity(law2, seeds2);
    Box2 win{{0.0, 0.0}, {9.0, 9.0}};
    TestFunction2D fw2 = TestFunction2D::indicator(win);
    std::vector<double> rate3;
    for (uint64_t r = 0; r < 16; ++r)
        rate3.push_back(evaluate_xi(win, law2, seeds2, fw2, RngKey{kSeed, 48, r}).value / 81.0);
    CHECK(std::abs(mean_of(rate3) - alpha3) < 3.0 * stderr_of(rate3) + 5e-3);
}

TEST_CASE("dlrm: corner atoms count uncovered squares") {
    auto law = GrainLaw2D::square(1.0, false);
    MarkSpec corner{MarkKind::corner_counting};
    Box2 win{{0.0, 0.0}, {12.0, 12.0}};
    XiState2D s = xi_state_2d(win, law, corner, RngKey{kSeed, 49, 0});
    CHECK(!s.corners.empty());
    for (auto& c : s.corners) {
        CHECK(c.first.x >= 0.0);
        CHECK(c.first.x < 12.0);
        CHECK(c.first.y >= 0.0);
        CHECK(c.first.y < 12.0);
        CHECK(c.second < s.arrivals_used);
    }
    CHECK(xi_value(s, TestFunction2D::indicator(win)) == double(s.corners.size()));

    // four corners per unit of area in the stationary picture
    CHECK(mark_intensity(law, corner) == doctest::Approx(4.0));
    TestFunction2D inner = TestFunction2D::indicator({{2.0, 2.0}, {10.0, 10.0}});
    std::vector<double> rate;
    for (uint64_t r = 0; r < 8; ++r)
        rate.push_back(evaluate_xi(win, law, corner, inner, RngKey{kSeed, 50, r}).value / 64.0);
    CHECK(std::abs(mean_of(rate) - 4.0) < 3.5 * stderr_of(rate) + 0.05);
}

TEST_CASE("dlrm: forward evolution holds the tiling and mixes at the leaf rate") {
    auto law1 = GrainLaw1D::interval(ScalarLaw::fixed(1.0));

    // a grid point at the start instant sees no arrivals
    MarkSpec colour{MarkKind::colour_lebesgue, 0.7};
    XiState1D s0 = xi_state_1d(25.0, law1, colour, RngKey{kSeed, 51, 0});
    TestFunction1D f = TestFunction1D::indicator(5.0, 20.0);
    double v0 = xi_value(s0, f);
    TimeSeries flat = evolve_xi(s0, law1, f, RngKey{kSeed, 51, 1}, {0.0});
    CHECK(flat.value.size() == 1);
    CHECK(flat.value[0] == v0);
    CHECK(s0.ev.time == 0.0);

    // full colouring stays a tiling while leaves keep falling
    auto law2 = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    MarkSpec all{MarkKind::colour_lebesgue, 1.0};
    Box2 win5{{0.0, 0.0}, {5.0, 5.0}};
    XiState2D stile = xi_state_2d(win5, law2, all, RngKey{kSeed, 52, 0});
    TestFunction2D fw5 = TestFunction2D::indicator(win5);
    TimeSeries tile = evolve_xi(stile, law2, fw5, RngKey{kSeed, 52, 1}, {0.3, 0.6});
    CHECK(tile.value[0] == doctest::Approx(25.0).epsilon(1e-9));
    CHECK(tile.value[1] == doctest::Approx(25.0).epsilon(1e-9));
    CHECK(stile.ev.leaves.size() > stile.ev.initial_count);

    // an old leaf's surviving mark mass never grows
    XiState1D smono = xi_state_1d(30.0, law1, colour, RngKey{kSeed, 53, 0});
    std::map<uint32_t, double> before;
    for (auto& c : smono.ev.cells) before[c.leaf] += c.end - c.start;
    TestFunction1D f30 = TestFunction1D::indicator(0.0, 30.0);
    for (int step = 1; step <= 5; ++step) {
        evolve_xi(smono, law1, f30, RngKey{kSeed, 53, 1}, {0.2 * step});
        std::map<uint32_t, double> after;
        for (auto& c : smono.ev.cells) after[c.leaf] += c.end - c.start;
        for (auto& [leaf, mass] : before) {
            auto it = after.find(leaf);
            double now = it == after.end() ? 0.0 : it->second;
            CHECK(now <= mass + 1e-12);
        }
        before.swap(after);
    }

    // regression of xi_t+dt on xi_t across replicates recovers exp(-lambda dt)
    double dt = 0.35;
    double lam = kernel_k0(law1, colour).lambda;
    std::vector<double> xs, ys;
    TestFunction1D fmid = TestFunction1D::indicator(10.0, 50.0);
    for (uint64_t r = 0; r < 320; ++r) {
        XiState1D st = xi_state_1d(60.0, law1, colour, RngKey{kSeed, 54, r});
        xs.push_back(xi_value(st, fmid));
        TimeSeries run = evolve_xi(st, law1, fmid, RngKey{kSeed, 55, r}, {dt});
        ys.push_back(run.value[0]);
    }
    double mx = mean_of(xs), my = mean_of(ys), sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    double slope = sxy / sxx;
    double rss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double e = (ys[i] - my) - slope * (xs[i] - mx);
        rss += e * e;
    }
    double se = std::sqrt(rss / double(xs.size() - 2) / sxx);
    CHECK(std::abs(slope - std::exp(-lam * dt)) < 4.0 * se + 0.01);

    // an injected seed surplus dies at the thinned leaf rate
    MarkSpec seeds{MarkKind::seeds};
    seeds.seed_mix = 0.5;
    double alpha = mark_intensity(law1, seeds);
    double decay = kernel_k0(law1, seeds).lambda;
    CHECK(decay == doctest::Approx(0.5));
    double horizon = 0.7;
    std::vector<double> surplus;
    TestFunction1D f120 = TestFunction1D::indicator(0.0, 120.0);
    for (uint64_t r = 0; r < 24; ++r) {
        XiState1D st = xi_state_1d(120.0, law1, seeds, RngKey{kSeed, 56, r});
        for (int i = 0; i < 400; ++i) st.atoms.push_back((i + 0.5) * 120.0 / 400.0);
        TimeSeries run = evolve_xi(st, law1, f120, RngKey{kSeed, 57, r}, {horizon});
        surplus.push_back(run.value[0] - alpha * 120.0);
    }
    double want = 400.0 * std::exp(-decay * horizon);
    CHECK(std::abs(mean_of(surplus) - want) < 4.0 * stderr_of(surplus) + 2.0);

    // corner marks evolve: covered corners vanish, new squares add their own
    auto sq = GrainLaw2D::square(1.0, false);
    MarkSpec corner{MarkKind::corner_counting};
    Box2 win8{{0.0, 0.0}, {8.0, 8.0}};
    XiState2D sc = xi_state_2d(win8, sq, corner, RngKey{kSeed, 58, 0});
    size_t n_before = sc.corners.size();
    uint32_t ids_before = sc.ev.next_leaf;
    TimeSeries cr = evolve_xi(sc, sq, TestFunction2D::indicator(win8), RngKey{kSeed, 58, 1}, {0.5});
    CHECK(cr.value[0] == double(sc.corners.size()));
    CHECK(sc.ev.next_leaf > ids_before);
    bool any_new = false;
    for (auto& c : sc.corners) any_new = any_new || c.second >= ids_before;
    CHECK(any_new);
    CHECK(n_before > 0);
}

TEST_CASE("dlrm: incompatible or malformed requests are rejected") {
    auto disks = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    auto law1 = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    Box2 win{{0.0, 0.0}, {4.0, 4.0}};
    RngKey key{kSeed, 59, 0};

    MarkSpec corner{MarkKind::corner_counting};
    CHECK_THROWS_AS(xi_state_2d(win, disks, corner, key), UnsupportedError);
    CHECK_THROWS_AS(xi_state_1d(4.0, law1, corner, key), UnsupportedError);

    MarkSpec badp{MarkKind::colour_lebesgue, 1.2};
    CHECK_THROWS_AS(xi_state_1d(4.0, law1, badp, key), std::invalid_argument);

    MarkSpec badmix{MarkKind::seeds};
    badmix.seed_mix = 0.0;
    CHECK_THROWS_AS(xi_state_1d(4.0, law1, badmix, key), std::invalid_argument);
    MarkSpec nooff{MarkKind::seeds};
    nooff.seed_offsets.clear();
    CHECK_THROWS_AS(xi_state_1d(4.0, law1, nooff, key), std::invalid_argument);

    MarkSpec badlevel{MarkKind::density};
    badlevel.level_lo = 2.0;
    badlevel.level_hi = 1.0;
    CHECK_THROWS_AS(xi_state_1d(4.0, law1, badlevel, key), std::invalid_argument);

    MarkSpec colour{MarkKind::colour_lebesgue, 0.5};
    XiState1D s = xi_state_1d(4.0, law1, colour, key);
    CHECK_THROWS_AS(xi_value(s, TestFunction1D::indicator(2.0, 6.0)), std::invalid_argument);
    XiState2D s2 = xi_state_2d(win, disks, colour, key);
    CHECK_THROWS_AS(xi_value(s2, TestFunction2D::indicator({{1.0, 1.0}, {5.0, 3.0}})),
                    std::invalid_argument);

    TestFunction1D f = TestFunction1D::indicator(0.0, 2.0);
    CHECK_THROWS_AS(evolve_xi(s, law1, f, key, {0.5, 0.4}), std::invalid_argument);
    evolve_xi(s, law1, f, key, {0.5});
    CHECK_THROWS_AS(evolve_xi(s, law1, f, key, {0.2}), std::invalid_argument);
}
