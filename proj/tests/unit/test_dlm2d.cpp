#include <algorithm>
#include <cmath>
#include <map>
#include <thread>
#include <vector>

#include "dl/closedform.hpp"
#include "dl/dlm2d.hpp"
#include "doctest.h"

using namespace dl;

namespace {

constexpr uint64_t kSeed = 20260814;

double branch_edge_ratio(const PlanarTessellation& t, const Box2& er) {
    // vertices and graph edges of the arc arrangement, counted on the eroded
    // box: each branch point splits one arc of its over leaf, so pieces are
    // delimited by the interior split parameters
    std::map<uint32_t, std::vector<size_t>> arcs_of;
    for (size_t i = 0; i < t.arcs.size(); ++i) arcs_of[t.arcs[i].leaf].push_back(i);

    std::vector<std::vector<double>> splits(t.arcs.size());
    long verts = 0;
    for (const auto& bp : t.branch_points) {
        if (er.contains(bp.pos)) ++verts;
        auto it = arcs_of.find(bp.over);
        if (it == arcs_of.end()) continue;
        for (size_t ai : it->second) {
            const BoundaryArc& a = t.arcs[ai];
            double u = -1.0;
            if (a.circular) {
                double th = std::atan2(bp.pos.y - a.center.y, bp.pos.x - a.center.x);
                for (double c : {th, th - 2.0 * kPi, th + 2.0 * kPi})
                    if (c > a.th0 && c < a.th1) u = (c - a.th0) / (a.th1 - a.th0);
            } else {
                Vec2 d = a.q - a.p;
                double len2 = d.norm2();
                if (len2 > 0.0) {
                    double v = (bp.pos - a.p).dot(d) / len2;
                    if (v > 0.0 && v < 1.0 && (bp.pos - (a.p + d * v)).norm() < 1e-7) u = v;
                }
            }
            if (u > 1e-9 && u < 1.0 - 1e-9) {
                splits[ai].push_back(u);
                break;
            }
        }
    }
    long edges = 0;
    for (size_t ai = 0; ai < t.arcs.size(); ++ai) {
        auto& sp = splits[ai];
        sp.push_back(0.0);
        sp.push_back(1.0);
        std::sort(sp.begin(), sp.end());
        for (size_t k = 0; k + 1 < sp.size(); ++k)
            if (er.contains(t.arcs[ai].at(0.5 * (sp[k] + sp[k + 1])))) ++edges;
    }
    return verts > 0 ? (double)edges / (double)verts : 0.0;
}

}  // namespace

TEST_CASE("dlm2d: unit disk tessellation matches the closed forms") {
    GrainLaw2D law = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    Box2 W{{0.0, 0.0}, {20.0, 20.0}};
    const int reps = 8;

    double len_sum = 0.0;
    long branch_sum = 0;
    double ratio_sum = 0.0;
    long third_total = 0, third_ok = 0;
    for (int r = 0; r < reps; ++r) {
        PlanarTessellation t = simulate2d(W, law, RngKey{kSeed, 30, (uint64_t)r});
        CHECK(t.coverage_time > 0.0);
        CHECK(t.arrivals_used >= t.leaves.size());
        len_sum += t.total_boundary_length;
        branch_sum += (long)t.branch_points.size();
        ratio_sum += branch_edge_ratio(t, W.shrunk(1.0));
        for (const auto& bp : t.branch_points) {
            CHECK(bp.over < bp.under);
            CHECK(W.contains(bp.pos));
            ++third_total;
            if (bp.third != kNoLeaf) {
                ++third_ok;
                CHECK(bp.third != bp.over);
                CHECK(bp.third != bp.under);
            }
        }
    }
    double area = W.area();
    // visible boundary intensity = mean grain perimeter over mean grain area
    CHECK(len_sum / reps / area == doctest::Approx(2.0).epsilon(0.025));
    CHECK((double)branch_sum / reps / area == doctest::Approx(beta3(law)).epsilon(0.04));
    CHECK(beta3(law) == doctest::Approx(8.0 / kPi).epsilon(1e-12));
    // cubic graph: three arc ends meet at every branch point
    CHECK(ratio_sum / reps == doctest::Approx(1.5).epsilon(0.05));
    CHECK((double)third_ok / (double)third_total > 0.999);

    // same key, same tessellation
    PlanarTessellation a = simulate2d(W, law, RngKey{kSeed, 30, 0});
    PlanarTessellation b = simulate2d(W, law, RngKey{kSeed, 30, 0});
    CHECK(a.total_boundary_length == b.total_boundary_length);
    CHECK(a.coverage_time == b.coverage_time);
    CHECK(a.arcs.size() == b.arcs.size());
    CHECK(a.branch_points.size() == b.branch_points.size());
}

TEST_CASE("dlm2d: arcs are disjoint per leaf and clipping is additive") {
    GrainLaw2D law = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    Box2 W{{0.0, 0.0}, {10.0, 10.0}};
    PlanarTessellation t = simulate2d(W, law, RngKey{kSeed, 31, 0});

    // per-leaf visible angles stay sorted and disjoint, and never exceed the
    // grain perimeter
    for (const auto& lb : t.leaves) {
        double prev = -kPi - 1e-12;
        for (auto& pr : lb.vis.parts()) {
            CHECK(pr.first >= prev - 1e-12);
            CHECK(pr.second > pr.first);
            prev = pr.second;
        }
        CHECK(lb.visible_length() <= 2.0 * kPi * lb.arr.shape.r + 1e-9);
    }
    double arc_total = 0.0;
    for (const auto& a : t.arcs) {
        CHECK(a.length() > 0.0);
        arc_total += a.length();
    }
    CHECK(arc_total == doctest::Approx(t.total_boundary_length).epsilon(1e-12));
    CHECK(boundary_length_in(t, W) == doctest::Approx(t.total_boundary_length).epsilon(1e-10));

    Vec2 mid{5.0, 5.0};
    Box2 q[4] = {{W.lo, mid},
                 {{mid.x, W.lo.y}, {W.hi.x, mid.y}},
                 {{W.lo.x, mid.y}, {mid.x, W.hi.y}},
                 {mid, W.hi}};
    double quad = 0.0;
    for (auto& b : q) quad += boundary_length_in(t, b);
    CHECK(quad == doctest::Approx(t.total_boundary_length).epsilon(1e-9));

    // patch areas tile the window, and tile it quadrant by quadrant
    std::vector<double> whole = patch_areas(t, W);
    double sum = 0.0;
    for (double v : whole) {
        CHECK(v >= -1e-9);
        sum += v;
    }
    CHECK(sum == doctest::Approx(W.area()).epsilon(1e-9));
    std::vector<double> qsum(whole.size(), 0.0);
    for (auto& b : q) {
        std::vector<double> part = patch_areas(t, b);
        double s = 0.0;
        for (size_t i = 0; i < part.size(); ++i) {
            qsum[i] += part[i];
            s += part[i];
        }
        CHECK(s == doctest::Approx(b.area()).epsilon(1e-9));
    }
    for (size_t i = 0; i < whole.size(); ++i)
        CHECK(qsum[i] == doctest::Approx(whole[i]).epsilon(1e-8).scale(1.0));
}

TEST_CASE("dlm2d: fixed squares") {
    GrainLaw2D law = GrainLaw2D::square(1.0, false);
    Box2 W{{0.0, 0.0}, {20.0, 20.0}};
    const int reps = 4;
    double len_sum = 0.0;
    long branch_sum = 0;
    for (int r = 0; r < reps; ++r) {
        PlanarTessellation t = simulate2d(W, law, RngKey{kSeed, 32, (uint64_t)r});
        len_sum += t.total_boundary_length;
        branch_sum += (long)t.branch_points.size();
    }
    CHECK(beta3(law) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(len_sum / reps / W.area() == doctest::Approx(4.0).epsilon(0.025));
    CHECK((double)branch_sum / reps / W.area() == doctest::Approx(8.0).epsilon(0.04));
}

TEST_CASE("dlm2d: rotated squares, cells two ways") {
    GrainLaw2D law = GrainLaw2D::square(1.0, true);
    Box2 W{{0.0, 0.0}, {40.0, 40.0}};
    PlanarTessellation t = simulate2d(W, law, RngKey{kSeed, 33, 0});

    CHECK(beta1(law) == doctest::Approx(16.0 / kPi).epsilon(1e-12));
    const double margin = 3.0;
    long cells = count_cells(t, 2560, margin);
    CHECK(t.cell_count_interior == cells);
    double core = (W.width() - 2 * margin) * (W.height() - 2 * margin);
    double raster_rate = (double)cells / core;
    double euler_rate = (double)euler_cell_estimate(t) / W.area();
    // the raster counter misses sub-pixel slivers, so compare rates loosely
    CHECK(raster_rate == doctest::Approx(euler_rate).epsilon(0.06));
    CHECK(raster_rate == doctest::Approx(16.0 / kPi).epsilon(0.06));
}

TEST_CASE("dlm2d: unit disks, raster cell intensity") {
    GrainLaw2D law = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    Box2 W{{0.0, 0.0}, {24.0, 24.0}};
    const double margin = 3.0;
    double core = (W.width() - 2 * margin) * (W.height() - 2 * margin);
    const int reps = 6;
    double rate = 0.0;
    for (int r = 0; r < reps; ++r) {
        PlanarTessellation t = simulate2d(W, law, RngKey{kSeed, 39, (uint64_t)r});
        rate += (double)count_cells(t, 1536, margin) / core;
    }
    // half the branch intensity: beta3 / 2 = 4 / pi
    CHECK(rate / reps == doctest::Approx(4.0 / kPi).epsilon(0.05));
}

TEST_CASE("dlm2d: mixed disk sizes, larger grains swallow smaller") {
    GrainLaw2D law = GrainLaw2D::disk(ScalarLaw::uniform(0.5, 1.5));
    Box2 W{{0.0, 0.0}, {16.0, 16.0}};
    const int reps = 4;
    double len_sum = 0.0;
    for (int r = 0; r < reps; ++r) {
        PlanarTessellation t = simulate2d(W, law, RngKey{kSeed, 34, (uint64_t)r});
        len_sum += t.total_boundary_length;
    }
    // E(2 pi R) / E(pi R^2) with R ~ U(0.5, 1.5)
    double target = 2.0 / (13.0 / 12.0);
    CHECK(len_sum / reps / W.area() == doctest::Approx(target).epsilon(0.03));
}

TEST_CASE("dlm2d: coverage stopping rule") {
    Box2 W{{0.0, 0.0}, {10.0, 10.0}};

    GrainLaw2D::Shape big;
    big.r = 100.0;
    big.area = kPi * 1e4;
    big.perimeter = 2.0 * kPi * 100.0;
    big.circumradius = 100.0;
    CoverageGrid2D g(W, 100.0);
    CHECK(!g.covered());
    CHECK(g.add(big, {5.0, 5.0}));

    GrainLaw2D::Shape small_disk = big;
    small_disk.r = 3.0;
    small_disk.circumradius = 3.0;
    CoverageGrid2D g2(W, 3.0);
    CHECK(!g2.add(small_disk, {5.0, 5.0}));

    // grains below the grid floor can never certify coverage
    Box2 unit{{0.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(CoverageGrid2D(unit, 1e-6), CoverageError);
    CHECK_THROWS_AS(simulate2d(unit, GrainLaw2D::disk(ScalarLaw::fixed(1e-6)), RngKey{kSeed, 35, 0}),
                    CoverageError);

    GrainLaw2D law = GrainLaw2D::disk(ScalarLaw::fixed(2.0));
    Box2 small{{0.0, 0.0}, {4.0, 4.0}};
    RngKey key{kSeed, 35, 1};
    CoverageResult cr = coverage_stop_2d(small, law, key);
    PlanarTessellation t = simulate2d(small, law, key);
    CHECK(cr.time == t.coverage_time);
    CHECK(cr.arrivals == t.arrivals_used);
    CHECK(cr.time > 0.0);
}

TEST_CASE("dlm2d: forward evolution") {
    GrainLaw2D law = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    Box2 W{{0.0, 0.0}, {8.0, 8.0}};
    PlanarTessellation t = simulate2d(W, law, RngKey{kSeed, 36, 0});

    // a grid instant at the observation time sees no arrivals
    EvolvingState2D s = evolving_from(t);
    TimeSeries zero = evolve2d(s, law, RngKey{kSeed, 36, 1}, {0.0});
    REQUIRE(zero.value.size() == 1);
    CHECK(zero.value[0] == doctest::Approx(t.total_boundary_length).epsilon(1e-12));

    // one leaf whose disk swallows the window wipes the picture; its own
    // circle lies outside, so the clipped boundary is empty
    EvolvingState2D wipe = evolving_from(t);
    GrainLaw2D::Shape cover;
    cover.r = 6.0;
    cover.area = kPi * 36.0;
    cover.perimeter = 2.0 * kPi * 6.0;
    cover.circumradius = 6.0;
    wipe.insert_leaf(cover, {4.0, 4.0}, wipe.next_leaf);
    CHECK(wipe.boundary_length() == doctest::Approx(0.0).epsilon(1e-12));

    // a smaller insert stays fully visible
    EvolvingState2D add = evolving_from(t);
    GrainLaw2D::Shape mid = cover;
    mid.r = 2.0;
    mid.circumradius = 2.0;
    mid.area = kPi * 4.0;
    mid.perimeter = 4.0 * kPi;
    double before = add.boundary_length();
    add.insert_leaf(mid, {4.0, 4.0}, add.next_leaf);
    CHECK(add.leaves.back().visible_length() == doctest::Approx(4.0 * kPi).epsilon(1e-12));
    double after = add.boundary_length();
    CHECK(after >= 4.0 * kPi - 1e-9);
    CHECK(after <= before + 4.0 * kPi + 1e-9);

    EvolvingState2D run = evolving_from(t);
    TimeSeries ts = evolve2d(run, law, RngKey{kSeed, 36, 2}, {0.25, 0.5, 0.75, 1.0});
    REQUIRE(ts.t.size() == 4);
    CHECK(run.time == 1.0);
    for (double v : ts.value) CHECK(v >= 0.0);

    EvolvingState2D bad = evolving_from(t);
    CHECK_THROWS_AS(evolve2d(bad, law, RngKey{kSeed, 36, 3}, {0.5, 0.4}), std::invalid_argument);
    bad.time = 1.0;
    CHECK_THROWS_AS(evolve2d(bad, law, RngKey{kSeed, 36, 3}, {0.5}), std::invalid_argument);
}

TEST_CASE("dlm2d: connectivity diagnostic") {
    GrainLaw2D law = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    Box2 W{{0.0, 0.0}, {14.0, 14.0}};
    PlanarTessellation t = simulate2d(W, law, RngKey{kSeed, 37, 0});
    ConnectivityReport rep = connectivity_diagnostic(t);
    CHECK(rep.components >= 1);
    CHECK(rep.isolated_interior == 0);

    // window smaller than the erosion margin: nothing to report
    PlanarTessellation tiny = simulate2d({{0.0, 0.0}, {1.5, 1.5}}, law, RngKey{kSeed, 37, 1});
    ConnectivityReport none = connectivity_diagnostic(tiny);
    CHECK(none.components == 0);
}

TEST_CASE("dlm2d: boundary length variance approaches the closed form") {
    GrainLaw2D law = GrainLaw2D::disk(ScalarLaw::fixed(1.0));
    Box2 W{{0.0, 0.0}, {20.0, 20.0}};
    const int reps = 320;
    const int workers = 8;

    std::vector<double> vals(reps, 0.0);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w]() {
            for (int r = w; r < reps; r += workers)
                vals[r] = simulate2d(W, law, RngKey{kSeed, 38, (uint64_t)r}).total_boundary_length;
        });
    for (auto& th : pool) th.join();

    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= reps - 1;

    CHECK(mean / W.area() == doctest::Approx(2.0).epsilon(0.01));
    CHECK(var / W.area() == doctest::Approx(sigma2_sq(law).value).epsilon(0.15));
}
