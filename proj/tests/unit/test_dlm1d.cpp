#include <doctest.h>

#include <cmath>

#include "dl/dlm1d.hpp"

using namespace dl;

namespace {

void check_partition(const std::vector<Cell1D>& cells, double length) {
    REQUIRE(!cells.empty());
    CHECK(cells.front().start == 0.0);
    CHECK(cells.back().end == length);
    double sum = 0.0;
    for (size_t i = 0; i < cells.size(); ++i) {
        CHECK(cells[i].end > cells[i].start);
        sum += cells[i].end - cells[i].start;
        if (i + 1 < cells.size()) CHECK(cells[i].end == cells[i + 1].start);
    }
    CHECK(std::abs(sum - length) < 1e-9 * length);
}

}  // namespace

TEST_CASE("1d tessellation: partition, eta, determinism") {
    auto law = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    RngKey key{101, 0, 0};
    auto t = simulate1d(10.0, law, key);
    check_partition(t.cells, 10.0);
    CHECK(t.eta.size() == t.cells.size() - 1);
    CHECK(t.coverage_time > 0.0);
    CHECK(t.arrivals_used > 0);
    for (double p : t.eta) {
        CHECK(p > 0.0);
        CHECK(p < 10.0);
    }
    // every cell no longer than the leaf and full cells exactly 1
    for (auto& c : t.cells) {
        CHECK(c.end - c.start <= 1.0 + 1e-12);
        if (c.full_component) CHECK(c.end - c.start == doctest::Approx(1.0).epsilon(1e-12));
    }

    auto t2 = simulate1d(10.0, law, key);
    REQUIRE(t2.cells.size() == t.cells.size());
    for (size_t i = 0; i < t.cells.size(); ++i) {
        CHECK(t.cells[i].start == t2.cells[i].start);
        CHECK(t.cells[i].leaf == t2.cells[i].leaf);
    }
}

TEST_CASE("1d boundary intensity matches 2/lambda") {
    auto law = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    const double n = 200.0;
    const int reps = 300;
    double count = 0.0;
    double lo = 1.0, hi = n - 1.0;
    for (int rep = 0; rep < reps; ++rep) {
        auto t = simulate1d(n, law, RngKey{55, 1, uint64_t(rep)});
        count += t.boundary_count(lo, hi);
    }
    double est = count / (reps * (hi - lo));
    // var of count ~ sigma^2 * len, sigma^2 ~ 0.545
    double se = std::sqrt(0.55 * (hi - lo)) / ((hi - lo) * std::sqrt(double(reps)));
    CHECK(std::abs(est - 2.0) < 3.0 * se);
}

TEST_CASE("multi component boundary intensity") {
    // two components, total length 1, four endpoints: intensity 4
    auto law = GrainLaw1D::multi({{0.0, 0.5}, {1.0, 0.5}});
    const double n = 150.0;
    const int reps = 200;
    double count = 0.0;
    double lo = 2.0, hi = n - 2.0;
    for (int rep = 0; rep < reps; ++rep) {
        auto t = simulate1d(n, law, RngKey{56, 2, uint64_t(rep)});
        count += t.boundary_count(lo, hi);
    }
    double est = count / (reps * (hi - lo));
    CHECK(std::abs(est - 4.0) < 0.1);

    // with an isolated point component: 2*2 - 1 = 3 endpoints per unit measure
    auto lawz = GrainLaw1D::multi({{0.0, 1.0}, {2.0, 0.0}});
    count = 0.0;
    double lo2 = 3.0, hi2 = n - 3.0;
    for (int rep = 0; rep < reps; ++rep) {
        auto t = simulate1d(n, lawz, RngKey{57, 3, uint64_t(rep)});
        count += t.boundary_count(lo2, hi2);
    }
    est = count / (reps * (hi2 - lo2));
    CHECK(std::abs(est - 3.0) < 0.1);
}

TEST_CASE("single giant leaf covers the window") {
    auto law = GrainLaw1D::interval(ScalarLaw::fixed(5.0));
    bool seen = false;
    for (int rep = 0; rep < 50 && !seen; ++rep) {
        auto t = simulate1d(1.0, law, RngKey{58, 4, uint64_t(rep)});
        if (t.cells.size() == 1) {
            seen = true;
            CHECK(t.eta.empty());
            CHECK(t.cells[0].edge);
            CHECK(!t.cells[0].full_component);
            CHECK(t.visible.size() == 1);
        }
    }
    CHECK(seen);
}

TEST_CASE("cell_at resolves boundaries to the right cell") {
    auto law = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    auto t = simulate1d(10.0, law, RngKey{59, 5, 0});
    REQUIRE(t.cells.size() >= 3);
    auto& c1 = t.cells[1];
    CHECK(t.cell_at(c1.start).start == c1.start);          // boundary goes right
    CHECK(t.cell_at(0.5 * (c1.start + c1.end)).start == c1.start);
    CHECK(t.cell_at(0.0).start == 0.0);
}

TEST_CASE("vacancy indicator") {
    auto law = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    int reps = 3000, vac_half = 0, vac_full = 0;
    for (int rep = 0; rep < reps; ++rep) {
        auto t = simulate1d(6.0, law, RngKey{60, 6, uint64_t(rep)});
        CHECK(vacancy_indicator(t, 3.0, 0.0));  // a.s. no point exactly there
        if (vacancy_indicator(t, 2.75, 0.5)) ++vac_half;
        if (vacancy_indicator(t, 2.5, 1.0)) ++vac_full;
    }
    double p = double(vac_half) / reps;  // target 1/3
    CHECK(std::abs(p - 1.0 / 3.0) < 3.0 * std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / reps));
    CHECK(vac_full == 0);  // segment as long as the leaf is never vacant
    CHECK_THROWS(vacancy_indicator(simulate1d(6.0, law, RngKey{60, 6, 0}), 5.9, 0.5));
}

TEST_CASE("forward evolution preserves the partition and stationarity") {
    auto law = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    const double n = 100.0;
    const int reps = 150;
    double c0 = 0.0, c5 = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        auto t = simulate1d(n, law, RngKey{61, 7, uint64_t(rep)});
        auto st = evolving_from(t);
        c0 += st.boundary_count(1.0, n - 1.0);
        auto ts = evolve1d(st, law, RngKey{61, 8, uint64_t(rep)}, {5.0}, 1.0, n - 1.0);
        REQUIRE(ts.value.size() == 1);
        c5 += ts.value[0];
        check_partition(st.cells, n);
        CHECK(st.time == 5.0);
    }
    double len = n - 2.0;
    double m0 = c0 / (reps * len), m5 = c5 / (reps * len);
    CHECK(std::abs(m0 - 2.0) < 0.1);
    CHECK(std::abs(m5 - 2.0) < 0.1);  // still stationary after forward run
}

TEST_CASE("evolution with an empty grid or no arrivals is a no-op") {
    auto law = GrainLaw1D::interval(ScalarLaw::fixed(1.0));
    auto t = simulate1d(10.0, law, RngKey{62, 9, 0});
    auto st = evolving_from(t);
    auto cells_before = st.cells;
    auto ts = evolve1d(st, law, RngKey{62, 10, 0}, {}, 0.0, 10.0);
    CHECK(ts.t.empty());
    CHECK(st.cells.size() == cells_before.size());
}
