#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "dl/noodle.hpp"

using namespace dl;

namespace {

Polyline random_chain(RngStream& rng) {
    Polyline p;
    int n = 2 + int(rng.below(3));
    for (int i = 0; i < n; ++i) p.vertices.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    return p;
}

}  // namespace

TEST_CASE("crossing counts on hand-built configurations") {
    Polyline h = segment_noodle({-0.5, 0.0}, {0.5, 0.0});
    Polyline v = segment_noodle({0.0, -0.5}, {0.0, 0.5});
    CrossingCount plus = crossings(h, v);
    CHECK(plus.crossings == 1);
    CHECK(plus.touches == 0);

    Polyline far = segment_noodle({5.0, 5.0}, {6.0, 5.0});
    CrossingCount none = crossings(h, far);
    CHECK(none.crossings == 0);
    CHECK(none.touches == 0);

    // endpoint resting on the other curve grazes, it does not cross
    Polyline stem = segment_noodle({0.0, 0.0}, {0.0, 0.5});
    CrossingCount tee = crossings(h, stem);
    CHECK(tee.crossings == 0);
    CHECK(tee.touches == 1);

    // collinear overlap is contact without a side change
    Polyline shifted = segment_noodle({0.0, 0.0}, {1.0, 0.0});
    Polyline overlap = segment_noodle({0.5, 0.0}, {1.5, 0.0});
    CrossingCount slide = crossings(shifted, overlap);
    CHECK(slide.crossings == 0);
    CHECK(slide.touches == 1);

    // passing exactly through a chain vertex grazes both incident segments
    Polyline bent{{{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}, false};
    CrossingCount through = crossings(bent, v);
    CHECK(through.crossings == 0);
    CHECK(through.touches == 2);
}

TEST_CASE("crossings are symmetric and rigid-motion invariant") {
    RngStream rng = RngStream::keyed(0x5EED11, 7);
    for (int rep = 0; rep < 1000; ++rep) {
        Polyline a = random_chain(rng);
        Polyline b = random_chain(rng);
        CrossingCount ab = crossings(a, b);
        CrossingCount ba = crossings(b, a);
        CHECK(ab.crossings == ba.crossings);
        CHECK(ab.touches == ba.touches);

        double th = rng.uniform(-kPi, kPi);
        Vec2 shift{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        CrossingCount moved = crossings(a.transformed(th, shift), b.transformed(th, shift));
        CHECK(moved.crossings == ab.crossings);
    }
}

TEST_CASE("random placement of one curve over another recovers the length product") {
    Polyline a = segment_noodle({-0.5, 0.0}, {0.5, 0.0});
    Polyline b = segment_noodle({-0.5, 0.0}, {0.5, 0.0});

    RngStream rng = RngStream::keyed(0x5EED12, 1);
    double touch_rate = 1.0;
    EstimateReport two_segments = poincare_mc(a, b, 200000, rng, &touch_rate);
    CHECK(two_segments.target == doctest::Approx(4.0));
    CHECK(std::abs(two_segments.value - 4.0) <= 3.0 * two_segments.std_error);
    CHECK(two_segments.verdict == EstimateReport::Verdict::pass);
    CHECK(touch_rate < 1e-3);

    // closed unit-perimeter square
    Polyline square{{{-0.125, -0.125}, {0.125, -0.125}, {0.125, 0.125}, {-0.125, 0.125}}, true};
    CHECK(square.length() == doctest::Approx(1.0));
    RngStream rng2 = RngStream::keyed(0x5EED12, 2);
    EstimateReport loop = poincare_mc(a, square, 200000, rng2);
    CHECK(loop.target == doctest::Approx(4.0));
    CHECK(std::abs(loop.value - 4.0) <= 3.0 * loop.std_error);

    // doubling one curve's length doubles the target and the estimate follows
    Polyline big{{{-0.25, -0.25}, {0.25, -0.25}, {0.25, 0.25}, {-0.25, 0.25}}, true};
    RngStream rng3 = RngStream::keyed(0x5EED12, 3);
    EstimateReport doubled = poincare_mc(a, big, 200000, rng3);
    CHECK(*doubled.target == doctest::Approx(8.0));
    CHECK(std::abs(doubled.value - 8.0) <= 3.0 * doubled.std_error);
}

TEST_CASE("ruled-floor crossings depend only on length and spacing") {
    Polyline needle = segment_noodle({-0.5, 0.0}, {0.5, 0.0});
    RngStream rng = RngStream::keyed(0x5EED13, 1);
    EstimateReport straight = buffon_noodle_mc(needle, 1.0, 100000, rng);
    CHECK(*straight.target == doctest::Approx(2.0 / kPi));
    CHECK(std::abs(straight.value - 2.0 / kPi) <= 3.0 * straight.std_error);

    Polyline arc = semicircle_noodle(1.0);
    CHECK(arc.length() == doctest::Approx(1.0).epsilon(1e-12));
    RngStream rng2 = RngStream::keyed(0x5EED13, 2);
    EstimateReport curved = buffon_noodle_mc(arc, 1.0, 100000, rng2);
    CHECK(*curved.target == doctest::Approx(2.0 / kPi));
    CHECK(std::abs(curved.value - 2.0 / kPi) <= 3.0 * curved.std_error);

    RngStream rng3 = RngStream::keyed(0x5EED13, 3);
    EstimateReport wide = buffon_noodle_mc(needle, 2.0, 100000, rng3);
    CHECK(*wide.target == doctest::Approx(1.0 / kPi));
    CHECK(std::abs(wide.value - 1.0 / kPi) <= 3.0 * wide.std_error);
}

TEST_CASE("noodle argument validation") {
    RngStream rng = RngStream::keyed(0x5EED14);
    Polyline ok = segment_noodle({0.0, 0.0}, {1.0, 0.0});
    Polyline empty;
    CHECK_THROWS_AS(poincare_mc(ok, empty, 1000, rng), std::invalid_argument);
    CHECK_THROWS_AS(poincare_mc(empty, ok, 1000, rng), std::invalid_argument);
    CHECK_THROWS_AS(buffon_noodle_mc(ok, 0.0, 1000, rng), std::invalid_argument);
    CHECK_THROWS_AS(buffon_noodle_mc(ok, 1.0, 1, rng), std::invalid_argument);
    CHECK_THROWS_AS(semicircle_noodle(0.0), std::invalid_argument);
}
