#pragma once
// Dead leaves random measure. Every arrival carries a finite mark measure:
// counting mass on its boundary, Lebesgue mass gated by a colour coin or
// weighted by a grey level, atoms at its corners, or a bare seed pattern
// with no leaf at all. Later leaves erase whatever older mark mass lies
// under their footprint. xi_state_* draws the stationary configuration
// restricted to a window by the usual time-reversed sweep, xi_value
// integrates a piecewise-constant test function against it, and evolve_xi
// replays the forward dynamics from a drawn (or hand-built) state.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dl/closedform.hpp"
#include "dl/dlm1d.hpp"
#include "dl/dlm2d.hpp"

namespace dl {

// -------------------- test functions --------------------

// Piecewise constant on disjoint half-open pieces. `scale` is the dilation
// parameter n acting by at(x) = f(x / n^{1/d}), so the support grows by
// n^{1/d} per axis and the integral by n in either dimension.
struct TestFunction1D {
    struct Piece {
        double lo = 0.0, hi = 0.0;
        double value = 1.0;
    };
    std::vector<Piece> pieces;
    double scale = 1.0;

    static TestFunction1D indicator(double lo, double hi);
    void validate() const;          // throws std::invalid_argument
    double dilation() const;        // n
    double at(double x) const;
    double support_lo() const;      // of the dilated function
    double support_hi() const;
    double integral() const;
};

struct TestFunction2D {
    struct Piece {
        Box2 box;
        double value = 1.0;
    };
    std::vector<Piece> pieces;
    double scale = 1.0;

    static TestFunction2D indicator(const Box2& b);
    void validate() const;
    double dilation() const;        // sqrt(n), per axis
    double at(const Vec2& x) const;
    Box2 support() const;           // bounding box of the dilated support
    double integral() const;
};

// -------------------- drawn measure states --------------------

// One realization of the measure on a fixed window. Leaf-carried kinds keep
// the exact cell partition (1d) or the visible-boundary stack (2d) plus the
// per-leaf weight the mark puts on its surviving mass; the atom kinds keep
// the alive atoms directly.
struct XiState1D {
    EvolvingState1D ev;
    MarkSpec mark;
    std::unordered_map<uint32_t, double> weight;  // colour coin / grey level
    std::vector<double> atoms;                    // alive seed positions
    double coverage_time = 0.0;
    uint32_t arrivals_used = 0;
};

struct XiState2D {
    EvolvingState2D ev;
    MarkSpec mark;
    std::unordered_map<uint32_t, double> weight;
    std::vector<std::pair<Vec2, uint32_t>> corners;  // alive corner, owner id
    std::vector<Vec2> atoms;
    double coverage_time = 0.0;
    uint32_t arrivals_used = 0;
};

struct XiResult {
    double value = 0.0;
    double coverage_time = 0.0;
    uint32_t arrivals_used = 0;
};

XiState1D xi_state_1d(double length, const GrainLaw1D& law, const MarkSpec& mark,
                      const RngKey& key);
XiState2D xi_state_2d(const Box2& window, const GrainLaw2D& law, const MarkSpec& mark,
                      const RngKey& key);

// integrate f against the state's current measure; the dilated support must
// lie inside the window
double xi_value(const XiState1D& s, const TestFunction1D& f);
double xi_value(const XiState2D& s, const TestFunction2D& f);

XiResult evaluate_xi(double length, const GrainLaw1D& law, const MarkSpec& mark,
                     const TestFunction1D& f, const RngKey& key);
XiResult evaluate_xi(const Box2& window, const GrainLaw2D& law, const MarkSpec& mark,
                     const TestFunction2D& f, const RngKey& key);

// advance through [state time, grid.back()], recording xi_value(state, f)
// at each grid instant
TimeSeries evolve_xi(XiState1D& s, const GrainLaw1D& law, const TestFunction1D& f,
                     const RngKey& key, const std::vector<double>& grid);
TimeSeries evolve_xi(XiState2D& s, const GrainLaw2D& law, const TestFunction2D& f,
                     const RngKey& key, const std::vector<double>& grid);

}  // namespace dl
