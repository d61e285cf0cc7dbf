#pragma once
// One-dimensional dead leaves tessellation. simulate1d runs the arrival
// stream backwards from the observation instant until the window is covered;
// the first leaf to land on a spot owns it, so the result is an exact draw
// of the stationary visible tessellation. Cells partition [0, length]
// exactly; `eta` lists the interior cell boundary points plus any exposed
// zero-length grain components.

#include <cstdint>
#include <vector>

#include "dl/engine.hpp"

namespace dl {

struct Cell1D {
    double start = 0.0, end = 0.0;
    uint32_t leaf = 0;           // arrival index of the exposing leaf
    bool full_component = false; // visible piece is one entire grain component
    bool edge = false;           // touches the window boundary
};

struct Tessellation1D {
    double length = 0.0;
    double halo = 0.0;
    std::vector<Cell1D> cells;                           // sorted, exact partition
    std::vector<std::pair<double, uint32_t>> point_marks;  // exposed zero-length components
    std::vector<double> eta;                             // sorted boundary points in (0, length)
    double coverage_time = 0.0;
    uint32_t arrivals_used = 0;
    std::vector<Arrival1D> visible;                      // arrivals with a nonempty visible part

    size_t boundary_count(double a, double b) const;     // eta points in [a,b]
    const Cell1D& cell_at(double x) const;               // boundary hits resolve right
};

Tessellation1D simulate1d(double length, const GrainLaw1D& law, const RngKey& key);

// true when no boundary point falls in [origin, origin+h]
bool vacancy_indicator(const Tessellation1D& t, double origin, double h);

// -------------------- forward evolution --------------------

struct EvolvingState1D {
    double length = 0.0, halo = 0.0, time = 0.0;
    std::vector<Cell1D> cells;
    std::vector<std::pair<double, uint32_t>> point_marks;
    uint32_t next_leaf = 0;

    void insert_leaf(const GrainLaw1D::Shape& shape, double pos, uint32_t idx);
    size_t boundary_count(double a, double b) const;
};

EvolvingState1D evolving_from(const Tessellation1D& t);

struct TimeSeries {
    std::vector<double> t;
    std::vector<double> value;
};

// advance the state through [state.time, grid.back()], recording the
// boundary count on [lo,hi] at each grid instant
TimeSeries evolve1d(EvolvingState1D& state, const GrainLaw1D& law, const RngKey& key,
                    const std::vector<double>& grid, double lo, double hi);

}  // namespace dl
