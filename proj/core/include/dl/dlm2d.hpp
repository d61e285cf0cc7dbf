#pragma once
// Planar dead leaves tessellation. simulate2d runs the arrival stream
// backwards from the observation instant, youngest first; each leaf keeps
// the part of its boundary not covered by the leaves already placed, and the
// run stops once a hierarchical grid certifies that the window is covered.
// Arcs are reported clipped to the window. Branch points are the surviving
// pairwise boundary crossings; in generic position they have degree 3 and
// carry the triple of leaves whose cells meet there. Leaf ids in arcs and
// branch points index the `leaves` list, not the raw arrival stream.

#include <cstdint>
#include <vector>

#include "dl/dlm1d.hpp"  // TimeSeries
#include "dl/engine.hpp"
#include "dl/errors.hpp"

namespace dl {

constexpr uint32_t kNoLeaf = 0xffffffffu;

// one maximal visible boundary piece, clipped to the window
struct BoundaryArc {
    uint32_t leaf = 0;
    bool circular = false;
    // circular pieces: ccw angles th0 < th1 on the circle (center, radius)
    Vec2 center;
    double radius = 0.0;
    double th0 = 0.0, th1 = 0.0;
    // straight pieces: endpoints in traversal order (grain interior on the left)
    Vec2 p, q;

    double length() const {
        return circular ? radius * (th1 - th0) : (q - p).norm();
    }
    Vec2 at(double s) const;  // s in [0,1] along the piece
};

struct BranchPoint {
    Vec2 pos;
    // over: the younger leaf whose boundary runs through; under: the older
    // leaf whose boundary terminates here; third: the cell filling the
    // remaining sector (kNoLeaf when the probe could not resolve it)
    uint32_t over = 0, under = 0, third = kNoLeaf;
};

// per-leaf visible boundary, kept as coverage sets so the tessellation can
// be re-clipped, integrated and evolved without re-simulation
struct LeafBoundary {
    Arrival2D arr;
    AngleSet vis;                        // disks
    std::vector<IntervalSet> edge_vis;   // polygons, one set per edge

    bool is_disk() const { return arr.shape.is_disk(); }
    Circle circle() const { return {arr.pos, arr.shape.r}; }
    Polygon world_poly() const;
    Box2 bbox() const;
    double reach() const;                // circumradius of the placed grain
    bool contains(const Vec2& p, double inset = 0.0) const;
    double visible_length() const;       // unclipped
};

struct PlanarTessellation {
    Box2 window;
    double halo = 0.0;
    std::vector<BoundaryArc> arcs;           // visible boundary inside the window
    std::vector<BranchPoint> branch_points;  // inside the window, merged at 1e-9
    double total_boundary_length = 0.0;      // sum of arc lengths
    long cell_count_interior = -1;           // set by count_cells
    double coverage_time = 0.0;
    uint32_t arrivals_used = 0;
    std::vector<LeafBoundary> leaves;        // processing (youngest-first) order
};

PlanarTessellation simulate2d(const Box2& window, const GrainLaw2D& law, const RngKey& key);

// boundary length of the tessellation re-clipped to a sub-box
double boundary_length_in(const PlanarTessellation& t, const Box2& box);

// visible area of each leaf inside `box` (which must sit inside the window),
// via Green's theorem over the patch contours; entries sum to the box area
std::vector<double> patch_areas(const PlanarTessellation& t, const Box2& box);

// raster face count. Every pixel of an n x n grid is labelled with the leaf
// that owns its centre and same-owner components are flood-filled; a cell is
// counted when its lowest pixel (row-major) sits at least `margin` inside
// the window. With margin above the grain diameter the rule is free of edge
// bias, so the estimated intensity is count / core area with
// core = (width - 2 margin) (height - 2 margin). Caches into
// cell_count_interior and returns the count.
long count_cells(PlanarTessellation& t, int resolution = 2048, double margin = 3.0);

// branch-point Euler estimate of the whole-window count (faces ~ vertices / 2)
long euler_cell_estimate(const PlanarTessellation& t);

// -------------------- coverage stopping rule --------------------

// Quadtree over the window. A node counts as covered only when a single
// placed leaf contains it whole, and nodes split on demand until their
// diagonal drops below 1e-4 of the window side; laws whose grains cannot
// cover even a floor cell fail up front rather than looping forever.
class CoverageGrid2D {
public:
    CoverageGrid2D(const Box2& window, double grain_reach);
    // place one leaf; returns true once the whole window is certified covered
    bool add(const GrainLaw2D::Shape& shape, const Vec2& pos);
    bool covered() const { return open_ == 0; }
    double floor_diag() const { return floor_diag_; }
    size_t node_count() const { return nodes_.size(); }
    size_t open_count() const { return open_; }

private:
    struct Node {
        Box2 box;
        int32_t child = -1;  // index of first of four children, -1 for leaf
        bool done = false;
    };
    void descend(int32_t idx, const GrainLaw2D::Shape& shape, const Vec2& pos, const Box2& bb);

    std::vector<Node> nodes_;
    size_t open_ = 0;  // uncovered leaf nodes
    double floor_diag_ = 0.0;
    double thresh_ = 0.0;
};

struct CoverageResult {
    double time = 0.0;
    uint32_t arrivals = 0;
};

// run a fresh stream until the window is covered
CoverageResult coverage_stop_2d(const Box2& window, const GrainLaw2D& law, const RngKey& key);

// -------------------- connectivity diagnostic --------------------

struct ConnectivityReport {
    int components = 0;         // of the arc graph clipped to the eroded window
    int isolated_interior = 0;  // components that never reach the eroded edge
};

// glue arcs at branch points, clip to the window eroded by the grain reach
ConnectivityReport connectivity_diagnostic(const PlanarTessellation& t);

// -------------------- forward evolution --------------------

struct EvolvingState2D {
    Window2D window;
    double time = 0.0;
    uint32_t next_leaf = 0;
    // cover order: appended leaves sit on top of each other in append order,
    // and all of them on top of the first initial_count (stored top-first)
    uint32_t initial_count = 0;
    std::vector<LeafBoundary> leaves;

    void insert_leaf(const GrainLaw2D::Shape& shape, const Vec2& pos, uint32_t idx);
    double boundary_length() const;  // visible boundary inside the window
};

EvolvingState2D evolving_from(const PlanarTessellation& t);

// clipped visible boundary length / visible patch areas of the current stack
double boundary_length_in(const EvolvingState2D& s, const Box2& box);
std::vector<double> patch_areas(const EvolvingState2D& s, const Box2& box);

// advance through [state.time, grid.back()], recording the visible boundary
// length inside the window at each grid instant
TimeSeries evolve2d(EvolvingState2D& state, const GrainLaw2D& law, const RngKey& key,
                    const std::vector<double>& grid);

}  // namespace dl
