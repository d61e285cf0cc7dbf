#include "dl/dlm1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dl/errors.hpp"

namespace dl {

static constexpr double kTimeCap = 1e6;
static constexpr uint64_t kArrivalCap = 400000000ull;

namespace {

// uncovered gaps of the window, sorted
struct GapList {
    std::vector<std::pair<double, double>> gaps;
    double sliver;

    explicit GapList(double length) : sliver(1e-12 * length) {
        gaps.push_back({0.0, length});
    }

    bool empty() const { return gaps.empty(); }

    bool point_exposed(double p) const {
        auto it = std::upper_bound(gaps.begin(), gaps.end(), p,
                                   [](double v, const std::pair<double, double>& g) { return v < g.first; });
        if (it == gaps.begin()) return false;
        --it;
        return p >= it->first && p <= it->second;
    }

    // carve [a,b] out of the gaps; reports each removed piece. Remnants
    // shorter than the sliver guard are absorbed into the piece so the cell
    // partition stays exact.
    template <class F>
    void cover(double a, double b, F&& piece) {
        if (!(b > a)) return;
        size_t i = std::upper_bound(gaps.begin(), gaps.end(), a,
                                    [](double v, const std::pair<double, double>& g) { return v < g.second; }) -
                   gaps.begin();
        while (i < gaps.size() && gaps[i].first < b) {
            double g0 = gaps[i].first, g1 = gaps[i].second;
            double c0 = std::max(g0, a), c1 = std::min(g1, b);
            if (!(c1 > c0)) { ++i; continue; }
            bool keep_left = (c0 - g0) > sliver;
            bool keep_right = (g1 - c1) > sliver;
            if (!keep_left) c0 = g0;
            if (!keep_right) c1 = g1;
            piece(c0, c1);
            if (keep_left && keep_right) {
                gaps[i].second = c0;
                gaps.insert(gaps.begin() + i + 1, {c1, g1});
                i += 2;
            } else if (keep_left) {
                gaps[i].second = c0;
                ++i;
            } else if (keep_right) {
                gaps[i].first = c1;
                ++i;
            } else {
                gaps.erase(gaps.begin() + i);
            }
        }
    }
};

}  // namespace

Tessellation1D simulate1d(double length, const GrainLaw1D& law, const RngKey& key) {
    if (!(length > 0.0)) throw std::invalid_argument("simulate1d: window length must be positive");
    Tessellation1D t;
    t.length = length;
    t.halo = law.radius_bound();
    Window1D win{length, t.halo};
    Stream1D stream(win, law, key);
    GapList gaps(length);

    while (!gaps.empty()) {
        Arrival1D a = stream.next();
        if (a.time > kTimeCap || a.index >= kArrivalCap)
            throw CoverageError("simulate1d: window not covered before caps");
        bool any_visible = false;
        for (auto& [off0, off1] : a.shape.parts) {
            double lo = a.pos + off0, hi = a.pos + off1;
            if (hi > lo) {
                gaps.cover(lo, hi, [&](double c0, double c1) {
                    Cell1D cell;
                    cell.start = c0;
                    cell.end = c1;
                    cell.leaf = a.index;
                    cell.full_component = (c0 == lo && c1 == hi);
                    cell.edge = (c0 == 0.0 || c1 == length);
                    t.cells.push_back(cell);
                    any_visible = true;
                });
            } else {
                double p = lo;
                if (p >= 0.0 && p <= length && gaps.point_exposed(p)) {
                    t.point_marks.push_back({p, a.index});
                    any_visible = true;
                }
            }
        }
        if (any_visible) t.visible.push_back(a);
        if (gaps.empty()) {
            t.coverage_time = a.time;
            t.arrivals_used = a.index + 1;
        }
    }

    std::sort(t.cells.begin(), t.cells.end(),
              [](const Cell1D& a, const Cell1D& b) { return a.start < b.start; });
    std::sort(t.point_marks.begin(), t.point_marks.end());

    t.eta.reserve(t.cells.size() + t.point_marks.size());
    for (size_t i = 0; i + 1 < t.cells.size(); ++i) t.eta.push_back(t.cells[i].end);
    for (auto& [p, leaf] : t.point_marks)
        if (p > 0.0 && p < length) t.eta.push_back(p);
    std::sort(t.eta.begin(), t.eta.end());
    t.eta.erase(std::unique(t.eta.begin(), t.eta.end()), t.eta.end());
    return t;
}

size_t Tessellation1D::boundary_count(double a, double b) const {
    auto lo = std::lower_bound(eta.begin(), eta.end(), a);
    auto hi = std::upper_bound(eta.begin(), eta.end(), b);
    return hi - lo;
}

const Cell1D& Tessellation1D::cell_at(double x) const {
    if (cells.empty()) throw std::logic_error("cell_at: empty tessellation");
    auto it = std::upper_bound(cells.begin(), cells.end(), x,
                               [](double v, const Cell1D& c) { return v < c.start; });
    if (it != cells.begin()) --it;
    return *it;
}

bool vacancy_indicator(const Tessellation1D& t, double origin, double h) {
    if (h < 0.0 || origin < 0.0 || origin + h > t.length)
        throw std::invalid_argument("vacancy_indicator: segment must sit inside the window");
    return t.boundary_count(origin, origin + h) == 0;
}

// -------------------- forward evolution --------------------

EvolvingState1D evolving_from(const Tessellation1D& t) {
    EvolvingState1D s;
    s.length = t.length;
    s.halo = t.halo;
    s.time = 0.0;
    s.cells = t.cells;
    s.point_marks = t.point_marks;
    s.next_leaf = t.arrivals_used;
    return s;
}

void EvolvingState1D::insert_leaf(const GrainLaw1D::Shape& shape, double pos, uint32_t idx) {
    double sliver = 1e-12 * length;
    for (auto& [off0, off1] : shape.parts) {
        double a = pos + off0, b = pos + off1;
        if (b > a) {
            // interior of the new leaf covers marks
            point_marks.erase(std::remove_if(point_marks.begin(), point_marks.end(),
                                             [&](auto& pm) { return pm.first > a && pm.first < b; }),
                              point_marks.end());
            double c0 = std::max(a, 0.0), c1 = std::min(b, length);
            if (!(c1 > c0)) continue;
            size_t i = std::upper_bound(cells.begin(), cells.end(), c0,
                                        [](double v, const Cell1D& c) { return v < c.end; }) -
                       cells.begin();
            size_t j = i;
            while (j < cells.size() && cells[j].start < c1) ++j;
            // j is one past the last affected cell
            std::vector<Cell1D> repl;
            if (i < cells.size() && cells[i].start < c0) {
                if (c0 - cells[i].start > sliver) {
                    Cell1D left = cells[i];
                    left.end = c0;
                    left.full_component = false;
                    left.edge = (left.start == 0.0);
                    repl.push_back(left);
                } else {
                    c0 = cells[i].start;
                }
            }
            Cell1D mid;
            mid.start = c0;
            mid.end = c1;
            mid.leaf = idx;
            mid.full_component = (a >= 0.0 && b <= length && c0 == a && c1 == b);
            mid.edge = (c0 == 0.0 || c1 == length);
            size_t mid_at = repl.size();
            repl.push_back(mid);
            if (j > i && cells[j - 1].end > c1) {
                if (cells[j - 1].end - c1 > sliver) {
                    Cell1D right = cells[j - 1];
                    right.start = c1;
                    right.full_component = false;
                    right.edge = (right.end == length);
                    repl.push_back(right);
                } else {
                    repl[mid_at].end = cells[j - 1].end;
                    repl[mid_at].edge = (repl[mid_at].start == 0.0 || repl[mid_at].end == length);
                    repl[mid_at].full_component = false;
                }
            }
            cells.erase(cells.begin() + i, cells.begin() + j);
            cells.insert(cells.begin() + i, repl.begin(), repl.end());
        } else {
            double p = a;
            if (p >= 0.0 && p <= length) point_marks.push_back({p, idx});
        }
    }
    std::sort(point_marks.begin(), point_marks.end());
}

size_t EvolvingState1D::boundary_count(double a, double b) const {
    size_t n = 0;
    for (size_t i = 0; i + 1 < cells.size(); ++i) {
        double p = cells[i].end;
        if (p >= a && p <= b) ++n;
    }
    for (auto& [p, leaf] : point_marks)
        if (p >= a && p <= b && p > 0.0 && p < length) ++n;
    return n;
}

TimeSeries evolve1d(EvolvingState1D& state, const GrainLaw1D& law, const RngKey& key,
                    const std::vector<double>& grid, double lo, double hi) {
    TimeSeries ts;
    if (grid.empty()) return ts;
    for (size_t i = 0; i + 1 < grid.size(); ++i)
        if (grid[i + 1] <= grid[i]) throw std::invalid_argument("evolve1d: grid must increase");
    if (grid.front() < state.time) throw std::invalid_argument("evolve1d: grid starts in the past");

    Window1D win{state.length, state.halo};
    Stream1D stream(win, law, key, state.time);
    Arrival1D pending = stream.next();
    for (double g : grid) {
        while (pending.time <= g) {
            state.insert_leaf(pending.shape, pending.pos, state.next_leaf++);
            pending = stream.next();
        }
        state.time = g;
        ts.t.push_back(g);
        ts.value.push_back(double(state.boundary_count(lo, hi)));
    }
    return ts;
}

}  // namespace dl
