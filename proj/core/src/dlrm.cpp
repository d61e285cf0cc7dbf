// Dead leaves random measure: stationary draws, test-function integrals, and
// forward evolution for the five mark kinds. Leaf-carried kinds ride on the
// exact tessellation machinery (cells on the line, visible-boundary stacks
// in the plane); the atom kinds track their surviving atoms directly, since
// an atom only needs point-in-leaf tests against the leaves above it.

#include "dl/dlrm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dl/errors.hpp"

namespace dl {
namespace {

constexpr double kTimeCap = 1e6;
constexpr uint32_t kArrivalCap = 400000000u;

void check_mark(const MarkSpec& m, bool planar, bool polygon_law) {
    switch (m.kind) {
        case MarkKind::boundary_surface:
            return;
        case MarkKind::colour_lebesgue:
            if (!(m.colour_p >= 0.0) || !(m.colour_p <= 1.0))
                throw std::invalid_argument("colour probability outside [0,1]");
            return;
        case MarkKind::density:
            if (!(m.level_lo <= m.level_hi))
                throw std::invalid_argument("grey level range is inverted");
            return;
        case MarkKind::seeds:
            if (!(m.seed_mix > 0.0) || !(m.seed_mix < 1.0))
                throw std::invalid_argument("seed mix must lie strictly inside (0,1)");
            if (m.seed_offsets.empty()) throw std::invalid_argument("empty seed pattern");
            return;
        case MarkKind::corner_counting:
            if (!planar || !polygon_law)
                throw UnsupportedError("corner marks need polygon leaves");
            return;
    }
    throw std::logic_error("unreachable");
}

bool has_weight(MarkKind k) {
    return k == MarkKind::colour_lebesgue || k == MarkKind::density;
}

double weight_draw(RngStream& ms, const MarkSpec& m) {
    if (m.kind == MarkKind::colour_lebesgue) return ms.bernoulli(m.colour_p) ? 1.0 : 0.0;
    return ms.uniform(m.level_lo, m.level_hi);
}

double max_offset(const MarkSpec& m, bool planar) {
    double r = 0.0;
    for (auto& o : m.seed_offsets) r = std::max(r, planar ? o.norm() : std::abs(o.x));
    return r;
}

bool in_span(double x, double lo, double hi) { return x >= lo && x < hi; }

bool in_box(const Vec2& p, const Box2& b) {
    return in_span(p.x, b.lo.x, b.hi.x) && in_span(p.y, b.lo.y, b.hi.y);
}

bool set_contains(const IntervalSet& s, double x) {
    auto& v = s.parts();
    auto it = std::upper_bound(v.begin(), v.end(), x,
                               [](double q, const std::pair<double, double>& p) {
                                   return q < p.first;
                               });
    if (it == v.begin()) return false;
    --it;
    return x <= it->second;
}

bool shape_contains(const GrainLaw2D::Shape& sh, const Vec2& pos, const Vec2& p) {
    if (sh.is_disk()) return (p - pos).norm2() <= sh.r * sh.r;
    return point_in_convex(p - pos, sh.verts);
}

// -------------------- scaled pieces --------------------

struct Span1D {
    double lo, hi, v;
};
std::vector<Span1D> scaled_pieces(const TestFunction1D& f) {
    std::vector<Span1D> out;
    out.reserve(f.pieces.size());
    for (auto& p : f.pieces) out.push_back({p.lo * f.scale, p.hi * f.scale, p.value});
    return out;
}

struct Span2D {
    Box2 box;
    double v;
};
std::vector<Span2D> scaled_pieces(const TestFunction2D& f) {
    double d = std::sqrt(f.scale);
    std::vector<Span2D> out;
    out.reserve(f.pieces.size());
    for (auto& p : f.pieces)
        out.push_back({{{p.box.lo.x * d, p.box.lo.y * d}, {p.box.hi.x * d, p.box.hi.y * d}},
                       p.value});
    return out;
}

}  // namespace

// -------------------- test functions --------------------

TestFunction1D TestFunction1D::indicator(double lo, double hi) {
    TestFunction1D f;
    f.pieces.push_back({lo, hi, 1.0});
    return f;
}

void TestFunction1D::validate() const {
    if (!(scale > 0.0)) throw std::invalid_argument("test function scale must be positive");
    for (auto& p : pieces)
        if (!(p.hi > p.lo) || !std::isfinite(p.lo) || !std::isfinite(p.hi) ||
            !std::isfinite(p.value))
            throw std::invalid_argument("test function piece has an empty or infinite span");
    auto s = pieces;
    std::sort(s.begin(), s.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
    for (size_t i = 0; i + 1 < s.size(); ++i)
        if (s[i + 1].lo < s[i].hi)
            throw std::invalid_argument("test function pieces must be disjoint");
}

double TestFunction1D::dilation() const { return scale; }

double TestFunction1D::at(double x) const {
    double y = x / scale;
    for (auto& p : pieces)
        if (in_span(y, p.lo, p.hi)) return p.value;
    return 0.0;
}

double TestFunction1D::support_lo() const {
    double lo = 0.0;
    bool first = true;
    for (auto& p : pieces) {
        double v = p.lo * scale;
        if (first || v < lo) lo = v;
        first = false;
    }
    return lo;
}

double TestFunction1D::support_hi() const {
    double hi = 0.0;
    bool first = true;
    for (auto& p : pieces) {
        double v = p.hi * scale;
        if (first || v > hi) hi = v;
        first = false;
    }
    return hi;
}

double TestFunction1D::integral() const {
    double s = 0.0;
    for (auto& p : pieces) s += p.value * (p.hi - p.lo);
    return s * scale;
}

TestFunction2D TestFunction2D::indicator(const Box2& b) {
    TestFunction2D f;
    f.pieces.push_back({b, 1.0});
    return f;
}

void TestFunction2D::validate() const {
    if (!(scale > 0.0)) throw std::invalid_argument("test function scale must be positive");
    for (auto& p : pieces)
        if (!(p.box.width() > 0.0) || !(p.box.height() > 0.0) || !std::isfinite(p.box.lo.x) ||
            !std::isfinite(p.box.lo.y) || !std::isfinite(p.box.hi.x) ||
            !std::isfinite(p.box.hi.y) || !std::isfinite(p.value))
            throw std::invalid_argument("test function piece has an empty or infinite span");
    for (size_t i = 0; i < pieces.size(); ++i)
        for (size_t j = i + 1; j < pieces.size(); ++j) {
            const Box2& a = pieces[i].box;
            const Box2& b = pieces[j].box;
            if (a.lo.x < b.hi.x && b.lo.x < a.hi.x && a.lo.y < b.hi.y && b.lo.y < a.hi.y)
                throw std::invalid_argument("test function pieces must be disjoint");
        }
}

double TestFunction2D::dilation() const { return std::sqrt(scale); }

double TestFunction2D::at(const Vec2& x) const {
    double d = dilation();
    Vec2 y{x.x / d, x.y / d};
    for (auto& p : pieces)
        if (in_box(y, p.box)) return p.value;
    return 0.0;
}

Box2 TestFunction2D::support() const {
    Box2 out{{0.0, 0.0}, {0.0, 0.0}};
    bool first = true;
    double d = dilation();
    for (auto& p : pieces) {
        Box2 b{{p.box.lo.x * d, p.box.lo.y * d}, {p.box.hi.x * d, p.box.hi.y * d}};
        if (first) {
            out = b;
            first = false;
        } else {
            out.lo.x = std::min(out.lo.x, b.lo.x);
            out.lo.y = std::min(out.lo.y, b.lo.y);
            out.hi.x = std::max(out.hi.x, b.hi.x);
            out.hi.y = std::max(out.hi.y, b.hi.y);
        }
    }
    return out;
}

double TestFunction2D::integral() const {
    double s = 0.0;
    for (auto& p : pieces) s += p.value * p.box.area();
    return s * scale;
}

// -------------------- stationary draws --------------------

XiState1D xi_state_1d(double length, const GrainLaw1D& law, const MarkSpec& mark,
                      const RngKey& key) {
    if (!(length > 0.0)) throw std::invalid_argument("window length must be positive");
    check_mark(mark, false, false);
    XiState1D s;
    s.mark = mark;

    if (mark.kind == MarkKind::seeds) {
        double halo = std::max(law.radius_bound(), max_offset(mark, false));
        s.ev.length = length;
        s.ev.halo = halo;
        Stream1D stream({length, halo}, law, key);
        RngStream ms = key.stream(purpose::marks);
        IntervalSet uncovered = IntervalSet::full(0.0, length);
        while (true) {
            Arrival1D a = stream.next();
            if (a.time > kTimeCap || a.index >= kArrivalCap)
                throw CoverageError("evaluate_xi: window not covered before caps");
            if (ms.bernoulli(mark.seed_mix)) {
                for (auto& off : mark.seed_offsets) {
                    double x = a.pos + off.x;
                    if (in_span(x, 0.0, length) && set_contains(uncovered, x))
                        s.atoms.push_back(x);
                }
            } else {
                for (auto& part : a.shape.parts)
                    uncovered.subtract(a.pos + part.first, a.pos + part.second);
                if (uncovered.empty()) {
                    s.coverage_time = a.time;
                    s.arrivals_used = a.index + 1;
                    s.ev.next_leaf = a.index + 1;
                    return s;
                }
            }
        }
    }

    Tessellation1D t = simulate1d(length, law, key);
    s.ev = evolving_from(t);
    s.coverage_time = t.coverage_time;
    s.arrivals_used = t.arrivals_used;
    if (has_weight(mark.kind)) {
        RngStream ms = key.stream(purpose::marks);
        for (uint32_t i = 0; i < t.arrivals_used; ++i) s.weight[i] = weight_draw(ms, mark);
    }
    return s;
}

XiState2D xi_state_2d(const Box2& window, const GrainLaw2D& law, const MarkSpec& mark,
                      const RngKey& key) {
    if (!(window.width() > 0.0) || !(window.height() > 0.0))
        throw std::invalid_argument("window must have positive area");
    check_mark(mark, true, law.kind == GrainLaw2D::Kind::polygon);
    XiState2D s;
    s.mark = mark;

    if (mark.kind == MarkKind::seeds) {
        double halo = std::max(law.radius_bound(), max_offset(mark, true));
        s.ev.window = {window, halo};
        Stream2D stream({window, halo}, law, key);
        RngStream ms = key.stream(purpose::marks);
        CoverageGrid2D grid(window, law.radius_bound());
        struct Laid {
            Vec2 pos;
            Box2 bb;
            GrainLaw2D::Shape shape;
        };
        std::vector<Laid> laid;
        auto covered = [&](const Vec2& p) {
            for (auto& l : laid)
                if (l.bb.contains(p) && shape_contains(l.shape, l.pos, p)) return true;
            return false;
        };
        while (true) {
            Arrival2D a = stream.next();
            if (a.time > kTimeCap || a.index >= kArrivalCap)
                throw CoverageError("evaluate_xi: window not covered before caps");
            if (ms.bernoulli(mark.seed_mix)) {
                for (auto& off : mark.seed_offsets) {
                    Vec2 p = a.pos + off;
                    if (in_box(p, window) && !covered(p)) s.atoms.push_back(p);
                }
            } else {
                double reach = a.shape.is_disk() ? a.shape.r : max_vertex_norm(a.shape.verts);
                Box2 bb{{a.pos.x - reach, a.pos.y - reach}, {a.pos.x + reach, a.pos.y + reach}};
                if (!bb.overlaps(window)) continue;
                laid.push_back({a.pos, bb, a.shape});
                if (grid.add(a.shape, a.pos)) {
                    s.coverage_time = a.time;
                    s.arrivals_used = a.index + 1;
                    s.ev.next_leaf = a.index + 1;
                    return s;
                }
            }
        }
    }

    PlanarTessellation t = simulate2d(window, law, key);
    s.ev = evolving_from(t);
    s.coverage_time = t.coverage_time;
    s.arrivals_used = t.arrivals_used;
    if (has_weight(mark.kind)) {
        RngStream ms = key.stream(purpose::marks);
        for (uint32_t i = 0; i < t.arrivals_used; ++i) s.weight[i] = weight_draw(ms, mark);
    }
    if (mark.kind == MarkKind::corner_counting) {
        std::vector<Box2> bbs(t.leaves.size());
        for (size_t k = 0; k < t.leaves.size(); ++k) bbs[k] = t.leaves[k].bbox();
        for (size_t k = 0; k < t.leaves.size(); ++k) {
            Polygon world = t.leaves[k].world_poly();
            for (auto& v : world) {
                if (!in_box(v, window)) continue;
                bool hidden = false;
                for (size_t m = 0; m < k && !hidden; ++m)
                    hidden = bbs[m].contains(v) && t.leaves[m].contains(v);
                if (!hidden) s.corners.push_back({v, t.leaves[k].arr.index});
            }
        }
    }
    return s;
}

// -------------------- evaluation --------------------

double xi_value(const XiState1D& s, const TestFunction1D& f) {
    f.validate();
    auto sp = scaled_pieces(f);
    for (auto& p : sp)
        if (p.lo < -kGeomTol || p.hi > s.ev.length + kGeomTol)
            throw std::invalid_argument("test function support leaves the window");

    double total = 0.0;
    switch (s.mark.kind) {
        case MarkKind::boundary_surface:
            for (auto& p : sp) {
                double cnt = 0.0;
                for (size_t j = 0; j + 1 < s.ev.cells.size(); ++j)
                    if (in_span(s.ev.cells[j].end, p.lo, p.hi)) cnt += 1.0;
                for (auto& pm : s.ev.point_marks)
                    if (in_span(pm.first, p.lo, p.hi)) cnt += 1.0;
                total += p.v * cnt;
            }
            break;
        case MarkKind::colour_lebesgue:
        case MarkKind::density:
            for (auto& p : sp) {
                double mass = 0.0;
                for (auto& c : s.ev.cells) {
                    double w = s.weight.at(c.leaf);
                    if (w == 0.0) continue;
                    double lo = std::max(c.start, p.lo), hi = std::min(c.end, p.hi);
                    if (hi > lo) mass += w * (hi - lo);
                }
                total += p.v * mass;
            }
            break;
        case MarkKind::seeds:
            for (auto& p : sp) {
                double cnt = 0.0;
                for (double x : s.atoms)
                    if (in_span(x, p.lo, p.hi)) cnt += 1.0;
                total += p.v * cnt;
            }
            break;
        case MarkKind::corner_counting:
            throw UnsupportedError("corner marks need polygon leaves");
    }
    return total;
}

double xi_value(const XiState2D& s, const TestFunction2D& f) {
    f.validate();
    auto sp = scaled_pieces(f);
    const Box2& wb = s.ev.window.box;
    for (auto& p : sp)
        if (p.box.lo.x < wb.lo.x - kGeomTol || p.box.lo.y < wb.lo.y - kGeomTol ||
            p.box.hi.x > wb.hi.x + kGeomTol || p.box.hi.y > wb.hi.y + kGeomTol)
            throw std::invalid_argument("test function support leaves the window");

    double total = 0.0;
    switch (s.mark.kind) {
        case MarkKind::boundary_surface:
            for (auto& p : sp) total += p.v * boundary_length_in(s.ev, p.box);
            break;
        case MarkKind::colour_lebesgue:
        case MarkKind::density:
            for (auto& p : sp) {
                std::vector<double> areas = patch_areas(s.ev, p.box);
                double mass = 0.0;
                for (size_t k = 0; k < areas.size(); ++k) {
                    if (areas[k] == 0.0) continue;
                    double w = s.weight.at(s.ev.leaves[k].arr.index);
                    mass += w * areas[k];
                }
                total += p.v * mass;
            }
            break;
        case MarkKind::corner_counting:
            for (auto& p : sp) {
                double cnt = 0.0;
                for (auto& c : s.corners)
                    if (in_box(c.first, p.box)) cnt += 1.0;
                total += p.v * cnt;
            }
            break;
        case MarkKind::seeds:
            for (auto& p : sp) {
                double cnt = 0.0;
                for (auto& x : s.atoms)
                    if (in_box(x, p.box)) cnt += 1.0;
                total += p.v * cnt;
            }
            break;
    }
    return total;
}

XiResult evaluate_xi(double length, const GrainLaw1D& law, const MarkSpec& mark,
                     const TestFunction1D& f, const RngKey& key) {
    f.validate();
    XiState1D s = xi_state_1d(length, law, mark, key);
    return {xi_value(s, f), s.coverage_time, s.arrivals_used};
}

XiResult evaluate_xi(const Box2& window, const GrainLaw2D& law, const MarkSpec& mark,
                     const TestFunction2D& f, const RngKey& key) {
    f.validate();
    XiState2D s = xi_state_2d(window, law, mark, key);
    return {xi_value(s, f), s.coverage_time, s.arrivals_used};
}

// -------------------- forward evolution --------------------

namespace {

void check_grid(const std::vector<double>& grid, double now) {
    for (size_t i = 0; i + 1 < grid.size(); ++i)
        if (grid[i + 1] <= grid[i]) throw std::invalid_argument("evolve_xi: grid must increase");
    if (grid.front() < now) throw std::invalid_argument("evolve_xi: grid starts in the past");
}

void step_1d(XiState1D& s, const Arrival1D& a, RngStream& ms) {
    if (s.mark.kind == MarkKind::seeds) {
        if (ms.bernoulli(s.mark.seed_mix)) {
            for (auto& off : s.mark.seed_offsets) {
                double x = a.pos + off.x;
                if (in_span(x, 0.0, s.ev.length)) s.atoms.push_back(x);
            }
        } else {
            for (auto& part : a.shape.parts) {
                double lo = a.pos + part.first, hi = a.pos + part.second;
                s.atoms.erase(std::remove_if(s.atoms.begin(), s.atoms.end(),
                                             [&](double x) { return x >= lo && x <= hi; }),
                              s.atoms.end());
            }
        }
        return;
    }
    uint32_t id = s.ev.next_leaf;
    if (has_weight(s.mark.kind)) s.weight[id] = weight_draw(ms, s.mark);
    s.ev.insert_leaf(a.shape, a.pos, s.ev.next_leaf++);
}

void step_2d(XiState2D& s, const Arrival2D& a, RngStream& ms) {
    const Box2& win = s.ev.window.box;
    if (s.mark.kind == MarkKind::seeds) {
        if (ms.bernoulli(s.mark.seed_mix)) {
            for (auto& off : s.mark.seed_offsets) {
                Vec2 p = a.pos + off;
                if (in_box(p, win)) s.atoms.push_back(p);
            }
        } else {
            s.atoms.erase(std::remove_if(s.atoms.begin(), s.atoms.end(),
                                         [&](const Vec2& p) {
                                             return shape_contains(a.shape, a.pos, p);
                                         }),
                          s.atoms.end());
        }
        return;
    }
    uint32_t id = s.ev.next_leaf++;
    if (s.mark.kind == MarkKind::corner_counting) {
        s.corners.erase(std::remove_if(s.corners.begin(), s.corners.end(),
                                       [&](const std::pair<Vec2, uint32_t>& c) {
                                           return shape_contains(a.shape, a.pos, c.first);
                                       }),
                        s.corners.end());
        for (auto& v : a.shape.verts) {
            Vec2 p = a.pos + v;
            if (in_box(p, win)) s.corners.push_back({p, id});
        }
        return;
    }
    if (has_weight(s.mark.kind)) s.weight[id] = weight_draw(ms, s.mark);
    double h = s.ev.window.halo;
    Box2 bb{{a.pos.x - h, a.pos.y - h}, {a.pos.x + h, a.pos.y + h}};
    if (bb.overlaps(win)) s.ev.insert_leaf(a.shape, a.pos, id);
}

}  // namespace

TimeSeries evolve_xi(XiState1D& s, const GrainLaw1D& law, const TestFunction1D& f,
                     const RngKey& key, const std::vector<double>& grid) {
    TimeSeries ts;
    f.validate();
    if (grid.empty()) return ts;
    check_grid(grid, s.ev.time);

    Stream1D stream({s.ev.length, s.ev.halo}, law, key, s.ev.time);
    RngStream ms = key.stream(purpose::marks);
    Arrival1D a = stream.next();
    for (double g : grid) {
        while (a.time <= g) {
            step_1d(s, a, ms);
            a = stream.next();
        }
        s.ev.time = g;
        ts.t.push_back(g);
        ts.value.push_back(xi_value(s, f));
    }
    return ts;
}

TimeSeries evolve_xi(XiState2D& s, const GrainLaw2D& law, const TestFunction2D& f,
                     const RngKey& key, const std::vector<double>& grid) {
    TimeSeries ts;
    f.validate();
    if (grid.empty()) return ts;
    check_grid(grid, s.ev.time);

    Stream2D stream(s.ev.window, law, key, s.ev.time);
    RngStream ms = key.stream(purpose::marks);
    Arrival2D a = stream.next();
    for (double g : grid) {
        while (a.time <= g) {
            step_2d(s, a, ms);
            a = stream.next();
        }
        s.ev.time = g;
        ts.t.push_back(g);
        ts.value.push_back(xi_value(s, f));
    }
    return ts;
}

}  // namespace dl
