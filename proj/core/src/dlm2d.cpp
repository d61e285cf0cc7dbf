#include "dl/dlm2d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace dl {

namespace {

constexpr double kTimeCap = 1e6;
constexpr uint32_t kArrivalCap = 400000000u;
constexpr size_t kNodeCap = size_t(1) << 22;

// placed-leaf geometry unpacked once per arrival; the polygon is in world
// coordinates so the pair loop never re-translates
struct Placed {
    Vec2 pos;
    Box2 bb;
    double reach = 0.0;
    bool disk = true;
    Circle circ;
    Polygon poly;
};

Placed make_placed(const Arrival2D& a) {
    Placed p;
    p.pos = a.pos;
    p.disk = a.shape.is_disk();
    p.reach = p.disk ? a.shape.r : a.shape.circumradius;
    p.bb = {{a.pos.x - p.reach, a.pos.y - p.reach}, {a.pos.x + p.reach, a.pos.y + p.reach}};
    if (p.disk)
        p.circ = {a.pos, a.shape.r};
    else
        p.poly = translated(a.shape.verts, a.pos);
    return p;
}

bool placed_contains(const Placed& p, const Vec2& q, double inset) {
    if (p.disk) {
        double rr = p.circ.r - inset;
        return rr > 0.0 && (q - p.circ.c).norm2() <= rr * rr;
    }
    return point_in_convex(q, p.poly, inset);
}

Segment poly_edge(const Polygon& p, size_t e) {
    return {p[e], p[(e + 1) % p.size()]};
}

// remove the part of lb's boundary covered by the (younger) occluder
void occlude(LeafBoundary& lb, const Placed& self, const Placed& occ) {
    if (self.disk) {
        AngleSet cov = occ.disk ? angles_inside_disk(self.circ, occ.circ)
                                : angles_inside_convex(self.circ, occ.poly);
        for (auto& pr : cov.parts()) lb.vis.subtract_arc(pr.first, pr.second - pr.first);
        return;
    }
    for (size_t e = 0; e < lb.edge_vis.size(); ++e) {
        if (lb.edge_vis[e].empty()) continue;
        Segment s = poly_edge(self.poly, e);
        IntervalSet cov = occ.disk ? params_inside_disk(s, occ.circ)
                                   : params_inside_convex(s, occ.poly);
        for (auto& pr : cov.parts()) lb.edge_vis[e].subtract(pr.first, pr.second);
    }
}

void boundary_crossings(const Placed& a, const Placed& b, std::vector<Vec2>& out) {
    Vec2 buf[2];
    if (a.disk && b.disk) {
        int n = circle_circle_points(a.circ, b.circ, buf);
        for (int i = 0; i < n; ++i) out.push_back(buf[i]);
        return;
    }
    if (a.disk != b.disk) {
        const Placed& d = a.disk ? a : b;
        const Placed& g = a.disk ? b : a;
        for (size_t e = 0; e < g.poly.size(); ++e) {
            int n = circle_segment_points(d.circ, poly_edge(g.poly, e), buf);
            for (int i = 0; i < n; ++i) out.push_back(buf[i]);
        }
        return;
    }
    for (size_t i = 0; i < a.poly.size(); ++i) {
        Segment ea = poly_edge(a.poly, i);
        for (size_t j = 0; j < b.poly.size(); ++j) {
            Vec2 q;
            if (segment_segment_point(ea, poly_edge(b.poly, j), q)) out.push_back(q);
        }
    }
}

// outward unit normal of the leaf boundary at a point on it
Vec2 boundary_normal(const Placed& p, const Vec2& q) {
    if (p.disk) {
        Vec2 d = q - p.circ.c;
        double n = d.norm();
        return n > 0.0 ? d * (1.0 / n) : Vec2{1.0, 0.0};
    }
    double best = 1e300;
    Vec2 nrm{1.0, 0.0};
    for (size_t e = 0; e < p.poly.size(); ++e) {
        Segment s = poly_edge(p.poly, e);
        Vec2 d = s.b - s.a;
        double len2 = d.norm2();
        if (len2 <= 0.0) continue;
        double t = std::clamp((q - s.a).dot(d) / len2, 0.0, 1.0);
        double dist = (q - s.at(t)).norm();
        if (dist < best) {
            best = dist;
            nrm = Vec2{d.y, -d.x} * (1.0 / std::sqrt(len2));
        }
    }
    return nrm;
}

// -------------------- spatial hash --------------------

struct HashGrid {
    Box2 dom;
    double cs = 1.0;
    int nx = 1, ny = 1;
    std::vector<std::vector<uint32_t>> bins;

    HashGrid(const Box2& d, double cell) : dom(d) {
        cs = std::max(cell, 1e-9);
        nx = std::max(1, (int)std::ceil(dom.width() / cs));
        ny = std::max(1, (int)std::ceil(dom.height() / cs));
        bins.assign((size_t)nx * (size_t)ny, {});
    }
    int ix(double x) const { return std::clamp((int)std::floor((x - dom.lo.x) / cs), 0, nx - 1); }
    int iy(double y) const { return std::clamp((int)std::floor((y - dom.lo.y) / cs), 0, ny - 1); }

    void insert(uint32_t id, const Box2& bb) {
        int x0 = ix(bb.lo.x), x1 = ix(bb.hi.x), y0 = iy(bb.lo.y), y1 = iy(bb.hi.y);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) bins[(size_t)y * nx + x].push_back(id);
    }
    void query(const Box2& bb, std::vector<uint32_t>& out) const {
        out.clear();
        int x0 = ix(bb.lo.x), x1 = ix(bb.hi.x), y0 = iy(bb.lo.y), y1 = iy(bb.hi.y);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const auto& b = bins[(size_t)y * nx + x];
                out.insert(out.end(), b.begin(), b.end());
            }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
};

// is the candidate crossing hidden by some younger leaf other than its owners?
bool point_hidden(const Vec2& p, uint32_t skip, const std::vector<Placed>& placed,
                  const HashGrid& hash, std::vector<uint32_t>& scratch) {
    hash.query({p, p}, scratch);
    for (uint32_t m : scratch) {
        if (m == skip) continue;
        if (placed_contains(placed[m], p, kGeomTol)) return true;
    }
    return false;
}

void merge_close_points(std::vector<BranchPoint>& v) {
    std::sort(v.begin(), v.end(), [](const BranchPoint& a, const BranchPoint& b) {
        if (a.pos.x != b.pos.x) return a.pos.x < b.pos.x;
        if (a.pos.y != b.pos.y) return a.pos.y < b.pos.y;
        return a.over < b.over;
    });
    std::vector<BranchPoint> kept;
    kept.reserve(v.size());
    for (const auto& b : v) {
        bool dup = false;
        for (auto it = kept.rbegin(); it != kept.rend() && b.pos.x - it->pos.x <= kGeomTol; ++it)
            if (std::fabs(b.pos.y - it->pos.y) <= kGeomTol) {
                dup = true;
                break;
            }
        if (!dup) kept.push_back(b);
    }
    v.swap(kept);
}

// visible set clipped to a convex region, reported as arcs
template <class Emit>
void clipped_pieces(const LeafBoundary& lb, uint32_t slot, const Polygon& clip, Emit&& emit) {
    if (lb.is_disk()) {
        Circle c = lb.circle();
        AngleSet w = lb.vis;
        w.intersect(angles_inside_convex(c, clip));
        for (auto& pr : w.parts()) {
            if ((pr.second - pr.first) * c.r <= kParamTol) continue;
            BoundaryArc a;
            a.leaf = slot;
            a.circular = true;
            a.center = c.c;
            a.radius = c.r;
            a.th0 = pr.first;
            a.th1 = pr.second;
            emit(a);
        }
        return;
    }
    Polygon wp = lb.world_poly();
    for (size_t e = 0; e < lb.edge_vis.size(); ++e) {
        if (lb.edge_vis[e].empty()) continue;
        Segment s = poly_edge(wp, e);
        double len = s.length();
        IntervalSet w = lb.edge_vis[e];
        w.intersect(params_inside_convex(s, clip));
        for (auto& pr : w.parts()) {
            if ((pr.second - pr.first) * len <= kParamTol) continue;
            BoundaryArc a;
            a.leaf = slot;
            a.circular = false;
            a.p = s.at(pr.first);
            a.q = s.at(pr.second);
            emit(a);
        }
    }
}

}  // namespace

// -------------------- small struct methods --------------------

Vec2 BoundaryArc::at(double s) const {
    if (!circular) return p + (q - p) * s;
    double th = th0 + s * (th1 - th0);
    return {center.x + radius * std::cos(th), center.y + radius * std::sin(th)};
}

Polygon LeafBoundary::world_poly() const { return translated(arr.shape.verts, arr.pos); }

double LeafBoundary::reach() const {
    return is_disk() ? arr.shape.r : arr.shape.circumradius;
}

Box2 LeafBoundary::bbox() const {
    double r = reach();
    return {{arr.pos.x - r, arr.pos.y - r}, {arr.pos.x + r, arr.pos.y + r}};
}

bool LeafBoundary::contains(const Vec2& p, double inset) const {
    if (is_disk()) {
        double rr = arr.shape.r - inset;
        return rr > 0.0 && (p - arr.pos).norm2() <= rr * rr;
    }
    return point_in_convex(p - arr.pos, arr.shape.verts, inset);
}

double LeafBoundary::visible_length() const {
    if (is_disk()) return vis.measure() * arr.shape.r;
    double total = 0.0;
    for (size_t e = 0; e < edge_vis.size(); ++e) {
        size_t n = arr.shape.verts.size();
        total += edge_vis[e].measure() * (arr.shape.verts[(e + 1) % n] - arr.shape.verts[e]).norm();
    }
    return total;
}

// -------------------- coverage grid --------------------

namespace {

bool shape_contains_box(const GrainLaw2D::Shape& shape, const Vec2& pos, const Box2& b) {
    Vec2 corner[4] = {b.lo, {b.hi.x, b.lo.y}, b.hi, {b.lo.x, b.hi.y}};
    if (shape.is_disk()) {
        double r2 = shape.r * shape.r;
        for (auto& c : corner)
            if ((c - pos).norm2() > r2) return false;
        return true;
    }
    for (auto& c : corner)
        if (!point_in_convex(c - pos, shape.verts)) return false;
    return true;
}

// true when the grain footprint meets the box at all; keeps the quadtree
// from splitting along the bounding box instead of the real boundary
bool shape_meets_box(const GrainLaw2D::Shape& shape, const Vec2& pos, const Box2& b) {
    if (shape.is_disk()) {
        Vec2 q{std::clamp(pos.x, b.lo.x, b.hi.x), std::clamp(pos.y, b.lo.y, b.hi.y)};
        return (q - pos).norm2() <= shape.r * shape.r;
    }
    size_t n = shape.verts.size();
    for (size_t i = 0; i < n; ++i)
        if (b.contains(shape.verts[i] + pos)) return true;
    Vec2 corner[4] = {b.lo, {b.hi.x, b.lo.y}, b.hi, {b.lo.x, b.hi.y}};
    for (auto& c : corner)
        if (point_in_convex(c - pos, shape.verts)) return true;
    Segment edges[4] = {{corner[0], corner[1]}, {corner[1], corner[2]},
                        {corner[2], corner[3]}, {corner[3], corner[0]}};
    Vec2 dummy;
    for (size_t i = 0; i < n; ++i) {
        Segment s{shape.verts[i] + pos, shape.verts[(i + 1) % n] + pos};
        for (auto& e : edges)
            if (segment_segment_point(s, e, dummy)) return true;
    }
    return false;
}

double box_diag(const Box2& b) { return std::hypot(b.width(), b.height()); }

}  // namespace

CoverageGrid2D::CoverageGrid2D(const Box2& window, double grain_reach) {
    if (!(window.width() > 0.0) || !(window.height() > 0.0))
        throw std::invalid_argument("coverage grid: window must have positive area");
    if (!(grain_reach > 0.0))
        throw std::invalid_argument("coverage grid: grain reach must be positive");
    double thresh = 1e-4 * std::max(window.width(), window.height());
    double diag = box_diag(window);
    floor_diag_ = diag;
    while (floor_diag_ >= thresh) floor_diag_ *= 0.5;
    if (2.0 * grain_reach < floor_diag_)
        throw CoverageError(
            "coverage grid: grains are smaller than the resolution floor and can never cover a cell");
    thresh_ = thresh;
    nodes_.push_back({window, -1, false});
    open_ = 1;
}

void CoverageGrid2D::descend(int32_t idx, const GrainLaw2D::Shape& shape, const Vec2& pos,
                             const Box2& bb) {
    if (nodes_[idx].done) return;
    if (!nodes_[idx].box.overlaps(bb)) return;
    if (nodes_[idx].child >= 0) {
        int32_t c = nodes_[idx].child;
        for (int k = 0; k < 4; ++k) descend(c + k, shape, pos, bb);
        return;
    }
    if (shape_contains_box(shape, pos, nodes_[idx].box)) {
        nodes_[idx].done = true;
        --open_;
        return;
    }
    if (!shape_meets_box(shape, pos, nodes_[idx].box)) return;  // misses this node
    if (box_diag(nodes_[idx].box) < thresh_) return;  // floor cell: wait for a bigger leaf
    if (nodes_.size() + 4 > kNodeCap)
        throw CoverageError("coverage grid: node budget exhausted before the window was covered");
    // split one level only; finer resolution comes from later arrivals, so a
    // single grain never fragments the tree along its whole boundary
    Box2 b = nodes_[idx].box;
    Vec2 mid{0.5 * (b.lo.x + b.hi.x), 0.5 * (b.lo.y + b.hi.y)};
    int32_t first = (int32_t)nodes_.size();
    nodes_[idx].child = first;
    nodes_.push_back({{b.lo, mid}, -1, false});
    nodes_.push_back({{{mid.x, b.lo.y}, {b.hi.x, mid.y}}, -1, false});
    nodes_.push_back({{{b.lo.x, mid.y}, {mid.x, b.hi.y}}, -1, false});
    nodes_.push_back({{mid, b.hi}, -1, false});
    open_ += 3;  // one open leaf became four
    for (int k = 0; k < 4; ++k)
        if (shape_contains_box(shape, pos, nodes_[first + k].box)) {
            nodes_[first + k].done = true;
            --open_;
        }
}

bool CoverageGrid2D::add(const GrainLaw2D::Shape& shape, const Vec2& pos) {
    double reach = shape.is_disk() ? shape.r : shape.circumradius;
    Box2 bb{{pos.x - reach, pos.y - reach}, {pos.x + reach, pos.y + reach}};
    descend(0, shape, pos, bb);
    return covered();
}

CoverageResult coverage_stop_2d(const Box2& window, const GrainLaw2D& law, const RngKey& key) {
    double halo = law.radius_bound();
    Window2D win{window, halo};
    Stream2D stream(win, law, key);
    CoverageGrid2D grid(window, halo);
    for (;;) {
        Arrival2D a = stream.next();
        if (a.time > kTimeCap || a.index >= kArrivalCap)
            throw CoverageError("coverage_stop_2d: window not covered before caps");
        Box2 bb{{a.pos.x - halo, a.pos.y - halo}, {a.pos.x + halo, a.pos.y + halo}};
        if (!bb.overlaps(window)) continue;
        if (grid.add(a.shape, a.pos)) return {a.time, a.index + 1};
    }
}

// -------------------- simulation --------------------

PlanarTessellation simulate2d(const Box2& window, const GrainLaw2D& law, const RngKey& key) {
    if (!(window.width() > 0.0) || !(window.height() > 0.0))
        throw std::invalid_argument("simulate2d: window must have positive area");
    double halo = law.radius_bound();
    if (!(halo > 0.0)) throw std::invalid_argument("simulate2d: grain law has zero reach");

    PlanarTessellation out;
    out.window = window;
    out.halo = halo;

    Window2D win{window, halo};
    Stream2D stream(win, law, key);
    CoverageGrid2D grid(window, halo);
    HashGrid hash(win.expanded(),
                  std::max(2.0 * halo, std::max(window.width(), window.height()) / 256.0));

    std::vector<Placed> placed;
    std::vector<uint32_t> nbr, occq;
    std::vector<Vec2> pts;

    bool covered = false;
    while (!covered) {
        Arrival2D a = stream.next();
        if (a.time > kTimeCap || a.index >= kArrivalCap)
            throw CoverageError("simulate2d: window not covered before caps");
        out.arrivals_used = a.index + 1;
        out.coverage_time = a.time;

        Placed pl = make_placed(a);
        if (!pl.bb.overlaps(window)) continue;  // halo leaf that cannot touch the window
        covered = grid.add(a.shape, a.pos);

        uint32_t slot = (uint32_t)out.leaves.size();
        LeafBoundary lb;
        lb.arr = std::move(a);
        if (pl.disk)
            lb.vis = AngleSet::full();
        else
            lb.edge_vis.assign(pl.poly.size(), IntervalSet::full(0.0, 1.0));

        hash.query(pl.bb, nbr);
        for (uint32_t k : nbr) {
            const Placed& pk = placed[k];
            double rr = pk.reach + pl.reach;
            if ((pk.pos - pl.pos).norm2() > rr * rr) continue;
            occlude(lb, pl, pk);
            pts.clear();
            boundary_crossings(pk, pl, pts);
            for (const Vec2& p : pts) {
                if (!window.contains(p)) continue;
                if (point_hidden(p, k, placed, hash, occq)) continue;
                out.branch_points.push_back({p, k, slot, kNoLeaf});
            }
        }

        out.leaves.push_back(std::move(lb));
        placed.push_back(std::move(pl));
        hash.insert(slot, placed[slot].bb);
    }

    merge_close_points(out.branch_points);

    // resolve the third cell at each branch point with a probe nudged into
    // the sector not covered by either boundary owner
    for (auto& bp : out.branch_points) {
        Vec2 d = boundary_normal(placed[bp.over], bp.pos) + boundary_normal(placed[bp.under], bp.pos);
        double dn = d.norm();
        if (dn < 1e-6) continue;  // near-tangential crossing, leave unresolved
        double eps = 1e-7 * std::min(placed[bp.over].reach, placed[bp.under].reach);
        Vec2 probe = bp.pos + d * (eps / dn);
        hash.query({probe, probe}, occq);
        for (uint32_t m : occq) {
            if (m == bp.over || m == bp.under) continue;
            if (placed_contains(placed[m], probe, 0.0)) {
                bp.third = m;
                break;  // query is index-sorted, so the first hit is the youngest
            }
        }
    }

    Polygon win_poly = box_polygon(window);
    for (uint32_t i = 0; i < out.leaves.size(); ++i)
        clipped_pieces(out.leaves[i], i, win_poly, [&](const BoundaryArc& a) {
            out.total_boundary_length += a.length();
            out.arcs.push_back(a);
        });
    return out;
}

// -------------------- re-clipping --------------------

double boundary_length_in(const PlanarTessellation& t, const Box2& box) {
    Box2 b{{std::max(box.lo.x, t.window.lo.x), std::max(box.lo.y, t.window.lo.y)},
           {std::min(box.hi.x, t.window.hi.x), std::min(box.hi.y, t.window.hi.y)}};
    if (!(b.width() > 0.0) || !(b.height() > 0.0)) return 0.0;
    Polygon clip = box_polygon(b);
    double total = 0.0;
    for (uint32_t i = 0; i < t.leaves.size(); ++i) {
        if (!t.leaves[i].bbox().overlaps(b)) continue;
        clipped_pieces(t.leaves[i], i, clip, [&](const BoundaryArc& a) { total += a.length(); });
    }
    return total;
}

// -------------------- patch areas --------------------

// Green's theorem over each visible patch, assembled from three kinds of
// contour piece: the leaf's own visible boundary (ccw), the covering leaves'
// boundary parts it backs onto (their ccw pieces entered with a minus), and
// the box edge parts it claims. The covering-leaf pieces are found by
// replaying the top-first sweep: each leaf's boundary set starts as its
// stored visible set and loses the footprint of every leaf beneath it.
// `order` lists leaf slots from the top of the cover stack downward.
static std::vector<double> patch_areas_core(const std::vector<LeafBoundary>& leaves,
                                            const std::vector<uint32_t>& order, double halo,
                                            const Box2& box) {
    size_t n = leaves.size();
    std::vector<double> area(n, 0.0);
    Polygon clip = box_polygon(box);

    std::vector<Placed> placed(n);
    for (size_t i = 0; i < n; ++i) placed[i] = make_placed(leaves[i].arr);

    // running boundary sets, and each leaf's boundary-in-box clip set
    std::vector<AngleSet> run_a(n);
    std::vector<std::vector<IntervalSet>> run_e(n);
    std::vector<AngleSet> clip_a(n);
    std::vector<std::vector<IntervalSet>> clip_e(n);
    for (size_t i = 0; i < n; ++i) {
        if (leaves[i].is_disk()) {
            run_a[i] = leaves[i].vis;
            clip_a[i] = angles_inside_convex(placed[i].circ, clip);
        } else {
            run_e[i] = leaves[i].edge_vis;
            clip_e[i].resize(placed[i].poly.size());
            for (size_t e = 0; e < placed[i].poly.size(); ++e)
                clip_e[i][e] = params_inside_convex(poly_edge(placed[i].poly, e), clip);
        }
    }

    Box2 dom = Box2{box.lo, box.hi}.expanded(halo);
    HashGrid hash(dom, std::max(2.0 * halo, std::max(box.width(), box.height()) / 256.0));

    Segment box_edge[4] = {{clip[0], clip[1]}, {clip[1], clip[2]}, {clip[2], clip[3]}, {clip[3], clip[0]}};
    IntervalSet unclaimed[4] = {IntervalSet::full(0.0, 1.0), IntervalSet::full(0.0, 1.0),
                                IntervalSet::full(0.0, 1.0), IntervalSet::full(0.0, 1.0)};

    std::vector<uint32_t> nbr;
    for (uint32_t i : order) {
        const Placed& pi = placed[i];
        if (!pi.bb.overlaps(box)) continue;  // cannot border anything inside the box

        // box edge parts claimed by this leaf (youngest claimant wins)
        for (int e = 0; e < 4; ++e) {
            if (unclaimed[e].empty()) continue;
            IntervalSet cov = pi.disk ? params_inside_disk(box_edge[e], pi.circ)
                                      : params_inside_convex(box_edge[e], pi.poly);
            if (cov.empty()) continue;
            IntervalSet got = unclaimed[e];
            got.intersect(cov);
            for (auto& pr : got.parts()) {
                area[i] += green_seg(box_edge[e].at(pr.first), box_edge[e].at(pr.second));
                unclaimed[e].subtract(pr.first, pr.second);
            }
        }

        // borders backing onto every younger leaf this one slides under
        hash.query(pi.bb, nbr);
        for (uint32_t k : nbr) {
            const Placed& pk = placed[k];
            double rr = pk.reach + pi.reach;
            if ((pk.pos - pi.pos).norm2() > rr * rr) continue;
            if (pk.disk) {
                AngleSet fp = pi.disk ? angles_inside_disk(pk.circ, pi.circ)
                                      : angles_inside_convex(pk.circ, pi.poly);
                if (fp.empty()) continue;
                AngleSet piece = run_a[k];
                piece.intersect(fp);
                for (auto& pr : piece.parts()) run_a[k].subtract_arc(pr.first, pr.second - pr.first);
                piece.intersect(clip_a[k]);
                for (auto& pr : piece.parts()) area[i] -= green_arc(pk.circ, pr.first, pr.second);
            } else {
                for (size_t e = 0; e < pk.poly.size(); ++e) {
                    if (run_e[k][e].empty()) continue;
                    Segment s = poly_edge(pk.poly, e);
                    IntervalSet fp = pi.disk ? params_inside_disk(s, pi.circ)
                                             : params_inside_convex(s, pi.poly);
                    if (fp.empty()) continue;
                    IntervalSet piece = run_e[k][e];
                    piece.intersect(fp);
                    for (auto& pr : piece.parts()) run_e[k][e].subtract(pr.first, pr.second);
                    piece.intersect(clip_e[k][e]);
                    for (auto& pr : piece.parts())
                        area[i] -= green_seg(s.at(pr.first), s.at(pr.second));
                }
            }
        }

        // own visible boundary, clipped to the box
        if (pi.disk) {
            AngleSet own = leaves[i].vis;
            own.intersect(clip_a[i]);
            for (auto& pr : own.parts()) area[i] += green_arc(pi.circ, pr.first, pr.second);
        } else {
            for (size_t e = 0; e < pi.poly.size(); ++e) {
                IntervalSet own = leaves[i].edge_vis[e];
                own.intersect(clip_e[i][e]);
                Segment s = poly_edge(pi.poly, e);
                for (auto& pr : own.parts()) area[i] += green_seg(s.at(pr.first), s.at(pr.second));
            }
        }

        hash.insert(i, pi.bb);
    }
    return area;
}

static void require_inside(const Box2& box, const Box2& win) {
    if (box.lo.x < win.lo.x - kGeomTol || box.lo.y < win.lo.y - kGeomTol ||
        box.hi.x > win.hi.x + kGeomTol || box.hi.y > win.hi.y + kGeomTol)
        throw std::invalid_argument("patch_areas: box must sit inside the window");
}

std::vector<double> patch_areas(const PlanarTessellation& t, const Box2& box) {
    require_inside(box, t.window);
    std::vector<uint32_t> order(t.leaves.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    return patch_areas_core(t.leaves, order, t.halo, box);
}

std::vector<double> patch_areas(const EvolvingState2D& s, const Box2& box) {
    require_inside(box, s.window.box);
    std::vector<uint32_t> order;
    order.reserve(s.leaves.size());
    for (uint32_t i = (uint32_t)s.leaves.size(); i > s.initial_count; --i) order.push_back(i - 1);
    for (uint32_t i = 0; i < s.initial_count; ++i) order.push_back(i);
    return patch_areas_core(s.leaves, order, s.window.halo, box);
}

// -------------------- cell counting --------------------

namespace {

// youngest-leaf point location over the stored leaves, bucketed on a coarse grid
struct LeafGrid {
    const std::vector<LeafBoundary>& leaves;
    Box2 win;
    int nx, ny;
    double cw, ch;
    std::vector<std::vector<int32_t>> buckets;  // ascending index = youngest first

    LeafGrid(const Box2& w, const std::vector<LeafBoundary>& lv) : leaves(lv), win(w) {
        nx = std::clamp((int)std::ceil(w.width()), 8, 512);
        ny = std::clamp((int)std::ceil(w.height()), 8, 512);
        cw = w.width() / nx;
        ch = w.height() / ny;
        buckets.resize((size_t)nx * ny);
        for (size_t k = 0; k < lv.size(); ++k) {
            Box2 bb = lv[k].bbox();
            int x0 = std::clamp((int)((bb.lo.x - w.lo.x) / cw), 0, nx - 1);
            int x1 = std::clamp((int)((bb.hi.x - w.lo.x) / cw), 0, nx - 1);
            int y0 = std::clamp((int)((bb.lo.y - w.lo.y) / ch), 0, ny - 1);
            int y1 = std::clamp((int)((bb.hi.y - w.lo.y) / ch), 0, ny - 1);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) buckets[(size_t)y * nx + x].push_back((int32_t)k);
        }
    }

    int32_t owner_at(const Vec2& p) const {
        int x = std::clamp((int)((p.x - win.lo.x) / cw), 0, nx - 1);
        int y = std::clamp((int)((p.y - win.lo.y) / ch), 0, ny - 1);
        for (int32_t k : buckets[(size_t)y * nx + x])
            if (leaves[(size_t)k].contains(p)) return k;
        return -1;
    }
};

}  // namespace

long count_cells(PlanarTessellation& t, int resolution, double margin) {
    if (resolution < 16) throw std::invalid_argument("count_cells: resolution too small");
    double w = t.window.width(), h = t.window.height();
    if (!(margin >= 0.0) || 2.0 * margin >= w || 2.0 * margin >= h)
        throw std::invalid_argument("count_cells: margin leaves no core window");
    int n = resolution;
    double pw = w / n, ph = h / n;

    // owner of each pixel: the youngest stored leaf covering its center.
    // Leaves are stored youngest first, so the first hit wins.
    std::vector<int32_t> owner((size_t)n * n, -1);
    size_t unowned = owner.size();
    for (size_t k = 0; k < t.leaves.size() && unowned > 0; ++k) {
        const LeafBoundary& lf = t.leaves[k];
        Box2 bb = lf.bbox();
        int x0 = std::clamp((int)std::floor((bb.lo.x - t.window.lo.x) / pw), 0, n - 1);
        int x1 = std::clamp((int)std::ceil((bb.hi.x - t.window.lo.x) / pw), 0, n - 1);
        int y0 = std::clamp((int)std::floor((bb.lo.y - t.window.lo.y) / ph), 0, n - 1);
        int y1 = std::clamp((int)std::ceil((bb.hi.y - t.window.lo.y) / ph), 0, n - 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                size_t id = (size_t)y * n + x;
                if (owner[id] >= 0) continue;
                Vec2 c{t.window.lo.x + (x + 0.5) * pw, t.window.lo.y + (y + 0.5) * ph};
                if (lf.contains(c)) {
                    owner[id] = (int32_t)k;
                    --unowned;
                }
            }
    }

    // pixel range whose centers sit at least `margin` inside the window
    int cx0 = std::max(0, (int)std::ceil(margin / pw - 0.5));
    int cx1 = std::min(n - 1, (int)std::floor((w - margin) / pw - 0.5));
    int cy0 = std::max(0, (int)std::ceil(margin / ph - 0.5));
    int cy1 = std::min(n - 1, (int)std::floor((h - margin) / ph - 0.5));

    // flood same-owner components, 8-connected so thin diagonal slivers stay
    // in one piece; the row-major scan makes each seed the lexicographically
    // lowest pixel of its component
    std::vector<int32_t> comp((size_t)n * n, -1);
    std::vector<int32_t> parent;    // union-find over components
    std::vector<int32_t> min_seed;  // lowest pixel of the merged component
    std::vector<int32_t> stack;
    for (int y0 = 0; y0 < n; ++y0)
        for (int x0 = 0; x0 < n; ++x0) {
            size_t seed = (size_t)y0 * n + x0;
            if (comp[seed] >= 0) continue;
            int32_t own = owner[seed];
            int32_t c = (int32_t)parent.size();
            parent.push_back(c);
            min_seed.push_back((int32_t)seed);
            comp[seed] = c;
            stack.assign(1, (int32_t)seed);
            while (!stack.empty()) {
                int32_t cur = stack.back();
                stack.pop_back();
                int x = cur % n, y = cur / n;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int xx = x + dx, yy = y + dy;
                        if (xx < 0 || yy < 0 || xx >= n || yy >= n) continue;
                        size_t id = (size_t)yy * n + xx;
                        if (comp[id] >= 0 || owner[id] != own) continue;
                        comp[id] = c;
                        stack.push_back((int32_t)id);
                    }
            }
        }

    auto find = [&](int32_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };

    // a cell thinner than a pixel over a long stretch (the tapered tail where
    // two boundaries cross at a shallow angle) leaves a broken chain of
    // pixels. Rejoin two nearby same-owner components only when the segment
    // between their pixel centres provably stays inside that leaf's visible
    // patch, checked by point queries against the younger leaves.
    LeafGrid index(t.window, t.leaves);
    auto visible_along = [&](Vec2 a, Vec2 b, int32_t own) {
        double len = (b - a).norm();
        int steps = std::max(2, (int)std::ceil(len / (0.05 * std::min(pw, ph))));
        for (int s = 1; s < steps; ++s) {
            Vec2 q = a + (b - a) * ((double)s / steps);
            if (index.owner_at(q) != own) return false;
        }
        return true;
    };
    const int reach = 2;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            size_t p = (size_t)y * n + x;
            int32_t own = owner[p];
            if (own < 0) continue;
            for (int dy = 0; dy <= reach; ++dy)
                for (int dx = dy == 0 ? 2 : -reach; dx <= reach; ++dx) {
                    if (dy <= 1 && dx >= -1 && dx <= 1) continue;  // flood handled those
                    int xx = x + dx, yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= n || yy >= n) continue;
                    size_t q = (size_t)yy * n + xx;
                    if (owner[q] != own) continue;
                    int32_t a = find(comp[p]), b = find(comp[q]);
                    if (a == b) continue;
                    Vec2 pa{t.window.lo.x + (x + 0.5) * pw, t.window.lo.y + (y + 0.5) * ph};
                    Vec2 pb{t.window.lo.x + (xx + 0.5) * pw, t.window.lo.y + (yy + 0.5) * ph};
                    if (!visible_along(pa, pb, own)) continue;
                    parent[b] = a;
                    min_seed[a] = std::min(min_seed[a], min_seed[b]);
                }
        }

    // a cell whose lowest pixel lies in the core cannot leave the window once
    // the margin exceeds the grain diameter, so counting merged components
    // with their seed in the core is free of edge bias
    long cells = 0;
    for (size_t c = 0; c < parent.size(); ++c) {
        if (find((int32_t)c) != (int32_t)c) continue;
        int32_t seed = min_seed[c];
        if (owner[(size_t)seed] < 0) continue;
        int sx = seed % n, sy = seed / n;
        if (sx >= cx0 && sx <= cx1 && sy >= cy0 && sy <= cy1) ++cells;
    }
    t.cell_count_interior = cells;
    return cells;
}

long euler_cell_estimate(const PlanarTessellation& t) {
    return (long)((t.branch_points.size() + 1) / 2);
}

// -------------------- connectivity --------------------

namespace {

struct DSU {
    std::vector<int> p;
    explicit DSU(size_t n) : p(n) {
        for (size_t i = 0; i < n; ++i) p[i] = (int)i;
    }
    int find(int a) {
        while (p[a] != a) a = p[a] = p[p[a]];
        return a;
    }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

struct ClipPiece {
    uint32_t leaf;
    bool circular;
    double a0, a1;  // angles, or edge params
    int edge;
    Vec2 p0, p1;
};

bool near_box_edge(const Vec2& p, const Box2& b, double eps) {
    return std::fabs(p.x - b.lo.x) < eps || std::fabs(p.x - b.hi.x) < eps ||
           std::fabs(p.y - b.lo.y) < eps || std::fabs(p.y - b.hi.y) < eps;
}

}  // namespace

ConnectivityReport connectivity_diagnostic(const PlanarTessellation& t) {
    Box2 er = t.window.shrunk(t.halo);
    if (!(er.width() > 0.0) || !(er.height() > 0.0)) return {};
    Polygon clip = box_polygon(er);

    std::vector<ClipPiece> pieces;
    std::vector<std::vector<int>> by_leaf(t.leaves.size());
    for (uint32_t i = 0; i < t.leaves.size(); ++i) {
        const LeafBoundary& lb = t.leaves[i];
        if (!lb.bbox().overlaps(er)) continue;
        if (lb.is_disk()) {
            Circle c = lb.circle();
            AngleSet w = lb.vis;
            w.intersect(angles_inside_convex(c, clip));
            for (auto& pr : w.parts()) {
                if ((pr.second - pr.first) * c.r <= kParamTol) continue;
                ClipPiece cp{i, true, pr.first, pr.second, -1, {}, {}};
                cp.p0 = {c.c.x + c.r * std::cos(pr.first), c.c.y + c.r * std::sin(pr.first)};
                cp.p1 = {c.c.x + c.r * std::cos(pr.second), c.c.y + c.r * std::sin(pr.second)};
                by_leaf[i].push_back((int)pieces.size());
                pieces.push_back(cp);
            }
        } else {
            Polygon wp = lb.world_poly();
            for (size_t e = 0; e < lb.edge_vis.size(); ++e) {
                if (lb.edge_vis[e].empty()) continue;
                Segment s = poly_edge(wp, e);
                IntervalSet w = lb.edge_vis[e];
                w.intersect(params_inside_convex(s, clip));
                for (auto& pr : w.parts()) {
                    if ((pr.second - pr.first) * s.length() <= kParamTol) continue;
                    ClipPiece cp{i, false, pr.first, pr.second, (int)e, s.at(pr.first), s.at(pr.second)};
                    by_leaf[i].push_back((int)pieces.size());
                    pieces.push_back(cp);
                }
            }
        }
    }
    if (pieces.empty()) return {};

    DSU dsu(pieces.size());

    // a boundary that wraps the angle seam or runs through a polygon corner
    // is one curve even though the sets store it in parts
    for (const auto& ids : by_leaf) {
        for (size_t a = 0; a < ids.size(); ++a)
            for (size_t b = a + 1; b < ids.size(); ++b) {
                const ClipPiece &x = pieces[ids[a]], &y = pieces[ids[b]];
                if ((x.p1 - y.p0).norm() <= 1e-7 || (y.p1 - x.p0).norm() <= 1e-7 ||
                    (x.p0 - y.p0).norm() <= 1e-7 || (x.p1 - y.p1).norm() <= 1e-7)
                    dsu.unite(ids[a], ids[b]);
            }
    }

    // glue the two boundary owners at each surviving crossing
    auto on_piece = [&](const ClipPiece& cp, const Vec2& q) {
        if (cp.circular) {
            const LeafBoundary& lb = t.leaves[cp.leaf];
            double th = std::atan2(q.y - lb.arr.pos.y, q.x - lb.arr.pos.x);
            double tol = 1e-6 / std::max(lb.arr.shape.r, 1e-9);
            for (double cand : {th, th - 2.0 * kPi, th + 2.0 * kPi})
                if (cand >= cp.a0 - tol && cand <= cp.a1 + tol) return true;
            return false;
        }
        Segment s{cp.p0, cp.p1};
        Vec2 d = s.b - s.a;
        double len2 = d.norm2();
        if (len2 <= 0.0) return false;
        double u = std::clamp((q - s.a).dot(d) / len2, 0.0, 1.0);
        return (q - s.at(u)).norm() <= 1e-7;
    };
    for (const auto& bp : t.branch_points) {
        if (!er.contains(bp.pos, kGeomTol)) continue;
        int anchor = -1;
        for (uint32_t leaf : {bp.over, bp.under}) {
            if (leaf >= by_leaf.size()) continue;
            for (int id : by_leaf[leaf])
                if (on_piece(pieces[id], bp.pos)) {
                    if (anchor < 0)
                        anchor = id;
                    else
                        dsu.unite(anchor, id);
                }
        }
    }

    double eps = 1e-7 * std::max(1.0, std::max(er.width(), er.height()));
    std::vector<int> root(pieces.size());
    std::vector<char> touch;
    for (size_t i = 0; i < pieces.size(); ++i) root[i] = dsu.find((int)i);
    std::vector<int> uniq = root;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    touch.assign(uniq.size(), 0);
    auto comp_of = [&](int r) {
        return (int)(std::lower_bound(uniq.begin(), uniq.end(), r) - uniq.begin());
    };
    for (size_t i = 0; i < pieces.size(); ++i) {
        const ClipPiece& cp = pieces[i];
        bool full_loop = cp.circular && cp.a1 - cp.a0 >= 2.0 * kPi - 1e-12;
        if (!full_loop && (near_box_edge(cp.p0, er, eps) || near_box_edge(cp.p1, er, eps)))
            touch[comp_of(root[i])] = 1;
    }

    ConnectivityReport rep;
    rep.components = (int)uniq.size();
    for (char c : touch)
        if (!c) ++rep.isolated_interior;
    return rep;
}

// -------------------- forward evolution --------------------

void EvolvingState2D::insert_leaf(const GrainLaw2D::Shape& shape, const Vec2& pos, uint32_t idx) {
    Arrival2D a;
    a.pos = pos;
    a.time = time;
    a.shape = shape;
    a.index = idx;
    Placed pn = make_placed(a);
    for (auto& lb : leaves) {
        Box2 bb = lb.bbox();
        if (!bb.overlaps(pn.bb)) continue;
        double rr = lb.reach() + pn.reach;
        if ((lb.arr.pos - pn.pos).norm2() > rr * rr) continue;
        Placed self = make_placed(lb.arr);
        occlude(lb, self, pn);
    }
    LeafBoundary lb;
    lb.arr = std::move(a);
    if (pn.disk)
        lb.vis = AngleSet::full();
    else
        lb.edge_vis.assign(pn.poly.size(), IntervalSet::full(0.0, 1.0));
    leaves.push_back(std::move(lb));
}

double EvolvingState2D::boundary_length() const {
    Polygon clip = box_polygon(window.box);
    double total = 0.0;
    for (uint32_t i = 0; i < leaves.size(); ++i) {
        if (!leaves[i].bbox().overlaps(window.box)) continue;
        clipped_pieces(leaves[i], i, clip, [&](const BoundaryArc& a) { total += a.length(); });
    }
    return total;
}

EvolvingState2D evolving_from(const PlanarTessellation& t) {
    EvolvingState2D s;
    s.window = {t.window, t.halo};
    s.time = 0.0;
    s.next_leaf = t.arrivals_used;
    s.initial_count = (uint32_t)t.leaves.size();
    s.leaves = t.leaves;
    return s;
}

double boundary_length_in(const EvolvingState2D& s, const Box2& box) {
    Box2 b{{std::max(box.lo.x, s.window.box.lo.x), std::max(box.lo.y, s.window.box.lo.y)},
           {std::min(box.hi.x, s.window.box.hi.x), std::min(box.hi.y, s.window.box.hi.y)}};
    if (!(b.width() > 0.0) || !(b.height() > 0.0)) return 0.0;
    Polygon clip = box_polygon(b);
    double total = 0.0;
    for (uint32_t i = 0; i < s.leaves.size(); ++i) {
        if (!s.leaves[i].bbox().overlaps(b)) continue;
        clipped_pieces(s.leaves[i], i, clip, [&](const BoundaryArc& a) { total += a.length(); });
    }
    return total;
}

TimeSeries evolve2d(EvolvingState2D& state, const GrainLaw2D& law, const RngKey& key,
                    const std::vector<double>& grid) {
    TimeSeries out;
    if (grid.empty()) return out;
    for (size_t i = 0; i + 1 < grid.size(); ++i)
        if (grid[i + 1] <= grid[i]) throw std::invalid_argument("evolve2d: grid must increase");
    if (grid.front() < state.time) throw std::invalid_argument("evolve2d: grid starts in the past");

    Stream2D stream(state.window, law, key, state.time);
    Arrival2D a = stream.next();
    for (double g : grid) {
        while (a.time <= g) {
            state.time = a.time;
            Box2 bb{{a.pos.x - state.window.halo, a.pos.y - state.window.halo},
                    {a.pos.x + state.window.halo, a.pos.y + state.window.halo}};
            if (bb.overlaps(state.window.box)) state.insert_leaf(a.shape, a.pos, state.next_leaf);
            ++state.next_leaf;
            a = stream.next();
        }
        out.t.push_back(g);
        out.value.push_back(state.boundary_length());
    }
    state.time = grid.back();
    return out;
}

}  // namespace dl
