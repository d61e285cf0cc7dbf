#include "dl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

namespace dl {

namespace {

constexpr double kPad = 12.0;

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// golden-angle hue walk, pastel band; keyed by arrival index so a rerun of
// the same seed shades every patch identically
std::string patch_colour(uint32_t index) {
    double h = std::fmod(137.508 * (double)(index + 1), 360.0) / 60.0;
    double c = 0.30, l = 0.84;
    double x = c * (1.0 - std::fabs(std::fmod(h, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch ((int)h) {
        case 0: r = c; g = x; break;
        case 1: r = x; g = c; break;
        case 2: g = c; b = x; break;
        case 3: g = x; b = c; break;
        case 4: r = x; b = c; break;
        default: r = c; b = x; break;
    }
    double m = l - c / 2.0;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", (int)std::lround(255 * (r + m)),
                  (int)std::lround(255 * (g + m)), (int)std::lround(255 * (b + m)));
    return buf;
}

struct Frame {
    double sx = 1.0, ox = 0.0;  // X = ox + sx * x
    double oy = 0.0;            // Y = oy - sx * y  (north up)
    std::string X(double x) const { return px(ox + sx * x); }
    std::string Y(double y) const { return px(oy - sx * y); }
};

void open_svg(std::ostringstream& out, double w, double h) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << px(w)
        << "\" height=\"" << px(h) << "\" viewBox=\"0 0 " << px(w) << " " << px(h) << "\">\n";
}

}  // namespace

// -------------------- planar mosaic --------------------

std::string render_svg(const PlanarTessellation& t, const SvgOptions& opt) {
    const Box2& W = t.window;
    double s = opt.scale > 0.0 ? opt.scale : 800.0 / std::max(W.width(), W.height());
    Frame f{s, kPad - s * W.lo.x, kPad + s * W.hi.y};
    double w = W.width() * s + 2.0 * kPad, h = W.height() * s + 2.0 * kPad;

    std::ostringstream out;
    open_svg(out, w, h);
    out << "<clipPath id=\"win\"><rect x=\"" << f.X(W.lo.x) << "\" y=\"" << f.Y(W.hi.y)
        << "\" width=\"" << px(W.width() * s) << "\" height=\"" << px(W.height() * s)
        << "\"/></clipPath>\n";

    if (opt.shade_cells && !t.leaves.empty()) {
        // painter order: the oldest stored leaf first, the youngest last and
        // on top, which reproduces the visible mosaic exactly
        out << "<g clip-path=\"url(#win)\" stroke=\"none\">\n";
        for (size_t k = t.leaves.size(); k-- > 0;) {
            const LeafBoundary& lf = t.leaves[k];
            std::string fill = patch_colour(lf.arr.index);
            if (lf.is_disk()) {
                out << "<circle cx=\"" << f.X(lf.arr.pos.x) << "\" cy=\"" << f.Y(lf.arr.pos.y)
                    << "\" r=\"" << px(lf.arr.shape.r * s) << "\" fill=\"" << fill << "\"/>\n";
            } else {
                out << "<polygon fill=\"" << fill << "\" points=\"";
                Polygon poly = lf.world_poly();
                for (size_t i = 0; i < poly.size(); ++i)
                    out << (i ? " " : "") << f.X(poly[i].x) << "," << f.Y(poly[i].y);
                out << "\"/>\n";
            }
        }
        out << "</g>\n";
    }

    out << "<rect class=\"window\" x=\"" << f.X(W.lo.x) << "\" y=\"" << f.Y(W.hi.y)
        << "\" width=\"" << px(W.width() * s) << "\" height=\"" << px(W.height() * s)
        << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

    for (const BoundaryArc& a : t.arcs) {
        int n = 1;
        if (a.circular) {
            double frac = (a.th1 - a.th0) / (2.0 * kPi);
            n = std::max(2, (int)std::ceil(frac * (double)opt.arc_segments));
        }
        out << "<path class=\"arc\" fill=\"none\" stroke=\"#1a1a1a\" stroke-width=\"1.2\" d=\"";
        for (int i = 0; i <= n; ++i) {
            Vec2 p = a.at((double)i / (double)n);
            out << (i ? " L " : "M ") << f.X(p.x) << " " << f.Y(p.y);
        }
        out << "\"/>\n";
    }

    for (const BranchPoint& b : t.branch_points)
        out << "<circle class=\"branch\" cx=\"" << f.X(b.pos.x) << "\" cy=\"" << f.Y(b.pos.y)
            << "\" r=\"2.4\" fill=\"#c62828\"/>\n";

    out << "</svg>\n";
    return out.str();
}

// -------------------- 1d space-time chart --------------------

std::string render_svg(const Tessellation1D& t, const std::vector<Arrival1D>& arrivals,
                       const SvgOptions& opt) {
    double s = opt.scale > 0.0 ? opt.scale : 900.0 / std::max(t.length, 1e-9);
    double span = std::max(t.coverage_time, 1e-9);
    double ts = opt.time_scale > 0.0 ? opt.time_scale : 420.0 / span;
    double w = t.length * s + 2.0 * kPad;
    double h = span * ts + 2.0 * kPad;
    auto X = [&](double x) { return px(kPad + s * x); };
    auto Y = [&](double time) { return px(kPad + ts * time); };  // time runs downward

    std::unordered_set<uint32_t> vis;
    for (const Arrival1D& a : t.visible) vis.insert(a.index);

    std::ostringstream out;
    open_svg(out, w, h);
    out << "<rect class=\"window\" x=\"" << X(0.0) << "\" y=\"" << Y(0.0) << "\" width=\""
        << px(t.length * s) << "\" height=\"" << px(span * ts)
        << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

    for (const Arrival1D& a : arrivals) {
        bool thick = vis.count(a.index) > 0;
        const char* stroke = thick ? "#1a1a1a" : "#9e9e9e";
        const char* width = thick ? "2.6" : "0.9";
        for (const auto& part : a.shape.parts) {
            double lo = std::max(0.0, a.pos + part.first);
            double hi = std::min(t.length, a.pos + part.second);
            if (part.second == part.first) {  // isolated point component
                if (lo <= hi)
                    out << "<circle class=\"leaf\" cx=\"" << X(lo) << "\" cy=\"" << Y(a.time)
                        << "\" r=\"" << (thick ? "2.2" : "1.1") << "\" fill=\"" << stroke
                        << "\"/>\n";
                continue;
            }
            if (hi <= lo) continue;
            out << "<line class=\"leaf\" x1=\"" << X(lo) << "\" y1=\"" << Y(a.time) << "\" x2=\""
                << X(hi) << "\" y2=\"" << Y(a.time) << "\" stroke=\"" << stroke
                << "\" stroke-width=\"" << width << "\"/>\n";
        }
    }

    for (double e : t.eta)
        out << "<line class=\"tick\" x1=\"" << X(e) << "\" y1=\"" << px(kPad - 5.0) << "\" x2=\""
            << X(e) << "\" y2=\"" << px(kPad + 5.0)
            << "\" stroke=\"#c62828\" stroke-width=\"1.4\"/>\n";

    out << "</svg>\n";
    return out.str();
}

}  // namespace dl
