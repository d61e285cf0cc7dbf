#pragma once
// SVG 1.1 renderers: a plan view of the planar mosaic and a space-time chart
// of a one-dimensional realization. Output is deterministic: coordinates are
// printed with fixed precision and element order follows the stored data.

#include <string>
#include <vector>

#include "dl/dlm1d.hpp"
#include "dl/dlm2d.hpp"

namespace dl {

struct SvgOptions {
    double scale = 0.0;       // pixels per model unit; 0 fits ~800 px
    double time_scale = 0.0;  // 1d chart: pixels per unit arrival time; 0 fits ~420 px
    int arc_segments = 64;    // polyline pieces per full circle
    bool shade_cells = false; // 2d: fill visible patches, painter order
};

// planar mosaic: window outline, visible boundary as polyline paths
// (class "arc") and branch points as circles (class "branch")
std::string render_svg(const PlanarTessellation& t, const SvgOptions& opt = {});

// space-time chart: every arrival as horizontal bars at its arrival time,
// thicker when some of the leaf stays visible; each boundary point of the
// final tessellation is one tick (class "tick") on the observation baseline
std::string render_svg(const Tessellation1D& t, const std::vector<Arrival1D>& arrivals,
                       const SvgOptions& opt = {});

}  // namespace dl
