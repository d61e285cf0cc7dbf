#include "dl/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dl/errors.hpp"

namespace dl {

const char* model_name(Model m) {
    switch (m) {
        case Model::dlm1d: return "dlm1d";
        case Model::dlm2d: return "dlm2d";
        case Model::dlrm: return "dlrm";
        case Model::noodle: return "noodle";
    }
    return "?";
}

const char* task_name(Task t) {
    switch (t) {
        case Task::simulate: return "simulate";
        case Task::estimate: return "estimate";
        case Task::verify: return "verify";
        case Task::evolve: return "evolve";
        case Task::render: return "render";
    }
    return "?";
}

const char* format_name(ArtifactFormat f) {
    return f == ArtifactFormat::csv ? "csv" : "json";
}

// -------------------- strict JSON access --------------------

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw SchemaError("config field '" + path + "': " + what);
}

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

std::string at(const std::string& base, size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

const json& member(const json& obj, const std::string& base, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(join(base, key), "missing");
    return *it;
}

const json* maybe(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

// reject stray keys so a typo cannot silently fall back to a default
void check_keys(const json& obj, const std::string& base,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(join(base, it.key()), "unknown field");
    }
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
}

double positive(const json& j, const std::string& path) {
    double v = num(j, path);
    if (!(v > 0.0)) fail(path, "expected a positive number");
    return v;
}

long integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long>();
}

long count_of(const json& j, const std::string& path) {
    long v = integer(j, path);
    if (v < 1) fail(path, "expected a count of at least 1");
    return v;
}

uint64_t seed_of(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    if (j.is_number_unsigned()) return j.get<uint64_t>();
    long long v = j.get<long long>();
    if (v < 0) fail(path, "expected a non-negative integer");
    return (uint64_t)v;
}

std::string str(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

bool flag(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::vector<double> number_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], at(path, i)));
    return out;
}

Vec2 point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
    return {num(j[0], at(path, 0)), num(j[1], at(path, 1))};
}

// law factories validate their arguments with invalid_argument; surface those
// complaints as schema errors on the field that supplied the arguments
template <class F>
auto guarded(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

// -------------------- pieces --------------------

ScalarLaw scalar_law(const json& j, const std::string& path) {
    expect_object(j, path);
    std::string kind = str(member(j, path, "law"), join(path, "law"));
    if (kind == "fixed") {
        check_keys(j, path, {"law", "value"});
        double v = positive(member(j, path, "value"), join(path, "value"));
        return guarded(path, [&] { return ScalarLaw::fixed(v); });
    }
    if (kind == "uniform") {
        check_keys(j, path, {"law", "lo", "hi"});
        double lo = positive(member(j, path, "lo"), join(path, "lo"));
        double hi = positive(member(j, path, "hi"), join(path, "hi"));
        if (hi < lo) fail(join(path, "hi"), "upper end below lower end");
        return guarded(path, [&] { return ScalarLaw::uniform(lo, hi); });
    }
    if (kind == "exponential") {
        check_keys(j, path, {"law", "mean"});
        double m = positive(member(j, path, "mean"), join(path, "mean"));
        return guarded(path, [&] { return ScalarLaw::exponential_mean(m); });
    }
    if (kind == "discrete") {
        check_keys(j, path, {"law", "atoms"});
        const json& a = member(j, path, "atoms");
        if (!a.is_array() || a.empty())
            fail(join(path, "atoms"), "expected a non-empty array of [value, mass] pairs");
        std::vector<std::pair<double, double>> atoms;
        for (size_t i = 0; i < a.size(); ++i) {
            std::string p = at(join(path, "atoms"), i);
            if (!a[i].is_array() || a[i].size() != 2) fail(p, "expected [value, mass]");
            atoms.emplace_back(positive(a[i][0], p + "[0]"), positive(a[i][1], p + "[1]"));
        }
        return guarded(join(path, "atoms"), [&] { return ScalarLaw::discrete(atoms); });
    }
    fail(join(path, "law"), "unknown scalar law '" + kind + "'");
}

void parse_grains(const json& j, const std::string& path, ExperimentConfig& cfg) {
    expect_object(j, path);
    std::string shape = str(member(j, path, "shape"), join(path, "shape"));
    if (shape == "interval") {
        check_keys(j, path, {"shape", "length"});
        ScalarLaw len = scalar_law(member(j, path, "length"), join(path, "length"));
        cfg.dim = 1;
        cfg.law1 = guarded(path, [&] { return GrainLaw1D::interval(len); });
        return;
    }
    if (shape == "multi") {
        check_keys(j, path, {"shape", "components"});
        const json& comps = member(j, path, "components");
        std::string cpath = join(path, "components");
        if (!comps.is_array() || comps.empty()) fail(cpath, "expected a non-empty array");
        std::vector<GrainLaw1D::Component> cs;
        for (size_t i = 0; i < comps.size(); ++i) {
            std::string p = at(cpath, i);
            expect_object(comps[i], p);
            check_keys(comps[i], p, {"offset", "length"});
            GrainLaw1D::Component c;
            c.offset = num(member(comps[i], p, "offset"), join(p, "offset"));
            c.length = num(member(comps[i], p, "length"), join(p, "length"));
            if (c.length < 0.0) fail(join(p, "length"), "expected a non-negative number");
            cs.push_back(c);
        }
        cfg.dim = 1;
        cfg.law1 = guarded(cpath, [&] { return GrainLaw1D::multi(cs); });
        return;
    }
    if (shape == "disk") {
        check_keys(j, path, {"shape", "radius"});
        ScalarLaw r = scalar_law(member(j, path, "radius"), join(path, "radius"));
        cfg.dim = 2;
        cfg.law2 = guarded(path, [&] { return GrainLaw2D::disk(r); });
        return;
    }
    if (shape == "square") {
        check_keys(j, path, {"shape", "side", "rotate"});
        double side = positive(member(j, path, "side"), join(path, "side"));
        bool rot = false;
        if (const json* r = maybe(j, "rotate")) rot = flag(*r, join(path, "rotate"));
        cfg.dim = 2;
        cfg.law2 = guarded(path, [&] { return GrainLaw2D::square(side, rot); });
        return;
    }
    if (shape == "polygon") {
        check_keys(j, path, {"shape", "vertices", "rotate"});
        const json& vs = member(j, path, "vertices");
        std::string vpath = join(path, "vertices");
        if (!vs.is_array() || vs.size() < 3) fail(vpath, "expected at least 3 [x, y] vertices");
        Polygon poly;
        for (size_t i = 0; i < vs.size(); ++i) poly.push_back(point(vs[i], at(vpath, i)));
        bool rot = false;
        if (const json* r = maybe(j, "rotate")) rot = flag(*r, join(path, "rotate"));
        cfg.dim = 2;
        cfg.law2 = guarded(vpath, [&] { return GrainLaw2D::polygon(poly, rot); });
        return;
    }
    fail(join(path, "shape"), "unknown grain shape '" + shape + "'");
}

MarkSpec parse_marks(const json& j, const std::string& path) {
    expect_object(j, path);
    std::string kind = str(member(j, path, "kind"), join(path, "kind"));
    MarkSpec m;
    if (kind == "boundary") {
        check_keys(j, path, {"kind"});
        m.kind = MarkKind::boundary_surface;
        return m;
    }
    if (kind == "colour") {
        check_keys(j, path, {"kind", "p"});
        m.kind = MarkKind::colour_lebesgue;
        m.colour_p = num(member(j, path, "p"), join(path, "p"));
        if (m.colour_p < 0.0 || m.colour_p > 1.0) fail(join(path, "p"), "expected a value in [0, 1]");
        return m;
    }
    if (kind == "density") {
        check_keys(j, path, {"kind", "levels"});
        const json& lv = member(j, path, "levels");
        std::string lpath = join(path, "levels");
        if (!lv.is_array() || lv.size() != 2) fail(lpath, "expected [lo, hi]");
        m.kind = MarkKind::density;
        m.level_lo = num(lv[0], lpath + "[0]");
        m.level_hi = num(lv[1], lpath + "[1]");
        if (m.level_hi < m.level_lo) fail(lpath, "grey level range is inverted");
        return m;
    }
    if (kind == "corner") {
        check_keys(j, path, {"kind"});
        m.kind = MarkKind::corner_counting;
        return m;
    }
    if (kind == "seeds") {
        check_keys(j, path, {"kind", "mix", "offsets"});
        m.kind = MarkKind::seeds;
        m.seed_mix = num(member(j, path, "mix"), join(path, "mix"));
        if (!(m.seed_mix > 0.0) || !(m.seed_mix < 1.0))
            fail(join(path, "mix"), "expected a value strictly inside (0, 1)");
        if (const json* offs = maybe(j, "offsets")) {
            std::string opath = join(path, "offsets");
            if (!offs->is_array() || offs->empty()) fail(opath, "expected a non-empty array of [x, y]");
            m.seed_offsets.clear();
            for (size_t i = 0; i < offs->size(); ++i)
                m.seed_offsets.push_back(point((*offs)[i], at(opath, i)));
        }
        return m;
    }
    fail(join(path, "kind"), "unknown mark kind '" + kind + "'");
}

Polyline parse_noodle(const json& j, const std::string& path) {
    expect_object(j, path);
    std::string type = str(member(j, path, "type"), join(path, "type"));
    if (type == "segment") {
        check_keys(j, path, {"type", "length"});
        double len = positive(member(j, path, "length"), join(path, "length"));
        return segment_noodle({0.0, 0.0}, {len, 0.0});
    }
    if (type == "semicircle") {
        check_keys(j, path, {"type", "arc_length", "segments"});
        double len = positive(member(j, path, "arc_length"), join(path, "arc_length"));
        long segs = 256;
        if (const json* s = maybe(j, "segments")) segs = count_of(*s, join(path, "segments"));
        return semicircle_noodle(len, (int)segs);
    }
    if (type == "polyline") {
        check_keys(j, path, {"type", "vertices", "closed"});
        const json& vs = member(j, path, "vertices");
        std::string vpath = join(path, "vertices");
        if (!vs.is_array() || vs.size() < 2) fail(vpath, "expected at least 2 [x, y] vertices");
        Polyline p;
        for (size_t i = 0; i < vs.size(); ++i) p.vertices.push_back(point(vs[i], at(vpath, i)));
        if (const json* c = maybe(j, "closed")) p.closed = flag(*c, join(path, "closed"));
        return p;
    }
    fail(join(path, "type"), "unknown noodle type '" + type + "'");
}

TestFunction1D parse_fn_1d(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"scale", "pieces"});
    TestFunction1D f;
    if (const json* s = maybe(j, "scale")) f.scale = positive(*s, join(path, "scale"));
    const json& ps = member(j, path, "pieces");
    std::string ppath = join(path, "pieces");
    if (!ps.is_array() || ps.empty()) fail(ppath, "expected a non-empty array");
    for (size_t i = 0; i < ps.size(); ++i) {
        std::string p = at(ppath, i);
        expect_object(ps[i], p);
        check_keys(ps[i], p, {"lo", "hi", "value"});
        TestFunction1D::Piece piece;
        piece.lo = num(member(ps[i], p, "lo"), join(p, "lo"));
        piece.hi = num(member(ps[i], p, "hi"), join(p, "hi"));
        if (const json* v = maybe(ps[i], "value")) piece.value = num(*v, join(p, "value"));
        f.pieces.push_back(piece);
    }
    guarded(path, [&] {
        f.validate();
        return 0;
    });
    return f;
}

TestFunction2D parse_fn_2d(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"scale", "pieces"});
    TestFunction2D f;
    if (const json* s = maybe(j, "scale")) f.scale = positive(*s, join(path, "scale"));
    const json& ps = member(j, path, "pieces");
    std::string ppath = join(path, "pieces");
    if (!ps.is_array() || ps.empty()) fail(ppath, "expected a non-empty array");
    for (size_t i = 0; i < ps.size(); ++i) {
        std::string p = at(ppath, i);
        expect_object(ps[i], p);
        check_keys(ps[i], p, {"box", "value"});
        const json& b = member(ps[i], p, "box");
        std::string bpath = join(p, "box");
        if (!b.is_array() || b.size() != 4) fail(bpath, "expected [x0, y0, x1, y1]");
        TestFunction2D::Piece piece;
        piece.box = {{num(b[0], at(bpath, 0)), num(b[1], at(bpath, 1))},
                     {num(b[2], at(bpath, 2)), num(b[3], at(bpath, 3))}};
        if (const json* v = maybe(ps[i], "value")) piece.value = num(*v, join(p, "value"));
        f.pieces.push_back(piece);
    }
    guarded(path, [&] {
        f.validate();
        return 0;
    });
    return f;
}

// quantity names accepted by estimate / verify; membership is schema-level,
// whether the named statistic exists for the configured model is not
const char* kQuantities[] = {
    "boundary-intensity", "pcf",       "variance",  "time-covariance", "vacancy",
    "interval-laws",      "normality", "branch-intensity", "cell-intensity",
    "mark-intensity",     "isolation", "poincare",  "buffon",
};

}  // namespace

// -------------------- whole documents --------------------

ExperimentConfig parse_config(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) throw SchemaError("config: not valid JSON");
    if (!root.is_object()) throw SchemaError("config: expected a JSON object");
    check_keys(root, "", {"model", "task", "seed", "replicates", "grains", "marks", "window",
                          "noodles", "spacing", "samples", "quantity", "method", "bins", "lags",
                          "grid", "functions", "margin", "span", "threshold", "shade", "output",
                          "format"});

    ExperimentConfig cfg;

    std::string model = str(member(root, "", "model"), "model");
    if (model == "dlm1d") cfg.model = Model::dlm1d;
    else if (model == "dlm2d") cfg.model = Model::dlm2d;
    else if (model == "dlrm") cfg.model = Model::dlrm;
    else if (model == "noodle") cfg.model = Model::noodle;
    else fail("model", "unknown model '" + model + "'");

    std::string task = str(member(root, "", "task"), "task");
    if (task == "simulate") cfg.task = Task::simulate;
    else if (task == "estimate") cfg.task = Task::estimate;
    else if (task == "verify") cfg.task = Task::verify;
    else if (task == "evolve") cfg.task = Task::evolve;
    else if (task == "render") cfg.task = Task::render;
    else fail("task", "unknown task '" + task + "'");

    cfg.seed = seed_of(member(root, "", "seed"), "seed");
    if (const json* r = maybe(root, "replicates")) cfg.replicates = count_of(*r, "replicates");
    if (const json* o = maybe(root, "output")) {
        cfg.out_name = str(*o, "output");
        if (cfg.out_name.empty() || cfg.out_name.find('/') != std::string::npos)
            fail("output", "expected a non-empty base name without path separators");
    }
    if (const json* f = maybe(root, "format")) {
        std::string fmt = str(*f, "format");
        if (fmt == "csv") cfg.format = ArtifactFormat::csv;
        else if (fmt == "json") cfg.format = ArtifactFormat::json;
        else fail("format", "expected \"csv\" or \"json\"");
    }
    if (const json* t = maybe(root, "threshold")) cfg.threshold = positive(*t, "threshold");
    if (const json* m = maybe(root, "margin")) {
        cfg.margin = num(*m, "margin");
        if (cfg.margin < 0.0) fail("margin", "expected a non-negative number");
    }

    // model-dependent geometry
    if (cfg.model == Model::noodle) {
        for (const char* k : {"grains", "window", "marks", "functions", "bins", "lags", "grid",
                              "span", "margin"})
            if (maybe(root, k)) fail(k, std::string("not used by the noodle model"));
        const json& ns = member(root, "", "noodles");
        expect_object(ns, "noodles");
        check_keys(ns, "noodles", {"a", "b"});
        cfg.noodle_a = parse_noodle(member(ns, "noodles", "a"), "noodles.a");
        if (const json* b = maybe(ns, "b")) cfg.noodle_b = parse_noodle(*b, "noodles.b");
        cfg.samples = count_of(member(root, "", "samples"), "samples");
        if (const json* s = maybe(root, "spacing")) cfg.spacing = positive(*s, "spacing");
    } else {
        for (const char* k : {"noodles", "spacing", "samples"})
            if (maybe(root, k)) fail(k, "only used by the noodle model");
        parse_grains(member(root, "", "grains"), "grains", cfg);

        const json& w = member(root, "", "window");
        expect_object(w, "window");
        if (cfg.dim == 1) {
            check_keys(w, "window", {"length"});
            cfg.length = positive(member(w, "window", "length"), "window.length");
        } else {
            check_keys(w, "window", {"width", "height"});
            double wd = positive(member(w, "window", "width"), "window.width");
            double ht = positive(member(w, "window", "height"), "window.height");
            cfg.box = {{0.0, 0.0}, {wd, ht}};
        }

        if (cfg.model == Model::dlrm) {
            cfg.mark = parse_marks(member(root, "", "marks"), "marks");
            cfg.has_mark = true;
            if (const json* fns = maybe(root, "functions")) {
                if (!fns->is_array() || fns->empty()) fail("functions", "expected a non-empty array");
                for (size_t i = 0; i < fns->size(); ++i) {
                    if (cfg.dim == 1) cfg.fns1.push_back(parse_fn_1d((*fns)[i], at("functions", i)));
                    else cfg.fns2.push_back(parse_fn_2d((*fns)[i], at("functions", i)));
                }
            }
        } else {
            if (maybe(root, "marks")) fail("marks", "only used by the dlrm model");
            if (maybe(root, "functions")) fail("functions", "only used by the dlrm model");
        }
    }

    // task-dependent parameters
    bool wants_quantity = cfg.task == Task::estimate || cfg.task == Task::verify;
    if (wants_quantity) {
        cfg.quantity = str(member(root, "", "quantity"), "quantity");
        bool known = false;
        for (const char* q : kQuantities)
            if (cfg.quantity == q) {
                known = true;
                break;
            }
        if (!known) fail("quantity", "unknown quantity '" + cfg.quantity + "'");
    } else if (maybe(root, "quantity")) {
        fail("quantity", "only used by estimate and verify tasks");
    }

    if (cfg.quantity == "pcf") {
        const json& b = member(root, "", "bins");
        expect_object(b, "bins");
        check_keys(b, "bins", {"lo", "hi", "width"});
        double lo = num(member(b, "bins", "lo"), "bins.lo");
        double hi = num(member(b, "bins", "hi"), "bins.hi");
        double width = positive(member(b, "bins", "width"), "bins.width");
        if (lo < 0.0) fail("bins.lo", "expected a non-negative number");
        if (hi <= lo) fail("bins.hi", "expected an upper end above bins.lo");
        for (double e = lo; e < hi - 1e-12; e += width) cfg.bin_edges.push_back(e);
        cfg.bin_edges.push_back(hi);
    } else if (maybe(root, "bins")) {
        fail("bins", "only used by the pcf quantity");
    }

    if (cfg.quantity == "time-covariance") {
        cfg.lags = number_list(member(root, "", "lags"), "lags");
        if (cfg.lags.empty() || cfg.lags.front() != 0.0) fail("lags", "expected a list starting at 0");
        for (size_t i = 1; i < cfg.lags.size(); ++i)
            if (cfg.lags[i] <= cfg.lags[i - 1]) fail(at("lags", i), "lags must increase");
    } else if (maybe(root, "lags")) {
        fail("lags", "only used by the time-covariance quantity");
    }

    if (cfg.quantity == "vacancy") {
        cfg.span = positive(member(root, "", "span"), "span");
        if (cfg.dim == 1 && cfg.span >= cfg.length) fail("span", "span must be below the window length");
    } else if (maybe(root, "span")) {
        fail("span", "only used by the vacancy quantity");
    }

    if (const json* m = maybe(root, "method")) {
        if (cfg.quantity != "cell-intensity") fail("method", "only used by the cell-intensity quantity");
        cfg.method = str(*m, "method");
        if (cfg.method != "raster" && cfg.method != "euler")
            fail("method", "expected \"raster\" or \"euler\"");
    } else if (cfg.quantity == "cell-intensity") {
        cfg.method = "raster";
    }

    if (cfg.task == Task::evolve) {
        cfg.grid = number_list(member(root, "", "grid"), "grid");
        if (cfg.grid.empty()) fail("grid", "expected a non-empty list of instants");
        if (cfg.grid.front() < 0.0) fail("grid[0]", "expected a non-negative instant");
        for (size_t i = 1; i < cfg.grid.size(); ++i)
            if (cfg.grid[i] <= cfg.grid[i - 1]) fail(at("grid", i), "instants must increase");
    } else if (maybe(root, "grid")) {
        fail("grid", "only used by the evolve task");
    }

    if (const json* s = maybe(root, "shade")) {
        if (cfg.task != Task::render) fail("shade", "only used by the render task");
        cfg.shade_cells = flag(*s, "shade");
    }

    if (cfg.model == Model::noodle && wants_quantity) {
        if (cfg.quantity == "poincare" && cfg.noodle_b.vertices.empty())
            fail("noodles.b", "missing (poincare drops one noodle on another)");
    }

    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace dl
