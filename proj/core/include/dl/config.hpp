#pragma once
// JSON experiment configs. One file names a model, a grain law, a window, a
// task and the task's parameters. Parsing is strict: a missing field, a wrong
// type, an unknown key or an out-of-range value raises SchemaError carrying
// the dotted path of the offending field.

#include <cstdint>
#include <string>
#include <vector>

#include "dl/closedform.hpp"
#include "dl/dlrm.hpp"
#include "dl/grains.hpp"
#include "dl/noodle.hpp"

namespace dl {

enum class Model { dlm1d, dlm2d, dlrm, noodle };
enum class Task { simulate, estimate, verify, evolve, render };
enum class ArtifactFormat { csv, json };

const char* model_name(Model m);
const char* task_name(Task t);
const char* format_name(ArtifactFormat f);

struct ExperimentConfig {
    uint64_t seed = 0;
    Model model = Model::dlm1d;
    Task task = Task::simulate;
    long replicates = 1;

    // window; dim is implied by the grain law (dlrm runs in either dimension)
    int dim = 1;
    double length = 0.0;  // dim 1
    Box2 box;             // dim 2

    GrainLaw1D law1;      // dim 1
    GrainLaw2D law2;      // dim 2
    MarkSpec mark;        // dlrm
    bool has_mark = false;

    // noodle model curves
    Polyline noodle_a, noodle_b;
    double spacing = 1.0;  // ruled-floor line spacing
    long samples = 0;      // Monte Carlo placements

    // task parameters
    std::string quantity;            // statistic name for estimate / verify
    std::string method;              // quantity variant (cell-intensity: raster | euler)
    std::vector<double> bin_edges;   // pcf bins, built from the "bins" object
    std::vector<double> lags;        // time covariance
    std::vector<double> grid;        // evolve instants
    std::vector<TestFunction1D> fns1;  // dlrm integrands
    std::vector<TestFunction2D> fns2;
    double margin = -1.0;    // erosion override; negative means grain reach
    double span = 0.0;       // vacancy gap width
    double threshold = 3.0;  // verdict width in standard errors
    bool shade_cells = false;  // render: fill visible patches

    std::string out_name = "experiment";
    ArtifactFormat format = ArtifactFormat::csv;
};

// parse a JSON document / load one from disk; both throw SchemaError
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace dl
