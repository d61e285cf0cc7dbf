#pragma once
// Experiment runner: executes a parsed config and leaves a deterministic
// artifact set on disk. The data artifact (.csv or .json) is byte-identical
// across reruns of the same config and seed; wall-clock facts live in a
// sidecar .meta.json next to it.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "dl/config.hpp"

namespace dl {

struct RunOptions {
    int threads = 0;                       // 0 = hardware parallelism
    std::string out_dir = ".";
    std::optional<uint64_t> seed;          // command line override
    std::optional<ArtifactFormat> format;  // command line override
    std::ostream* log = nullptr;           // progress lines, one per replicate
};

// returns a process exit code: 0 on success, 1 when a verify run still has a
// failing verdict after its one reseeded retry. Schema and unsupported
// combinations surface as SchemaError / UnsupportedError instead.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

// one line per closed-form target: name, models, oracle, meaning
std::string list_targets_text();

}  // namespace dl
