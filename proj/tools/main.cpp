// dlm: config-driven experiment runner for the dead leaves models.
// Exit codes: 0 ok, 1 runtime or verify failure, 2 malformed config or
// invocation, 3 structurally valid but unsupported combination.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dl/config.hpp"
#include "dl/errors.hpp"
#include "dl/runner.hpp"

namespace {

struct CliArgs {
    std::string config;
    std::optional<uint64_t> seed;
    int threads = 0;
    std::string out = ".";
    std::string format;
};

void add_common(CLI::App* sc, CliArgs& args) {
    sc->add_option("--config", args.config, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--seed", args.seed, "override the config seed");
    sc->add_option("--threads", args.threads, "worker count (default: hardware parallelism)");
    sc->add_option("--out", args.out, "artifact directory (default: .)");
    sc->add_option("--format", args.format, "data artifact format")
        ->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dead leaves simulations: tessellations, random measures, noodle crossings"};
    app.require_subcommand(1);

    CliArgs args;
    struct Sub {
        const char* name;
        const char* desc;
    };
    static const Sub subs[] = {
        {"simulate", "draw replicates and record per-replicate summaries"},
        {"estimate", "run a Monte Carlo estimator and report value and stderr"},
        {"verify", "run an estimator against its closed-form target; nonzero exit on fail"},
        {"evolve", "draw a state and replay the forward dynamics over a time grid"},
        {"render", "draw one realization as an SVG figure"},
    };
    for (const Sub& s : subs) add_common(app.add_subcommand(s.name, s.desc), args);
    CLI::App* list = app.add_subcommand("list-targets", "print every closed-form target");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (list->parsed()) {
        std::cout << dl::list_targets_text();
        return 0;
    }

    std::string command = app.get_subcommands().front()->get_name();
    try {
        dl::ExperimentConfig cfg = dl::load_config(args.config);
        if (command != dl::task_name(cfg.task))
            throw dl::SchemaError("config field 'task': config says '" +
                                  std::string(dl::task_name(cfg.task)) + "' but the command is '" +
                                  command + "'");
        dl::RunOptions opt;
        opt.threads = args.threads;
        opt.out_dir = args.out;
        opt.seed = args.seed;
        if (!args.format.empty())
            opt.format = args.format == "csv" ? dl::ArtifactFormat::csv : dl::ArtifactFormat::json;
        opt.log = &std::cerr;
        return dl::run_experiment(cfg, opt);
    } catch (const dl::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const dl::UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
