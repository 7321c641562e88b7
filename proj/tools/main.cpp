#include <cstdint>
#include <exception>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spikeport/experiments.hpp"
#include "spikeport/solvers.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "scenario config file")
        ->required();
    cmd->add_option("--out-dir", opts.out_dir, "output directory override");
    cmd->add_option("--seed", opts.seed, "seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--threads", opts.threads, "worker count")
        ->check(CLI::PositiveNumber);
}

int run(const CommonOpts& opts, const std::string& experiment) {
    spikeport::ScenarioConfig cfg;
    try {
        cfg = spikeport::load_config(opts.config_path);
    } catch (const spikeport::ConfigError& e) {
        std::cerr << opts.config_path << ": " << e.what() << "\n";
        return 2;
    }
    if (!experiment.empty()) cfg.experiment = experiment;
    if (!opts.out_dir.empty()) cfg.outputs.dir = opts.out_dir;
    if (opts.seed_set) cfg.seed = opts.seed;

    try {
        const spikeport::ExperimentResult result =
            spikeport::run_experiment(cfg, opts.threads);
        std::cout << result.summary;
        for (const std::string& f : result.files_written)
            std::cout << "file=" << f << "\n";
        return 0;
    } catch (const spikeport::ConfigError& e) {
        std::cerr << opts.config_path << ": " << e.what() << "\n";
        return 2;
    } catch (const spikeport::NonconvergedRun& e) {
        std::cerr << opts.config_path << ": " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << opts.config_path << ": " << e.what() << "\n";
        return 4;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "spikeport: spiking control circuits as monotone port "
        "interconnections"};
    app.require_subcommand(1);

    const char* experiments[] = {"simulate",    "dc-solve", "reliability",
                                 "sweep",       "estimate", "amplifier",
                                 "motor"};
    struct Sub {
        CLI::App* cmd;
        CommonOpts opts;
        std::string experiment;
    };
    std::vector<std::unique_ptr<Sub>> subs;
    for (const char* name : experiments) {
        auto sub = std::make_unique<Sub>();
        sub->cmd = app.add_subcommand(name, std::string("run the ") + name +
                                                " experiment");
        sub->experiment = name;
        add_common(sub->cmd, sub->opts);
        subs.push_back(std::move(sub));
    }
    auto validate = std::make_unique<Sub>();
    validate->cmd =
        app.add_subcommand("validate", "parse and validate a config only");
    add_common(validate->cmd, validate->opts);

    CLI11_PARSE(app, argc, argv);

    if (validate->cmd->parsed()) {
        try {
            const spikeport::ScenarioConfig cfg =
                spikeport::load_config(validate->opts.config_path);
            std::cout << "valid=true\nexperiment=" << cfg.experiment << "\n";
            return 0;
        } catch (const spikeport::ConfigError& e) {
            std::cerr << validate->opts.config_path << ": " << e.what()
                      << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << validate->opts.config_path << ": " << e.what()
                      << "\n";
            return 4;
        }
    }
    for (const auto& sub : subs)
        if (sub->cmd->parsed()) return run(sub->opts, sub->experiment);
    return 2;
}
