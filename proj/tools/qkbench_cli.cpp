#include "qkbench/config.hpp"
#include "qkbench/errors.hpp"
#include "qkbench/runner.hpp"
#include "qkbench/util.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string format = "json";
    bool resume = false;
    bool quiet = false;
};

void add_common(CLI::App *cmd, CommonArgs &a, bool with_format) {
    cmd->add_option("-c,--config", a.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", a.out, "Output directory (overrides output_dir)");
    cmd->add_option("--seed", a.seed, "Replace the global seed and every nested seed");
    cmd->add_option("--threads", a.threads, "OpenMP threads (default: QKBENCH_THREADS or the OpenMP default)")
        ->check(CLI::PositiveNumber);
    if (with_format) {
        cmd->add_option("--format", a.format, "Report printed to stdout")->check(CLI::IsMember({"json", "csv"}));
    }
    cmd->add_flag("-q,--quiet", a.quiet, "Silence warnings");
}

void apply_threads(int threads) {
    if (threads <= 0) {
        if (const char *env = std::getenv("QKBENCH_THREADS")) {
            try {
                threads = std::stoi(env);
            } catch (const std::exception &) {
                throw qkbench::ConfigError("QKBENCH_THREADS must be a positive integer");
            }
            if (threads <= 0) throw qkbench::ConfigError("QKBENCH_THREADS must be a positive integer");
        }
    }
    if (threads > 0) omp_set_num_threads(threads);
}

qkbench::RunConfig load(const CommonArgs &a) {
    auto cfg = qkbench::load_config(a.config);
    if (a.seed) qkbench::override_seed(cfg, *a.seed);
    if (!a.out.empty()) cfg.output_dir = a.out;
    qkbench::set_quiet(a.quiet);
    apply_threads(a.threads);
    return cfg;
}

void emit(const CommonArgs &a, const std::string &json_text, const std::string &csv_text) {
    std::cout << (a.format == "csv" ? csv_text : json_text);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qkbench: trainable quantum kernel benchmarks on a statevector simulator"};
    app.require_subcommand(1);

    CommonArgs run_args, ablate_args, sweep_args, curve_args, pca_args, validate_args;
    std::vector<int> extras;

    auto *run = app.add_subcommand("run", "Run every configured kernel and write the results");
    add_common(run, run_args, true);
    run->add_flag("--resume", run_args.resume, "Replay trials already logged in the output directory");

    auto *ablate = app.add_subcommand("ablate-scaling", "Initial vs trained accuracy for s = 1 and the tuned s");
    add_common(ablate, ablate_args, true);

    auto *sweep = app.add_subcommand("qubit-sweep", "Accuracy as extra qubits are added to the encoder");
    add_common(sweep, sweep_args, true);
    sweep->add_option("--extras", extras, "Extra qubit counts (default: sweep.extras from the config)");

    auto *curve = app.add_subcommand("learning-curve", "RBF-SVC learning curve over training-set sizes");
    add_common(curve, curve_args, true);

    auto *pca = app.add_subcommand("pca-analyze", "Explained-variance curve of the training split");
    add_common(pca, pca_args, true);

    auto *validate = app.add_subcommand("validate-config", "Parse and validate a configuration");
    add_common(validate, validate_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            const auto cfg = load(run_args);
            qkbench::RunOptions opts;
            opts.resume = run_args.resume;
            const auto report = qkbench::run(cfg, opts);
            emit(run_args, qkbench::report_json(report), qkbench::report_csv(report));
            return report.exit_code();
        }
        if (ablate->parsed()) {
            const auto cfg = load(ablate_args);
            const auto r = qkbench::ablate_scaling(cfg);
            emit(ablate_args, qkbench::ablation_json(r), qkbench::ablation_csv(r));
            return 0;
        }
        if (sweep->parsed()) {
            const auto cfg = load(sweep_args);
            const auto r = qkbench::qubit_sweep(cfg, extras.empty() ? cfg.sweep.extras : extras);
            emit(sweep_args, qkbench::sweep_json(r), qkbench::sweep_csv(r));
            return 0;
        }
        if (curve->parsed()) {
            const auto cfg = load(curve_args);
            const auto r = qkbench::run_learning_curve(cfg);
            emit(curve_args, qkbench::learning_curve_json(r), qkbench::learning_curve_csv(r));
            return 0;
        }
        if (pca->parsed()) {
            const auto cfg = load(pca_args);
            const auto r = qkbench::pca_analyze(cfg);
            emit(pca_args, qkbench::pca_json(r), qkbench::pca_csv(r));
            return 0;
        }
        if (validate->parsed()) {
            const auto cfg = load(validate_args);
            std::cout << "config ok: " << cfg.kernels.size() << " kernel(s), output " << cfg.output_dir.string()
                      << '\n';
            return 0;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return qkbench::exit_code_for(e);
    }
    return 0;
}
