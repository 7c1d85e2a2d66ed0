#include "qkbench/runner.hpp"

#include "qkbench/errors.hpp"
#include "qkbench/plot.hpp"
#include "qkbench/svm.hpp"
#include "qkbench/util.hpp"

#include "json.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace qkbench {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;
namespace fs = std::filesystem;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

PreparedData load_and_prepare(const RunConfig &cfg) {
    return prepare(load_dataset(cfg.dataset), cfg.pipeline);
}

double quantum_accuracy(const Dataset &fit, const Dataset &eval, const EncoderSpec &spec, const AnsatzParams &params,
                        ScalingConfig scaling, double C) {
    const QuantumKernel qk{spec, params, scaling};
    const auto K = gram_quantum(fit.X, qk);
    const auto Kt = gram_quantum(eval.X, fit.X, qk);
    return accuracy(fit_predict_multiclass(K, fit.y, C, Kt), eval.y);
}

/// Outcome of training one (s, c) configuration and scoring C on the KTA validation fold.
struct QuantumFit {
    EncoderSpec spec;
    ScalingConfig scaling;
    TrainReport report;
    double validation_accuracy = 0.0;
};

struct Folds {
    Dataset subtrain;
    Dataset validation;
};

Folds kta_folds(const Dataset &train_set, const TrainReport &rep) {
    return {train_set.subset(rep.subtrain_idx), train_set.subset(rep.validation_idx)};
}

QuantumFit fit_quantum(const Dataset &train_set, const EncoderSpec &spec, double s, double C, int layers,
                       const TrainConfig &tc) {
    QuantumFit f{spec, ScalingConfig{s}, train(train_set.X, train_set.y, spec, ScalingConfig{s}, layers, tc), 0.0};
    const auto folds = kta_folds(train_set, f.report);
    f.validation_accuracy =
        quantum_accuracy(folds.subtrain, folds.validation, spec, f.report.best_params, f.scaling, C);
    return f;
}

double length_scale_of(const Hyperparams &h) { return h.count("c") ? h.at("c") : 1.0; }

struct QuantumSelection {
    Hyperparams best;
    bool searched = false;
    SearchResult search;
    QuantumFit fit;
};

/// Fixed hyperparameters are trained once; otherwise the two-stage search runs and the
/// winning configuration's fit is returned (refitted when its trial was replayed).
QuantumSelection select_quantum(const RunConfig &cfg, const KernelConfig &kc, const Dataset &train_set,
                                std::optional<double> classical_baseline, const std::optional<fs::path> &log) {
    const std::size_t d = train_set.n_features();
    const int L = cfg.ansatz.layers;
    auto spec_for = [&](const Hyperparams &h) { return encoder_for(kc.kind, cfg.ansatz, d, length_scale_of(h)); };

    QuantumSelection sel;
    if (kc.fixed) {
        sel.best = *kc.fixed;
        sel.fit = fit_quantum(train_set, spec_for(sel.best), sel.best.at("s"), sel.best.at("C"), L, cfg.training);
        return sel;
    }
    // Configuration problems must not be swallowed as failed trials.
    if (kc.kind == KernelKind::QRBF) {
        for (double c : kc.search.c_values) spec_for({{"c", c}});
    } else {
        spec_for({});
    }
    SearchSpace space = kc.search;
    if (kc.baseline_auto && classical_baseline) space.baseline_accuracy = *classical_baseline;

    std::vector<std::pair<Hyperparams, QuantumFit>> fits;
    const TrialFn evaluate = [&](const Hyperparams &h) {
        auto f = fit_quantum(train_set, spec_for(h), h.at("s"), h.at("C"), L, cfg.training);
        const double acc = f.validation_accuracy;
        fits.emplace_back(h, std::move(f));
        return acc;
    };
    sel.searched = true;
    sel.search = two_stage_random_search(kc.kind, space, evaluate, log);
    if (sel.search.best.empty()) {
        const std::string why = sel.search.trials.empty() ? std::string("no trials") : sel.search.trials.back().error;
        throw NumericalError("every search trial failed (last error: " + why + ")");
    }
    sel.best = sel.search.best;
    const auto hit = std::find_if(fits.begin(), fits.end(), [&](const auto &p) { return p.first == sel.best; });
    sel.fit = hit != fits.end()
                  ? std::move(hit->second)
                  : fit_quantum(train_set, spec_for(sel.best), sel.best.at("s"), sel.best.at("C"), L, cfg.training);
    return sel;
}

std::optional<double> classical_baseline(const RunConfig &cfg, const Dataset &train_set) {
    std::optional<double> best;
    for (const auto &kc : cfg.kernels) {
        if (is_quantum(kc.kind)) continue;
        const auto r = grid_search_classical(kc.kind, train_set, kc.C_grid, kc.gamma_grid, cfg.training.split_fraction,
                                             cfg.training.init_seed);
        best = std::max(best.value_or(0.0), r.best_score);
    }
    return best;
}

KernelOutcome run_classical(const RunConfig &cfg, const KernelConfig &kc, const PreparedData &pd) {
    KernelOutcome out;
    out.kind = kc.kind;
    out.searched = true;
    const auto r = grid_search_classical(kc.kind, pd.train, kc.C_grid, kc.gamma_grid, cfg.training.split_fraction,
                                         cfg.training.init_seed);
    out.validation_accuracy = r.best_score;
    out.trials = r.trials;
    out.hyperparams = r.best;
    out.tags = r.best_tags;
    const double C = r.best.at("C");
    KernelMatrix K, Kt;
    if (kc.kind == KernelKind::Linear) {
        K = gram_linear(pd.train.X, pd.train.X);
        Kt = gram_linear(pd.test.X, pd.train.X);
    } else {
        const double gamma = Gamma::parse(r.best_tags.at("gamma")).resolve(pd.train.X);
        out.hyperparams["gamma"] = gamma;
        K = gram_rbf(pd.train.X, pd.train.X, gamma);
        Kt = gram_rbf(pd.test.X, pd.train.X, gamma);
    }
    out.test_accuracy = accuracy(fit_predict_multiclass(K, pd.train.y, C, Kt), pd.test.y);
    return out;
}

std::string history_csv(const std::vector<Checkpoint> &history) {
    std::vector<std::vector<std::string>> rows;
    for (const auto &c : history) {
        rows.push_back({std::to_string(c.step), c.train_batch_kta ? plot::format_number(*c.train_batch_kta) : "",
                        plot::format_number(c.validation_kta)});
    }
    return plot::csv_table({"step", "train_batch_kta", "validation_kta"}, rows);
}

KernelOutcome run_quantum(const RunConfig &cfg, const KernelConfig &kc, const PreparedData &pd,
                          std::optional<double> baseline, const RunOptions &opts) {
    KernelOutcome out;
    out.kind = kc.kind;
    out.layers = cfg.ansatz.layers;
    const std::string name = to_string(kc.kind);
    std::optional<fs::path> log;
    if (opts.write_artifacts && !kc.fixed) {
        log = cfg.output_dir / ("trials_" + name + ".jsonl");
        if (!opts.resume) fs::remove(*log);
    }
    auto sel = select_quantum(cfg, kc, pd.train, baseline, log);
    const auto &f = sel.fit;
    out.searched = sel.searched;
    out.trials = sel.search.trials;
    out.early_stopped = sel.search.early_stopped;
    out.hyperparams = sel.best;
    out.validation_accuracy = f.validation_accuracy;
    out.test_accuracy = quantum_accuracy(pd.train, pd.test, f.spec, f.report.best_params, f.scaling, sel.best.at("C"));
    out.encoder = f.spec;
    out.resources = resource_count(f.spec, cfg.ansatz.layers, f.spec.n_qubits);
    const CheckpointFile ckpt{f.spec, f.report.best_params, f.scaling.s, cfg.training.init_seed, f.report.history};
    out.checkpoint_hash = checkpoint_hash(ckpt);
    out.training = std::move(sel.fit.report);
    if (opts.write_artifacts) {
        save_checkpoint(ckpt, cfg.output_dir / ("checkpoint_" + name + ".json"));
        plot::write_text(cfg.output_dir / ("kta_history_" + name + ".csv"), history_csv(out.training->history));
    }
    return out;
}

json encoder_json(const EncoderSpec &s) {
    return {{"kind", to_string(s.kind)},
            {"n_qubits", s.n_qubits},
            {"length_scale", s.length_scale},
            {"extension", to_string(s.extension)},
            {"extra_qubits", s.extra_qubits}};
}

json resources_json(const ResourceCount &r) {
    return {{"cnots", r.cnots},
            {"single_qubit_gates", r.single_qubit_gates},
            {"ansatz_depth", r.ansatz_depth},
            {"circuit_depth", r.circuit_depth}};
}

std::string num_or_empty(const Hyperparams &h, const std::string &key) {
    return h.count(key) ? plot::format_number(h.at(key)) : "";
}

std::vector<std::size_t> default_curve_sizes(std::size_t n_train) {
    std::vector<std::size_t> sizes;
    for (int k = 1; k <= 5; ++k) {
        const auto v = std::max<std::size_t>(std::min<std::size_t>(10, n_train),
                                             static_cast<std::size_t>(std::llround(n_train * k / 5.0)));
        if (sizes.empty() || sizes.back() != v) sizes.push_back(v);
    }
    return sizes;
}

void ensure_dir(const RunConfig &cfg, const RunOptions &opts) {
    if (opts.write_artifacts) fs::create_directories(cfg.output_dir);
}

std::vector<const KernelConfig *> quantum_kernels(const RunConfig &cfg, const char *verb) {
    std::vector<const KernelConfig *> out;
    for (const auto &k : cfg.kernels) {
        if (is_quantum(k.kind)) out.push_back(&k);
    }
    if (out.empty()) throw ConfigError(std::string("kernels: ") + verb + " needs a qamp or qrbf kernel");
    return out;
}

}  // namespace

bool RunReport::any_failed() const {
    return std::any_of(kernels.begin(), kernels.end(), [](const KernelOutcome &k) { return k.failed; });
}

int RunReport::exit_code() const {
    for (const auto &k : kernels) {
        if (k.failed) return k.error_code;
    }
    return 0;
}

Dataset load_dataset(const DatasetConfig &cfg) {
    if (cfg.csv_path) return load_csv(*cfg.csv_path, cfg.csv);
    return make_synthetic(cfg.synthetic, cfg.m, cfg.noise, cfg.seed, cfg.n_classes);
}

EncoderSpec encoder_for(KernelKind kind, const AnsatzConfig &ansatz, std::size_t n_features, double length_scale) {
    EncoderSpec spec;
    if (kind == KernelKind::QAmp) {
        const int n = ansatz.qubits.value_or(qubits_for_features(n_features));
        if (n < 1 || n > kMaxQubits || (std::size_t{1} << n) < n_features) {
            throw ConfigError("ansatz.qubits: qamp on " + std::to_string(n_features) + " features needs 2^N >= d, got N = " +
                              std::to_string(n));
        }
        spec = qamp_spec(n);
    } else if (kind == KernelKind::QRBF) {
        spec = qrbf_spec(length_scale, ansatz.qubits.value_or(2));
    } else {
        throw ConfigError("encoder requested for classical kernel " + to_string(kind));
    }
    spec.validate();
    return extended_variant(spec, ansatz.extra_qubits);
}

RunReport run(const RunConfig &cfg, const RunOptions &opts) {
    cfg.validate();
    const auto t0 = Clock::now();
    const auto pd = load_and_prepare(cfg);
    ensure_dir(cfg, opts);

    RunReport report;
    report.dataset = pd.train.provenance;
    report.n_train = pd.train.size();
    report.n_test = pd.test.size();
    report.n_features = pd.train.n_features();
    report.classes = distinct_labels(pd.train.y);
    report.seed = cfg.seed;
    report.kernels.resize(cfg.kernels.size());

    auto guarded = [&](std::size_t i, auto &&body) {
        const auto tk = Clock::now();
        try {
            report.kernels[i] = body();
        } catch (const std::exception &e) {
            report.kernels[i] = KernelOutcome{};
            report.kernels[i].kind = cfg.kernels[i].kind;
            report.kernels[i].failed = true;
            report.kernels[i].error_code = exit_code_for(e);
            report.kernels[i].error = e.what();
            warn(to_string(cfg.kernels[i].kind) + " kernel failed: " + e.what());
        }
        report.kernels[i].wall_seconds = seconds_since(tk);
    };

    std::optional<double> baseline;
    for (std::size_t i = 0; i < cfg.kernels.size(); ++i) {
        if (is_quantum(cfg.kernels[i].kind)) continue;
        guarded(i, [&] { return run_classical(cfg, cfg.kernels[i], pd); });
        if (!report.kernels[i].failed) {
            baseline = std::max(baseline.value_or(0.0), report.kernels[i].validation_accuracy);
        }
    }
    for (std::size_t i = 0; i < cfg.kernels.size(); ++i) {
        if (!is_quantum(cfg.kernels[i].kind)) continue;
        guarded(i, [&] { return run_quantum(cfg, cfg.kernels[i], pd, baseline, opts); });
    }
    report.wall_seconds = seconds_since(t0);

    if (opts.write_artifacts) {
        plot::write_text(cfg.output_dir / "results.json", report_json(report));
        plot::write_text(cfg.output_dir / "results.csv", report_csv(report));
        plot::write_text(cfg.output_dir / "run_info.json", run_info_json(report));
        std::vector<std::string> labels;
        std::vector<double> values;
        for (const auto &k : report.kernels) {
            labels.push_back(to_string(k.kind));
            values.push_back(k.failed ? NAN : k.test_accuracy);
        }
        plot::write_text(cfg.output_dir / "results.svg",
                         plot::bar_chart("Test accuracy by kernel (" + report.dataset + ")", labels, values,
                                         "test accuracy"));
    }
    return report;
}

std::string report_json(const RunReport &report) {
    json kernels = json::array();
    for (const auto &k : report.kernels) {
        json j;
        j["kernel"] = to_string(k.kind);
        j["status"] = k.failed ? "failed" : "ok";
        if (k.failed) {
            j["error"] = k.error;
            j["error_code"] = k.error_code;
            kernels.push_back(j);
            continue;
        }
        j["validation_accuracy"] = k.validation_accuracy;
        j["test_accuracy"] = k.test_accuracy;
        j["hyperparameters"] = k.hyperparams;
        if (!k.tags.empty()) j["tags"] = k.tags;
        if (k.searched) {
            json trials = json::array();
            for (const auto &t : k.trials) trials.push_back(json::parse(trial_to_json_line(t)));
            j["search"] = {{"trials", trials}, {"early_stopped", k.early_stopped}};
        }
        if (k.encoder) {
            j["encoder"] = encoder_json(*k.encoder);
            j["layers"] = k.layers;
            j["resources"] = resources_json(*k.resources);
            j["checkpoint_hash"] = k.checkpoint_hash;
            const auto &tr = *k.training;
            json hist = json::array();
            for (const auto &c : tr.history) {
                hist.push_back({{"step", c.step},
                                {"train_batch_kta", c.train_batch_kta ? json(*c.train_batch_kta) : json()},
                                {"validation_kta", c.validation_kta}});
            }
            j["training"] = {{"initial_validation_kta", tr.initial_validation_kta},
                             {"best_validation_kta", tr.best_validation_kta},
                             {"best_step", tr.best_step},
                             {"history", hist}};
        }
        kernels.push_back(j);
    }
    json root = {{"format", "qkbench-results"},
                 {"version", 1},
                 {"seed", report.seed},
                 {"dataset",
                  {{"source", report.dataset},
                   {"n_train", report.n_train},
                   {"n_test", report.n_test},
                   {"n_features", report.n_features},
                   {"classes", report.classes}}},
                 {"kernels", kernels}};
    return root.dump(2) + "\n";
}

std::string report_csv(const RunReport &report) {
    std::vector<std::vector<std::string>> rows;
    for (const auto &k : report.kernels) {
        if (k.failed) {
            rows.push_back({to_string(k.kind), "failed", "", "", "", "", "", "", "", "", "", "", "", "", k.error});
            continue;
        }
        std::vector<std::string> row{to_string(k.kind),
                                     "ok",
                                     plot::format_number(k.validation_accuracy),
                                     plot::format_number(k.test_accuracy),
                                     num_or_empty(k.hyperparams, "C"),
                                     num_or_empty(k.hyperparams, "gamma"),
                                     num_or_empty(k.hyperparams, "s"),
                                     num_or_empty(k.hyperparams, "c")};
        if (k.encoder) {
            row.push_back(std::to_string(k.encoder->n_qubits));
            row.push_back(std::to_string(k.resources->cnots));
            row.push_back(std::to_string(k.resources->single_qubit_gates));
            row.push_back(std::to_string(k.resources->ansatz_depth));
            row.push_back(std::to_string(k.resources->circuit_depth));
            row.push_back(plot::format_number(k.training->best_validation_kta));
        } else {
            row.insert(row.end(), 6, "");
        }
        row.push_back("");
        rows.push_back(std::move(row));
    }
    return plot::csv_table({"kernel", "status", "validation_accuracy", "test_accuracy", "C", "gamma", "s", "c",
                            "qubits", "cnots", "single_qubit_gates", "ansatz_depth", "circuit_depth",
                            "best_validation_kta", "error"},
                           rows);
}

std::string run_info_json(const RunReport &report) {
    json per_kernel = json::object();
    for (const auto &k : report.kernels) per_kernel[to_string(k.kind)] = k.wall_seconds;
    json root = {{"wall_seconds", report.wall_seconds},
                 {"kernel_wall_seconds", per_kernel},
                 {"environment",
                  {{"compiler", __VERSION__},
                   {"cxx_standard", __cplusplus},
                   {"eigen",
                    std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
                   {"openmp_max_threads", omp_get_max_threads()}}}};
    return root.dump(2) + "\n";
}

// ---------------------------------------------------------------- scaling ablation

std::vector<AblationResult> ablate_scaling(const RunConfig &cfg, const RunOptions &opts) {
    cfg.validate();
    const auto qks = quantum_kernels(cfg, "ablate-scaling");
    const auto pd = load_and_prepare(cfg);
    ensure_dir(cfg, opts);
    const auto baseline = classical_baseline(cfg, pd.train);
    const int L = cfg.ansatz.layers;

    std::vector<AblationResult> results;
    for (const auto *kc : qks) {
        auto sel = select_quantum(cfg, *kc, pd.train, baseline, std::nullopt);
        AblationResult res;
        res.kind = kc->kind;
        res.scaled_s = sel.best.at("s");
        std::vector<double> C_candidates = kc->fixed ? std::vector<double>{kc->fixed->at("C")} : kc->search.C_values;
        std::sort(C_candidates.begin(), C_candidates.end());

        for (double s : {1.0, res.scaled_s}) {
            const ScalingConfig sc{s};
            const auto rep = train(pd.train.X, pd.train.y, sel.fit.spec, sc, L, cfg.training);
            const auto folds = kta_folds(pd.train, rep);
            for (bool trained : {false, true}) {
                const auto &params = trained ? rep.best_params : rep.initial_params;
                AblationCell cell;
                cell.s = s;
                cell.trained = trained;
                cell.validation_kta = trained ? rep.best_validation_kta : rep.initial_validation_kta;
                cell.validation_accuracy = -1.0;
                for (double C : C_candidates) {
                    const double acc = quantum_accuracy(folds.subtrain, folds.validation, sel.fit.spec, params, sc, C);
                    if (acc > cell.validation_accuracy) {
                        cell.validation_accuracy = acc;
                        cell.C = C;
                    }
                }
                cell.test_accuracy = quantum_accuracy(pd.train, pd.test, sel.fit.spec, params, sc, cell.C);
                res.cells.push_back(cell);
            }
        }
        results.push_back(std::move(res));
    }

    if (opts.write_artifacts) {
        plot::write_text(cfg.output_dir / "ablation.json", ablation_json(results));
        plot::write_text(cfg.output_dir / "ablation.csv", ablation_csv(results));
        for (const auto &r : results) {
            const std::string name = to_string(r.kind);
            const std::vector<std::string> groups{"unscaled (s=1)", "scaled (s=" + plot::format_number(r.scaled_s) + ")"};
            const std::vector<plot::Series> series{
                {"initial", {r.cells[0].test_accuracy, r.cells[2].test_accuracy}},
                {"trained", {r.cells[1].test_accuracy, r.cells[3].test_accuracy}}};
            plot::write_text(cfg.output_dir / ("ablation_" + name + ".svg"),
                             plot::grouped_bar_chart(name + ": effect of the scaling parameter", groups, series,
                                                     "test accuracy"));
        }
    }
    return results;
}

std::string ablation_json(const std::vector<AblationResult> &results) {
    json root = json::array();
    for (const auto &r : results) {
        json cells = json::array();
        for (std::size_t i = 0; i < r.cells.size(); ++i) {
            const auto &c = r.cells[i];
            cells.push_back({{"s", c.s},
                             {"scaled", i >= 2},
                             {"trained", c.trained},
                             {"C", c.C},
                             {"validation_accuracy", c.validation_accuracy},
                             {"test_accuracy", c.test_accuracy},
                             {"validation_kta", c.validation_kta}});
        }
        root.push_back({{"kernel", to_string(r.kind)}, {"scaled_s", r.scaled_s}, {"cells", cells}});
    }
    return root.dump(2) + "\n";
}

std::string ablation_csv(const std::vector<AblationResult> &results) {
    std::vector<std::vector<std::string>> rows;
    for (const auto &r : results) {
        for (std::size_t i = 0; i < r.cells.size(); ++i) {
            const auto &c = r.cells[i];
            rows.push_back({to_string(r.kind), i < 2 ? "unscaled" : "scaled", c.trained ? "trained" : "initial",
                            plot::format_number(c.s), plot::format_number(c.C),
                            plot::format_number(c.validation_accuracy), plot::format_number(c.test_accuracy),
                            plot::format_number(c.validation_kta)});
        }
    }
    return plot::csv_table(
        {"kernel", "scaling", "params", "s", "C", "validation_accuracy", "test_accuracy", "validation_kta"}, rows);
}

// ---------------------------------------------------------------- qubit sweep

std::vector<SweepResult> qubit_sweep(const RunConfig &cfg, const std::vector<int> &extras, const RunOptions &opts) {
    cfg.validate();
    if (extras.empty()) throw ConfigError("sweep.extras: list is empty");
    for (int e : extras) {
        if (e < 0) throw ConfigError("sweep.extras: values must be >= 0");
    }
    const auto qks = quantum_kernels(cfg, "qubit-sweep");
    const auto pd = load_and_prepare(cfg);
    ensure_dir(cfg, opts);
    const auto baseline = classical_baseline(cfg, pd.train);
    const int L = cfg.ansatz.layers;

    std::vector<SweepResult> results;
    for (const auto *kc : qks) {
        const auto sel = select_quantum(cfg, *kc, pd.train, baseline, std::nullopt);
        SweepResult res;
        res.kind = kc->kind;
        res.hyperparams = sel.best;
        const double C = sel.best.at("C");
        for (int e : extras) {
            const EncoderSpec spec = extended_variant(sel.fit.spec, e);
            SweepPoint p;
            p.extra_qubits = e;
            p.n_qubits = spec.n_qubits;
            p.resources = resource_count(spec, L, spec.n_qubits);
            if (e == 0) {
                p.test_accuracy =
                    quantum_accuracy(pd.train, pd.test, spec, sel.fit.report.best_params, sel.fit.scaling, C);
            } else {
                const auto rep = train(pd.train.X, pd.train.y, spec, sel.fit.scaling, L, cfg.training);
                p.test_accuracy = quantum_accuracy(pd.train, pd.test, spec, rep.best_params, sel.fit.scaling, C);
            }
            res.points.push_back(p);
        }
        results.push_back(std::move(res));
    }

    if (opts.write_artifacts) {
        plot::write_text(cfg.output_dir / "sweep.json", sweep_json(results));
        plot::write_text(cfg.output_dir / "sweep.csv", sweep_csv(results));
        std::vector<double> x(extras.begin(), extras.end());
        std::vector<plot::Series> series;
        for (const auto &r : results) {
            plot::Series s{to_string(r.kind), {}};
            for (const auto &p : r.points) s.values.push_back(p.test_accuracy);
            series.push_back(std::move(s));
        }
        plot::write_text(cfg.output_dir / "sweep.svg",
                         plot::line_chart("Effect of additional qubits", x, series, "extra qubits", "test accuracy"));
    }
    return results;
}

std::string sweep_json(const std::vector<SweepResult> &results) {
    json root = json::array();
    for (const auto &r : results) {
        json pts = json::array();
        for (const auto &p : r.points) {
            pts.push_back({{"extra_qubits", p.extra_qubits},
                           {"n_qubits", p.n_qubits},
                           {"test_accuracy", p.test_accuracy},
                           {"resources", resources_json(p.resources)}});
        }
        root.push_back({{"kernel", to_string(r.kind)}, {"hyperparameters", r.hyperparams}, {"points", pts}});
    }
    return root.dump(2) + "\n";
}

std::string sweep_csv(const std::vector<SweepResult> &results) {
    std::vector<std::vector<std::string>> rows;
    for (const auto &r : results) {
        for (const auto &p : r.points) {
            rows.push_back({to_string(r.kind), std::to_string(p.extra_qubits), std::to_string(p.n_qubits),
                            plot::format_number(p.test_accuracy), std::to_string(p.resources.cnots),
                            std::to_string(p.resources.single_qubit_gates), std::to_string(p.resources.ansatz_depth)});
        }
    }
    return plot::csv_table(
        {"kernel", "extra_qubits", "qubits", "test_accuracy", "cnots", "single_qubit_gates", "ansatz_depth"}, rows);
}

// ---------------------------------------------------------------- analysis

LearningCurveReport run_learning_curve(const RunConfig &cfg, const RunOptions &opts) {
    cfg.validate();
    const auto pd = load_and_prepare(cfg);
    ensure_dir(cfg, opts);
    const auto sizes = cfg.learning_curve.sizes.empty() ? default_curve_sizes(pd.train.size()) : cfg.learning_curve.sizes;
    LearningCurveReport r;
    r.points = learning_curve(pd.train, pd.test, sizes, cfg.learning_curve.C_grid, cfg.learning_curve.gamma_grid,
                              cfg.seed);
    if (opts.write_artifacts) {
        plot::write_text(cfg.output_dir / "learning_curve.json", learning_curve_json(r));
        plot::write_text(cfg.output_dir / "learning_curve.csv", learning_curve_csv(r));
        std::vector<double> x;
        plot::Series s{"rbf-svc", {}};
        for (const auto &p : r.points) {
            x.push_back(static_cast<double>(p.size));
            s.values.push_back(p.test_accuracy);
        }
        plot::write_text(cfg.output_dir / "learning_curve.svg",
                         plot::line_chart("Learning curve (RBF-SVC proxy)", x, {s}, "training samples",
                                          "test accuracy"));
    }
    return r;
}

std::string learning_curve_json(const LearningCurveReport &r) {
    json pts = json::array();
    for (const auto &p : r.points) {
        pts.push_back({{"size", p.size}, {"test_accuracy", p.test_accuracy}, {"C", p.C}, {"gamma", p.gamma}});
    }
    return json{{"proxy", "rbf-svc"}, {"points", pts}}.dump(2) + "\n";
}

std::string learning_curve_csv(const LearningCurveReport &r) {
    std::vector<std::vector<std::string>> rows;
    for (const auto &p : r.points) {
        rows.push_back({std::to_string(p.size), plot::format_number(p.test_accuracy), plot::format_number(p.C),
                        plot::format_number(p.gamma)});
    }
    return plot::csv_table({"size", "test_accuracy", "C", "gamma"}, rows);
}

PcaAnalysis pca_analyze(const RunConfig &cfg, const RunOptions &opts) {
    cfg.validate();
    PipelineSpec spec = cfg.pipeline;
    spec.pca = PcaSelection{};
    spec.scaler = Scaler::None;
    const auto pd = prepare(load_dataset(cfg.dataset), spec);
    ensure_dir(cfg, opts);
    const auto model = fit_pca(pd.train.X, 1);
    PcaAnalysis a;
    a.eigenvalues = model.eigenvalues;
    a.cumulative_ratio = model.cumulative_ratio;
    a.variance_threshold = cfg.pipeline.pca.variance;
    a.variance_components = components_for_variance(a.cumulative_ratio, a.variance_threshold);
    a.elbow = elbow_components(a.cumulative_ratio);
    if (opts.write_artifacts) {
        plot::write_text(cfg.output_dir / "pca.json", pca_json(a));
        plot::write_text(cfg.output_dir / "pca.csv", pca_csv(a));
        std::vector<double> x;
        plot::Series s{"cumulative explained variance", {}};
        for (Eigen::Index k = 0; k < a.cumulative_ratio.size(); ++k) {
            x.push_back(static_cast<double>(k + 1));
            s.values.push_back(a.cumulative_ratio(k));
        }
        plot::write_text(cfg.output_dir / "pca.svg",
                         plot::line_chart("Cumulative explained variance", x, {s}, "components", "ratio"));
    }
    return a;
}

std::string pca_json(const PcaAnalysis &a) {
    std::vector<double> ev(a.eigenvalues.data(), a.eigenvalues.data() + a.eigenvalues.size());
    std::vector<double> cr(a.cumulative_ratio.data(), a.cumulative_ratio.data() + a.cumulative_ratio.size());
    return json{{"eigenvalues", ev},
                {"cumulative_ratio", cr},
                {"variance_threshold", a.variance_threshold},
                {"variance_components", a.variance_components},
                {"elbow_components", a.elbow}}
               .dump(2) +
           "\n";
}

std::string pca_csv(const PcaAnalysis &a) {
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index k = 0; k < a.eigenvalues.size(); ++k) {
        rows.push_back({std::to_string(k + 1), plot::format_number(a.eigenvalues(k)),
                        plot::format_number(a.cumulative_ratio(k))});
    }
    return plot::csv_table({"component", "eigenvalue", "cumulative_ratio"}, rows);
}

}  // namespace qkbench
