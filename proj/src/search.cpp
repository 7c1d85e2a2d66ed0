#include "qkbench/search.hpp"

#include "qkbench/errors.hpp"
#include "qkbench/random.hpp"
#include "qkbench/svm.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>

namespace qkbench {

namespace {

double fold_accuracy(const KernelMatrix &K_tr, const Labels &y_tr, const KernelMatrix &K_val, const Labels &y_val,
                     double C) {
    return accuracy(fit_predict_multiclass(K_tr, y_tr, C, K_val), y_val);
}

template <typename T>
const T &pick(const std::vector<T> &values, Rng &rng) {
    return values[static_cast<std::size_t>(rng.below(values.size()))];
}

double log_uniform_around(double center, double half_width_decades, Rng &rng) {
    const double lc = std::log10(center);
    return std::pow(10.0, rng.uniform(lc - half_width_decades, lc + half_width_decades));
}

bool same_params(const Hyperparams &a, const Hyperparams &b) {
    if (a.size() != b.size()) return false;
    for (const auto &[k, v] : a) {
        const auto it = b.find(k);
        if (it == b.end()) return false;
        if (std::abs(it->second - v) > 1e-12 * std::max(1.0, std::abs(v))) return false;
    }
    return true;
}

}  // namespace

SearchResult grid_search_classical(KernelKind kind, const Dataset &data, const std::vector<double> &C_grid,
                                   const std::vector<Gamma> &gamma_grid, double train_fraction, std::uint64_t seed) {
    if (kind != KernelKind::Linear && kind != KernelKind::RBF) {
        throw ConfigError("grid search is defined for the linear and rbf kernels only");
    }
    if (C_grid.empty()) throw ConfigError("C grid is empty");
    if (kind == KernelKind::RBF && gamma_grid.empty()) throw ConfigError("gamma grid is empty");
    for (double C : C_grid) {
        if (!(C > 0.0)) throw ConfigError("C grid values must be positive");
    }
    SplitIndices split;
    try {
        split = stratified_split(data.y, train_fraction, seed);
    } catch (const DataError &e) {
        throw DataError(std::string("grid search split: ") + e.what());
    }
    const Dataset tr = data.subset(split.train);
    const Dataset val = data.subset(split.test);
    if (distinct_labels(tr.y).size() < 2) throw DataError("grid search fold has a single class");

    SearchResult result;
    bool have_best = false;
    auto consider = [&](TrialRecord trial) {
        bool better = !have_best || trial.score > result.best_score;
        if (have_best && trial.score == result.best_score) {
            const double bc = result.best.at("C"), tc = trial.params.at("C");
            if (tc < bc) better = true;
            else if (tc == bc && trial.params.count("gamma") && trial.params.at("gamma") < result.best.at("gamma")) {
                better = true;
            }
        }
        if (better) {
            have_best = true;
            result.best = trial.params;
            result.best_tags = trial.tags;
            result.best_score = trial.score;
            result.best_iteration = trial.iteration;
        }
        result.trials.push_back(std::move(trial));
    };

    int iteration = 0;
    if (kind == KernelKind::Linear) {
        const auto K = gram_linear(tr.X, tr.X);
        const auto Kv = gram_linear(val.X, tr.X);
        for (double C : C_grid) {
            TrialRecord t;
            t.iteration = ++iteration;
            t.params = {{"C", C}};
            t.score = fold_accuracy(K, tr.y, Kv, val.y, C);
            consider(std::move(t));
        }
    } else {
        for (double C : C_grid) {
            for (const auto &g : gamma_grid) {
                const double gamma = g.resolve(tr.X);
                const auto K = gram_rbf(tr.X, tr.X, gamma);
                const auto Kv = gram_rbf(val.X, tr.X, gamma);
                TrialRecord t;
                t.iteration = ++iteration;
                t.params = {{"C", C}, {"gamma", gamma}};
                t.tags = {{"gamma", g.to_string()}};
                t.score = fold_accuracy(K, tr.y, Kv, val.y, C);
                consider(std::move(t));
            }
        }
    }
    return result;
}

void SearchSpace::validate() const {
    if (total_iterations < 2) throw ConfigError("search.iterations must be >= 2");
    if (s_values.empty() || C_values.empty()) throw ConfigError("search value sets must be nonempty");
    for (const auto *set : {&s_values, &C_values, &c_values}) {
        for (double v : *set) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("search values must be positive and finite");
        }
    }
    if (!(baseline_accuracy >= 0.0)) throw ConfigError("search.baseline must be >= 0");
    if (!(stage2_half_width > 0.0)) throw ConfigError("search.stage2_half_width must be > 0");
}

SearchSpace default_qamp_space() {
    SearchSpace s;
    s.s_values = {1e-4, 5e-4, 1e-3, 5e-3, 7.5e-3, 1e-2, 5e-2, 7.5e-2, 0.1, 0.5, 0.75, 1.0, 2.0};
    s.C_values = {0.1, 1.0, 10.0, 100.0, 1000.0};
    s.total_iterations = 14;
    return s;
}

SearchSpace default_qrbf_space() {
    SearchSpace s = default_qamp_space();
    s.c_values = {0.224, 0.707, 1.0, 2.236, 5.568};
    s.total_iterations = 20;
    return s;
}

std::string trial_to_json_line(const TrialRecord &t) {
    nlohmann::json j;
    j["iteration"] = t.iteration;
    j["stage"] = t.stage;
    j["params"] = t.params;
    j["tags"] = t.tags;
    j["score"] = t.score;
    j["failed"] = t.failed;
    j["error"] = t.error;
    return j.dump();
}

TrialRecord trial_from_json_line(const std::string &line) {
    try {
        const auto j = nlohmann::json::parse(line);
        TrialRecord t;
        t.iteration = j.at("iteration").get<int>();
        t.stage = j.at("stage").get<int>();
        t.params = j.at("params").get<Hyperparams>();
        t.tags = j.value("tags", std::map<std::string, std::string>{});
        t.score = j.at("score").get<double>();
        t.failed = j.value("failed", false);
        t.error = j.value("error", "");
        return t;
    } catch (const nlohmann::json::exception &e) {
        throw DataError("bad trial log line: " + std::string(e.what()));
    }
}

SearchResult two_stage_random_search(KernelKind kind, const SearchSpace &space, const TrialFn &evaluate,
                                     const std::optional<std::filesystem::path> &log_path) {
    if (!is_quantum(kind)) throw ConfigError("two-stage search is defined for quantum kernels");
    space.validate();
    const bool with_c = kind == KernelKind::QRBF;
    if (with_c && space.c_values.empty()) throw ConfigError("QRBF search needs c values");

    std::vector<TrialRecord> replay;
    std::ofstream log;
    if (log_path) {
        std::ifstream in(*log_path);
        std::string line;
        while (in && std::getline(in, line)) {
            if (!line.empty()) replay.push_back(trial_from_json_line(line));
        }
        log.open(*log_path, std::ios::trunc);
        if (!log) throw DataError("cannot write trial log " + log_path->string());
    }

    Rng rng(space.seed);
    const int stage1 = space.total_iterations / 2;
    SearchResult result;
    bool have_best = false;
    std::optional<Hyperparams> stage1_best;
    double stage1_score = -1.0;

    for (int it = 1; it <= space.total_iterations; ++it) {
        TrialRecord t;
        t.iteration = it;
        t.stage = it <= stage1 ? 1 : 2;
        if (t.stage == 1 || !stage1_best) {
            t.params["s"] = pick(space.s_values, rng);
            t.params["C"] = pick(space.C_values, rng);
        } else {
            t.params["s"] = log_uniform_around(stage1_best->at("s"), space.stage2_half_width, rng);
            t.params["C"] = log_uniform_around(stage1_best->at("C"), space.stage2_half_width, rng);
        }
        if (with_c) t.params["c"] = pick(space.c_values, rng);

        const auto idx = static_cast<std::size_t>(it - 1);
        if (idx < replay.size()) {
            if (replay[idx].iteration != it || !same_params(replay[idx].params, t.params)) {
                throw ConfigError("trial log does not match this search configuration at iteration " +
                                  std::to_string(it));
            }
            t.score = replay[idx].score;
            t.failed = replay[idx].failed;
            t.error = replay[idx].error;
        } else {
            try {
                t.score = evaluate(t.params);
            } catch (const std::exception &e) {
                t.failed = true;
                t.error = e.what();
                t.score = 0.0;
            }
        }
        if (log) log << trial_to_json_line(t) << '\n' << std::flush;

        if (!t.failed) {
            if (!have_best || t.score > result.best_score) {
                have_best = true;
                result.best = t.params;
                result.best_score = t.score;
                result.best_iteration = it;
            }
            if (t.stage == 1 && t.score > stage1_score) {
                stage1_score = t.score;
                stage1_best = t.params;
            }
        }
        const bool stop = !t.failed && t.score > space.baseline_accuracy;
        result.trials.push_back(std::move(t));
        if (stop) {
            result.early_stopped = true;
            break;
        }
    }
    return result;
}

}  // namespace qkbench
