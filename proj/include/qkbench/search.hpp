#pragma once

#include "qkbench/datapipe.hpp"
#include "qkbench/kernels.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qkbench {

using Hyperparams = std::map<std::string, double>;

struct TrialRecord {
    int iteration = 0;  ///< 1-based
    int stage = 1;
    Hyperparams params;
    /// Named values that are not plain numbers (e.g. gamma = "scale").
    std::map<std::string, std::string> tags;
    double score = 0.0;
    bool failed = false;
    std::string error;
};

struct SearchResult {
    Hyperparams best;
    std::map<std::string, std::string> best_tags;
    double best_score = 0.0;
    int best_iteration = 0;
    std::vector<TrialRecord> trials;
    bool early_stopped = false;
};

/**
 * Exhaustive grid over C (and gamma for rbf). Every combination is fitted on the
 * stratified `train_fraction` fold of `data` and scored by accuracy on the rest.
 * Ties go to the smaller C, then the smaller resolved gamma.
 */
SearchResult grid_search_classical(KernelKind kind, const Dataset &data, const std::vector<double> &C_grid,
                                   const std::vector<Gamma> &gamma_grid, double train_fraction,
                                   std::uint64_t seed);

struct SearchSpace {
    std::vector<double> s_values;
    std::vector<double> C_values;
    /// QRBF length scales; empty for QAmp.
    std::vector<double> c_values;
    int total_iterations = 14;
    /// Stop as soon as a trial scores strictly above this.
    double baseline_accuracy = 1.1;
    std::uint64_t seed = 42;
    /// Stage-2 window half width in decades around the stage-1 best.
    double stage2_half_width = 0.5;

    void validate() const;
};

SearchSpace default_qamp_space();
SearchSpace default_qrbf_space();

/// Evaluates one hyperparameter set (train the kernel, fit the SVC, return the
/// validation accuracy). Exceptions mark the trial as failed.
using TrialFn = std::function<double(const Hyperparams &)>;

/**
 * Two-stage randomized search. The first total/2 iterations draw s, C (and c) from
 * their discrete sets; the rest draw s and C log-uniformly within +-stage2_half_width
 * decades of the stage-1 best while c keeps using its discrete set. Stops early once
 * a score exceeds baseline_accuracy.
 *
 * When `log_path` is given each trial is appended there as a JSON line; trials
 * already present in that file are replayed instead of re-evaluated.
 */
SearchResult two_stage_random_search(KernelKind kind, const SearchSpace &space, const TrialFn &evaluate,
                                     const std::optional<std::filesystem::path> &log_path = std::nullopt);

std::string trial_to_json_line(const TrialRecord &t);
TrialRecord trial_from_json_line(const std::string &line);

}  // namespace qkbench
