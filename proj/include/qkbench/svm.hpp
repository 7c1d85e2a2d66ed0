#pragma once

#include "qkbench/datapipe.hpp"
#include "qkbench/kernels.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qkbench {

struct SvcOptions {
    /// Stop when the maximal KKT violation m(alpha) - M(alpha) drops below this.
    double tolerance = 1e-3;
    /// Curvature floor for non-positive pairs.
    double tau = 1e-12;
    /// 0 selects max(10^7, 100 m).
    long max_iterations = 0;
    /// Keep the dual objective after every SMO step (for monotonicity checks).
    bool record_objective = false;
};

/// Binary SVC over a precomputed kernel. Labels are +1 / -1 internally; `classes`
/// maps them back (classes[0] <-> -1, classes[1] <-> +1).
struct SvcModel {
    std::vector<double> dual_coefs;        ///< alpha_i * y_i per support vector
    std::vector<std::size_t> support_idx;  ///< positions in the training matrix
    std::vector<std::size_t> train_ids;    ///< column ids a test matrix must carry
    double bias = 0.0;
    double C = 1.0;
    std::vector<int> classes{-1, 1};

    std::vector<double> alpha;  ///< full dual vector, length m
    double dual_objective = 0.0;
    long iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

/// SMO with second-order working-set selection. `y` must hold only +1 and -1.
SvcModel fit_binary(const KernelMatrix &K, const std::vector<int> &y, double C,
                    const SvcOptions &opts = {});

/// Same, for arbitrary two-class labels (larger label becomes +1).
SvcModel fit_binary_labels(const KernelMatrix &K, const Labels &y, double C,
                           const SvcOptions &opts = {});

/// f(x) = sum_sv coef_i K(x, x_i) + b for each row of the test-vs-train matrix.
Eigen::VectorXd decision_function(const SvcModel &model, const KernelMatrix &K_test);

Labels predict_binary(const SvcModel &model, const KernelMatrix &K_test);

/// Max form of the dual: sum(alpha) - 1/2 alpha^T Q alpha, Q_ij = y_i y_j K_ij.
double svm_dual_objective(const Eigen::MatrixXd &K, const std::vector<int> &y,
                          const std::vector<double> &alpha);

struct PairModel {
    int negative;
    int positive;
    SvcModel model;
};

/// One-vs-one ensemble.
struct OvoModel {
    std::vector<int> classes;
    std::vector<PairModel> pairs;
};

OvoModel fit_ovo(const KernelMatrix &K_train, const Labels &y, double C, const SvcOptions &opts = {});

/// Majority vote; ties go to the larger summed decision value, then the smaller label.
Labels predict_ovo(const OvoModel &model, const KernelMatrix &K_test);

Labels fit_predict_multiclass(const KernelMatrix &K_train, const Labels &y, double C,
                              const KernelMatrix &K_test, const SvcOptions &opts = {});

double accuracy(const Labels &pred, const Labels &truth);

/// Principal submatrix (rows and columns `idx`) keeping the matching ids.
KernelMatrix submatrix(const KernelMatrix &K, const std::vector<std::size_t> &rows,
                       const std::vector<std::size_t> &cols);

std::string model_to_json(const SvcModel &model);
SvcModel model_from_json(const std::string &text);

}  // namespace qkbench
