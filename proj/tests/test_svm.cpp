#include "qkbench/datapipe.hpp"
#include "qkbench/errors.hpp"
#include "qkbench/random.hpp"
#include "qkbench/svm.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qkbench;

namespace {

struct Problem {
    Samples X;
    std::vector<int> y;  // +-1
};

Problem noisy_problem(std::size_t m, std::uint64_t seed, double overlap) {
    Rng rng(seed);
    Problem p{Samples(static_cast<Eigen::Index>(m), 2), std::vector<int>(m)};
    for (std::size_t i = 0; i < m; ++i) {
        const int label = i % 2 ? 1 : -1;
        p.y[i] = label;
        p.X(static_cast<Eigen::Index>(i), 0) = label * (1.0 - overlap) + rng.normal();
        p.X(static_cast<Eigen::Index>(i), 1) = rng.normal();
    }
    return p;
}

Eigen::VectorXd to_vec(const std::vector<int> &y) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
    return v;
}

}  // namespace

TEST(Smo, MatchesReferenceQpSolution) {
    SvcOptions opts;
    opts.tolerance = 1e-8;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto p = noisy_problem(30, seed, 0.6);
        for (bool rbf : {false, true}) {
            const auto K = rbf ? gram_rbf(p.X, p.X, 0.7) : gram_linear(p.X, p.X);
            for (double C : {0.1, 1.0, 10.0}) {
                const auto model = fit_binary(K, p.y, C, opts);
                const auto ref = oracle::svm_dual(K.values, to_vec(p.y), C);
                EXPECT_TRUE(model.converged);
                EXPECT_NEAR(model.dual_objective, ref.objective, 1e-6 * std::max(1.0, std::abs(ref.objective)))
                    << "seed " << seed << " rbf " << rbf << " C " << C;
                const auto f = decision_function(model, K);
                for (Eigen::Index i = 0; i < K.rows(); ++i) {
                    const double ref_f = (ref.alpha.cwiseProduct(to_vec(p.y))).dot(K.values.col(i)) + ref.bias;
                    // Decisions agree wherever the reference is not on the margin boundary.
                    if (std::abs(ref_f) > 1e-3) {
                        EXPECT_EQ(f(i) > 0, ref_f > 0);
                    }
                }
            }
        }
    }
}

TEST(Smo, DualStaysFeasibleAndObjectiveIncreases) {
    const auto p = noisy_problem(25, 4, 0.5);
    const auto K = gram_rbf(p.X, p.X, 1.0);
    SvcOptions opts;
    opts.record_objective = true;
    const auto model = fit_binary(K, p.y, 2.0, opts);
    double balance = 0.0;
    for (std::size_t i = 0; i < model.alpha.size(); ++i) {
        EXPECT_GE(model.alpha[i], 0.0);
        EXPECT_LE(model.alpha[i], 2.0);
        balance += model.alpha[i] * p.y[i];
    }
    EXPECT_NEAR(balance, 0.0, 1e-10);
    for (std::size_t k = 1; k < model.objective_trace.size(); ++k) {
        EXPECT_GE(model.objective_trace[k], model.objective_trace[k - 1] - 1e-12);
    }
    EXPECT_NEAR(svm_dual_objective(K.values, p.y, model.alpha), model.dual_objective, 1e-10);
}

TEST(Smo, SeparableDataIsClassifiedPerfectly) {
    Samples X(6, 1);
    X << -3, -2, -1, 1, 2, 3;
    const std::vector<int> y{-1, -1, -1, 1, 1, 1};
    const auto K = gram_linear(X, X);
    const auto model = fit_binary(K, y, 100.0);
    EXPECT_EQ(predict_binary(model, K), Labels(y.begin(), y.end()));
    // Hard margin: w = 1, b = 0, support vectors at +-1.
    EXPECT_NEAR(decision_function(model, K)(2), -1.0, 1e-3);
    EXPECT_NEAR(model.bias, 0.0, 1e-3);
}

TEST(Smo, RejectsBadInput) {
    const auto p = noisy_problem(6, 5, 0.0);
    const auto K = gram_linear(p.X, p.X);
    EXPECT_THROW(fit_binary(K, p.y, 0.0), ConfigError);
    EXPECT_THROW(fit_binary(K, std::vector<int>{1, 1, 1, 1, 1, 1}, 1.0), DataError);
    EXPECT_THROW(fit_binary(K, std::vector<int>{0, 1, 0, 1, 0, 1}, 1.0), ConfigError);
    auto bad = K;
    bad.values(0, 1) = NAN;
    EXPECT_THROW(fit_binary(bad, p.y, 1.0), DataError);
    EXPECT_THROW(fit_binary(gram_linear(p.X.topRows(3), p.X), p.y, 1.0), ConfigError);
}

TEST(Smo, TestKernelIdsMustMatchTraining) {
    const auto p = noisy_problem(8, 6, 0.0);
    const auto K = gram_linear(p.X, p.X);
    const auto model = fit_binary(K, p.y, 1.0);
    auto K_test = gram_linear(p.X.topRows(2), p.X);
    EXPECT_NO_THROW(decision_function(model, K_test));
    K_test.col_ids[0] = 99;
    EXPECT_THROW(decision_function(model, K_test), ConfigError);
    EXPECT_THROW(decision_function(model, gram_linear(p.X, p.X.topRows(3))), ConfigError);
}

TEST(Smo, LabelMappingKeepsOriginalClasses) {
    Samples X(4, 1);
    X << 0, 0.1, 2, 2.1;
    const Labels y{3, 3, 7, 7};
    const auto K = gram_linear(X, X);
    const auto model = fit_binary_labels(K, y, 10.0);
    EXPECT_EQ(model.classes, (std::vector<int>{3, 7}));
    EXPECT_EQ(predict_binary(model, K), y);
    EXPECT_THROW(fit_binary_labels(K, Labels{1, 2, 3, 3}, 1.0), DataError);
}

TEST(Ovo, ThreeBlobsSeparate) {
    const auto ds = make_synthetic(SyntheticKind::Blobs, 90, 0.3, 7, 3);
    const auto K = gram_rbf(ds.X, ds.X, 1.0);
    const auto model = fit_ovo(K, ds.y, 1.0);
    EXPECT_EQ(model.classes, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(model.pairs.size(), 3u);
    EXPECT_EQ(accuracy(predict_ovo(model, K), ds.y), 1.0);
    EXPECT_EQ(fit_predict_multiclass(K, ds.y, 1.0, K), predict_ovo(model, K));
}

TEST(Ovo, BinaryReducesToSingleModel) {
    const auto p = noisy_problem(20, 8, 0.3);
    Labels y(p.y.begin(), p.y.end());
    const auto K = gram_rbf(p.X, p.X, 0.5);
    const auto ovo = fit_ovo(K, y, 1.0);
    ASSERT_EQ(ovo.pairs.size(), 1u);
    EXPECT_EQ(predict_ovo(ovo, K), predict_binary(fit_binary_labels(K, y, 1.0), K));
}

TEST(Accuracy, CountsMatches) {
    EXPECT_EQ(accuracy(Labels{1, 2, 3, 4}, Labels{1, 2, 0, 4}), 0.75);
    EXPECT_THROW(accuracy(Labels{1}, Labels{1, 2}), ConfigError);
}

TEST(Submatrix, KeepsIds) {
    Samples X(4, 1);
    X << 1, 2, 3, 4;
    const auto K = gram_linear(X, X);
    const auto S = submatrix(K, {1, 3}, {0, 2});
    EXPECT_EQ(S.values(1, 1), 12.0);
    EXPECT_EQ(S.row_ids, (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(S.col_ids, (std::vector<std::size_t>{0, 2}));
}

TEST(ModelJson, RoundTrip) {
    const auto p = noisy_problem(12, 9, 0.4);
    const auto K = gram_rbf(p.X, p.X, 1.0);
    const auto model = fit_binary(K, p.y, 3.0);
    const auto back = model_from_json(model_to_json(model));
    EXPECT_EQ(back.support_idx, model.support_idx);
    EXPECT_EQ(back.dual_coefs, model.dual_coefs);
    EXPECT_EQ(back.bias, model.bias);
    EXPECT_EQ(back.train_ids, model.train_ids);
    EXPECT_TRUE(decision_function(back, K) == decision_function(model, K));
    EXPECT_THROW(model_from_json("not json"), DataError);
}
