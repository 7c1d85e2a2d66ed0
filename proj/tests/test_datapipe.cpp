#include "qkbench/datapipe.hpp"
#include "qkbench/errors.hpp"
#include "qkbench/random.hpp"
#include "qkbench/svm.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

using namespace qkbench;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string &name, const std::string &text) {
    const auto path = fs::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

std::map<int, int> counts(const Labels &y, const std::vector<std::size_t> &idx) {
    std::map<int, int> c;
    for (auto i : idx) ++c[y[i]];
    return c;
}

Samples random_samples(Eigen::Index m, Eigen::Index d, Rng &rng) {
    Samples X(m, d);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal() * (j + 1);
    return X;
}

}  // namespace

TEST(Csv, ParsesMissingCellsAndTextLabels) {
    const auto path = write_temp("qkbench_csv_ok.csv", "a,b,label\n1,2,cat\n,4,dog\n5,NA,cat\n7,8,dog\n");
    const auto ds = load_csv(path);
    fs::remove(path);
    ASSERT_EQ(ds.size(), 4u);
    EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(ds.class_names, (std::vector<std::string>{"cat", "dog"}));
    EXPECT_EQ(ds.y, (Labels{0, 1, 0, 1}));
    EXPECT_TRUE(std::isnan(ds.X(1, 0)));
    EXPECT_TRUE(std::isnan(ds.X(2, 1)));
    EXPECT_EQ(ds.X(3, 1), 8.0);
    EXPECT_TRUE(ds.has_missing());
}

TEST(Csv, IntegerLabelsAndDelimiter) {
    const auto path = write_temp("qkbench_csv_int.csv", "y;x\n4;0.5\n-1;1.5\n");
    const auto ds = load_csv(path, CsvOptions{"y", ';'});
    fs::remove(path);
    EXPECT_EQ(ds.y, (Labels{4, -1}));
    EXPECT_TRUE(ds.class_names.empty());
    EXPECT_EQ(ds.X(1, 0), 1.5);
}

TEST(Csv, Errors) {
    EXPECT_THROW(load_csv("/nonexistent/file.csv"), DataError);
    const auto no_label = write_temp("qkbench_csv_nolabel.csv", "a,b\n1,2\n");
    EXPECT_THROW(load_csv(no_label), DataError);
    fs::remove(no_label);
    const auto ragged = write_temp("qkbench_csv_ragged.csv", "a,label\n1,0\n2\n");
    EXPECT_THROW(load_csv(ragged), DataError);
    fs::remove(ragged);
    const auto bad = write_temp("qkbench_csv_bad.csv", "a,label\nxyz,0\n");
    EXPECT_THROW(load_csv(bad), DataError);
    fs::remove(bad);
    const auto missing_label = write_temp("qkbench_csv_misslabel.csv", "a,label\n1,\n");
    EXPECT_THROW(load_csv(missing_label), DataError);
    fs::remove(missing_label);
}

TEST(DatasetCache, RoundTrip) {
    const auto ds = make_synthetic(SyntheticKind::TwoMoons, 20, 0.1, 3);
    const auto dir = fs::temp_directory_path() / "qkbench_cache_test";
    fs::remove_all(dir);
    save_dataset_cache(ds, dir);
    const auto back = load_dataset_cache(dir);
    fs::remove_all(dir);
    EXPECT_TRUE(back.X == ds.X);
    EXPECT_EQ(back.y, ds.y);
}

TEST(Impute, UsesTrainMedians) {
    Samples tr(4, 2), te(2, 2);
    tr << 1, NAN, 3, 10, 100, 20, NAN, 40;
    te << NAN, NAN, 5, 6;
    const auto [a, b] = impute_median(tr, te);
    EXPECT_EQ(a(3, 0), 3.0);   // median of {1, 3, 100}
    EXPECT_EQ(a(0, 1), 20.0);  // median of {10, 20, 40}
    EXPECT_EQ(b(0, 0), 3.0);
    EXPECT_EQ(b(0, 1), 20.0);
    EXPECT_EQ(b(1, 1), 6.0);
    Samples all_missing(2, 1);
    all_missing << NAN, NAN;
    EXPECT_THROW(impute_median(all_missing, all_missing), DataError);
}

TEST(Scalers, MinMaxAndStandard) {
    Samples tr(3, 2), te(1, 2);
    tr << 0, 5, 5, 5, 10, 5;
    te << 20, 7;
    const auto [a, b] = scale_minmax(tr, te);
    EXPECT_EQ(a(1, 0), 0.5);
    EXPECT_EQ(b(0, 0), 2.0);  // test data may leave [0, 1]
    EXPECT_EQ(a(2, 1), 0.0);  // constant feature
    const auto [c, d] = scale_standard(tr, te);
    EXPECT_NEAR(c.col(0).mean(), 0.0, 1e-15);
    EXPECT_NEAR(c.col(0).squaredNorm() / 3.0, 1.0, 1e-14);
    EXPECT_EQ(c(0, 1), 0.0);
    EXPECT_NEAR(d(0, 0), (20.0 - 5.0) / std::sqrt(50.0 / 3.0), 1e-13);
}

TEST(Pca, MatchesJacobiEigenvectors) {
    Rng rng(4);
    const auto X = random_samples(40, 4, rng);
    const auto model = fit_pca(X, 4);
    const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
    const Eigen::MatrixXd cov = Xc.transpose() * Xc / 39.0;
    Eigen::VectorXd ev;
    Eigen::MatrixXd vec;
    oracle::jacobi_eigen(cov, ev, vec);
    for (int k = 0; k < 4; ++k) {
        EXPECT_NEAR(model.eigenvalues(k), ev(k), 1e-10 * ev(0));
        EXPECT_NEAR(std::abs(model.components.col(k).dot(vec.col(k))), 1.0, 1e-9);
    }
    EXPECT_TRUE((model.components.transpose() * model.components).isIdentity(1e-12));
    EXPECT_NEAR(model.cumulative_ratio(3), 1.0, 1e-14);
    // Full-rank projection reconstructs the input.
    EXPECT_LT((model.inverse_transform(model.transform(X)) - X).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(fit_pca(X, 5), ConfigError);
}

TEST(Pca, ComponentSelection) {
    Eigen::VectorXd cum(4);
    cum << 0.6, 0.9, 0.95, 1.0;
    EXPECT_EQ(components_for_variance(cum, 0.9), 2);
    EXPECT_EQ(components_for_variance(cum, 0.91), 3);
    EXPECT_EQ(components_for_variance(cum, 1.0), 4);
    EXPECT_EQ(elbow_components(cum), 2);
    EXPECT_THROW(components_for_variance(cum, 0.0), ConfigError);
}

TEST(Pca, FitsOnTrainOnly) {
    Rng rng(5);
    const auto tr = random_samples(20, 3, rng);
    Samples te = random_samples(5, 3, rng);
    PcaSelection sel;
    sel.mode = PcaSelection::Mode::Components;
    sel.components = 2;
    const auto a = pca_fit_transform(tr, te, sel);
    te.array() += 1000.0;
    const auto b = pca_fit_transform(tr, te, sel);
    EXPECT_TRUE(a.train == b.train);
    EXPECT_TRUE(a.model.components == b.model.components);
    EXPECT_EQ(a.train.cols(), 2);
}

TEST(Split, WorkedExample) {
    const Labels y{0, 0, 0, 0, 1, 1, 1, 1};
    const auto s = stratified_split(y, 0.75, 1);
    EXPECT_EQ(s.train.size(), 6u);
    EXPECT_EQ(s.test.size(), 2u);
    EXPECT_EQ(counts(y, s.train), (std::map<int, int>{{0, 3}, {1, 3}}));
    EXPECT_EQ(counts(y, s.test), (std::map<int, int>{{0, 1}, {1, 1}}));
    EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
}

TEST(Split, ProportionsPartitionAndDeterminism) {
    Rng rng(6);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t m = 10 + rng.below(60);
        Labels y(m);
        for (auto &v : y) v = static_cast<int>(rng.below(3));
        y[0] = 0, y[1] = 0, y[2] = 1, y[3] = 1, y[4] = 2, y[5] = 2;
        const double frac = rng.uniform(0.3, 0.9);
        const auto s = stratified_split(y, frac, rep);
        const auto target = static_cast<std::size_t>(std::ceil((1.0 - frac) * m - 1e-9));
        if (target >= 3 && m - target >= 3) {
            EXPECT_EQ(s.test.size(), target);
        }
        EXPECT_EQ(counts(y, s.test).size(), 3u);
        EXPECT_EQ(counts(y, s.train).size(), 3u);
        std::vector<std::size_t> all(s.train);
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < m; ++i) ASSERT_EQ(all[i], i);
        const auto total = counts(y, all), tc = counts(y, s.test);
        for (const auto &[label, n] : total) {
            const double expected = static_cast<double>(n) * s.test.size() / m;
            const int got = tc.count(label) ? tc.at(label) : 0;
            EXPECT_LE(std::abs(got - expected), 1.0 + 1e-9);
        }
        EXPECT_EQ(stratified_split(y, frac, rep).train, s.train);
    }
}

TEST(Split, Errors) {
    EXPECT_THROW(stratified_split(Labels{0, 0, 1}, 0.5, 1), DataError);
    EXPECT_THROW(stratified_split(Labels{0, 0, 1, 1}, 1.0, 1), ConfigError);
    EXPECT_NO_THROW(stratified_split(Labels{0, 0, 1}, 0.5, 1, false));
}

TEST(Sample, CapAndProportions) {
    Labels y(60, 0);
    std::fill(y.begin() + 40, y.end(), 1);
    const auto idx = stratified_sample(y, 30, 7);
    EXPECT_EQ(idx.size(), 30u);
    EXPECT_EQ(counts(y, idx), (std::map<int, int>{{0, 20}, {1, 10}}));
    EXPECT_EQ(stratified_sample(y, 100, 7).size(), 60u);
    EXPECT_THROW(stratified_sample(y, 0, 7), ConfigError);
}

TEST(Prepare, CapsAndScalesOnTrain) {
    const auto ds = make_synthetic(SyntheticKind::TwoMoons, 200, 0.1, 8);
    PipelineSpec spec;
    spec.train_cap = 50;
    spec.test_cap = 20;
    const auto p = prepare(ds, spec);
    EXPECT_EQ(p.train.size(), 50u);
    EXPECT_EQ(p.test.size(), 20u);
    EXPECT_NEAR(p.train.X.minCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(p.train.X.maxCoeff(), 1.0, 1e-15);
    const auto again = prepare(ds, spec);
    EXPECT_TRUE(again.test.X == p.test.X);
}

TEST(Prepare, MissingValuesNeedImputation) {
    auto ds = make_synthetic(SyntheticKind::Blobs, 40, 0.2, 9);
    ds.X(3, 1) = NAN;
    PipelineSpec spec;
    EXPECT_THROW(prepare(ds, spec), DataError);
    spec.impute = Imputer::Median;
    EXPECT_TRUE(prepare(ds, spec).train.X.allFinite());
}

TEST(Synthetic, DeterministicShapes) {
    for (auto kind : {SyntheticKind::TwoMoons, SyntheticKind::Blobs, SyntheticKind::XorRings}) {
        const auto a = make_synthetic(kind, 50, 0.1, 11), b = make_synthetic(kind, 50, 0.1, 11);
        EXPECT_TRUE(a.X == b.X);
        EXPECT_EQ(a.y, b.y);
        EXPECT_EQ(a.X.rows(), 50);
        EXPECT_EQ(a.X.cols(), 2);
        EXPECT_EQ(distinct_labels(a.y), (std::vector<int>{0, 1}));
        EXPECT_EQ(parse_synthetic_kind(to_string(kind)), kind);
    }
    EXPECT_THROW(parse_synthetic_kind("spirals"), ConfigError);
}

TEST(Synthetic, BlobsAreLinearlySeparable) {
    const auto ds = make_synthetic(SyntheticKind::Blobs, 100, 0.3, 12);
    const auto K = gram_linear(ds.X, ds.X);
    EXPECT_EQ(accuracy(fit_predict_multiclass(K, ds.y, 10.0, K), ds.y), 1.0);
}

TEST(LearningCurve, OnePointPerSize) {
    const auto ds = make_synthetic(SyntheticKind::TwoMoons, 120, 0.1, 13);
    PipelineSpec spec;
    const auto p = prepare(ds, spec);
    const auto pts = learning_curve(p.train, p.test, {20, 40, 90}, {1.0, 10.0}, {Gamma::parse("scale")}, 1);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_EQ(pts[2].size, 90u);
    for (const auto &pt : pts) {
        EXPECT_GE(pt.test_accuracy, 0.5);
        EXPECT_GT(pt.gamma, 0.0);
    }
    EXPECT_THROW(learning_curve(p.train, p.test, {1000}, {1.0}, {Gamma::parse("1")}, 1), ConfigError);
}
