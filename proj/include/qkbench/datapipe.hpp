#pragma once

#include "qkbench/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qkbench {

using Labels = std::vector<int>;

/// Feature matrix (one sample per row, NaN marks a missing cell) plus integer labels.
struct Dataset {
    Samples X;
    Labels y;
    std::vector<std::string> feature_names;
    /// Original label text per class id when the label column was not integral.
    std::vector<std::string> class_names;
    std::string provenance;

    std::size_t size() const { return y.size(); }
    std::size_t n_features() const { return static_cast<std::size_t>(X.cols()); }
    bool has_missing() const;
    Dataset subset(const std::vector<std::size_t> &idx) const;
};

/// Sorted distinct labels.
std::vector<int> distinct_labels(const Labels &y);

// ---------------------------------------------------------------- ingestion

struct CsvOptions {
    std::string label_column = "label";
    char delimiter = ',';
};

/// Header row required. Empty cells and NA/NaN/? become NaN in X; the label column
/// may not be missing. Integer labels are kept as-is, anything else is mapped to
/// 0..C-1 in sorted order of the label text.
Dataset load_csv(const std::filesystem::path &path, const CsvOptions &opts = {});

/// Binary matrix (`X.bin`, little-endian float64, row-major) plus `manifest.json`.
void save_dataset_cache(const Dataset &ds, const std::filesystem::path &dir);
Dataset load_dataset_cache(const std::filesystem::path &dir);

// ---------------------------------------------------------------- transforms

/// Fills NaNs with per-feature medians of the train rows only.
std::pair<Samples, Samples> impute_median(const Samples &X_train, const Samples &X_test);

/// Affine per-feature map x -> (x - offset) * factor.
struct FittedScaler {
    Eigen::RowVectorXd offset;
    Eigen::RowVectorXd factor;
    Samples transform(const Samples &X) const;
};

/// Train range onto [0, 1]; constant features map to 0.
FittedScaler fit_minmax(const Samples &X_train);
/// Zero mean, unit population (ddof = 0) variance; zero-variance features map to 0.
FittedScaler fit_standard(const Samples &X_train);

std::pair<Samples, Samples> scale_minmax(const Samples &X_train, const Samples &X_test);
std::pair<Samples, Samples> scale_standard(const Samples &X_train, const Samples &X_test);

struct PcaModel {
    Eigen::RowVectorXd mean;
    /// d x k, orthonormal columns ordered by decreasing eigenvalue.
    Eigen::MatrixXd components;
    /// All covariance eigenvalues, descending.
    Eigen::VectorXd eigenvalues;
    /// cumulative_ratio[k-1] = share of variance in the first k components.
    Eigen::VectorXd cumulative_ratio;

    Samples transform(const Samples &X) const;
    Samples inverse_transform(const Samples &Z) const;
};

/// Full eigen-spectrum of the train covariance, keeping `n_components` directions.
PcaModel fit_pca(const Samples &X_train, int n_components);

/// Smallest k whose cumulative explained-variance ratio reaches `threshold`.
int components_for_variance(const Eigen::VectorXd &cumulative_ratio, double threshold);
/// Knee of the cumulative curve: the k farthest above the chord from k=1 to k=d.
int elbow_components(const Eigen::VectorXd &cumulative_ratio);

struct PcaSelection {
    enum class Mode { None, Components, Variance, Elbow };
    Mode mode = Mode::None;
    int components = 0;
    double variance = 0.95;
};

struct PcaResult {
    Samples train;
    Samples test;
    PcaModel model;
};

PcaResult pca_fit_transform(const Samples &X_train, const Samples &X_test, const PcaSelection &sel);

// ---------------------------------------------------------------- splitting

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Test size is ceil((1 - train_fraction) m). With `stratify`, every class keeps its
/// proportion to within one sample on both sides and needs at least two members;
/// each class keeps one member per side even if that moves the test size off target.
/// Indices come back sorted.
SplitIndices stratified_split(const Labels &y, double train_fraction, std::uint64_t seed,
                              bool stratify = true);

/// min(cap, m) indices with class proportions preserved to within one sample. Sorted.
std::vector<std::size_t> stratified_sample(const Labels &y, std::size_t cap, std::uint64_t seed);

// ---------------------------------------------------------------- pipeline

enum class Imputer { None, Median };
enum class Scaler { None, MinMax, Standard };

struct PipelineSpec {
    Imputer impute = Imputer::None;
    Scaler scaler = Scaler::MinMax;
    PcaSelection pca;
    double train_fraction = 0.75;
    std::optional<std::size_t> train_cap;
    std::optional<std::size_t> test_cap;
    bool stratify = true;
    std::uint64_t seed = 42;

    void validate() const;
};

struct PreparedData {
    Dataset train;
    Dataset test;
    std::optional<PcaModel> pca;
};

/// Split -> sample caps -> median impute -> PCA -> scaling; every statistic fitted on
/// the train part only.
PreparedData prepare(const Dataset &ds, const PipelineSpec &spec);

// ---------------------------------------------------------------- synthetic data

enum class SyntheticKind { TwoMoons, Blobs, XorRings };

SyntheticKind parse_synthetic_kind(const std::string &name);
std::string to_string(SyntheticKind kind);

/**
 * two_moons: interleaved half circles. blobs: `n_classes` isotropic clusters on a
 * circle of radius 3 with standard deviation `noise`. xor_rings: two concentric
 * rings (radius 1 for class 0, 0.5 for class 1). Gaussian noise of std `noise` is
 * added to every coordinate and the sample order is shuffled.
 */
Dataset make_synthetic(SyntheticKind kind, std::size_t m, double noise, std::uint64_t seed,
                       int n_classes = 2);

// ---------------------------------------------------------------- analysis

struct LearningCurvePoint {
    std::size_t size;
    double test_accuracy;
    double C;
    double gamma;
};

/// RBF-SVC proxy: for each size, a stratified subsample of `train` is grid-searched
/// over (C, gamma), refit and scored on `test`.
std::vector<LearningCurvePoint> learning_curve(const Dataset &train, const Dataset &test,
                                               const std::vector<std::size_t> &sizes,
                                               const std::vector<double> &C_grid,
                                               const std::vector<Gamma> &gamma_grid,
                                               std::uint64_t seed);

}  // namespace qkbench
