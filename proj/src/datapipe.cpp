#include "qkbench/datapipe.hpp"

#include "qkbench/errors.hpp"
#include "qkbench/random.hpp"
#include "qkbench/search.hpp"
#include "qkbench/svm.hpp"
#include "qkbench/util.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>

namespace qkbench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string &line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == delim) {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool is_missing_token(const std::string &s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "?" || s == "null";
}

bool parse_double(const std::string &s, double &out) {
    const char *first = s.data();
    const char *last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Largest-remainder apportionment of `total` over classes with sizes `counts`.
std::vector<std::size_t> apportion(const std::vector<std::size_t> &counts, std::size_t total) {
    std::size_t m = 0;
    for (auto c : counts) m += c;
    std::vector<std::size_t> out(counts.size(), 0);
    if (m == 0) return out;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double exact = static_cast<double>(total) * static_cast<double>(counts[k]) / static_cast<double>(m);
        out[k] = std::min(counts[k], static_cast<std::size_t>(std::floor(exact)));
        assigned += out[k];
        remainders.emplace_back(exact - std::floor(exact), k);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto &a, const auto &b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total && r < remainders.size(); ++r) {
        const auto k = remainders[r].second;
        if (out[k] < counts[k]) {
            ++out[k];
            ++assigned;
        }
    }
    return out;
}

std::map<int, std::vector<std::size_t>> members_by_class(const Labels &y) {
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t t = 0; t < y.size(); ++t) members[y[t]].push_back(t);
    return members;
}

}  // namespace

bool Dataset::has_missing() const { return X.hasNaN(); }

Dataset Dataset::subset(const std::vector<std::size_t> &idx) const {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
    out.y.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= y.size()) throw ConfigError("subset index out of range");
        out.X.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
        out.y.push_back(y[idx[r]]);
    }
    out.feature_names = feature_names;
    out.class_names = class_names;
    out.provenance = provenance;
    return out;
}

std::vector<int> distinct_labels(const Labels &y) {
    std::set<int> s(y.begin(), y.end());
    return {s.begin(), s.end()};
}

Dataset load_csv(const std::filesystem::path &path, const CsvOptions &opts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + " is empty");
    auto header = split_csv_line(line, opts.delimiter);
    for (auto &h : header) h = trim(h);
    const auto label_it = std::find(header.begin(), header.end(), opts.label_column);
    if (label_it == header.end()) {
        throw DataError("label column '" + opts.label_column + "' not found in " + path.string());
    }
    const auto label_col = static_cast<std::size_t>(label_it - header.begin());

    Dataset ds;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_col) ds.feature_names.push_back(header[c]);
    }
    const std::size_t d = ds.feature_names.size();
    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line, opts.delimiter);
        if (cells.size() != header.size()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(d);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            if (c == label_col) {
                if (is_missing_token(cell)) {
                    throw DataError(path.string() + ":" + std::to_string(line_no) + ": missing label");
                }
                raw_labels.push_back(cell);
                continue;
            }
            double v = kNaN;
            if (!is_missing_token(cell) && !parse_double(cell, v)) {
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                                cell + "' in column '" + header[c] + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < d; ++c) ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }

    bool integral = true;
    std::vector<int> ints;
    for (const auto &s : raw_labels) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            integral = false;
            break;
        }
        ints.push_back(v);
    }
    if (integral) {
        ds.y = std::move(ints);
    } else {
        std::set<std::string> names(raw_labels.begin(), raw_labels.end());
        ds.class_names.assign(names.begin(), names.end());
        for (const auto &s : raw_labels) {
            ds.y.push_back(static_cast<int>(
                std::lower_bound(ds.class_names.begin(), ds.class_names.end(), s) - ds.class_names.begin()));
        }
    }
    ds.provenance = "csv:" + path.string();
    return ds;
}

void save_dataset_cache(const Dataset &ds, const std::filesystem::path &dir) {
    static_assert(std::endian::native == std::endian::little, "cache format is little-endian");
    std::filesystem::create_directories(dir);
    std::ofstream bin(dir / "X.bin", std::ios::binary);
    if (!bin) throw DataError("cannot write cache in " + dir.string());
    for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
        for (Eigen::Index c = 0; c < ds.X.cols(); ++c) {
            const double v = ds.X(r, c);
            bin.write(reinterpret_cast<const char *>(&v), sizeof v);
        }
    }
    nlohmann::json manifest;
    manifest["format"] = "qkbench-dataset/1";
    manifest["rows"] = ds.X.rows();
    manifest["cols"] = ds.X.cols();
    manifest["labels"] = ds.y;
    manifest["feature_names"] = ds.feature_names;
    manifest["class_names"] = ds.class_names;
    manifest["provenance"] = ds.provenance;
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

Dataset load_dataset_cache(const std::filesystem::path &dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw DataError("no dataset manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(mf);
    } catch (const nlohmann::json::exception &e) {
        throw DataError("bad dataset manifest: " + std::string(e.what()));
    }
    Dataset ds;
    const auto rows = manifest.at("rows").get<Eigen::Index>();
    const auto cols = manifest.at("cols").get<Eigen::Index>();
    ds.y = manifest.at("labels").get<Labels>();
    ds.feature_names = manifest.at("feature_names").get<std::vector<std::string>>();
    ds.class_names = manifest.at("class_names").get<std::vector<std::string>>();
    ds.provenance = manifest.at("provenance").get<std::string>();
    ds.X.resize(rows, cols);
    std::ifstream bin(dir / "X.bin", std::ios::binary);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double v = 0.0;
            if (!bin.read(reinterpret_cast<char *>(&v), sizeof v)) throw DataError("dataset cache truncated");
            ds.X(r, c) = v;
        }
    }
    if (ds.y.size() != static_cast<std::size_t>(rows)) throw DataError("label count mismatch in cache");
    return ds;
}

std::pair<Samples, Samples> impute_median(const Samples &X_train, const Samples &X_test) {
    Samples tr = X_train, te = X_test;
    for (Eigen::Index c = 0; c < X_train.cols(); ++c) {
        std::vector<double> present;
        for (Eigen::Index r = 0; r < X_train.rows(); ++r) {
            if (!std::isnan(X_train(r, c))) present.push_back(X_train(r, c));
        }
        const bool needs = X_train.col(c).hasNaN() || (X_test.cols() > c && X_test.col(c).hasNaN());
        if (!needs) continue;
        if (present.empty()) {
            throw DataError("feature " + std::to_string(c) + " is missing in every training row");
        }
        const double med = median_of(std::move(present));
        for (Eigen::Index r = 0; r < tr.rows(); ++r) {
            if (std::isnan(tr(r, c))) tr(r, c) = med;
        }
        for (Eigen::Index r = 0; r < te.rows(); ++r) {
            if (std::isnan(te(r, c))) te(r, c) = med;
        }
    }
    return {tr, te};
}

Samples FittedScaler::transform(const Samples &X) const {
    Samples out = X;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        out.col(c) = (X.col(c).array() - offset(c)) * factor(c);
    }
    return out;
}

FittedScaler fit_minmax(const Samples &X_train) {
    if (X_train.rows() == 0) throw DataError("cannot fit a scaler on zero rows");
    FittedScaler s;
    s.offset = X_train.colwise().minCoeff();
    const Eigen::RowVectorXd range = X_train.colwise().maxCoeff() - s.offset;
    s.factor = range.unaryExpr([](double r) { return r > 0.0 ? 1.0 / r : 0.0; });
    return s;
}

FittedScaler fit_standard(const Samples &X_train) {
    if (X_train.rows() == 0) throw DataError("cannot fit a scaler on zero rows");
    FittedScaler s;
    s.offset = X_train.colwise().mean();
    const Eigen::RowVectorXd var =
        (X_train.rowwise() - s.offset).array().square().colwise().sum() / static_cast<double>(X_train.rows());
    s.factor = var.unaryExpr([](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0; });
    return s;
}

std::pair<Samples, Samples> scale_minmax(const Samples &X_train, const Samples &X_test) {
    const auto s = fit_minmax(X_train);
    return {s.transform(X_train), s.transform(X_test)};
}

std::pair<Samples, Samples> scale_standard(const Samples &X_train, const Samples &X_test) {
    const auto s = fit_standard(X_train);
    return {s.transform(X_train), s.transform(X_test)};
}

Samples PcaModel::transform(const Samples &X) const { return (X.rowwise() - mean) * components; }

Samples PcaModel::inverse_transform(const Samples &Z) const {
    return (Z * components.transpose()).rowwise() + mean;
}

PcaModel fit_pca(const Samples &X_train, int n_components) {
    const Eigen::Index m = X_train.rows(), d = X_train.cols();
    if (m < 2) throw DataError("PCA needs at least two samples");
    if (n_components < 1 || n_components > std::min(m - 1, d)) {
        throw ConfigError("PCA components " + std::to_string(n_components) + " outside [1, min(m-1, d) = " +
                          std::to_string(std::min(m - 1, d)) + "]");
    }
    PcaModel model;
    model.mean = X_train.colwise().mean();
    const Samples centered = X_train.rowwise() - model.mean;
    Eigen::MatrixXd vectors(d, d);
    Eigen::VectorXd values = Eigen::VectorXd::Zero(d);
    if (d <= 512) {
        const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(m - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        if (es.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
        // ascending -> descending
        vectors = es.eigenvectors().rowwise().reverse();
        values = es.eigenvalues().reverse();
    } else {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
        const auto &sv = svd.singularValues();
        vectors = Eigen::MatrixXd::Zero(d, d);
        vectors.leftCols(sv.size()) = svd.matrixV();
        for (Eigen::Index k = 0; k < sv.size(); ++k) values(k) = sv(k) * sv(k) / static_cast<double>(m - 1);
    }
    values = values.cwiseMax(0.0);
    model.eigenvalues = values;
    const double total = values.sum();
    model.cumulative_ratio.resize(d);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        acc += values(k);
        model.cumulative_ratio(k) = total > 0.0 ? acc / total : 1.0;
    }
    model.components = vectors.leftCols(n_components);
    for (Eigen::Index k = 0; k < n_components; ++k) {
        Eigen::Index arg = 0;
        model.components.col(k).cwiseAbs().maxCoeff(&arg);
        if (model.components(arg, k) < 0.0) model.components.col(k) *= -1.0;
    }
    return model;
}

int components_for_variance(const Eigen::VectorXd &cumulative_ratio, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("variance threshold must be in (0, 1]");
    for (Eigen::Index k = 0; k < cumulative_ratio.size(); ++k) {
        if (cumulative_ratio(k) >= threshold - 1e-12) return static_cast<int>(k + 1);
    }
    return static_cast<int>(cumulative_ratio.size());
}

int elbow_components(const Eigen::VectorXd &cumulative_ratio) {
    const Eigen::Index d = cumulative_ratio.size();
    if (d <= 2) return 1;
    const double y0 = cumulative_ratio(0), y1 = cumulative_ratio(d - 1);
    int best = 1;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < d; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(d - 1);
        const double gap = cumulative_ratio(k) - (y0 + t * (y1 - y0));
        if (gap > best_gap + 1e-15) {
            best_gap = gap;
            best = static_cast<int>(k + 1);
        }
    }
    return best;
}

PcaResult pca_fit_transform(const Samples &X_train, const Samples &X_test, const PcaSelection &sel) {
    const int max_k = static_cast<int>(std::min(X_train.rows() - 1, X_train.cols()));
    int k = 0;
    switch (sel.mode) {
        case PcaSelection::Mode::None:
            k = max_k;
            break;
        case PcaSelection::Mode::Components:
            k = sel.components;
            break;
        case PcaSelection::Mode::Variance:
        case PcaSelection::Mode::Elbow: {
            const auto full = fit_pca(X_train, max_k);
            k = sel.mode == PcaSelection::Mode::Variance
                    ? components_for_variance(full.cumulative_ratio, sel.variance)
                    : elbow_components(full.cumulative_ratio);
            k = std::min(k, max_k);
            break;
        }
    }
    PcaResult out;
    out.model = fit_pca(X_train, k);
    out.train = out.model.transform(X_train);
    out.test = X_test.rows() > 0 ? out.model.transform(X_test) : Samples(0, k);
    return out;
}

SplitIndices stratified_split(const Labels &y, double train_fraction, std::uint64_t seed, bool stratify) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie in (0, 1)");
    }
    const std::size_t m = y.size();
    const auto n_test = static_cast<std::size_t>(std::ceil((1.0 - train_fraction) * static_cast<double>(m) - 1e-9));
    if (n_test == 0 || n_test >= m) throw DataError("split leaves an empty train or test part");
    const std::size_t n_train = m - n_test;
    Rng rng(seed);
    SplitIndices out;
    if (!stratify) {
        std::vector<std::size_t> idx(m);
        for (std::size_t t = 0; t < m; ++t) idx[t] = t;
        rng.shuffle(std::span<std::size_t>(idx));
        out.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    } else {
        auto members = members_by_class(y);
        std::vector<std::size_t> counts;
        for (const auto &[label, idx] : members) {
            if (idx.size() < 2) {
                throw DataError("class " + std::to_string(label) + " has a single member; cannot stratify");
            }
            counts.push_back(idx.size());
        }
        auto quota = apportion(counts, n_train);
        // Every class needs a member on both sides.
        for (std::size_t k = 0; k < quota.size(); ++k) {
            quota[k] = std::clamp<std::size_t>(quota[k], 1, counts[k] - 1);
        }
        std::size_t k = 0;
        for (auto &[label, idx] : members) {
            rng.shuffle(std::span<std::size_t>(idx));
            out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[k]));
            out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(quota[k]), idx.end());
            ++k;
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::vector<std::size_t> stratified_sample(const Labels &y, std::size_t cap, std::uint64_t seed) {
    if (cap == 0) throw ConfigError("sample cap must be >= 1");
    std::vector<std::size_t> out;
    if (cap >= y.size()) {
        out.resize(y.size());
        for (std::size_t t = 0; t < y.size(); ++t) out[t] = t;
        return out;
    }
    auto members = members_by_class(y);
    std::vector<std::size_t> counts;
    for (const auto &[label, idx] : members) counts.push_back(idx.size());
    const auto quota = apportion(counts, cap);
    Rng rng(seed);
    std::size_t k = 0;
    for (auto &[label, idx] : members) {
        rng.shuffle(std::span<std::size_t>(idx));
        out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[k]));
        ++k;
    }
    std::sort(out.begin(), out.end());
    return out;
}

void PipelineSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("pipeline.train_fraction must lie in (0, 1)");
    }
    if (train_cap && *train_cap < 1) throw ConfigError("pipeline.train_cap must be >= 1");
    if (test_cap && *test_cap < 1) throw ConfigError("pipeline.test_cap must be >= 1");
    if (pca.mode == PcaSelection::Mode::Components && pca.components < 1) {
        throw ConfigError("pipeline.pca.components must be >= 1");
    }
    if (pca.mode == PcaSelection::Mode::Variance && !(pca.variance > 0.0 && pca.variance <= 1.0)) {
        throw ConfigError("pipeline.pca.variance must lie in (0, 1]");
    }
}

PreparedData prepare(const Dataset &ds, const PipelineSpec &spec) {
    spec.validate();
    if (ds.size() != static_cast<std::size_t>(ds.X.rows())) throw DataError("label count differs from row count");
    const auto split = stratified_split(ds.y, spec.train_fraction, spec.seed, spec.stratify);
    PreparedData out;
    out.train = ds.subset(split.train);
    out.test = ds.subset(split.test);

    auto cap = [&](Dataset &part, std::optional<std::size_t> limit) {
        if (!limit || *limit >= part.size()) return;
        std::vector<std::size_t> idx;
        if (spec.stratify) {
            idx = stratified_sample(part.y, *limit, spec.seed);
        } else {
            idx.resize(part.size());
            for (std::size_t t = 0; t < idx.size(); ++t) idx[t] = t;
            Rng rng(spec.seed);
            rng.shuffle(std::span<std::size_t>(idx));
            idx.resize(*limit);
            std::sort(idx.begin(), idx.end());
        }
        part = part.subset(idx);
    };
    cap(out.train, spec.train_cap);
    cap(out.test, spec.test_cap);

    if (spec.impute == Imputer::Median) {
        std::tie(out.train.X, out.test.X) = impute_median(out.train.X, out.test.X);
    } else if (out.train.has_missing() || out.test.has_missing()) {
        throw DataError("dataset has missing values; enable median imputation");
    }

    if (spec.pca.mode != PcaSelection::Mode::None) {
        auto pca = pca_fit_transform(out.train.X, out.test.X, spec.pca);
        out.train.X = std::move(pca.train);
        out.test.X = std::move(pca.test);
        out.train.feature_names.clear();
        for (Eigen::Index k = 0; k < out.train.X.cols(); ++k) out.train.feature_names.push_back("pc" + std::to_string(k + 1));
        out.test.feature_names = out.train.feature_names;
        out.pca = std::move(pca.model);
    }

    if (spec.scaler != Scaler::None) {
        const auto scaler = spec.scaler == Scaler::MinMax ? fit_minmax(out.train.X) : fit_standard(out.train.X);
        out.train.X = scaler.transform(out.train.X);
        out.test.X = scaler.transform(out.test.X);
    }
    if (!out.train.X.allFinite() || !out.test.X.allFinite()) {
        throw DataError("non-finite values remain after preprocessing");
    }
    return out;
}

SyntheticKind parse_synthetic_kind(const std::string &name) {
    if (name == "two_moons") return SyntheticKind::TwoMoons;
    if (name == "blobs") return SyntheticKind::Blobs;
    if (name == "xor_rings") return SyntheticKind::XorRings;
    throw ConfigError("unknown synthetic dataset '" + name + "'");
}

std::string to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::TwoMoons: return "two_moons";
        case SyntheticKind::Blobs: return "blobs";
        case SyntheticKind::XorRings: return "xor_rings";
    }
    return "two_moons";
}

Dataset make_synthetic(SyntheticKind kind, std::size_t m, double noise, std::uint64_t seed, int n_classes) {
    if (m < 4) throw ConfigError("synthetic datasets need m >= 4");
    if (!(noise >= 0.0)) throw ConfigError("synthetic noise must be >= 0");
    constexpr double pi = std::numbers::pi;
    Rng rng(seed);
    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(m), 2);
    ds.y.resize(m);
    auto put = [&](std::size_t t, double a, double b, int label) {
        ds.X(static_cast<Eigen::Index>(t), 0) = a;
        ds.X(static_cast<Eigen::Index>(t), 1) = b;
        ds.y[t] = label;
    };
    switch (kind) {
        case SyntheticKind::TwoMoons: {
            const std::size_t n_out = m / 2, n_in = m - n_out;
            for (std::size_t k = 0; k < n_out; ++k) {
                const double t = n_out > 1 ? pi * static_cast<double>(k) / static_cast<double>(n_out - 1) : 0.0;
                put(k, std::cos(t), std::sin(t), 0);
            }
            for (std::size_t k = 0; k < n_in; ++k) {
                const double t = n_in > 1 ? pi * static_cast<double>(k) / static_cast<double>(n_in - 1) : 0.0;
                put(n_out + k, 1.0 - std::cos(t), 0.5 - std::sin(t), 1);
            }
            break;
        }
        case SyntheticKind::Blobs: {
            if (n_classes < 2) throw ConfigError("blobs need at least two classes");
            for (std::size_t t = 0; t < m; ++t) {
                const int c = static_cast<int>(t % static_cast<std::size_t>(n_classes));
                const double ang = 2.0 * pi * c / n_classes;
                put(t, 3.0 * std::cos(ang), 3.0 * std::sin(ang), c);
            }
            break;
        }
        case SyntheticKind::XorRings: {
            const std::size_t n_out = m / 2, n_in = m - n_out;
            for (std::size_t k = 0; k < n_out; ++k) {
                const double t = 2.0 * pi * static_cast<double>(k) / static_cast<double>(n_out);
                put(k, std::cos(t), std::sin(t), 0);
            }
            for (std::size_t k = 0; k < n_in; ++k) {
                const double t = 2.0 * pi * static_cast<double>(k) / static_cast<double>(n_in);
                put(n_out + k, 0.5 * std::cos(t), 0.5 * std::sin(t), 1);
            }
            break;
        }
    }
    if (noise > 0.0) {
        for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
            for (Eigen::Index c = 0; c < 2; ++c) ds.X(r, c) += noise * rng.normal();
        }
    }
    std::vector<std::size_t> order(m);
    for (std::size_t t = 0; t < m; ++t) order[t] = t;
    rng.shuffle(std::span<std::size_t>(order));
    ds = ds.subset(order);
    ds.feature_names = {"x0", "x1"};
    ds.provenance = "synthetic:" + to_string(kind) + ":m=" + std::to_string(m) + ":seed=" + std::to_string(seed);
    return ds;
}

std::vector<LearningCurvePoint> learning_curve(const Dataset &train, const Dataset &test,
                                               const std::vector<std::size_t> &sizes,
                                               const std::vector<double> &C_grid,
                                               const std::vector<Gamma> &gamma_grid, std::uint64_t seed) {
    std::vector<LearningCurvePoint> curve;
    for (std::size_t size : sizes) {
        if (size > train.size()) {
            throw ConfigError("learning-curve size " + std::to_string(size) + " exceeds the " +
                              std::to_string(train.size()) + " training samples");
        }
        const Dataset sub = train.subset(stratified_sample(train.y, size, seed));
        if (distinct_labels(sub.y).size() < 2) {
            throw DataError("learning-curve subsample of size " + std::to_string(size) + " has one class");
        }
        const auto search = grid_search_classical(KernelKind::RBF, sub, C_grid, gamma_grid, 0.75, seed);
        const double C = search.best.at("C");
        // named gammas (scale, auto) are re-resolved on the whole subsample for the refit
        const double gamma = Gamma::parse(search.best_tags.at("gamma")).resolve(sub.X);
        const auto K = gram_rbf(sub.X, sub.X, gamma);
        const auto Kt = gram_rbf(test.X, sub.X, gamma);
        const auto pred = fit_predict_multiclass(K, sub.y, C, Kt);
        curve.push_back({size, accuracy(pred, test.y), C, gamma});
    }
    return curve;
}

}  // namespace qkbench
