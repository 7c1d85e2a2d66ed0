#include "qkbench/config.hpp"

#include "qkbench/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qkbench {

namespace {

/// Map node reader that remembers which keys were consumed so leftovers (typos)
/// can be reported with their full path.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(where() + " must be a mapping");
    }

    bool has(const std::string &key) {
        used_.insert(key);
        return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
    }

    template <typename T>
    std::optional<T> get(const std::string &key) {
        if (!has(key)) return std::nullopt;
        try {
            return node_[key].as<T>();
        } catch (const YAML::Exception &) {
            throw ConfigError(field(key) + ": cannot read value '" + scalar_text(node_[key]) + "'");
        }
    }

    template <typename T>
    void read(const std::string &key, T &out) {
        if (auto v = get<T>(key)) out = *v;
    }

    std::vector<std::string> get_scalar_list(const std::string &key) {
        std::vector<std::string> out;
        if (!has(key)) return out;
        const YAML::Node n = node_[key];
        if (n.IsScalar()) return {n.Scalar()};
        if (!n.IsSequence()) throw ConfigError(field(key) + " must be a list");
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (!n[i].IsScalar()) throw ConfigError(field(key) + "[" + std::to_string(i) + "] must be a scalar");
            out.push_back(n[i].Scalar());
        }
        return out;
    }

    std::optional<std::vector<double>> get_numbers(const std::string &key) {
        if (!has(key)) return std::nullopt;
        std::vector<double> out;
        const auto items = get_scalar_list(key);
        for (std::size_t i = 0; i < items.size(); ++i) {
            out.push_back(to_number(items[i], field(key) + "[" + std::to_string(i) + "]"));
        }
        return out;
    }

    Section child(const std::string &key) {
        used_.insert(key);
        return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), field(key));
    }

    YAML::Node raw(const std::string &key) {
        used_.insert(key);
        return node_ && node_.IsMap() ? node_[key] : YAML::Node();
    }

    void finish() const {
        if (!node_ || !node_.IsMap()) return;
        for (const auto &kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.count(key)) throw ConfigError(field(key) + ": unknown key");
        }
    }

    std::string field(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where() const { return path_.empty() ? "config root" : path_; }

    static double to_number(const std::string &text, const std::string &path) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &pos);
        } catch (const std::exception &) {
            throw ConfigError(path + ": expected a number, got '" + text + "'");
        }
        if (pos != text.size()) throw ConfigError(path + ": expected a number, got '" + text + "'");
        return v;
    }

private:
    static std::string scalar_text(const YAML::Node &n) { return n.IsScalar() ? n.Scalar() : "<non-scalar>"; }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

std::vector<Gamma> parse_gammas(Section &s, const std::string &key) {
    std::vector<Gamma> out;
    const auto items = s.get_scalar_list(key);
    for (std::size_t i = 0; i < items.size(); ++i) {
        try {
            out.push_back(Gamma::parse(items[i]));
        } catch (const ConfigError &e) {
            throw ConfigError(s.field(key) + "[" + std::to_string(i) + "]: " + e.what());
        }
    }
    return out;
}

std::vector<Gamma> default_gammas() {
    return {Gamma::parse("scale"), Gamma::parse("0.1"), Gamma::parse("1"), Gamma::parse("10")};
}

/// Prefixes a validate() message with its context unless it already names a field.
template <typename F>
void checked(const std::string &context, F &&fn) {
    try {
        fn();
    } catch (const ConfigError &e) {
        const std::string msg = e.what();
        if (msg.rfind(context, 0) == 0) throw;
        throw ConfigError(context + ": " + msg);
    }
}

void read_dataset(Section s, DatasetConfig &d, const std::filesystem::path &base_dir) {
    const bool has_csv = s.has("csv");
    const bool has_syn = s.has("synthetic");
    if (has_csv == has_syn) throw ConfigError(s.where() + ": exactly one of 'csv' or 'synthetic' is required");
    if (has_csv) {
        Section c = s.child("csv");
        const auto path = c.get<std::string>("path");
        if (!path) throw ConfigError(c.field("path") + ": required");
        std::filesystem::path p(*path);
        d.csv_path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
        c.read("label_column", d.csv.label_column);
        if (auto delim = c.get<std::string>("delimiter")) {
            if (delim->size() != 1) throw ConfigError(c.field("delimiter") + ": must be one character");
            d.csv.delimiter = (*delim)[0];
        }
        c.finish();
    } else {
        Section c = s.child("synthetic");
        if (auto kind = c.get<std::string>("kind")) {
            checked(c.field("kind"), [&] { d.synthetic = parse_synthetic_kind(*kind); });
        }
        c.read("m", d.m);
        c.read("noise", d.noise);
        c.read("n_classes", d.n_classes);
        c.read("seed", d.seed);
        c.finish();
    }
    s.finish();
}

void read_pipeline(Section s, PipelineSpec &p) {
    if (auto v = s.get<std::string>("impute")) {
        if (*v == "none") p.impute = Imputer::None;
        else if (*v == "median") p.impute = Imputer::Median;
        else throw ConfigError(s.field("impute") + ": expected none or median");
    }
    if (auto v = s.get<std::string>("scaler")) {
        if (*v == "none") p.scaler = Scaler::None;
        else if (*v == "minmax") p.scaler = Scaler::MinMax;
        else if (*v == "standard") p.scaler = Scaler::Standard;
        else throw ConfigError(s.field("scaler") + ": expected none, minmax or standard");
    }
    if (s.has("pca")) {
        Section c = s.child("pca");
        if (auto mode = c.get<std::string>("mode")) {
            if (*mode == "none") p.pca.mode = PcaSelection::Mode::None;
            else if (*mode == "components") p.pca.mode = PcaSelection::Mode::Components;
            else if (*mode == "variance") p.pca.mode = PcaSelection::Mode::Variance;
            else if (*mode == "elbow") p.pca.mode = PcaSelection::Mode::Elbow;
            else throw ConfigError(c.field("mode") + ": expected none, components, variance or elbow");
        }
        c.read("components", p.pca.components);
        c.read("variance", p.pca.variance);
        c.finish();
    }
    s.read("train_fraction", p.train_fraction);
    if (auto v = s.get<long long>("train_cap")) {
        if (*v < 1) throw ConfigError(s.field("train_cap") + " must be >= 1");
        p.train_cap = static_cast<std::size_t>(*v);
    }
    if (auto v = s.get<long long>("test_cap")) {
        if (*v < 1) throw ConfigError(s.field("test_cap") + " must be >= 1");
        p.test_cap = static_cast<std::size_t>(*v);
    }
    s.read("stratify", p.stratify);
    s.read("seed", p.seed);
    s.finish();
}

void read_training(Section s, TrainConfig &t) {
    s.read("learning_rate", t.learning_rate);
    s.read("steps", t.steps);
    s.read("batch_size", t.batch_size);
    s.read("eval_every", t.eval_every);
    s.read("init_seed", t.init_seed);
    s.read("split_fraction", t.split_fraction);
    s.read("centered", t.centered);
    s.finish();
}

KernelConfig read_kernel(Section s, std::uint64_t seed) {
    KernelConfig k;
    const auto kind = s.get<std::string>("kind");
    if (!kind) throw ConfigError(s.field("kind") + ": required");
    checked(s.field("kind"), [&] { k.kind = parse_kernel_kind(*kind); });

    if (!is_quantum(k.kind)) {
        if (auto C = s.get_numbers("C")) k.C_grid = *C;
        if (s.has("gamma")) {
            if (k.kind == KernelKind::Linear) throw ConfigError(s.field("gamma") + ": not used by the linear kernel");
            k.gamma_grid = parse_gammas(s, "gamma");
        } else if (k.kind == KernelKind::RBF) {
            k.gamma_grid = default_gammas();
        }
        s.finish();
        return k;
    }

    k.search = k.kind == KernelKind::QAmp ? default_qamp_space() : default_qrbf_space();
    k.search.seed = seed;
    if (s.has("fixed") && s.has("search")) throw ConfigError(s.where() + ": 'fixed' and 'search' are exclusive");
    if (s.has("fixed")) {
        Section f = s.child("fixed");
        Hyperparams h;
        for (const char *key : {"s", "C", "c"}) {
            if (auto v = f.get<double>(key)) h[key] = *v;
        }
        f.finish();
        if (!h.count("s")) throw ConfigError(f.field("s") + ": required");
        if (!h.count("C")) throw ConfigError(f.field("C") + ": required");
        if (k.kind == KernelKind::QRBF && !h.count("c")) throw ConfigError(f.field("c") + ": required for qrbf");
        if (k.kind == KernelKind::QAmp && h.count("c")) throw ConfigError(f.field("c") + ": only used by qrbf");
        k.fixed = h;
    } else if (s.has("search")) {
        Section q = s.child("search");
        q.read("iterations", k.search.total_iterations);
        if (auto v = q.get_numbers("s")) k.search.s_values = *v;
        if (auto v = q.get_numbers("C")) k.search.C_values = *v;
        if (auto v = q.get_numbers("c")) {
            if (k.kind == KernelKind::QAmp) throw ConfigError(q.field("c") + ": only used by qrbf");
            k.search.c_values = *v;
        }
        if (auto b = q.get<std::string>("baseline")) {
            if (*b == "auto") {
                k.baseline_auto = true;
            } else {
                k.baseline_auto = false;
                k.search.baseline_accuracy = Section::to_number(*b, q.field("baseline"));
            }
        }
        q.read("seed", k.search.seed);
        q.read("stage2_half_width", k.search.stage2_half_width);
        q.finish();
    }
    s.finish();
    return k;
}

std::vector<std::size_t> to_sizes(const std::vector<double> &v, const std::string &path) {
    std::vector<std::size_t> out;
    for (double x : v) {
        if (!(x >= 1.0) || std::floor(x) != x) throw ConfigError(path + ": sizes must be positive integers");
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (kernels.empty()) throw ConfigError("kernels: at least one kernel is required");
    if (!dataset.csv_path) {
        if (dataset.m < 4) throw ConfigError("dataset.synthetic.m must be >= 4");
        if (!(dataset.noise >= 0.0)) throw ConfigError("dataset.synthetic.noise must be >= 0");
        if (dataset.n_classes < 2) throw ConfigError("dataset.synthetic.n_classes must be >= 2");
        if (dataset.synthetic != SyntheticKind::Blobs && dataset.n_classes != 2) {
            throw ConfigError("dataset.synthetic.n_classes: only blobs supports more than two classes");
        }
    }
    checked("pipeline", [&] { pipeline.validate(); });
    checked("training", [&] { training.validate(); });
    if (ansatz.layers < 1) throw ConfigError("ansatz.layers must be >= 1");
    if (ansatz.qubits && (*ansatz.qubits < 1 || *ansatz.qubits > kMaxQubits)) {
        throw ConfigError("ansatz.qubits must lie in [1, " + std::to_string(kMaxQubits) + "]");
    }
    if (ansatz.extra_qubits < 0) throw ConfigError("ansatz.extra_qubits must be >= 0");
    std::set<KernelKind> seen;
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        const auto &k = kernels[i];
        const std::string path = "kernels[" + std::to_string(i) + "]";
        if (!seen.insert(k.kind).second) throw ConfigError(path + ".kind: duplicate kernel " + to_string(k.kind));
        if (!is_quantum(k.kind)) {
            if (k.C_grid.empty()) throw ConfigError(path + ".C: grid is empty");
            for (double C : k.C_grid) {
                if (!(C > 0.0)) throw ConfigError(path + ".C: values must be > 0");
            }
            if (k.kind == KernelKind::RBF && k.gamma_grid.empty()) throw ConfigError(path + ".gamma: grid is empty");
            continue;
        }
        if (k.fixed) {
            for (const auto &[name, v] : *k.fixed) {
                const bool ok = name == "s" ? (v >= 0.0 && std::isfinite(v)) : (v > 0.0 && std::isfinite(v));
                if (!ok) throw ConfigError(path + ".fixed." + name + ": out of range");
            }
        } else {
            checked(path + ".search", [&] { k.search.validate(); });
            if (k.kind == KernelKind::QRBF && k.search.c_values.empty()) {
                throw ConfigError(path + ".search.c: qrbf needs length scales");
            }
        }
    }
    for (int e : sweep.extras) {
        if (e < 0) throw ConfigError("sweep.extras: values must be >= 0");
    }
    if (!learning_curve.C_grid.empty()) {
        for (double C : learning_curve.C_grid) {
            if (!(C > 0.0)) throw ConfigError("learning_curve.C: values must be > 0");
        }
    }
}

RunConfig parse_config(const std::string &yaml_text, const std::filesystem::path &base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    if (!root || root.IsNull()) throw ConfigError("config is empty");
    Section top(root, "");

    RunConfig cfg;
    top.read("seed", cfg.seed);
    cfg.dataset.seed = cfg.seed;
    cfg.pipeline.seed = cfg.seed;
    cfg.training.init_seed = cfg.seed;
    if (auto out = top.get<std::string>("output_dir")) {
        cfg.output_dir = *out;
    }
    if (!top.has("dataset")) throw ConfigError("dataset: required");
    read_dataset(top.child("dataset"), cfg.dataset, base_dir);
    read_pipeline(top.child("pipeline"), cfg.pipeline);
    {
        Section a = top.child("ansatz");
        a.read("layers", cfg.ansatz.layers);
        if (auto q = a.get<int>("qubits")) cfg.ansatz.qubits = *q;
        a.read("extra_qubits", cfg.ansatz.extra_qubits);
        a.finish();
    }
    read_training(top.child("training"), cfg.training);

    const YAML::Node kernels = top.raw("kernels");
    if (!kernels || kernels.IsNull()) throw ConfigError("kernels: at least one kernel is required");
    if (!kernels.IsSequence()) throw ConfigError("kernels: must be a list");
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        cfg.kernels.push_back(read_kernel(Section(kernels[i], "kernels[" + std::to_string(i) + "]"), cfg.seed));
    }
    {
        Section s = top.child("sweep");
        if (s.has("extras")) {
            cfg.sweep.extras.clear();
            const auto extras = *s.get_numbers("extras");
            for (double v : extras) {
                if (std::floor(v) != v) throw ConfigError("sweep.extras: values must be integers");
                cfg.sweep.extras.push_back(static_cast<int>(v));
            }
        }
        s.finish();
    }
    {
        Section s = top.child("learning_curve");
        if (auto v = s.get_numbers("sizes")) cfg.learning_curve.sizes = to_sizes(*v, s.field("sizes"));
        if (auto v = s.get_numbers("C")) cfg.learning_curve.C_grid = *v;
        cfg.learning_curve.gamma_grid = s.has("gamma") ? parse_gammas(s, "gamma") : default_gammas();
        s.finish();
    }
    top.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

void override_seed(RunConfig &cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.dataset.seed = seed;
    cfg.pipeline.seed = seed;
    cfg.training.init_seed = seed;
    for (auto &k : cfg.kernels) k.search.seed = seed;
}

}  // namespace qkbench
