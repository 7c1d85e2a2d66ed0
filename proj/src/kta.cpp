#include "qkbench/kta.hpp"

#include "qkbench/errors.hpp"
#include "qkbench/util.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace qkbench {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

Eigen::MatrixXd centering(Eigen::Index m) {
    return Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
}

void check_square(const Eigen::MatrixXd &K, const Labels &y) {
    if (K.rows() == 0) throw ConfigError("KTA of an empty kernel matrix");
    if (K.rows() != K.cols()) throw ConfigError("KTA needs a square kernel matrix");
    if (static_cast<std::size_t>(K.rows()) != y.size()) {
        throw ConfigError("KTA: " + std::to_string(K.rows()) + "x" + std::to_string(K.rows()) +
                          " kernel with " + std::to_string(y.size()) + " labels");
    }
}

std::vector<double> row_vector(const Samples &X, Eigen::Index i) {
    std::vector<double> out(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) out[static_cast<std::size_t>(j)] = X(i, j);
    return out;
}

std::vector<StateVector> apply_to_all(const EncodedSample &s, const EncoderSpec &spec,
                                      const AnsatzParams &params, ScalingConfig scaling,
                                      std::optional<AngleShift> shift = std::nullopt) {
    std::vector<StateVector> out = s.states;
    for (std::size_t m = 0; m < out.size(); ++m) {
        apply_ansatz_inplace(out[m], params, scaling, s.reupload[m], false, spec.dense_entangler(), shift);
    }
    return out;
}

}  // namespace

Eigen::MatrixXd kta_target(const Labels &y) {
    const auto classes = distinct_labels(y);
    const auto m = static_cast<Eigen::Index>(y.size());
    const double off = classes.size() > 1 ? -1.0 / static_cast<double>(classes.size() - 1) : 1.0;
    Eigen::MatrixXd T(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            T(i, j) = y[static_cast<std::size_t>(i)] == y[static_cast<std::size_t>(j)] ? 1.0 : off;
        }
    }
    return T;
}

double kta_score(const Eigen::MatrixXd &K, const Labels &y, bool centered) {
    check_square(K, y);
    if (distinct_labels(y).size() < 2) warn("KTA target built from a single class");
    Eigen::MatrixXd T = kta_target(y);
    Eigen::MatrixXd Kc = K;
    if (centered) {
        const auto H = centering(K.rows());
        Kc = H * K * H;
        T = H * T * H;
    }
    const double nk = Kc.norm();
    const double nt = T.norm();
    if (nk == 0.0 || nt == 0.0) return 0.0;
    return (Kc.array() * T.array()).sum() / (nk * nt);
}

Eigen::MatrixXd kta_dK(const Eigen::MatrixXd &K, const Labels &y, bool centered) {
    check_square(K, y);
    Eigen::MatrixXd T = kta_target(y);
    Eigen::MatrixXd Kc = K;
    Eigen::MatrixXd H;
    if (centered) {
        H = centering(K.rows());
        Kc = H * K * H;
        T = H * T * H;
    }
    const double nk = Kc.norm();
    const double nt = T.norm();
    if (nk == 0.0 || nt == 0.0) return Eigen::MatrixXd::Zero(K.rows(), K.cols());
    const double inner = (Kc.array() * T.array()).sum();
    Eigen::MatrixXd G = T / (nk * nt) - inner * Kc / (nk * nk * nk * nt);
    if (centered) G = H * G * H;
    return G;
}

AnsatzParams init_params(int n_layers, int n_qubits, std::uint64_t seed) {
    AnsatzParams p(n_layers, n_qubits);
    Rng rng(seed);
    for (double &v : p.flat()) v = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return p;
}

std::vector<EncodedSample> encode_samples(const Samples &X, const EncoderSpec &spec) {
    spec.validate();
    std::vector<EncodedSample> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto x = row_vector(X, i);
        try {
            out.push_back({encoded_states(x, spec), reupload_values(x, spec)});
        } catch (const Error &e) {
            throw DataError("sample " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

Eigen::MatrixXd gram_from_encoded(const std::vector<EncodedSample> &samples, const EncoderSpec &spec,
                                  const AnsatzParams &params, ScalingConfig scaling) {
    const auto m = static_cast<Eigen::Index>(samples.size());
    std::vector<std::vector<StateVector>> states(samples.size());
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < m; ++i) {
        states[static_cast<std::size_t>(i)] = apply_to_all(samples[static_cast<std::size_t>(i)], spec, params, scaling);
    }
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(m, m);
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double v = quantum_kernel_value(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(j)]);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

KtaEvaluation kta_value_and_gradient(const std::vector<EncodedSample> &batch, const Labels &y,
                                     const EncoderSpec &spec, const AnsatzParams &params,
                                     ScalingConfig scaling, bool centered) {
    if (batch.empty()) throw ConfigError("KTA gradient of an empty batch");
    if (batch.size() != y.size()) throw ConfigError("batch and label counts differ");
    if (params.n_qubits() != spec.n_qubits) throw ConfigError("ansatz and encoder qubit counts differ");
    const std::size_t b = batch.size();
    const std::size_t n_params = params.size();

    std::vector<std::vector<StateVector>> base(b);
    for (std::size_t i = 0; i < b; ++i) base[i] = apply_to_all(batch[i], spec, params, scaling);
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b));
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = i + 1; j < b; ++j) {
            const double v = quantum_kernel_value(base[i], base[j]);
            K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    KtaEvaluation out;
    out.kta = kta_score(K, y, centered);
    const Eigen::MatrixXd G = kta_dK(K, y, centered);
    out.gradient.assign(n_params, 0.0);

    // grad_k = sum_{i != j} G_ij dK_ij/dp_k = 2 sum_{i != j} G_ij t_k(i; j), where
    // t_k(i; j) is the derivative through the occurrence of p_k in sample i's circuit.
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(n_params); ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        double acc = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            const std::size_t d = batch[i].states.size();
            for (std::size_t m = 0; m < d; ++m) {
                const double coef = angle_derivative(params, k, scaling, batch[i].reupload[m]);
                if (coef == 0.0) continue;
                StateVector plus = batch[i].states[m];
                StateVector minus = batch[i].states[m];
                apply_ansatz_inplace(plus, params, scaling, batch[i].reupload[m], false, spec.dense_entangler(),
                                     AngleShift{k, kHalfPi});
                apply_ansatz_inplace(minus, params, scaling, batch[i].reupload[m], false, spec.dense_entangler(),
                                     AngleShift{k, -kHalfPi});
                for (std::size_t j = 0; j < b; ++j) {
                    if (j == i) continue;
                    const double dk = 0.5 * (fidelity(plus, base[j][m]) - fidelity(minus, base[j][m]));
                    acc += 2.0 * G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * coef * dk /
                           static_cast<double>(d);
                }
            }
        }
        out.gradient[k] = acc;
    }
    return out;
}

std::vector<double> kta_gradient(const AnsatzParams &params, const Samples &X_batch, const Labels &y_batch,
                                 const EncoderSpec &spec, ScalingConfig scaling, bool centered) {
    if (params.n_qubits() != spec.n_qubits) throw ConfigError("ansatz and encoder qubit counts differ");
    return kta_value_and_gradient(encode_samples(X_batch, spec), y_batch, spec, params, scaling, centered).gradient;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("training.learning_rate must be > 0");
    if (steps < 0) throw ConfigError("training.steps must be >= 0");
    if (batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
    if (eval_every < 1) throw ConfigError("training.eval_every must be >= 1");
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
        throw ConfigError("training.split_fraction must lie in (0, 1)");
    }
}

std::vector<std::size_t> sample_batch(const Labels &y, std::size_t batch_size, Rng &rng) {
    if (batch_size > y.size()) throw ConfigError("batch larger than the sub-train set");
    std::vector<std::size_t> pool(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) pool[t] = t;
    std::vector<std::size_t> batch;
    const auto classes = distinct_labels(y);
    std::size_t taken = 0;  // pool[0, taken) holds the chosen indices
    auto take = [&](std::size_t pos) {
        std::swap(pool[taken], pool[pos]);
        batch.push_back(pool[taken]);
        ++taken;
    };
    if (batch_size >= classes.size()) {
        for (int c : classes) {
            std::vector<std::size_t> candidates;
            for (std::size_t p = taken; p < pool.size(); ++p) {
                if (y[pool[p]] == c) candidates.push_back(p);
            }
            take(candidates[static_cast<std::size_t>(rng.below(candidates.size()))]);
        }
    }
    while (batch.size() < batch_size) {
        take(taken + static_cast<std::size_t>(rng.below(pool.size() - taken)));
    }
    return batch;
}

TrainReport train(const Samples &X_train, const Labels &y_train, const EncoderSpec &spec, ScalingConfig scaling,
                  int n_layers, const TrainConfig &cfg) {
    cfg.validate();
    spec.validate();
    scaling.validate();
    if (static_cast<std::size_t>(X_train.rows()) != y_train.size()) {
        throw ConfigError("training samples and labels differ in count");
    }
    if (y_train.size() < 2) throw ConfigError("KTA training needs at least two samples");
    {
        const auto classes = distinct_labels(y_train);
        if (classes.size() < 2) throw ConfigError("KTA training needs at least two classes");
        for (int c : classes) {
            if (std::count(y_train.begin(), y_train.end(), c) < 2) {
                throw ConfigError("class " + std::to_string(c) + " has a single member; cannot split for KTA validation");
            }
        }
    }

    TrainReport report;
    const auto split = stratified_split(y_train, cfg.split_fraction, cfg.init_seed);
    report.subtrain_idx = split.train;
    report.validation_idx = split.test;
    Labels y_sub, y_val;
    for (auto t : split.train) y_sub.push_back(y_train[t]);
    for (auto t : split.test) y_val.push_back(y_train[t]);
    if (static_cast<std::size_t>(cfg.batch_size) > y_sub.size()) {
        throw ConfigError("training.batch_size " + std::to_string(cfg.batch_size) + " exceeds the " +
                          std::to_string(y_sub.size()) + "-sample sub-train fold");
    }
    Samples X_sub(static_cast<Eigen::Index>(split.train.size()), X_train.cols());
    Samples X_val(static_cast<Eigen::Index>(split.test.size()), X_train.cols());
    for (std::size_t r = 0; r < split.train.size(); ++r) X_sub.row(static_cast<Eigen::Index>(r)) = X_train.row(static_cast<Eigen::Index>(split.train[r]));
    for (std::size_t r = 0; r < split.test.size(); ++r) X_val.row(static_cast<Eigen::Index>(r)) = X_train.row(static_cast<Eigen::Index>(split.test[r]));
    const auto enc_sub = encode_samples(X_sub, spec);
    const auto enc_val = encode_samples(X_val, spec);

    AnsatzParams params = init_params(n_layers, spec.n_qubits, cfg.init_seed);
    auto validation_kta = [&](const AnsatzParams &p) {
        return kta_score(gram_from_encoded(enc_val, spec, p, scaling), y_val, cfg.centered);
    };

    report.initial_params = params;
    report.initial_validation_kta = validation_kta(params);
    report.best_params = params;
    report.best_validation_kta = report.initial_validation_kta;
    report.best_step = 0;
    report.history.push_back({0, std::nullopt, report.initial_validation_kta});

    const std::size_t n_params = params.size();
    std::vector<double> m1(n_params, 0.0), m2(n_params, 0.0);
    Rng batch_rng(cfg.init_seed ^ 0x9E3779B97F4A7C15ULL);
    for (int step = 1; step <= cfg.steps; ++step) {
        const auto idx = sample_batch(y_sub, static_cast<std::size_t>(cfg.batch_size), batch_rng);
        std::vector<EncodedSample> batch;
        Labels y_batch;
        for (auto t : idx) {
            batch.push_back(enc_sub[t]);
            y_batch.push_back(y_sub[t]);
        }
        const auto eval = kta_value_and_gradient(batch, y_batch, spec, params, scaling, cfg.centered);
        const double bc1 = 1.0 - std::pow(cfg.beta1, step);
        const double bc2 = 1.0 - std::pow(cfg.beta2, step);
        auto flat = params.flat();
        for (std::size_t k = 0; k < n_params; ++k) {
            const double g = eval.gradient[k];
            m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * g;
            m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * g * g;
            // ascent: KTA is maximised
            flat[k] += cfg.learning_rate * (m1[k] / bc1) / (std::sqrt(m2[k] / bc2) + cfg.epsilon);
        }
        if (step % cfg.eval_every == 0 || step == cfg.steps) {
            const double v = validation_kta(params);
            report.history.push_back({step, eval.kta, v});
            if (v > report.best_validation_kta) {
                report.best_validation_kta = v;
                report.best_params = params;
                report.best_step = step;
            }
        }
    }
    return report;
}

namespace {

nlohmann::json encoder_json(const EncoderSpec &spec) {
    return {{"kind", to_string(spec.kind)},
            {"n_qubits", spec.n_qubits},
            {"length_scale", spec.length_scale},
            {"extension", to_string(spec.extension)},
            {"extra_qubits", spec.extra_qubits}};
}

nlohmann::json kernel_fields(const CheckpointFile &ckpt) {
    const auto &p = ckpt.params;
    nlohmann::json theta = nlohmann::json::array(), phi = nlohmann::json::array();
    for (int l = 0; l < p.n_layers(); ++l) {
        std::vector<double> t, f;
        for (int i = 0; i < p.n_qubits(); ++i) {
            t.push_back(p.theta(l, i));
            f.push_back(p.phi(l, i));
        }
        theta.push_back(t);
        phi.push_back(f);
    }
    return {{"encoder", encoder_json(ckpt.spec)},
            {"layers", p.n_layers()},
            {"qubits", p.n_qubits()},
            {"theta", theta},
            {"phi", phi},
            {"s", ckpt.s}};
}

}  // namespace

std::string checkpoint_hash(const CheckpointFile &ckpt) { return fnv1a_hex(kernel_fields(ckpt).dump()); }

std::string checkpoint_json(const CheckpointFile &ckpt) {
    nlohmann::json j = kernel_fields(ckpt);
    j["format"] = "qkbench-checkpoint";
    j["version"] = 1;
    j["seed"] = ckpt.seed;
    nlohmann::json hist = nlohmann::json::array();
    for (const auto &c : ckpt.history) {
        hist.push_back({{"step", c.step},
                        {"train_batch_kta", c.train_batch_kta ? nlohmann::json(*c.train_batch_kta) : nlohmann::json()},
                        {"validation_kta", c.validation_kta}});
    }
    j["history"] = hist;
    j["hash"] = checkpoint_hash(ckpt);
    return j.dump(2);
}

CheckpointFile parse_checkpoint(const std::string &text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.value("format", "") != "qkbench-checkpoint") throw DataError("not a qkbench checkpoint");
        if (j.value("version", 0) != 1) throw DataError("unsupported checkpoint version");
        CheckpointFile c;
        const auto &e = j.at("encoder");
        c.spec.kind = parse_encoder_kind(e.at("kind").get<std::string>());
        c.spec.n_qubits = e.at("n_qubits").get<int>();
        c.spec.length_scale = e.at("length_scale").get<double>();
        c.spec.extension = parse_extension(e.at("extension").get<std::string>());
        c.spec.extra_qubits = e.at("extra_qubits").get<int>();
        const int L = j.at("layers").get<int>();
        const int N = j.at("qubits").get<int>();
        c.params = AnsatzParams(L, N);
        const auto theta = j.at("theta").get<std::vector<std::vector<double>>>();
        const auto phi = j.at("phi").get<std::vector<std::vector<double>>>();
        if (theta.size() != static_cast<std::size_t>(L) || phi.size() != static_cast<std::size_t>(L)) {
            throw DataError("checkpoint angle arrays do not have L rows");
        }
        for (int l = 0; l < L; ++l) {
            if (theta[l].size() != static_cast<std::size_t>(N) || phi[l].size() != static_cast<std::size_t>(N)) {
                throw DataError("checkpoint angle arrays do not have N columns");
            }
            for (int i = 0; i < N; ++i) {
                c.params.theta(l, i) = theta[l][i];
                c.params.phi(l, i) = phi[l][i];
            }
        }
        c.s = j.at("s").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        for (const auto &h : j.at("history")) {
            Checkpoint cp{h.at("step").get<int>(), std::nullopt, h.at("validation_kta").get<double>()};
            if (!h.at("train_batch_kta").is_null()) cp.train_batch_kta = h.at("train_batch_kta").get<double>();
            c.history.push_back(cp);
        }
        if (j.contains("hash") && j.at("hash").get<std::string>() != checkpoint_hash(c)) {
            throw DataError("checkpoint hash mismatch");
        }
        return c;
    } catch (const nlohmann::json::exception &e) {
        throw DataError("bad checkpoint JSON: " + std::string(e.what()));
    }
}

void save_checkpoint(const CheckpointFile &ckpt, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << checkpoint_json(ckpt) << '\n';
}

CheckpointFile load_checkpoint(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_checkpoint(ss.str());
}

}  // namespace qkbench
