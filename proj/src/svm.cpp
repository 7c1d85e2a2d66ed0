#include "qkbench/svm.hpp"

#include "qkbench/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace qkbench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_train_matrix(const KernelMatrix &K, std::size_t n_labels) {
    if (!K.square()) throw ConfigError("SVC training kernel must be square");
    if (static_cast<std::size_t>(K.rows()) != n_labels) {
        throw ConfigError("kernel has " + std::to_string(K.rows()) + " rows but " +
                          std::to_string(n_labels) + " labels were given");
    }
    if (!K.values.allFinite()) throw DataError("SVC training kernel has non-finite entries");
}

/**
 * Solves min 1/2 a^T Q a - e^T a subject to 0 <= a <= C, y^T a = 0, with the
 * working-set selection that uses second-order information. G holds the
 * gradient Q a - e and is updated incrementally after each pair step.
 */
class SmoSolver {
  public:
    SmoSolver(const Eigen::MatrixXd &K, const std::vector<int> &y, double C, const SvcOptions &opts)
        : K_(K), y_(y), C_(C), opts_(opts), m_(y.size()), alpha_(m_, 0.0), G_(m_, -1.0) {}

    void solve(SvcModel &out) {
        const long cap = opts_.max_iterations > 0
                             ? opts_.max_iterations
                             : std::max<long>(10'000'000L, 100L * static_cast<long>(m_));
        long iter = 0;
        bool converged = false;
        if (opts_.record_objective) out.objective_trace.push_back(objective());
        while (iter < cap) {
            std::size_t i = 0, j = 0;
            if (select_working_set(i, j)) {
                converged = true;
                break;
            }
            ++iter;
            update_pair(i, j);
            if (opts_.record_objective) out.objective_trace.push_back(objective());
        }
        out.alpha = alpha_;
        out.iterations = iter;
        out.converged = converged;
        out.bias = -compute_rho();
        out.dual_objective = objective();
    }

  private:
    double Q(std::size_t i, std::size_t j) const {
        return static_cast<double>(y_[i] * y_[j]) * K_(static_cast<Eigen::Index>(i),
                                                       static_cast<Eigen::Index>(j));
    }
    double Kd(std::size_t i, std::size_t j) const {
        return K_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    bool upper_bound(std::size_t t) const { return alpha_[t] >= C_; }
    bool lower_bound(std::size_t t) const { return alpha_[t] <= 0.0; }
    bool in_up(std::size_t t) const { return y_[t] == 1 ? !upper_bound(t) : !lower_bound(t); }
    bool in_low(std::size_t t) const { return y_[t] == 1 ? !lower_bound(t) : !upper_bound(t); }

    double objective() const {
        // -(1/2 a^T Q a - e^T a) = -1/2 sum a_t (G_t - 1)
        double acc = 0.0;
        for (std::size_t t = 0; t < m_; ++t) acc += alpha_[t] * (G_[t] - 1.0);
        return -0.5 * acc;
    }

    // Returns true when the KKT gap is within tolerance.
    bool select_working_set(std::size_t &out_i, std::size_t &out_j) const {
        double gmax = -kInf;
        double gmax2 = -kInf;
        std::size_t i = m_;
        for (std::size_t t = 0; t < m_; ++t) {
            if (in_up(t)) {
                const double v = -y_[t] * G_[t];
                if (v >= gmax) {
                    if (v > gmax || i == m_) i = t;
                    gmax = v;
                }
            }
        }
        std::size_t j = m_;
        double best_obj = kInf;
        for (std::size_t t = 0; t < m_; ++t) {
            if (!in_low(t)) continue;
            const double yg = y_[t] * G_[t];
            gmax2 = std::max(gmax2, yg);
            if (i == m_) continue;
            const double b = gmax + yg;
            if (b > 0.0) {
                double a = Kd(i, i) + Kd(t, t) - 2.0 * Kd(i, t);
                if (a <= 0.0) a = opts_.tau;
                const double obj = -(b * b) / a;
                if (obj < best_obj) {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        if (gmax + gmax2 < opts_.tolerance || i == m_ || j == m_) return true;
        out_i = i;
        out_j = j;
        return false;
    }

    void update_pair(std::size_t i, std::size_t j) {
        const double old_ai = alpha_[i];
        const double old_aj = alpha_[j];
        double &ai = alpha_[i];
        double &aj = alpha_[j];
        if (y_[i] != y_[j]) {
            double quad = Kd(i, i) + Kd(j, j) + 2.0 * Q(i, j);
            if (quad <= 0.0) quad = opts_.tau;
            const double delta = (-G_[i] - G_[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else {
                if (ai < 0.0) {
                    ai = 0.0;
                    aj = -diff;
                }
            }
            if (diff > 0.0) {
                if (ai > C_) {
                    ai = C_;
                    aj = C_ - diff;
                }
            } else {
                if (aj > C_) {
                    aj = C_;
                    ai = C_ + diff;
                }
            }
        } else {
            double quad = Kd(i, i) + Kd(j, j) - 2.0 * Q(i, j);
            if (quad <= 0.0) quad = opts_.tau;
            const double delta = (G_[i] - G_[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > C_) {
                if (ai > C_) {
                    ai = C_;
                    aj = sum - C_;
                }
            } else {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = sum;
                }
            }
            if (sum > C_) {
                if (aj > C_) {
                    aj = C_;
                    ai = sum - C_;
                }
            } else {
                if (ai < 0.0) {
                    ai = 0.0;
                    aj = sum;
                }
            }
        }
        const double dai = ai - old_ai;
        const double daj = aj - old_aj;
        for (std::size_t t = 0; t < m_; ++t) G_[t] += Q(t, i) * dai + Q(t, j) * daj;
    }

    double compute_rho() const {
        double ub = kInf, lb = -kInf, sum_free = 0.0;
        int n_free = 0;
        for (std::size_t t = 0; t < m_; ++t) {
            const double yg = y_[t] * G_[t];
            if (upper_bound(t)) {
                if (y_[t] == -1) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else if (lower_bound(t)) {
                if (y_[t] == 1) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        return n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
    }

    const Eigen::MatrixXd &K_;
    const std::vector<int> &y_;
    double C_;
    SvcOptions opts_;
    std::size_t m_;
    std::vector<double> alpha_;
    std::vector<double> G_;
};

}  // namespace

SvcModel fit_binary(const KernelMatrix &K, const std::vector<int> &y, double C,
                    const SvcOptions &opts) {
    check_train_matrix(K, y.size());
    if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("SVC regularization C must be positive");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw ConfigError("fit_binary labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw DataError("SVC training set contains a single class");

    SvcModel model;
    model.C = C;
    model.train_ids = K.col_ids.empty() ? iota_ids(y.size()) : K.col_ids;
    SmoSolver(K.values, y, C, opts).solve(model);
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (model.alpha[t] > 0.0) {
            model.support_idx.push_back(t);
            model.dual_coefs.push_back(model.alpha[t] * y[t]);
        }
    }
    return model;
}

SvcModel fit_binary_labels(const KernelMatrix &K, const Labels &y, double C, const SvcOptions &opts) {
    const auto classes = distinct_labels(y);
    if (classes.size() != 2) {
        throw DataError("binary SVC needs exactly two classes, got " + std::to_string(classes.size()));
    }
    std::vector<int> pm(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) pm[t] = y[t] == classes[1] ? 1 : -1;
    SvcModel model = fit_binary(K, pm, C, opts);
    model.classes = classes;
    return model;
}

Eigen::VectorXd decision_function(const SvcModel &model, const KernelMatrix &K_test) {
    if (static_cast<std::size_t>(K_test.cols()) != model.train_ids.size()) {
        throw ConfigError("test kernel has " + std::to_string(K_test.cols()) +
                          " columns, model was trained on " + std::to_string(model.train_ids.size()));
    }
    if (!K_test.col_ids.empty() && K_test.col_ids != model.train_ids) {
        throw ConfigError("test kernel columns are not aligned with the training sample ids");
    }
    Eigen::VectorXd f = Eigen::VectorXd::Constant(K_test.rows(), model.bias);
    for (std::size_t k = 0; k < model.support_idx.size(); ++k) {
        f += model.dual_coefs[k] * K_test.values.col(static_cast<Eigen::Index>(model.support_idx[k]));
    }
    return f;
}

Labels predict_binary(const SvcModel &model, const KernelMatrix &K_test) {
    const auto f = decision_function(model, K_test);
    Labels out(static_cast<std::size_t>(f.size()));
    for (Eigen::Index t = 0; t < f.size(); ++t) {
        out[static_cast<std::size_t>(t)] = f(t) > 0.0 ? model.classes[1] : model.classes[0];
    }
    return out;
}

double svm_dual_objective(const Eigen::MatrixXd &K, const std::vector<int> &y,
                          const std::vector<double> &alpha) {
    double lin = 0.0, quad = 0.0;
    const auto m = y.size();
    for (std::size_t i = 0; i < m; ++i) {
        lin += alpha[i];
        for (std::size_t j = 0; j < m; ++j) {
            quad += alpha[i] * alpha[j] * y[i] * y[j] *
                    K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return lin - 0.5 * quad;
}

KernelMatrix submatrix(const KernelMatrix &K, const std::vector<std::size_t> &rows,
                       const std::vector<std::size_t> &cols) {
    KernelMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            out.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                K.values(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[b]));
        }
    }
    for (auto r : rows) out.row_ids.push_back(K.row_ids.empty() ? r : K.row_ids[r]);
    for (auto c : cols) out.col_ids.push_back(K.col_ids.empty() ? c : K.col_ids[c]);
    out.meta = K.meta;
    return out;
}

OvoModel fit_ovo(const KernelMatrix &K_train, const Labels &y, double C, const SvcOptions &opts) {
    check_train_matrix(K_train, y.size());
    OvoModel ovo;
    ovo.classes = distinct_labels(y);
    if (ovo.classes.size() < 2) throw DataError("SVC training set contains a single class");
    for (std::size_t a = 0; a < ovo.classes.size(); ++a) {
        for (std::size_t b = a + 1; b < ovo.classes.size(); ++b) {
            std::vector<std::size_t> idx;
            std::vector<int> pm;
            for (std::size_t t = 0; t < y.size(); ++t) {
                if (y[t] == ovo.classes[a] || y[t] == ovo.classes[b]) {
                    idx.push_back(t);
                    pm.push_back(y[t] == ovo.classes[b] ? 1 : -1);
                }
            }
            PairModel pair{ovo.classes[a], ovo.classes[b], fit_binary(submatrix(K_train, idx, idx), pm, C, opts)};
            pair.model.classes = {ovo.classes[a], ovo.classes[b]};
            // Keep positions relative to the full training matrix.
            for (auto &s : pair.model.support_idx) s = idx[s];
            pair.model.train_ids = K_train.col_ids.empty() ? iota_ids(y.size()) : K_train.col_ids;
            ovo.pairs.push_back(std::move(pair));
        }
    }
    return ovo;
}

Labels predict_ovo(const OvoModel &model, const KernelMatrix &K_test) {
    const auto n = static_cast<std::size_t>(K_test.rows());
    const std::size_t n_classes = model.classes.size();
    std::vector<std::vector<int>> votes(n, std::vector<int>(n_classes, 0));
    std::vector<std::vector<double>> confidence(n, std::vector<double>(n_classes, 0.0));
    std::map<int, std::size_t> pos;
    for (std::size_t c = 0; c < n_classes; ++c) pos[model.classes[c]] = c;
    for (const auto &pair : model.pairs) {
        const auto f = decision_function(pair.model, K_test);
        const std::size_t pa = pos.at(pair.negative), pb = pos.at(pair.positive);
        for (std::size_t t = 0; t < n; ++t) {
            const double v = f(static_cast<Eigen::Index>(t));
            ++votes[t][v > 0.0 ? pb : pa];
            confidence[t][pb] += v;
            confidence[t][pa] -= v;
        }
    }
    Labels out(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < n_classes; ++c) {
            if (votes[t][c] > votes[t][best] ||
                (votes[t][c] == votes[t][best] && confidence[t][c] > confidence[t][best])) {
                best = c;
            }
        }
        out[t] = model.classes[best];
    }
    return out;
}

Labels fit_predict_multiclass(const KernelMatrix &K_train, const Labels &y, double C,
                              const KernelMatrix &K_test, const SvcOptions &opts) {
    return predict_ovo(fit_ovo(K_train, y, C, opts), K_test);
}

double accuracy(const Labels &pred, const Labels &truth) {
    if (pred.size() != truth.size()) {
        throw ConfigError("accuracy: " + std::to_string(pred.size()) + " predictions for " +
                          std::to_string(truth.size()) + " labels");
    }
    if (pred.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t t = 0; t < pred.size(); ++t) hits += pred[t] == truth[t];
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::string model_to_json(const SvcModel &model) {
    nlohmann::json j;
    j["support_idx"] = model.support_idx;
    j["dual_coefs"] = model.dual_coefs;
    j["train_ids"] = model.train_ids;
    j["bias"] = model.bias;
    j["C"] = model.C;
    j["classes"] = model.classes;
    j["converged"] = model.converged;
    j["iterations"] = model.iterations;
    j["dual_objective"] = model.dual_objective;
    return j.dump(2);
}

SvcModel model_from_json(const std::string &text) {
    try {
        const auto j = nlohmann::json::parse(text);
        SvcModel model;
        model.support_idx = j.at("support_idx").get<std::vector<std::size_t>>();
        model.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
        model.train_ids = j.at("train_ids").get<std::vector<std::size_t>>();
        model.bias = j.at("bias").get<double>();
        model.C = j.at("C").get<double>();
        model.classes = j.at("classes").get<std::vector<int>>();
        model.converged = j.value("converged", true);
        model.iterations = j.value("iterations", 0L);
        model.dual_objective = j.value("dual_objective", 0.0);
        if (model.support_idx.size() != model.dual_coefs.size()) {
            throw DataError("support_idx and dual_coefs differ in length");
        }
        return model;
    } catch (const nlohmann::json::exception &e) {
        throw DataError("bad SVC model JSON: " + std::string(e.what()));
    }
}

}  // namespace qkbench
