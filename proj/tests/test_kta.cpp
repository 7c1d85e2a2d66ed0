#include "qkbench/errors.hpp"
#include "qkbench/kta.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

using namespace qkbench;

namespace {

Samples random_samples(Eigen::Index m, Eigen::Index d, Rng &rng) {
    Samples X(m, d);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.uniform();
    return X;
}

Eigen::MatrixXd signed_outer(const Labels &y) {
    const auto m = static_cast<Eigen::Index>(y.size());
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = y[static_cast<std::size_t>(i)] == y[0] ? 1.0 : -1.0;
    return v * v.transpose();
}

// Two noisy clusters, one per class, so KTA training has signal to find.
void two_clusters(std::size_t m, std::uint64_t seed, Samples &X, Labels &y) {
    Rng rng(seed);
    X.resize(static_cast<Eigen::Index>(m), 2);
    y.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const int c = static_cast<int>(i % 2);
        y[i] = c;
        const auto r = static_cast<Eigen::Index>(i);
        X(r, 0) = (c ? 0.75 : 0.25) + 0.1 * rng.normal();
        X(r, 1) = (c ? 0.7 : 0.3) + 0.1 * rng.normal();
    }
}

double batch_kta(const Samples &X, const Labels &y, const EncoderSpec &spec, const AnsatzParams &p,
                 ScalingConfig sc, bool centered = false) {
    return kta_score(gram_from_encoded(encode_samples(X, spec), spec, p, sc), y, centered);
}

}  // namespace

TEST(KtaScore, WorkedExamples) {
    const Labels y{0, 0, 1, 1};
    const Eigen::MatrixXd T = signed_outer(y);
    EXPECT_NEAR(kta_score(T, y), 1.0, 1e-15);
    EXPECT_NEAR(kta_score(-T, y), -1.0, 1e-15);
    EXPECT_NEAR(kta_score(Eigen::MatrixXd::Identity(4, 4), y), 0.5, 1e-15);
}

TEST(KtaScore, InvariantToScaleAndLabelSwap) {
    Rng rng(2);
    const auto X = random_samples(9, 2, rng);
    const Eigen::MatrixXd K = gram_rbf(X, X, 1.0).values;
    const Labels y{0, 1, 1, 0, 1, 0, 0, 1, 1};
    Labels flipped(y);
    for (auto &v : flipped) v = 1 - v;
    const double a = kta_score(K, y);
    EXPECT_NEAR(kta_score(3.7 * K, y), a, 1e-14);
    EXPECT_NEAR(kta_score(K, flipped), a, 1e-14);
    EXPECT_LE(std::abs(a), 1.0);
    EXPECT_NEAR(kta_score(3.7 * K, y, true), kta_score(K, flipped, true), 1e-14);
}

TEST(KtaScore, MulticlassTarget) {
    const Labels y{0, 1, 2, 0};
    const auto T = kta_target(y);
    EXPECT_EQ(T(0, 3), 1.0);
    EXPECT_EQ(T(0, 0), 1.0);
    EXPECT_EQ(T(0, 1), -0.5);
    EXPECT_EQ(T(1, 2), -0.5);
    EXPECT_NEAR(kta_score(T, y), 1.0, 1e-15);
    EXPECT_TRUE(kta_target(Labels{3, 3, 7}).isApprox(signed_outer(Labels{3, 3, 7})));
}

TEST(KtaScore, CenteredMatchesExplicitCentering) {
    Rng rng(3);
    const auto X = random_samples(6, 3, rng);
    const Eigen::MatrixXd K = gram_rbf(X, X, 0.5).values;
    const Labels y{0, 1, 0, 1, 1, 0};
    const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(6, 6) - Eigen::MatrixXd::Constant(6, 6, 1.0 / 6.0);
    const Eigen::MatrixXd Kc = H * K * H, Tc = H * kta_target(y) * H;
    EXPECT_NEAR(kta_score(K, y, true), (Kc.cwiseProduct(Tc)).sum() / (Kc.norm() * Tc.norm()), 1e-13);
}

TEST(KtaScore, RejectsBadShapes) {
    EXPECT_THROW(kta_score(Eigen::MatrixXd(0, 0), Labels{}), ConfigError);
    EXPECT_THROW(kta_score(Eigen::MatrixXd::Identity(3, 2), Labels{0, 1, 0}), ConfigError);
    EXPECT_THROW(kta_score(Eigen::MatrixXd::Identity(3, 3), Labels{0, 1}), ConfigError);
}

TEST(KtaDerivative, MatchesFiniteDifferences) {
    Rng rng(4);
    const auto X = random_samples(5, 2, rng);
    const Eigen::MatrixXd K = gram_rbf(X, X, 0.8).values;
    const Labels y{0, 1, 1, 0, 1};
    for (bool centered : {false, true}) {
        const auto D = kta_dK(K, y, centered);
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < 5; ++i) {
            for (Eigen::Index j = 0; j < 5; ++j) {
                Eigen::MatrixXd Kp = K, Km = K;
                Kp(i, j) += h;
                Km(i, j) -= h;
                const double fd = (kta_score(Kp, y, centered) - kta_score(Km, y, centered)) / (2 * h);
                EXPECT_NEAR(D(i, j), fd, 1e-8);
            }
        }
    }
}

TEST(InitParams, DeterministicAndInRange) {
    const auto a = init_params(3, 4, 17), b = init_params(3, 4, 17), c = init_params(3, 4, 18);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_EQ(a.size(), 24u);
    for (double v : a.flat()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 2.0 * std::numbers::pi);
    }
}

TEST(KtaGradient, MatchesFiniteDifferences) {
    Rng rng(5);
    struct Case {
        EncoderSpec spec;
        int layers;
        Eigen::Index d;
        bool centered;
    };
    const std::vector<Case> cases{{qamp_spec(2), 2, 3, false},
                                  {qamp_spec(2), 2, 4, true},
                                  {qrbf_spec(0.707), 2, 2, false},
                                  {extended_variant(qamp_spec(2), 1), 1, 3, false}};
    for (const auto &cs : cases) {
        const auto X = random_samples(4, cs.d, rng);
        const Labels y{0, 1, 1, 0};
        const ScalingConfig sc{0.9};
        const auto params = init_params(cs.layers, cs.spec.n_qubits, rng.next());
        const auto grad = kta_gradient(params, X, y, cs.spec, sc, cs.centered);
        ASSERT_EQ(grad.size(), params.size());
        const std::vector<double> x0(params.flat().begin(), params.flat().end());
        const auto fd = oracle::central_difference(
            [&](const std::vector<double> &v) {
                return batch_kta(X, y, cs.spec, AnsatzParams(cs.layers, cs.spec.n_qubits, v), sc, cs.centered);
            },
            x0, 1e-5);
        for (std::size_t k = 0; k < grad.size(); ++k) {
            if (std::abs(fd[k]) < 1e-8) continue;
            EXPECT_NEAR(grad[k], fd[k], 1e-6 * std::max(1.0, std::abs(fd[k]))) << "param " << k;
        }
    }
}

TEST(KtaGradient, ValueMatchesBatchScore) {
    Rng rng(6);
    const auto X = random_samples(5, 2, rng);
    const Labels y{0, 1, 0, 1, 1};
    const auto spec = qrbf_spec(1.0);
    const auto params = init_params(2, 2, 9);
    const auto ev = kta_value_and_gradient(encode_samples(X, spec), y, spec, params, ScalingConfig{1.0});
    EXPECT_NEAR(ev.kta, batch_kta(X, y, spec, params, ScalingConfig{1.0}), 1e-14);
}

TEST(KtaGradient, ZeroScalingKillsPhiGradient) {
    Rng rng(7);
    const auto X = random_samples(4, 3, rng);
    const auto params = init_params(2, 2, 3);
    const auto g = kta_gradient(params, X, Labels{0, 1, 0, 1}, qamp_spec(2), ScalingConfig{0.0});
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (params.is_phi(k)) {
            EXPECT_EQ(g[k], 0.0);
        }
    }
}

TEST(KtaGradient, IdenticalSamplesGiveZeroGradient) {
    // Every kernel entry is 1 whatever the angles, so KTA is constant.
    Samples X(4, 2);
    for (int i = 0; i < 4; ++i) X.row(i) << 0.3, 0.6;
    const auto g = kta_gradient(init_params(2, 2, 1), X, Labels{0, 1, 0, 1}, qrbf_spec(1.0), ScalingConfig{1.0});
    for (double v : g) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(SampleBatch, StratifiedAndWithoutRepeats) {
    const Labels y{0, 0, 0, 0, 0, 0, 1, 1, 2, 2};
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const auto idx = sample_batch(y, 4, rng);
        ASSERT_EQ(idx.size(), 4u);
        std::set<std::size_t> uniq(idx.begin(), idx.end());
        EXPECT_EQ(uniq.size(), 4u);
        std::set<int> classes;
        for (auto i : idx) classes.insert(y[i]);
        EXPECT_EQ(classes.size(), 3u);
    }
    EXPECT_EQ(sample_batch(y, 2, rng).size(), 2u);
    EXPECT_THROW(sample_batch(y, 11, rng), ConfigError);
}

TEST(Train, ZeroStepsKeepsInitialParameters) {
    Samples X;
    Labels y;
    two_clusters(16, 1, X, y);
    TrainConfig cfg;
    cfg.steps = 0;
    const auto r = train(X, y, qrbf_spec(0.707), ScalingConfig{1.0}, 2, cfg);
    EXPECT_EQ(r.best_params, r.initial_params);
    EXPECT_EQ(r.initial_params, init_params(2, 2, cfg.init_seed));
    ASSERT_EQ(r.history.size(), 1u);
    EXPECT_FALSE(r.history[0].train_batch_kta.has_value());
    EXPECT_EQ(r.best_step, 0);
}

TEST(Train, ImprovesValidationAndIsDeterministic) {
    Samples X;
    Labels y;
    two_clusters(24, 2, X, y);
    TrainConfig cfg;
    cfg.steps = 30;
    cfg.eval_every = 10;
    cfg.learning_rate = 0.1;
    const auto spec = qamp_spec(1);
    const auto a = train(X, y, spec, ScalingConfig{1.0}, 2, cfg);
    const auto b = train(X, y, spec, ScalingConfig{1.0}, 2, cfg);
    EXPECT_EQ(a.best_params, b.best_params);
    EXPECT_GE(a.best_validation_kta, a.initial_validation_kta);
    // Checkpoints at 0, 10, 20, 30.
    ASSERT_EQ(a.history.size(), 4u);
    EXPECT_EQ(a.history.back().step, 30);
    double best = -INFINITY;
    for (const auto &c : a.history) best = std::max(best, c.validation_kta);
    EXPECT_EQ(best, a.best_validation_kta);
    EXPECT_EQ(a.subtrain_idx.size() + a.validation_idx.size(), 24u);
    // Validation KTA at the reported best step is reproducible from the parameters.
    Samples V(static_cast<Eigen::Index>(a.validation_idx.size()), 2);
    Labels yv;
    for (std::size_t i = 0; i < a.validation_idx.size(); ++i) {
        V.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(a.validation_idx[i]));
        yv.push_back(y[a.validation_idx[i]]);
    }
    EXPECT_NEAR(batch_kta(V, yv, spec, a.best_params, ScalingConfig{1.0}), a.best_validation_kta, 1e-12);
}

TEST(Train, RejectsUnusableLabels) {
    Samples X(4, 2);
    X.setRandom();
    TrainConfig cfg;
    cfg.steps = 1;
    EXPECT_THROW(train(X, Labels{1, 1, 1, 1}, qamp_spec(1), ScalingConfig{1.0}, 1, cfg), ConfigError);
    EXPECT_THROW(train(X, Labels{0, 0, 0, 1}, qamp_spec(1), ScalingConfig{1.0}, 1, cfg), ConfigError);
    cfg.learning_rate = 0.0;
    EXPECT_THROW(train(X, Labels{0, 0, 1, 1}, qamp_spec(1), ScalingConfig{1.0}, 1, cfg), ConfigError);
}

TEST(CheckpointFile, RoundTripAndHash) {
    CheckpointFile c;
    c.spec = qrbf_spec(2.236);
    c.params = init_params(2, 2, 5);
    c.s = 0.35;
    c.seed = 5;
    c.history = {{0, std::nullopt, 0.1}, {10, 0.3, 0.25}};
    const auto path = std::filesystem::temp_directory_path() / "qkbench_ckpt_test.json";
    save_checkpoint(c, path);
    const auto r = load_checkpoint(path);
    std::filesystem::remove(path);
    EXPECT_EQ(r.params, c.params);
    EXPECT_EQ(r.s, c.s);
    EXPECT_EQ(r.spec.length_scale, 2.236);
    ASSERT_EQ(r.history.size(), 2u);
    EXPECT_FALSE(r.history[0].train_batch_kta.has_value());
    EXPECT_EQ(*r.history[1].train_batch_kta, 0.3);
    EXPECT_EQ(checkpoint_hash(r), checkpoint_hash(c));

    auto other = c;
    other.history.clear();
    EXPECT_EQ(checkpoint_hash(other), checkpoint_hash(c));
    other.s = 0.36;
    EXPECT_NE(checkpoint_hash(other), checkpoint_hash(c));

    auto text = checkpoint_json(c);
    const auto pos = text.find("0.35");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 4, "0.45");
    EXPECT_THROW(parse_checkpoint(text), DataError);
    EXPECT_THROW(parse_checkpoint("{}"), DataError);
}
