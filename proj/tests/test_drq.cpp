#include <cmath>

#include "doctest.h"
#include "drq/drq.hpp"
#include "drq/fields.hpp"
#include "grid_oracle.hpp"
#include "test_support.hpp"

using namespace drq;
using drq::testing::grid_drq_predict;
using drq::testing::halfspace_network;
using drq::testing::identity_network;
using drq::testing::random_network;
using drq::testing::zero_network;

namespace {

DrqConfig basic_config(Norm p, double fixed_eps) {
    DrqConfig cfg;
    cfg.p = p;
    cfg.fixed_epsilon_p = fixed_eps;
    return cfg;
}

// class-1 confidence bump inside flat class-0 territory: a spurious island
FieldClassifier island_classifier() {
    return FieldClassifier(ScalarField::gaussian_mixture(
        0.35, {GaussianBump{0.3, {0.0, 0.0}, 0.15}}));
}

}  // namespace

TEST_CASE("calibrate recovers the linear boundary distance") {
    const auto net = halfspace_network({1.0, 0.0});
    DrqConfig cfg;
    cfg.p = Norm::L2;
    cfg.confidence_threshold = 0.5;
    cfg.calibration_max_iterations = 300;
    CHECK(calibrate(net, {0.3, 0.0}, cfg) == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("fixed epsilon short-circuits calibration") {
    const auto net = halfspace_network({1.0, 0.0});
    const auto cfg = basic_config(Norm::Linf, 0.25);
    const auto result = drq_predict(net, {0.3, 0.0}, cfg);
    CHECK(result.epsilon_p == 0.25);
}

TEST_CASE("explore keeps only the original class when the vicinity is tiny") {
    const auto net = identity_network(2);
    const std::vector<double> x{2.0, 0.0};
    const auto cfg = basic_config(Norm::Linf, 0.01);
    const auto explored = explore(net, x, 0.01, {0, 1}, cfg);
    REQUIRE(explored.size() == 1);
    REQUIRE(explored.count(0) == 1);
    CHECK(norm({explored.at(0).point[0] - x[0], explored.at(0).point[1] - x[1]}, Norm::Linf) <=
          0.01 + 1e-9);
}

TEST_CASE("explore rejects an empty class list") {
    const auto net = identity_network(2);
    const auto cfg = basic_config(Norm::Linf, 0.1);
    CHECK_THROWS_AS(explore(net, {0.0, 0.0}, 0.1, {}, cfg), std::invalid_argument);
}

TEST_CASE("top_k restricts exploration to the largest logits plus the prediction") {
    const auto net = identity_network(3);
    const std::vector<double> x{3.0, 2.0, 1.0};
    DrqConfig cfg = basic_config(Norm::Linf, 5.0);
    cfg.top_k = 2;
    const auto result = drq_predict(net, x, cfg);
    for (const auto& [cls, ex] : result.explored) {
        CHECK(cls < 2);  // explored set is {0, 1}: the two largest logits
    }
    CHECK(result.explored.count(0) == 1);
}

TEST_CASE("quantify with alpha zero returns the explored point unchanged") {
    const auto net = identity_network(2);
    const auto cfg = basic_config(Norm::Linf, 0.4);
    const std::vector<double> x_tilde{0.5, 0.1};
    const auto q = quantify(net, x_tilde, 0, 0.0, 0.4, cfg);
    CHECK(q.point == x_tilde);
    CHECK(q.robust_confidence == doctest::Approx(class_confidence(net, x_tilde, 0)));
}

TEST_CASE("quantify on a quadratic bowl reaches the closed-form robust confidence") {
    // u(z) = 0.3 + |z|^2 is the class-1 confidence; exploring class 1 from
    // the rim, quantification over the alpha ball comes back to distance
    // (1-alpha)*eps, so r_1 = u0 + mu*(1-alpha)^2 eps^2
    const FieldClassifier net(ScalarField::quadratic(0.3, 1.0, {0.0, 0.0}));
    const double eps = 0.4, alpha = 0.5;
    DrqConfig cfg = basic_config(Norm::L2, eps);
    cfg.quantification_iterations = 60;
    const std::vector<double> x_tilde{eps, 0.0};  // analytic explored point for class 1
    const auto q = quantify(net, x_tilde, 1, alpha, eps, cfg);
    CHECK(q.robust_confidence == doctest::Approx(0.3 + 0.25 * eps * eps).epsilon(5e-3));
}

TEST_CASE("drq flips a spurious island prediction to the enclosing class") {
    const auto net = island_classifier();
    const std::vector<double> x{0.0, 0.0};
    REQUIRE(predict(net, x) == 1);  // the island wins standard inference

    DrqConfig cfg = basic_config(Norm::L2, 0.6);
    cfg.exploration_iterations = 40;
    cfg.quantification_iterations = 40;
    const auto result = drq_predict(net, x, cfg);
    CHECK(result.standard_label == 1);
    CHECK(result.label == 0);

    // lattice oracle agrees
    const auto oracle = grid_drq_predict(net, x, 0.6, cfg.alpha, Norm::L2, 0.6 / 200.0);
    CHECK(oracle.standard_label == 1);
    CHECK(oracle.label == 0);
}

TEST_CASE("drq keeps confident points far from any boundary") {
    const FieldClassifier net(ScalarField::sigmoid({2.0, 0.0}, 0.0));
    const std::vector<double> x{1.5, 0.3};
    const auto cfg = basic_config(Norm::L2, 0.4);
    const auto result = drq_predict(net, x, cfg);
    CHECK(result.standard_label == 1);
    CHECK(result.label == 1);
}

TEST_CASE("symmetric field on the symmetry axis ties to class 0") {
    const FieldClassifier net(ScalarField::sigmoid({1.0, 0.0}, 0.0));
    const std::vector<double> x{0.0, 0.3};
    const auto cfg = basic_config(Norm::Linf, 0.2);
    const auto result = drq_predict(net, x, cfg);
    REQUIRE(result.robust_confidence.count(0) == 1);
    REQUIRE(result.robust_confidence.count(1) == 1);
    CHECK(result.robust_confidence.at(0) ==
          doctest::Approx(result.robust_confidence.at(1)).epsilon(1e-12));
    CHECK(result.label == 0);
}

TEST_CASE("attack-based drq matches the lattice oracle on random island queries") {
    const auto net = island_classifier();
    SplitMix64 rng(404);
    DrqConfig cfg = basic_config(Norm::L2, 0.5);
    cfg.exploration_iterations = 40;
    cfg.quantification_iterations = 40;
    int agree = 0;
    const int total = 60;
    for (int i = 0; i < total; ++i) {
        const std::vector<double> x{rng.next_uniform(-0.8, 0.8), rng.next_uniform(-0.8, 0.8)};
        const auto fast = drq_predict(net, x, cfg);
        const auto oracle = grid_drq_predict(net, x, 0.5, cfg.alpha, Norm::L2, 0.5 / 200.0);
        if (fast.label == oracle.label) ++agree;
    }
    CHECK(agree >= static_cast<int>(total * 0.95));
}

TEST_CASE("drq results satisfy the ball containment invariants") {
    SplitMix64 rng(88);
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = random_network(rng, 3, 3, 8, Activation::Tanh);
        const auto x = testing::random_point(rng, 3);
        DrqConfig cfg = basic_config(trial % 2 ? Norm::L2 : Norm::Linf, 0.3);
        const auto result = drq_predict(net, x, cfg);
        for (const auto& [cls, ex] : result.explored) {
            std::vector<double> diff(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) diff[i] = ex.point[i] - x[i];
            CHECK(norm(diff, cfg.p) <= result.epsilon_p + 1e-9);
            const auto& quant = result.quantified.at(cls);
            for (std::size_t i = 0; i < x.size(); ++i) diff[i] = quant[i] - ex.point[i];
            CHECK(norm(diff, cfg.p) <= cfg.alpha * result.epsilon_p + 1e-9);
            CHECK(result.robust_confidence.at(cls) <= ex.confidence + 1e-12);
        }
        CHECK(result.explored.count(result.standard_label) == 1);
    }
}

TEST_CASE("alpha zero collapses the label to the explored argmax") {
    SplitMix64 rng(31337);
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = random_network(rng, 2, 3, 6, Activation::Tanh);
        const auto x = testing::random_point(rng, 2);
        DrqConfig cfg = basic_config(Norm::Linf, 0.25);
        cfg.alpha = 0.0;
        const auto result = drq_predict(net, x, cfg);
        int best_cls = -1;
        double best_conf = -1.0;
        for (const auto& [cls, ex] : result.explored) {
            if (ex.confidence > best_conf) {
                best_conf = ex.confidence;
                best_cls = cls;
            }
        }
        CHECK(result.label == best_cls);
    }
}

TEST_CASE("drq_predict is bitwise deterministic") {
    SplitMix64 rng(2718);
    const auto net = random_network(rng, 3, 4, 8, Activation::Relu);
    const auto x = testing::random_point(rng, 3);
    DrqConfig cfg = basic_config(Norm::Linf, 0.3);
    const auto a = drq_predict(net, x, cfg);
    const auto b = drq_predict(net, x, cfg);
    CHECK(a.label == b.label);
    CHECK(a.epsilon_p == b.epsilon_p);
    CHECK(a.robust_confidence == b.robust_confidence);
    CHECK(a.quantified == b.quantified);
}

TEST_CASE("calibration failure falls back to the standard prediction") {
    const auto net = zero_network(2, 2);
    DrqConfig cfg;
    cfg.p = Norm::L2;
    cfg.confidence_threshold = 0.5;
    cfg.calibration_max_iterations = 50;
    const auto result = drq_predict(net, {0.1, 0.2}, cfg);
    CHECK(result.calibration_failed);
    CHECK(std::isinf(result.epsilon_p));
    CHECK(result.label == result.standard_label);
    CHECK(result.explored.empty());
}

TEST_CASE("cosine diagnostic closed forms and degenerate input") {
    const std::vector<double> x{0.0, 0.0};
    CHECK(drq_cosine_diagnostic(x, {-1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(-1.0));
    CHECK(drq_cosine_diagnostic(x, {0.0, 2.0}, {1.0, 0.0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(drq_cosine_diagnostic(x, {0.0, 0.0}, {1.0, 0.0}), DegenerateDirection);
}

TEST_CASE("gradient/gradient ablation modes delegate to drq_predict") {
    SplitMix64 rng(5150);
    const auto net = random_network(rng, 2, 3, 6, Activation::Tanh);
    const auto x = testing::random_point(rng, 2);
    const auto cfg = basic_config(Norm::Linf, 0.3);
    const auto a = drq_predict(net, x, cfg);
    const auto b =
        drq_predict_ablated(net, x, cfg, SearchMode::Gradient, SearchMode::Gradient, 20, 9);
    CHECK(a.label == b.label);
    CHECK(a.robust_confidence == b.robust_confidence);
}

TEST_CASE("random ablation modes stay feasible and deterministic") {
    SplitMix64 rng(6021);
    const auto net = random_network(rng, 2, 3, 6, Activation::Tanh);
    const auto x = testing::random_point(rng, 2);
    const auto cfg = basic_config(Norm::Linf, 0.3);
    const auto a = drq_predict_ablated(net, x, cfg, SearchMode::Random, SearchMode::Random, 20, 1);
    const auto b = drq_predict_ablated(net, x, cfg, SearchMode::Random, SearchMode::Random, 20, 1);
    CHECK(a.label == b.label);
    CHECK(a.robust_confidence == b.robust_confidence);
    for (const auto& [cls, ex] : a.explored) {
        std::vector<double> diff(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) diff[i] = ex.point[i] - x[i];
        CHECK(norm(diff, cfg.p) <= 0.3 + 1e-9);
        CHECK(a.robust_confidence.at(cls) <= ex.confidence + 1e-12);
    }
    // the unperturbed center keeps the original class explorable
    CHECK(a.explored.count(predict(net, x)) == 1);
}
