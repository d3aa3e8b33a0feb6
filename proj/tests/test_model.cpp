#include <cmath>
#include <sstream>

#include "doctest.h"
#include "drq/model.hpp"
#include "test_support.hpp"

using namespace drq;
using drq::testing::identity_network;
using drq::testing::linear_network;
using drq::testing::random_network;
using drq::testing::zero_network;

TEST_CASE("forward of an identity layer returns the input") {
    const auto net = identity_network(2);
    const auto logits = net.forward({1.0, 2.0});
    CHECK(logits == std::vector<double>{1.0, 2.0});
}

TEST_CASE("forward applies a plain linear map") {
    const auto net = linear_network(2, {{1.0, 0.0}, {0.0, -1.0}}, {0.0, 0.0});
    CHECK(net.forward({3.0, 4.0}) == std::vector<double>{3.0, -4.0});
}

TEST_CASE("two-layer relu forward matches hand evaluation") {
    DenseLayer l1;
    l1.out = 2;
    l1.in = 2;
    l1.activation = Activation::Relu;
    l1.weights = {0.5, -0.25, 0.75, 0.1};
    l1.bias = {0.2, -0.3};
    DenseLayer l2;
    l2.out = 2;
    l2.in = 2;
    l2.activation = Activation::Identity;
    l2.weights = {1.0, -2.0, 0.5, 0.25};
    l2.bias = {0.05, -0.15};
    const DenseNetwork net(2, {l1, l2});
    // x = 0: relu(bias) = (0.2, 0), then W2 * (0.2, 0) + b2
    const auto logits = net.forward({0.0, 0.0});
    CHECK(logits[0] == doctest::Approx(1.0 * 0.2 + 0.05));
    CHECK(logits[1] == doctest::Approx(0.5 * 0.2 - 0.15));
}

TEST_CASE("forward rejects dimension mismatches") {
    const auto net = identity_network(2);
    CHECK_THROWS_AS(net.forward({1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("network construction validates shape chaining") {
    DenseLayer bad;
    bad.out = 2;
    bad.in = 3;  // does not chain with input_dim 2
    bad.activation = Activation::Identity;
    bad.weights.assign(6, 0.0);
    bad.bias.assign(2, 0.0);
    CHECK_THROWS_AS(DenseNetwork(2, {bad}), std::invalid_argument);
}

TEST_CASE("softmax is symmetric, stable and matches closed forms") {
    const auto uniform = softmax_confidences({0.0, 0.0, 0.0});
    for (double p : uniform) CHECK(p == doctest::Approx(1.0 / 3.0));

    const auto shifted = softmax_confidences({1000.0, 0.0});
    CHECK(shifted[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(shifted[1] == doctest::Approx(0.0).epsilon(1e-12));

    const auto closed = softmax_confidences({std::log(2.0), 0.0});
    CHECK(closed[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(closed[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax sums to one for random finite logits") {
    SplitMix64 rng(3);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> logits(2 + rng.next_below(6));
        for (double& l : logits) l = rng.next_uniform(-50.0, 50.0);
        const auto p = softmax_confidences(logits);
        double sum = 0.0;
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("predict takes the argmax and breaks ties low") {
    CHECK(argmax_lowest({3.0, -4.0}) == 0);
    CHECK(argmax_lowest({1.0, 1.0}) == 0);
    const auto net = identity_network(2);
    CHECK(predict(net, {0.2, 0.9}) == 1);
}

TEST_CASE("predict agrees with argmax of softmax confidences") {
    SplitMix64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const auto net = random_network(rng, 3, 4, 8, Activation::Tanh);
        const auto x = testing::random_point(rng, 3);
        CHECK(predict(net, x) == argmax_lowest(softmax_confidences(net.forward(x))));
    }
}

TEST_CASE("cross entropy closed forms") {
    CHECK(cross_entropy({0.0, 0.0}, 0) == doctest::Approx(std::log(2.0)));
    CHECK(cross_entropy({1000.0, 0.0}, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cross_entropy({std::log(2.0), 0.0}, 1) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("input gradient of the identity net is softmax minus onehot") {
    const auto net = identity_network(2);
    const auto g = net.input_gradient({0.0, 0.0}, 0);
    CHECK(g[0] == doctest::Approx(-0.5));
    CHECK(g[1] == doctest::Approx(0.5));
}

TEST_CASE("zero network has zero input gradient") {
    const auto net = zero_network(3, 2);
    const auto g = net.input_gradient({0.4, -0.2, 1.0}, 1);
    CHECK(g == std::vector<double>(3, 0.0));
}

TEST_CASE("input gradient matches central finite differences") {
    SplitMix64 rng(2024);
    int probes = 0;
    while (probes < 100) {
        const int d = 2 + static_cast<int>(rng.next_below(4));
        const int classes = 2 + static_cast<int>(rng.next_below(3));
        const Activation act = probes % 2 ? Activation::Tanh : Activation::Relu;
        const auto net = random_network(rng, d, classes, 6, act);
        const auto x = testing::random_point(rng, d);
        const int target = static_cast<int>(rng.next_below(classes));

        const auto grad = net.input_gradient(x, target);
        const double h = 1e-5;
        std::vector<double> fd(d);
        for (int i = 0; i < d; ++i) {
            auto lo = x, hi = x;
            hi[i] += h;
            lo[i] -= h;
            fd[i] = (cross_entropy(net.forward(hi), target) -
                     cross_entropy(net.forward(lo), target)) /
                    (2.0 * h);
        }
        double num = 0.0, den = 0.0;
        for (int i = 0; i < d; ++i) {
            num += (grad[i] - fd[i]) * (grad[i] - fd[i]);
            den += fd[i] * fd[i];
        }
        const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
        CHECK(rel < 1e-5);
        ++probes;
    }
}

TEST_CASE("forward is deterministic") {
    SplitMix64 rng(55);
    const auto net = random_network(rng, 4, 3, 10, Activation::Tanh);
    const auto x = testing::random_point(rng, 4);
    CHECK(net.forward(x) == net.forward(x));
}

TEST_CASE("serialization round-trips bit-exactly") {
    SplitMix64 rng(77);
    const auto net = random_network(rng, 3, 3, 5, Activation::Relu);
    std::stringstream buffer;
    save_network(net, buffer);
    const auto restored = load_network(buffer);

    REQUIRE(restored.layers().size() == net.layers().size());
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        CHECK(restored.layers()[k].weights == net.layers()[k].weights);
        CHECK(restored.layers()[k].bias == net.layers()[k].bias);
        CHECK(restored.layers()[k].activation == net.layers()[k].activation);
    }
    for (int i = 0; i < 10; ++i) {
        const auto x = testing::random_point(rng, 3);
        CHECK(net.forward(x) == restored.forward(x));
    }
}

TEST_CASE("load rejects malformed files") {
    std::stringstream bad("layer 2 2 relu\n");
    CHECK_THROWS(load_network(bad));
}
