#pragma once

#include <vector>

#include "drq/model.hpp"
#include "drq/rng.hpp"

namespace drq::testing {

// identity d-class network: logits == input
inline DenseNetwork identity_network(int d) {
    DenseLayer l;
    l.out = d;
    l.in = d;
    l.activation = Activation::Identity;
    l.weights.assign(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) l.weights[static_cast<std::size_t>(i) * d + i] = 1.0;
    l.bias.assign(d, 0.0);
    return DenseNetwork(d, {l});
}

// single linear layer, logits = W x + b
inline DenseNetwork linear_network(int in, std::vector<std::vector<double>> rows,
                                   std::vector<double> bias) {
    DenseLayer l;
    l.out = static_cast<int>(rows.size());
    l.in = in;
    l.activation = Activation::Identity;
    for (const auto& row : rows) l.weights.insert(l.weights.end(), row.begin(), row.end());
    l.bias = std::move(bias);
    return DenseNetwork(in, {l});
}

// 2-class net with logits (w.x, 0)
inline DenseNetwork halfspace_network(std::vector<double> w) {
    const int d = static_cast<int>(w.size());
    return linear_network(d, {std::move(w), std::vector<double>(d, 0.0)}, {0.0, 0.0});
}

inline DenseNetwork zero_network(int d, int classes) {
    DenseLayer l;
    l.out = classes;
    l.in = d;
    l.activation = Activation::Identity;
    l.weights.assign(static_cast<std::size_t>(classes) * d, 0.0);
    l.bias.assign(classes, 0.0);
    return DenseNetwork(d, {l});
}

inline DenseNetwork random_network(SplitMix64& rng, int d, int classes, int hidden,
                                   Activation act) {
    std::vector<DenseLayer> layers;
    auto make_layer = [&](int out, int in, Activation a) {
        DenseLayer l;
        l.out = out;
        l.in = in;
        l.activation = a;
        l.weights.resize(static_cast<std::size_t>(out) * in);
        for (double& w : l.weights) w = rng.next_uniform(-1.0, 1.0);
        l.bias.resize(out);
        for (double& b : l.bias) b = rng.next_uniform(-0.5, 0.5);
        return l;
    };
    layers.push_back(make_layer(hidden, d, act));
    layers.push_back(make_layer(hidden, hidden, act));
    layers.push_back(make_layer(classes, hidden, Activation::Identity));
    return DenseNetwork(d, std::move(layers));
}

inline std::vector<double> random_point(SplitMix64& rng, int d, double lo = -1.0, double hi = 1.0) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.next_uniform(lo, hi);
    return x;
}

}  // namespace drq::testing
