#include "drq/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace drq {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    if (s == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation: " + s);
}

namespace {

double apply_activation(Activation a, double z) {
    switch (a) {
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
        case Activation::Identity: return z;
    }
    return z;
}

// derivative w.r.t. the pre-activation; ReLU subgradient at 0 is 0
double activation_derivative(Activation a, double z) {
    switch (a) {
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

DenseNetwork::DenseNetwork(int input_dim, std::vector<DenseLayer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
    if (input_dim_ < 1) throw std::invalid_argument("network input dimension must be >= 1");
    if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
    int expected_in = input_dim_;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const DenseLayer& l = layers_[k];
        if (l.in != expected_in) {
            throw std::invalid_argument("layer " + std::to_string(k) + " input dimension " +
                                        std::to_string(l.in) + " does not chain with " +
                                        std::to_string(expected_in));
        }
        if (l.out < 1) throw std::invalid_argument("layer output dimension must be >= 1");
        if (static_cast<int>(l.weights.size()) != l.out * l.in ||
            static_cast<int>(l.bias.size()) != l.out) {
            throw std::invalid_argument("layer " + std::to_string(k) + " parameter sizes inconsistent");
        }
        if (!all_finite(l.weights) || !all_finite(l.bias)) {
            throw std::invalid_argument("layer " + std::to_string(k) + " has non-finite parameters");
        }
        expected_in = l.out;
    }
    if (layers_.back().activation != Activation::Identity) {
        throw std::invalid_argument("final layer must be identity (raw logits)");
    }
    if (layers_.back().out < 2) throw std::invalid_argument("class count must be >= 2");
}

std::vector<double> DenseNetwork::forward(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != input_dim_) {
        throw std::invalid_argument("forward: input has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(input_dim_));
    }
    std::vector<double> a = x;
    for (const DenseLayer& l : layers_) {
        std::vector<double> z(l.out);
        for (int r = 0; r < l.out; ++r) {
            double s = l.bias[r];
            const double* w = &l.weights[static_cast<std::size_t>(r) * l.in];
            for (int c = 0; c < l.in; ++c) s += w[c] * a[c];
            z[r] = apply_activation(l.activation, s);
        }
        a = std::move(z);
    }
    return a;
}

NetworkGradients backward(const DenseNetwork& net, const std::vector<double>& x, int target_class) {
    const auto& layers = net.layers();
    if (target_class < 0 || target_class >= net.class_count()) {
        throw std::invalid_argument("backward: target class out of range");
    }
    // forward pass, keeping pre-activations and activations
    std::vector<std::vector<double>> pre(layers.size());
    std::vector<std::vector<double>> act(layers.size() + 1);
    act[0] = x;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const DenseLayer& l = layers[k];
        pre[k].resize(l.out);
        act[k + 1].resize(l.out);
        for (int r = 0; r < l.out; ++r) {
            double s = l.bias[r];
            const double* w = &l.weights[static_cast<std::size_t>(r) * l.in];
            for (int c = 0; c < l.in; ++c) s += w[c] * act[k][c];
            pre[k][r] = s;
            act[k + 1][r] = apply_activation(l.activation, s);
        }
    }

    NetworkGradients g;
    g.loss = cross_entropy(act.back(), target_class);
    g.weight.resize(layers.size());
    g.bias.resize(layers.size());

    // dL/dlogits = softmax - onehot
    std::vector<double> delta = softmax_confidences(act.back());
    delta[target_class] -= 1.0;

    for (int k = static_cast<int>(layers.size()) - 1; k >= 0; --k) {
        const DenseLayer& l = layers[k];
        if (l.activation != Activation::Identity) {
            for (int r = 0; r < l.out; ++r) delta[r] *= activation_derivative(l.activation, pre[k][r]);
        }
        g.weight[k].assign(static_cast<std::size_t>(l.out) * l.in, 0.0);
        g.bias[k].resize(l.out);
        for (int r = 0; r < l.out; ++r) {
            g.bias[k][r] = delta[r];
            double* row = &g.weight[k][static_cast<std::size_t>(r) * l.in];
            for (int c = 0; c < l.in; ++c) row[c] = delta[r] * act[k][c];
        }
        std::vector<double> prev(l.in, 0.0);
        for (int c = 0; c < l.in; ++c) {
            double s = 0.0;
            for (int r = 0; r < l.out; ++r) s += l.weights[static_cast<std::size_t>(r) * l.in + c] * delta[r];
            prev[c] = s;
        }
        delta = std::move(prev);
    }
    g.input = std::move(delta);
    return g;
}

std::vector<double> DenseNetwork::input_gradient(const std::vector<double>& x, int target_class) const {
    return backward(*this, x, target_class).input;
}

std::vector<double> softmax_confidences(const std::vector<double>& logits) {
    if (logits.empty()) throw std::invalid_argument("softmax of empty logits");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

int predict(const Classifier& net, const std::vector<double>& x) {
    return argmax_lowest(net.forward(x));
}

double cross_entropy(const std::vector<double>& logits, int class_index) {
    if (class_index < 0 || class_index >= static_cast<int>(logits.size())) {
        throw std::invalid_argument("cross_entropy: class index out of range");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - m);
    return m + std::log(sum) - logits[class_index];
}

double class_confidence(const Classifier& net, const std::vector<double>& x, int class_index) {
    return softmax_confidences(net.forward(x))[class_index];
}

double top_confidence(const Classifier& net, const std::vector<double>& x) {
    const auto p = softmax_confidences(net.forward(x));
    return *std::max_element(p.begin(), p.end());
}

void save_network(const DenseNetwork& net, std::ostream& out) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "layers " << net.layers().size() << " input " << net.input_dim()
        << " classes " << net.class_count() << "\n";
    for (const DenseLayer& l : net.layers()) {
        out << "layer " << l.out << " " << l.in << " " << to_string(l.activation) << "\n";
        for (int r = 0; r < l.out; ++r) {
            for (int c = 0; c < l.in; ++c) {
                if (c) out << " ";
                out << l.weights[static_cast<std::size_t>(r) * l.in + c];
            }
            out << "\n";
        }
        for (int r = 0; r < l.out; ++r) {
            if (r) out << " ";
            out << l.bias[r];
        }
        out << "\n";
    }
}

void save_network(const DenseNetwork& net, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    save_network(net, f);
}

DenseNetwork load_network(std::istream& in) {
    std::string tag;
    std::size_t n_layers = 0;
    int input_dim = 0, classes = 0;
    in >> tag >> n_layers;
    if (tag != "layers") throw std::runtime_error("bad network file: expected 'layers'");
    in >> tag >> input_dim;
    if (tag != "input") throw std::runtime_error("bad network file: expected 'input'");
    in >> tag >> classes;
    if (tag != "classes") throw std::runtime_error("bad network file: expected 'classes'");
    std::vector<DenseLayer> layers(n_layers);
    for (std::size_t k = 0; k < n_layers; ++k) {
        DenseLayer& l = layers[k];
        std::string act;
        in >> tag >> l.out >> l.in >> act;
        if (tag != "layer") throw std::runtime_error("bad network file: expected 'layer'");
        l.activation = activation_from_string(act);
        l.weights.resize(static_cast<std::size_t>(l.out) * l.in);
        for (double& w : l.weights) in >> w;
        l.bias.resize(l.out);
        for (double& b : l.bias) in >> b;
    }
    if (!in) throw std::runtime_error("bad network file: truncated");
    DenseNetwork net(input_dim, std::move(layers));
    if (net.class_count() != classes) throw std::runtime_error("bad network file: class count mismatch");
    return net;
}

DenseNetwork load_network(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return load_network(f);
}

}  // namespace drq
