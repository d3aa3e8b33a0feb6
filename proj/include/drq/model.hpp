#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drq {

enum class Activation { Relu, Tanh, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Anything attacks and DRQ can work with: logits plus an exact gradient of
// the cross-entropy loss with respect to the input.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual int input_dim() const = 0;
    virtual int class_count() const = 0;
    virtual std::vector<double> forward(const std::vector<double>& x) const = 0;
    virtual std::vector<double> input_gradient(const std::vector<double>& x, int target_class) const = 0;
};

struct DenseLayer {
    int out = 0;
    int in = 0;
    Activation activation = Activation::Identity;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> bias;     // out
};

// Feed-forward dense classifier. Immutable once built; the final layer is
// identity so forward() returns raw logits.
class DenseNetwork final : public Classifier {
public:
    DenseNetwork(int input_dim, std::vector<DenseLayer> layers);

    int input_dim() const override { return input_dim_; }
    int class_count() const override { return layers_.back().out; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    std::vector<double> forward(const std::vector<double>& x) const override;
    std::vector<double> input_gradient(const std::vector<double>& x, int target_class) const override;

private:
    int input_dim_;
    std::vector<DenseLayer> layers_;

    friend struct NetworkGradients;
};

// Numerically stable softmax (max subtracted before exponentiation).
std::vector<double> softmax_confidences(const std::vector<double>& logits);

// Argmax with ties broken by the lowest index.
int argmax_lowest(const std::vector<double>& v);

int predict(const Classifier& net, const std::vector<double>& x);

// -log softmax(logits)[class], computed in log-sum-exp form.
double cross_entropy(const std::vector<double>& logits, int class_index);

// softmax(N(x))[i]
double class_confidence(const Classifier& net, const std::vector<double>& x, int class_index);
// max softmax(N(x)), the confidence of the predicted class
double top_confidence(const Classifier& net, const std::vector<double>& x);

// Full backward pass; used by the trainer, input_gradient() returns just
// the input part.
struct NetworkGradients {
    std::vector<double> input;
    std::vector<std::vector<double>> weight;  // per layer, row-major
    std::vector<std::vector<double>> bias;
    double loss = 0.0;
};
NetworkGradients backward(const DenseNetwork& net, const std::vector<double>& x, int target_class);

// Line-oriented text serialization, bit-exact round-trip at full decimal
// precision.
void save_network(const DenseNetwork& net, std::ostream& out);
void save_network(const DenseNetwork& net, const std::string& path);
DenseNetwork load_network(std::istream& in);
DenseNetwork load_network(const std::string& path);

}  // namespace drq
