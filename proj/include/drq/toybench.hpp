#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drq/model.hpp"

namespace drq {

struct TrainingDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Dataset {
    std::string name;
    int d = 0;
    int classes = 0;
    std::uint64_t seed = 0;
    int grid = 0;  // >0: grid x grid image in [0,1]; enables spatial corruption
    std::vector<double> features;  // n x d, row-major
    std::vector<int> labels;

    int size() const { return static_cast<int>(labels.size()); }
    std::vector<double> row(int i) const {
        return {features.begin() + static_cast<std::size_t>(i) * d,
                features.begin() + static_cast<std::size_t>(i + 1) * d};
    }
};

// small wrong-class cluster planted inside the other class's territory
struct SpuriousSpec {
    std::vector<double> center;
    int count = 5;
    double stddev = 0.08;
    int label = 1;
};

Dataset make_two_gaussians(double separation, const std::optional<SpuriousSpec>& spurious, int n,
                           std::uint64_t seed);

// oriented bar/blob class templates plus per-sample Gaussian pixel noise
Dataset make_toy_images(int grid_size, int classes, int n, std::uint64_t seed,
                        double noise_sigma = 0.15);

struct Architecture {
    std::vector<int> hidden = {32, 32};
    Activation activation = Activation::Relu;
};

enum class TrainMode { Standard, Adversarial };

struct TrainOptions {
    TrainMode mode = TrainMode::Standard;
    double epsilon_train = 0.1;  // Linf budget of the adversarial batch step
    int inner_iterations = 7;
    int epochs = 20;
    double learning_rate = 0.05;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

// Minibatch gradient descent with deterministic init and batch order. The
// adversarial mode replaces every batch input with a 7-step Linf PGD
// adversary before the loss step. Throws TrainingDivergence on non-finite
// loss.
DenseNetwork train_classifier(const Dataset& data, const Architecture& arch,
                              const TrainOptions& opts);

double accuracy(const Classifier& net, const Dataset& data);

enum class CorruptionKind { GaussianNoise, Rotation, Translation };

CorruptionKind corruption_from_string(const std::string& s);
std::string to_string(CorruptionKind k);

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::GaussianNoise;
    // sigma for noise, max degrees for rotation, max pixel offset for
    // translation; per-sample draws stay within these bounds
    double magnitude = 0.0;
    std::uint64_t seed = 0;
};

// Identity at magnitude 0; preserves shape and labels. Rotation/translation
// require an image-grid dataset.
Dataset corrupt(const Dataset& data, const CorruptionSpec& spec);

struct Region {
    double xmin = -1.0, xmax = 1.0;
    double ymin = -1.0, ymax = 1.0;
};

// Labels of a 2-d classifier on a resolution x resolution grid of cell
// centers; row 0 is the top of the region (image convention).
std::vector<int> decision_boundary_raster(const std::function<int(const std::vector<double>&)>& label_fn,
                                          const Region& region, int resolution);

// CSV with header f0,...,f{d-1},label
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace drq
