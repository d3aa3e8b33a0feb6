#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drq/attacks.hpp"
#include "drq/geometry.hpp"
#include "drq/model.hpp"

namespace drq {

struct EmptyExploration : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateDirection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DrqConfig {
    double alpha = 0.5;
    // unset -> the sample's own confidence f(x) (the non-AT policy)
    std::optional<double> confidence_threshold;
    // set -> skip calibration (prior-knowledge shortcut, e.g. 2x the
    // adversarial-training budget)
    std::optional<double> fixed_epsilon_p;
    Norm p = Norm::Linf;
    // restrict exploration to the k largest logits (the originally
    // predicted class is always added)
    std::optional<int> top_k;
    int exploration_iterations = 20;
    int quantification_iterations = 20;
    int calibration_max_iterations = 200;
    std::optional<double> exploration_step;      // unset -> 2.5 * eps / iters
    std::optional<double> quantification_step;
    double calibration_initial_radius = 0.05;
    double calibration_max_radius = 1e3;
    std::optional<DomainBox> domain;
    std::uint64_t seed = 0;
};

struct ExploredClass {
    std::vector<double> point;  // x~_i
    double confidence = 0.0;    // f_i(x~_i)
};

struct DrqResult {
    double epsilon_p = 0.0;
    std::map<int, ExploredClass> explored;
    std::map<int, double> robust_confidence;         // r_i
    std::map<int, std::vector<double>> quantified;   // x^_i
    int label = 0;
    int standard_label = 0;
    bool calibration_failed = false;  // epsilon_p is the +inf sentinel
};

// Vicinity radius from the minimum-norm attack (Eq. 1 behavior).
double calibrate(const Classifier& net, const std::vector<double>& x, const DrqConfig& cfg);

// Per-class targeted search for the highest-confidence point that the
// classifier actually assigns to that class. The originally predicted class
// is always part of the candidate set.
std::map<int, ExploredClass> explore(const Classifier& net, const std::vector<double>& x,
                                     double epsilon_p, const std::vector<int>& classes,
                                     const DrqConfig& cfg);

struct Quantified {
    double robust_confidence = 0.0;
    std::vector<double> point;
};

// Lowest class-i confidence reachable from x~_i within radius alpha*eps.
Quantified quantify(const Classifier& net, const std::vector<double>& x_tilde, int class_i,
                    double alpha, double epsilon_p, const DrqConfig& cfg);

// Calibration -> exploration -> quantification -> robust argmax.
DrqResult drq_predict(const Classifier& net, const std::vector<double>& x, const DrqConfig& cfg);

// cos between the DRQ correction direction (x_hat_drq - x) and a given
// perturbation direction (x_adv - x).
double drq_cosine_diagnostic(const std::vector<double>& x, const std::vector<double>& x_hat_drq,
                             const std::vector<double>& x_adv);

enum class SearchMode { Gradient, Random };

// Ablation variant: either phase may be replaced by uniform ball sampling
// (n_random draws, best kept per class).
DrqResult drq_predict_ablated(const Classifier& net, const std::vector<double>& x,
                              const DrqConfig& cfg, SearchMode explore_mode,
                              SearchMode quantify_mode, int n_random, std::uint64_t seed);

}  // namespace drq
