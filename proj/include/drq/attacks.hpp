#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drq/geometry.hpp"
#include "drq/model.hpp"

namespace drq {

// Calibration could not find a qualifying adversary within the search range;
// the sample is more robust than the search can certify.
struct SearchFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AttackConfig {
    int iterations = 20;
    // absolute step in the ball's norm; unset -> 2.5 * radius / iterations
    std::optional<double> step_size;
    Norm p = Norm::Linf;
    bool deterministic_start = true;  // start at the ball center
    std::uint64_t seed = 0;           // random starts and EOT noise
    std::optional<DomainBox> domain;

    double effective_step(double radius) const;
};

struct EotConfig {
    int noise_samples = 10;
    // 0 -> uniform random noise in the ball; >0 -> inner untargeted PGD of
    // this many steps per noisy gradient
    int inner_iterations = 0;
    // radius of the noise ball; unset -> the attack ball's radius
    std::optional<double> noise_radius;
};

enum class EotMode { Targeted, Untargeted };

// Trajectory summary of a targeted run. `best` maximizes the target-class
// confidence over all visited iterates (start included); `best_in_class`
// additionally requires the iterate to actually be classified as the target.
struct TargetedRun {
    std::vector<double> best;
    double best_confidence = 0.0;
    std::optional<std::vector<double>> best_in_class;
    double best_in_class_confidence = 0.0;
};

TargetedRun pgd_targeted_run(const Classifier& net, const std::vector<double>& x, int target_class,
                             const NormBall& ball, const AttackConfig& cfg);

// Highest-f_target iterate of a projected descent on CE(N(.), target).
std::vector<double> pgd_targeted(const Classifier& net, const std::vector<double>& x, int target_class,
                                 const NormBall& ball, const AttackConfig& cfg);

struct UntargetedRun {
    std::vector<double> best;  // lowest f_j iterate
    double best_confidence = 1.0;
};

UntargetedRun pgd_untargeted_run(const Classifier& net, const std::vector<double>& x_start, int class_j,
                                 const NormBall& ball, const AttackConfig& cfg);

// Lowest-f_j iterate of a projected ascent on CE(N(.), j).
std::vector<double> pgd_untargeted(const Classifier& net, const std::vector<double>& x_start, int class_j,
                                   const NormBall& ball, const AttackConfig& cfg);

struct CalibrationResult {
    std::vector<double> point;
    double epsilon_p = 0.0;
};

struct FmnOptions {
    double initial_radius = 0.05;
    double max_radius = 1e3;
    std::optional<DomainBox> domain;
};

// Minimum-norm adversary with a confidence floor: finds x_adv with
// F(x_adv) != F(x) and max-softmax(x_adv) >= c of approximately minimal
// p-distance from x. Gradient boundary-crossing steps with a multiplicative
// radius schedule (shrink 0.9 on success, grow 1.1 otherwise). Throws
// SearchFailure when nothing qualifies within max_iterations.
CalibrationResult fmn_calibrate(const Classifier& net, const std::vector<double>& x,
                                double confidence_threshold, Norm p, int max_iterations,
                                const FmnOptions& opts = {});

// PGD with gradients averaged over noisy replicas of the iterate (equal
// weights). inner_iterations = 0 samples uniform ball noise, > 0 runs an
// inner untargeted PGD per replica. Noise keys derive from
// (seed, iteration, replica) so execution order never matters.
std::vector<double> pgd_eot(const Classifier& net, const std::vector<double>& x, int class_j,
                            const NormBall& ball, const AttackConfig& cfg, const EotConfig& eot,
                            EotMode mode);

struct NoiseAttackResult {
    bool success = false;
    std::vector<double> worst_point;
    double worst_confidence = 1.0;  // original-class confidence at worst_point
};

// n uniform samples in the ball; reports whether any flips the prediction
// and the sample with the lowest original-class confidence (first on ties).
NoiseAttackResult random_noise_attack(const Classifier& net, const std::vector<double>& x,
                                      const NormBall& ball, int n_samples, std::uint64_t seed);

}  // namespace drq
