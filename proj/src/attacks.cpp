#include "drq/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drq {

double AttackConfig::effective_step(double radius) const {
    if (step_size) return *step_size;
    return 2.5 * radius / std::max(1, iterations);
}

namespace {

std::vector<double> attack_start(const std::vector<double>& center, const NormBall& ball,
                                 const AttackConfig& cfg) {
    if (cfg.deterministic_start) return project(center, ball, cfg.domain);
    SplitMix64 rng(mix_key(cfg.seed, 0x5741ULL));
    std::vector<double> start = center;
    const std::vector<double> noise =
        uniform_in_ball(ball.p, static_cast<int>(center.size()), ball.radius, rng);
    for (std::size_t i = 0; i < start.size(); ++i) start[i] += noise[i];
    return project(start, ball, cfg.domain);
}

void step_inplace(std::vector<double>& x, const std::vector<double>& dir, double step, double sign) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += sign * step * dir[i];
}

}  // namespace

TargetedRun pgd_targeted_run(const Classifier& net, const std::vector<double>& x, int target_class,
                             const NormBall& ball, const AttackConfig& cfg) {
    if (target_class < 0 || target_class >= net.class_count()) {
        throw std::invalid_argument("pgd_targeted: target class out of range");
    }
    const double step = cfg.effective_step(ball.radius);
    std::vector<double> cur = attack_start(x, ball, cfg);

    TargetedRun run;
    auto consider = [&](const std::vector<double>& point) {
        const auto probs = softmax_confidences(net.forward(point));
        const double conf = probs[target_class];
        if (run.best.empty() || conf > run.best_confidence) {
            run.best = point;
            run.best_confidence = conf;
        }
        if (argmax_lowest(probs) == target_class &&
            (!run.best_in_class || conf > run.best_in_class_confidence)) {
            run.best_in_class = point;
            run.best_in_class_confidence = conf;
        }
    };
    consider(cur);

    for (int it = 0; it < cfg.iterations; ++it) {
        const auto grad = net.input_gradient(cur, target_class);
        const auto dir = ascent_direction(grad, ball.p);
        step_inplace(cur, dir, step, -1.0);  // descend the target-class loss
        cur = project(cur, ball, cfg.domain);
        consider(cur);
    }
    return run;
}

std::vector<double> pgd_targeted(const Classifier& net, const std::vector<double>& x, int target_class,
                                 const NormBall& ball, const AttackConfig& cfg) {
    return pgd_targeted_run(net, x, target_class, ball, cfg).best;
}

UntargetedRun pgd_untargeted_run(const Classifier& net, const std::vector<double>& x_start, int class_j,
                                 const NormBall& ball, const AttackConfig& cfg) {
    if (class_j < 0 || class_j >= net.class_count()) {
        throw std::invalid_argument("pgd_untargeted: class out of range");
    }
    const double step = cfg.effective_step(ball.radius);
    std::vector<double> cur = attack_start(x_start, ball, cfg);

    UntargetedRun run;
    auto consider = [&](const std::vector<double>& point) {
        const double conf = class_confidence(net, point, class_j);
        if (run.best.empty() || conf < run.best_confidence) {
            run.best = point;
            run.best_confidence = conf;
        }
    };
    consider(cur);

    for (int it = 0; it < cfg.iterations; ++it) {
        const auto grad = net.input_gradient(cur, class_j);
        const auto dir = ascent_direction(grad, ball.p);
        step_inplace(cur, dir, step, 1.0);  // ascend the class-j loss
        cur = project(cur, ball, cfg.domain);
        consider(cur);
    }
    return run;
}

std::vector<double> pgd_untargeted(const Classifier& net, const std::vector<double>& x_start, int class_j,
                                   const NormBall& ball, const AttackConfig& cfg) {
    return pgd_untargeted_run(net, x_start, class_j, ball, cfg).best;
}

CalibrationResult fmn_calibrate(const Classifier& net, const std::vector<double>& x,
                                double confidence_threshold, Norm p, int max_iterations,
                                const FmnOptions& opts) {
    if (confidence_threshold < 0.0 || confidence_threshold >= 1.0) {
        throw std::invalid_argument("fmn_calibrate: confidence threshold must be in [0,1)");
    }
    const int original = predict(net, x);
    const std::size_t d = x.size();

    double radius = opts.initial_radius;
    std::vector<double> cur = x;
    std::vector<double> best_point;
    double best_dist = std::numeric_limits<double>::infinity();

    std::vector<double> diff(d);
    for (int it = 0; it < max_iterations; ++it) {
        const auto grad = net.input_gradient(cur, original);
        const auto dir = ascent_direction(grad, p);
        // push across the boundary, then keep the iterate inside the
        // current search radius
        const double step = 0.25 * radius;
        for (std::size_t i = 0; i < d; ++i) cur[i] += step * dir[i];
        cur = project(cur, NormBall{p, x, radius}, opts.domain);

        const auto probs = softmax_confidences(net.forward(cur));
        const int pred = argmax_lowest(probs);
        const bool qualifies = pred != original && probs[pred] >= confidence_threshold;
        if (qualifies) {
            for (std::size_t i = 0; i < d; ++i) diff[i] = cur[i] - x[i];
            const double dist = norm(diff, p);
            if (dist < best_dist) {
                best_dist = dist;
                best_point = cur;
            }
            radius = 0.9 * best_dist;
        } else {
            radius = std::min(radius * 1.1, opts.max_radius);
        }
    }
    if (best_point.empty()) {
        throw SearchFailure("fmn_calibrate: no adversary with confidence >= " +
                            std::to_string(confidence_threshold) + " within radius " +
                            std::to_string(opts.max_radius));
    }
    return CalibrationResult{std::move(best_point), best_dist};
}

std::vector<double> pgd_eot(const Classifier& net, const std::vector<double>& x, int class_j,
                            const NormBall& ball, const AttackConfig& cfg, const EotConfig& eot,
                            EotMode mode) {
    if (eot.noise_samples < 1) throw std::invalid_argument("pgd_eot: noise_samples must be >= 1");
    const int dim = static_cast<int>(x.size());
    const double step = cfg.effective_step(ball.radius);
    const double noise_radius = eot.noise_radius.value_or(ball.radius);
    const double outer_sign = mode == EotMode::Targeted ? -1.0 : 1.0;

    std::vector<double> cur = attack_start(x, ball, cfg);

    std::vector<double> best;
    double best_conf = 0.0;
    auto consider = [&](const std::vector<double>& point) {
        const double conf = class_confidence(net, point, class_j);
        const bool better = mode == EotMode::Targeted ? conf > best_conf : conf < best_conf;
        if (best.empty() || better) {
            best = point;
            best_conf = conf;
        }
    };
    consider(cur);

    std::vector<double> avg(dim);
    for (int it = 0; it < cfg.iterations; ++it) {
        std::fill(avg.begin(), avg.end(), 0.0);
        for (int rep = 0; rep < eot.noise_samples; ++rep) {
            SplitMix64 rng(mix_key(cfg.seed, static_cast<std::uint64_t>(it),
                                   static_cast<std::uint64_t>(rep)));
            std::vector<double> z = cur;
            const auto noise = uniform_in_ball(ball.p, dim, noise_radius, rng);
            for (int i = 0; i < dim; ++i) z[i] += noise[i];
            if (eot.inner_iterations > 0) {
                // replica = short untargeted attack around the iterate
                const NormBall inner_ball{ball.p, cur, noise_radius};
                const double inner_step = 2.5 * noise_radius / eot.inner_iterations;
                z = project(z, inner_ball, cfg.domain);
                for (int k = 0; k < eot.inner_iterations; ++k) {
                    const auto g = net.input_gradient(z, class_j);
                    const auto dir = ascent_direction(g, ball.p);
                    step_inplace(z, dir, inner_step, 1.0);
                    z = project(z, inner_ball, cfg.domain);
                }
            }
            const auto g = net.input_gradient(z, class_j);
            for (int i = 0; i < dim; ++i) avg[i] += g[i];
        }
        for (int i = 0; i < dim; ++i) avg[i] /= eot.noise_samples;
        const auto dir = ascent_direction(avg, ball.p);
        step_inplace(cur, dir, step, outer_sign);
        cur = project(cur, ball, cfg.domain);
        consider(cur);
    }
    return best;
}

NoiseAttackResult random_noise_attack(const Classifier& net, const std::vector<double>& x,
                                      const NormBall& ball, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("random_noise_attack: n_samples must be >= 1");
    const int original = predict(net, x);
    const int dim = static_cast<int>(x.size());

    NoiseAttackResult result;
    for (int k = 0; k < n_samples; ++k) {
        SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(k), 0x7261ULL));
        std::vector<double> z = x;
        const auto noise = uniform_in_ball(ball.p, dim, ball.radius, rng);
        for (int i = 0; i < dim; ++i) z[i] += noise[i];
        z = project(z, ball);
        const auto probs = softmax_confidences(net.forward(z));
        if (argmax_lowest(probs) != original) result.success = true;
        if (result.worst_point.empty() || probs[original] < result.worst_confidence) {
            result.worst_point = z;
            result.worst_confidence = probs[original];
        }
    }
    return result;
}

}  // namespace drq
