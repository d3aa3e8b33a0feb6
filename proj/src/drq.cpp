#include "drq/drq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace drq {

namespace {

// explored classes = top_k by logit, union the original prediction
std::vector<int> candidate_classes(const Classifier& net, const std::vector<double>& x,
                                   const DrqConfig& cfg) {
    const int C = net.class_count();
    std::vector<int> classes;
    if (cfg.top_k && *cfg.top_k < C) {
        const auto logits = net.forward(x);
        std::vector<int> order(C);
        for (int i = 0; i < C; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return logits[a] > logits[b]; });
        order.resize(*cfg.top_k);
        std::set<int> chosen(order.begin(), order.end());
        chosen.insert(argmax_lowest(logits));
        classes.assign(chosen.begin(), chosen.end());
    } else {
        classes.resize(C);
        for (int i = 0; i < C; ++i) classes[i] = i;
    }
    return classes;
}

int robust_argmax(const std::map<int, double>& robust_confidence) {
    int label = -1;
    double best = -1.0;
    for (const auto& [cls, r] : robust_confidence) {
        if (r > best) {  // map iterates in class order, so ties keep the lowest
            best = r;
            label = cls;
        }
    }
    return label;
}

DrqResult finish(const Classifier& net, const std::vector<double>& x, const DrqConfig& cfg,
                 double epsilon_p, std::map<int, ExploredClass> explored) {
    DrqResult result;
    result.epsilon_p = epsilon_p;
    result.standard_label = predict(net, x);
    result.explored = std::move(explored);
    for (const auto& [cls, ex] : result.explored) {
        Quantified q = quantify(net, ex.point, cls, cfg.alpha, epsilon_p, cfg);
        result.robust_confidence[cls] = q.robust_confidence;
        result.quantified[cls] = std::move(q.point);
    }
    result.label = robust_argmax(result.robust_confidence);
    return result;
}

}  // namespace

double calibrate(const Classifier& net, const std::vector<double>& x, const DrqConfig& cfg) {
    const double threshold =
        cfg.confidence_threshold ? *cfg.confidence_threshold : top_confidence(net, x);
    FmnOptions opts;
    opts.initial_radius = cfg.calibration_initial_radius;
    opts.max_radius = cfg.calibration_max_radius;
    opts.domain = cfg.domain;
    return fmn_calibrate(net, x, std::min(threshold, 1.0 - 1e-9), cfg.p,
                         cfg.calibration_max_iterations, opts)
        .epsilon_p;
}

std::map<int, ExploredClass> explore(const Classifier& net, const std::vector<double>& x,
                                     double epsilon_p, const std::vector<int>& classes,
                                     const DrqConfig& cfg) {
    if (classes.empty()) throw std::invalid_argument("explore: empty class set");
    std::set<int> wanted(classes.begin(), classes.end());
    wanted.insert(predict(net, x));  // Eq. (2) must cover the original class

    AttackConfig attack;
    attack.iterations = cfg.exploration_iterations;
    attack.step_size = cfg.exploration_step;
    attack.p = cfg.p;
    attack.domain = cfg.domain;
    attack.seed = cfg.seed;

    const NormBall ball{cfg.p, x, epsilon_p};
    std::map<int, ExploredClass> explored;
    for (int cls : wanted) {
        TargetedRun run = pgd_targeted_run(net, x, cls, ball, attack);
        if (run.best_in_class) {
            explored[cls] = ExploredClass{std::move(*run.best_in_class), run.best_in_class_confidence};
        }
    }
    if (explored.empty()) {
        throw EmptyExploration("explore: no class has a qualifying point in the vicinity");
    }
    return explored;
}

Quantified quantify(const Classifier& net, const std::vector<double>& x_tilde, int class_i,
                    double alpha, double epsilon_p, const DrqConfig& cfg) {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("quantify: alpha must be in [0,1]");
    const double radius = alpha * epsilon_p;

    AttackConfig attack;
    attack.iterations = cfg.quantification_iterations;
    attack.step_size = cfg.quantification_step;
    attack.p = cfg.p;
    attack.domain = cfg.domain;
    attack.seed = cfg.seed;

    const NormBall ball{cfg.p, x_tilde, radius};
    UntargetedRun run = pgd_untargeted_run(net, x_tilde, class_i, ball, attack);
    return Quantified{run.best_confidence, std::move(run.best)};
}

DrqResult drq_predict(const Classifier& net, const std::vector<double>& x, const DrqConfig& cfg) {
    double epsilon_p;
    if (cfg.fixed_epsilon_p) {
        epsilon_p = *cfg.fixed_epsilon_p;
    } else {
        try {
            epsilon_p = calibrate(net, x, cfg);
        } catch (const SearchFailure&) {
            // more robust than the search range: keep the standard prediction
            DrqResult result;
            result.epsilon_p = std::numeric_limits<double>::infinity();
            result.calibration_failed = true;
            result.standard_label = predict(net, x);
            result.label = result.standard_label;
            return result;
        }
    }
    auto explored = explore(net, x, epsilon_p, candidate_classes(net, x, cfg), cfg);
    return finish(net, x, cfg, epsilon_p, std::move(explored));
}

double drq_cosine_diagnostic(const std::vector<double>& x, const std::vector<double>& x_hat_drq,
                             const std::vector<double>& x_adv) {
    const std::size_t d = x.size();
    if (x_hat_drq.size() != d || x_adv.size() != d) {
        throw std::invalid_argument("drq_cosine_diagnostic: dimension mismatch");
    }
    std::vector<double> gamma_drq(d), gamma(d);
    for (std::size_t i = 0; i < d; ++i) {
        gamma_drq[i] = x_hat_drq[i] - x[i];
        gamma[i] = x_adv[i] - x[i];
    }
    const double na = norm(gamma_drq, Norm::L2);
    const double nb = norm(gamma, Norm::L2);
    if (na < 1e-12 || nb < 1e-12) {
        throw DegenerateDirection("drq_cosine_diagnostic: direction norm below 1e-12");
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += gamma_drq[i] * gamma[i];
    return dot / (na * nb);
}

namespace {

std::map<int, ExploredClass> explore_random(const Classifier& net, const std::vector<double>& x,
                                            double epsilon_p, const std::vector<int>& classes,
                                            const DrqConfig& cfg, int n_random, std::uint64_t seed) {
    std::set<int> wanted(classes.begin(), classes.end());
    wanted.insert(predict(net, x));

    const int dim = static_cast<int>(x.size());
    std::vector<std::vector<double>> pool;
    pool.reserve(n_random + 1);
    pool.push_back(x);  // the unperturbed input is always a candidate
    for (int k = 0; k < n_random; ++k) {
        SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(k), 0x6578ULL));
        std::vector<double> z = x;
        const auto noise = uniform_in_ball(cfg.p, dim, epsilon_p, rng);
        for (int i = 0; i < dim; ++i) z[i] += noise[i];
        pool.push_back(project(z, NormBall{cfg.p, x, epsilon_p}, cfg.domain));
    }

    std::map<int, ExploredClass> explored;
    for (const auto& z : pool) {
        const auto probs = softmax_confidences(net.forward(z));
        const int pred = argmax_lowest(probs);
        if (!wanted.count(pred)) continue;
        auto it = explored.find(pred);
        if (it == explored.end() || probs[pred] > it->second.confidence) {
            explored[pred] = ExploredClass{z, probs[pred]};
        }
    }
    if (explored.empty()) {
        throw EmptyExploration("explore: no class has a qualifying point in the vicinity");
    }
    return explored;
}

Quantified quantify_random(const Classifier& net, const std::vector<double>& x_tilde, int class_i,
                           double alpha, double epsilon_p, const DrqConfig& cfg, int n_random,
                           std::uint64_t seed) {
    const double radius = alpha * epsilon_p;
    const int dim = static_cast<int>(x_tilde.size());
    Quantified q{class_confidence(net, x_tilde, class_i), x_tilde};
    for (int k = 0; k < n_random; ++k) {
        SplitMix64 rng(mix_key(seed, static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(class_i), 0x7175ULL));
        std::vector<double> z = x_tilde;
        const auto noise = uniform_in_ball(cfg.p, dim, radius, rng);
        for (int i = 0; i < dim; ++i) z[i] += noise[i];
        z = project(z, NormBall{cfg.p, x_tilde, radius}, cfg.domain);
        const double conf = class_confidence(net, z, class_i);
        if (conf < q.robust_confidence) {
            q.robust_confidence = conf;
            q.point = std::move(z);
        }
    }
    return q;
}

}  // namespace

DrqResult drq_predict_ablated(const Classifier& net, const std::vector<double>& x,
                              const DrqConfig& cfg, SearchMode explore_mode,
                              SearchMode quantify_mode, int n_random, std::uint64_t seed) {
    if (n_random < 1) throw std::invalid_argument("drq_predict_ablated: n_random must be >= 1");
    if (explore_mode == SearchMode::Gradient && quantify_mode == SearchMode::Gradient) {
        return drq_predict(net, x, cfg);
    }
    double epsilon_p;
    if (cfg.fixed_epsilon_p) {
        epsilon_p = *cfg.fixed_epsilon_p;
    } else {
        try {
            epsilon_p = calibrate(net, x, cfg);
        } catch (const SearchFailure&) {
            DrqResult result;
            result.epsilon_p = std::numeric_limits<double>::infinity();
            result.calibration_failed = true;
            result.standard_label = predict(net, x);
            result.label = result.standard_label;
            return result;
        }
    }
    const auto classes = candidate_classes(net, x, cfg);
    auto explored = explore_mode == SearchMode::Gradient
                        ? explore(net, x, epsilon_p, classes, cfg)
                        : explore_random(net, x, epsilon_p, classes, cfg, n_random, seed);

    DrqResult result;
    result.epsilon_p = epsilon_p;
    result.standard_label = predict(net, x);
    result.explored = std::move(explored);
    for (const auto& [cls, ex] : result.explored) {
        Quantified q = quantify_mode == SearchMode::Gradient
                           ? quantify(net, ex.point, cls, cfg.alpha, epsilon_p, cfg)
                           : quantify_random(net, ex.point, cls, cfg.alpha, epsilon_p, cfg,
                                             n_random, seed);
        result.robust_confidence[cls] = q.robust_confidence;
        result.quantified[cls] = std::move(q.point);
    }
    result.label = robust_argmax(result.robust_confidence);
    return result;
}

}  // namespace drq
