#pragma once

// Exhaustive lattice DRQ over a 2-class classifier. Test-only oracle: it
// never touches the attack machinery, only forward evaluations on a lattice,
// so it independently checks the attack-based implementation.

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "drq/geometry.hpp"
#include "drq/model.hpp"

namespace drq::testing {

struct GridDrq {
    int label = 0;
    int standard_label = 0;
    std::map<int, double> explored_confidence;
    std::map<int, std::vector<double>> explored_point;
    std::map<int, double> robust_confidence;
};

template <class F>
inline void lattice_scan(const NormBall& ball, double pitch, F&& fn) {
    const long steps =
        ball.radius <= 0.0 ? 0 : static_cast<long>(std::floor(ball.radius / pitch + 1e-9));
    std::vector<double> p(2);
    const double r2 = ball.radius * ball.radius * (1.0 + 1e-12);
    for (long i = -steps; i <= steps; ++i) {
        const double dx = static_cast<double>(i) * pitch;
        for (long j = -steps; j <= steps; ++j) {
            const double dy = static_cast<double>(j) * pitch;
            if (ball.p == Norm::L2 && dx * dx + dy * dy > r2) continue;
            p[0] = ball.center[0] + dx;
            p[1] = ball.center[1] + dy;
            fn(p);
        }
    }
}

inline GridDrq grid_drq_predict(const Classifier& net, const std::vector<double>& x,
                                double epsilon, double alpha, Norm p, double pitch) {
    GridDrq result;
    result.standard_label = predict(net, x);

    // exploration: per class, the highest-confidence lattice point the
    // classifier assigns to that class
    lattice_scan(NormBall{p, x, epsilon}, pitch, [&](const std::vector<double>& point) {
        const auto probs = softmax_confidences(net.forward(point));
        const int cls = argmax_lowest(probs);
        auto it = result.explored_confidence.find(cls);
        if (it == result.explored_confidence.end() || probs[cls] > it->second) {
            result.explored_confidence[cls] = probs[cls];
            result.explored_point[cls] = point;
        }
    });

    // quantification: lowest class confidence over the shrunken ball
    for (const auto& [cls, point] : result.explored_point) {
        double worst = softmax_confidences(net.forward(point))[cls];
        lattice_scan(NormBall{p, point, alpha * epsilon}, pitch,
                     [&](const std::vector<double>& q) {
                         const double conf = softmax_confidences(net.forward(q))[cls];
                         if (conf < worst) worst = conf;
                     });
        result.robust_confidence[cls] = worst;
    }

    int label = -1;
    double best = -1.0;
    for (const auto& [cls, conf] : result.robust_confidence) {
        if (conf > best) {
            best = conf;
            label = cls;
        }
    }
    result.label = label;
    return result;
}

}  // namespace drq::testing
