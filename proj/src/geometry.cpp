#include "drq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drq {

std::string to_string(Norm p) {
    return p == Norm::L2 ? "l2" : "linf";
}

Norm norm_from_string(const std::string& s) {
    if (s == "l2" || s == "L2" || s == "2") return Norm::L2;
    if (s == "linf" || s == "Linf" || s == "inf") return Norm::Linf;
    throw std::invalid_argument("unknown norm: " + s);
}

double norm(const std::vector<double>& v, Norm p) {
    if (p == Norm::L2) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool contains(const NormBall& ball, const std::vector<double>& point, double tol) {
    std::vector<double> diff(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) diff[i] = point[i] - ball.center[i];
    return norm(diff, ball.p) <= ball.radius + tol;
}

namespace {

void project_ball_inplace(std::vector<double>& x, const NormBall& ball) {
    const std::size_t d = x.size();
    if (ball.p == Norm::Linf) {
        for (std::size_t i = 0; i < d; ++i) {
            const double lo = ball.center[i] - ball.radius;
            const double hi = ball.center[i] + ball.radius;
            x[i] = std::clamp(x[i], lo, hi);
        }
        return;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = x[i] - ball.center[i];
        s += diff * diff;
    }
    const double dist = std::sqrt(s);
    // the slack keeps re-projection of a boundary point a no-op
    if (dist <= ball.radius * (1.0 + 1e-12) || dist == 0.0) return;
    const double scale = ball.radius / dist;
    for (std::size_t i = 0; i < d; ++i) {
        x[i] = ball.center[i] + (x[i] - ball.center[i]) * scale;
    }
}

void clamp_box_inplace(std::vector<double>& x, const DomainBox& box) {
    for (double& v : x) v = std::clamp(v, box.lo, box.hi);
}

}  // namespace

std::vector<double> project(const std::vector<double>& point, const NormBall& ball,
                            const std::optional<DomainBox>& domain) {
    if (point.size() != ball.center.size()) {
        throw std::invalid_argument("project: point/ball dimension mismatch");
    }
    std::vector<double> x = point;
    if (!domain) {
        project_ball_inplace(x, ball);
        return x;
    }
    // ball projection then box clamp, iterated twice; the Linf case is exact
    // after one pass, the L2 case is an approximation of the intersection.
    for (int pass = 0; pass < 2; ++pass) {
        project_ball_inplace(x, ball);
        clamp_box_inplace(x, *domain);
    }
    return x;
}

std::vector<double> ascent_direction(const std::vector<double>& gradient, Norm p) {
    std::vector<double> dir(gradient.size(), 0.0);
    if (p == Norm::Linf) {
        for (std::size_t i = 0; i < gradient.size(); ++i) {
            if (gradient[i] > 0.0) dir[i] = 1.0;
            else if (gradient[i] < 0.0) dir[i] = -1.0;
        }
        return dir;
    }
    const double n = norm(gradient, Norm::L2);
    if (n < 1e-12) return dir;
    for (std::size_t i = 0; i < gradient.size(); ++i) dir[i] = gradient[i] / n;
    return dir;
}

std::vector<double> uniform_in_ball(Norm p, int dim, double radius, SplitMix64& rng) {
    std::vector<double> v(dim, 0.0);
    if (radius <= 0.0) return v;
    if (p == Norm::Linf) {
        for (int i = 0; i < dim; ++i) v[i] = rng.next_uniform(-radius, radius);
        return v;
    }
    // direction from an isotropic Gaussian, length r * U^(1/d)
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        v[i] = rng.next_gaussian();
        s += v[i] * v[i];
    }
    const double len = std::sqrt(s);
    const double target = radius * std::pow(rng.next_double(), 1.0 / dim);
    if (len < 1e-300) return std::vector<double>(dim, 0.0);
    for (int i = 0; i < dim; ++i) v[i] = v[i] / len * target;
    return v;
}

}  // namespace drq
