#include "drq/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace drq {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double sq(double v) { return v * v; }

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += sq(a[i] - b[i]);
    return s;
}

void check_dim(int dim) {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("scalar fields support d in {1,2} only");
    }
}

std::string format_vec(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ";";
        os << v[i];
    }
    return os.str();
}

}  // namespace

ScalarField::ScalarField(int dim, std::variant<QuadraticBowl, GaussianMixture, MonotoneLinear> spec)
    : dim_(dim), spec_(std::move(spec)) {}

ScalarField ScalarField::quadratic(double u0, double mu, std::vector<double> center) {
    check_dim(static_cast<int>(center.size()));
    if (mu <= 0.0) throw std::invalid_argument("quadratic field needs mu > 0");
    if (u0 < 0.0 || u0 > 1.0) throw std::invalid_argument("quadratic field needs u0 in [0,1]");
    const int d = static_cast<int>(center.size());
    return ScalarField(d, QuadraticBowl{u0, mu, std::move(center)});
}

ScalarField ScalarField::gaussian_mixture(double base, std::vector<GaussianBump> bumps) {
    if (bumps.empty()) throw std::invalid_argument("gaussian mixture needs at least one bump");
    const int d = static_cast<int>(bumps.front().center.size());
    check_dim(d);
    for (const auto& b : bumps) {
        if (static_cast<int>(b.center.size()) != d) {
            throw std::invalid_argument("gaussian mixture bump dimensions differ");
        }
        if (b.sigma <= 0.0) throw std::invalid_argument("gaussian bump needs sigma > 0");
    }
    return ScalarField(d, GaussianMixture{base, std::move(bumps)});
}

ScalarField ScalarField::linear(std::vector<double> weights, double bias) {
    check_dim(static_cast<int>(weights.size()));
    const int d = static_cast<int>(weights.size());
    return ScalarField(d, MonotoneLinear{std::move(weights), bias, false});
}

ScalarField ScalarField::sigmoid(std::vector<double> weights, double bias) {
    check_dim(static_cast<int>(weights.size()));
    const int d = static_cast<int>(weights.size());
    return ScalarField(d, MonotoneLinear{std::move(weights), bias, true});
}

double ScalarField::value(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("field value: bad dimension");
    if (const auto* q = std::get_if<QuadraticBowl>(&spec_)) {
        return clamp01(q->u0 + q->mu * dist2(x, q->center));
    }
    if (const auto* m = std::get_if<GaussianMixture>(&spec_)) {
        double v = m->base;
        for (const auto& b : m->bumps) {
            v += b.amplitude * std::exp(-dist2(x, b.center) / (2.0 * sq(b.sigma)));
        }
        return clamp01(v);
    }
    const auto& l = std::get<MonotoneLinear>(spec_);
    double s = l.bias;
    for (std::size_t i = 0; i < x.size(); ++i) s += l.weights[i] * x[i];
    return l.sigmoid ? 1.0 / (1.0 + std::exp(-s)) : clamp01(s);
}

std::vector<double> ScalarField::gradient(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("field gradient: bad dimension");
    std::vector<double> g(dim_, 0.0);
    if (const auto* q = std::get_if<QuadraticBowl>(&spec_)) {
        const double raw = q->u0 + q->mu * dist2(x, q->center);
        if (raw <= 0.0 || raw >= 1.0) return g;  // clamp active
        for (int i = 0; i < dim_; ++i) g[i] = 2.0 * q->mu * (x[i] - q->center[i]);
        return g;
    }
    if (const auto* m = std::get_if<GaussianMixture>(&spec_)) {
        double raw = m->base;
        for (const auto& b : m->bumps) {
            raw += b.amplitude * std::exp(-dist2(x, b.center) / (2.0 * sq(b.sigma)));
        }
        if (raw <= 0.0 || raw >= 1.0) return g;
        for (const auto& b : m->bumps) {
            const double e = b.amplitude * std::exp(-dist2(x, b.center) / (2.0 * sq(b.sigma)));
            for (int i = 0; i < dim_; ++i) g[i] += e * -(x[i] - b.center[i]) / sq(b.sigma);
        }
        return g;
    }
    const auto& l = std::get<MonotoneLinear>(spec_);
    double s = l.bias;
    for (std::size_t i = 0; i < x.size(); ++i) s += l.weights[i] * x[i];
    if (l.sigmoid) {
        const double u = 1.0 / (1.0 + std::exp(-s));
        for (int i = 0; i < dim_; ++i) g[i] = l.weights[i] * u * (1.0 - u);
    } else {
        if (s <= 0.0 || s >= 1.0) return g;
        for (int i = 0; i < dim_; ++i) g[i] = l.weights[i];
    }
    return g;
}

bool ScalarField::has_closed_form() const {
    return !std::holds_alternative<GaussianMixture>(spec_);
}

double ScalarField::lipschitz_bound(const std::vector<double>& center, double radius) const {
    if (const auto* q = std::get_if<QuadraticBowl>(&spec_)) {
        const double dist = std::sqrt(dist2(center, q->center));
        return 2.0 * q->mu * (dist + radius * std::sqrt(static_cast<double>(dim_)));
    }
    if (const auto* m = std::get_if<GaussianMixture>(&spec_)) {
        double l = 0.0;
        for (const auto& b : m->bumps) l += std::abs(b.amplitude) * 0.6066 / b.sigma;
        return l;
    }
    const auto& l = std::get<MonotoneLinear>(spec_);
    double n = 0.0;
    for (double w : l.weights) n += w * w;
    n = std::sqrt(n);
    return l.sigmoid ? n / 4.0 : n;
}

std::string ScalarField::describe() const {
    std::ostringstream os;
    os.precision(6);
    if (const auto* q = std::get_if<QuadraticBowl>(&spec_)) {
        os << "quadratic(u0=" << q->u0 << ";mu=" << q->mu << ";center=" << format_vec(q->center) << ")";
    } else if (const auto* m = std::get_if<GaussianMixture>(&spec_)) {
        os << "mixture(base=" << m->base;
        for (const auto& b : m->bumps) {
            os << ";bump(a=" << b.amplitude << ";c=" << format_vec(b.center) << ";s=" << b.sigma << ")";
        }
        os << ")";
    } else {
        const auto& l = std::get<MonotoneLinear>(spec_);
        os << (l.sigmoid ? "sigmoid" : "linear") << "(w=" << format_vec(l.weights)
           << ";b=" << l.bias << ")";
    }
    return os.str();
}

const QuadraticBowl* ScalarField::as_quadratic() const { return std::get_if<QuadraticBowl>(&spec_); }
const MonotoneLinear* ScalarField::as_linear() const { return std::get_if<MonotoneLinear>(&spec_); }
const GaussianMixture* ScalarField::as_mixture() const { return std::get_if<GaussianMixture>(&spec_); }

// ---- extrema ----

namespace {

bool better(ExtremumKind kind, double candidate, double incumbent) {
    return kind == ExtremumKind::Min ? candidate < incumbent : candidate > incumbent;
}

// lattice anchored at the ball center; offsets are integer multiples of the
// pitch so lattices over nested balls with the same center nest exactly
template <class F>
void for_each_lattice_point(const NormBall& ball, double pitch, F&& fn) {
    const int d = static_cast<int>(ball.center.size());
    const long steps = ball.radius <= 0.0 || pitch <= 0.0
                           ? 0
                           : static_cast<long>(std::floor(ball.radius / pitch + 1e-9));
    std::vector<double> point(ball.center);
    if (d == 1) {
        for (long i = -steps; i <= steps; ++i) {
            point[0] = ball.center[0] + static_cast<double>(i) * pitch;
            fn(point);
        }
        return;
    }
    const double r2 = sq(ball.radius) * (1.0 + 1e-12);
    for (long i = -steps; i <= steps; ++i) {
        const double dx = static_cast<double>(i) * pitch;
        point[0] = ball.center[0] + dx;
        for (long j = -steps; j <= steps; ++j) {
            const double dy = static_cast<double>(j) * pitch;
            if (ball.p == Norm::L2 && dx * dx + dy * dy > r2) continue;
            point[1] = ball.center[1] + dy;
            fn(point);
        }
    }
}

// halving-step pattern search that slides candidates along the ball surface
void refine_on_ball(const ScalarField& field, const NormBall& ball, ExtremumKind kind,
                    std::vector<double>& point, double& value, double pitch) {
    const int d = static_cast<int>(ball.center.size());
    std::vector<std::vector<double>> moves;
    for (int a = 0; a < d; ++a) {
        for (double s : {1.0, -1.0}) {
            std::vector<double> m(d, 0.0);
            m[a] = s;
            moves.push_back(std::move(m));
        }
    }
    if (d == 2) {
        for (double sx : {1.0, -1.0}) {
            for (double sy : {1.0, -1.0}) moves.push_back({sx, sy});
        }
    }
    double step = pitch;
    for (int it = 0; it < 240 && step > 1e-14; ++it) {
        bool improved = false;
        for (const auto& m : moves) {
            std::vector<double> cand = point;
            for (int i = 0; i < d; ++i) cand[i] += step * m[i];
            cand = project(cand, ball);
            const double v = field.value(cand);
            if (better(kind, v, value)) {
                point = std::move(cand);
                value = v;
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }
}

BallOptimum closed_form_extremum(const ScalarField& field, const NormBall& ball, ExtremumKind kind) {
    BallOptimum result;
    result.method = BallOptimum::Method::ClosedForm;
    const int d = static_cast<int>(ball.center.size());
    const double r = ball.radius;

    if (const QuadraticBowl* q = field.as_quadratic()) {
        if (ball.p == Norm::L2) {
            const double dist = std::sqrt(dist2(ball.center, q->center));
            if (kind == ExtremumKind::Min) {
                if (dist <= r) {
                    result.point = q->center;
                } else {
                    result.point.resize(d);
                    for (int i = 0; i < d; ++i) {
                        result.point[i] =
                            ball.center[i] + (q->center[i] - ball.center[i]) * (r / dist);
                    }
                }
            } else {
                result.point.resize(d);
                if (dist > 0.0) {
                    for (int i = 0; i < d; ++i) {
                        result.point[i] =
                            ball.center[i] - (q->center[i] - ball.center[i]) * (r / dist);
                    }
                } else {
                    result.point = ball.center;
                    result.point[0] += r;
                }
            }
        } else {
            result.point.resize(d);
            for (int i = 0; i < d; ++i) {
                const double lo = ball.center[i] - r;
                const double hi = ball.center[i] + r;
                if (kind == ExtremumKind::Min) {
                    result.point[i] = std::clamp(q->center[i], lo, hi);
                } else {
                    result.point[i] =
                        std::abs(hi - q->center[i]) >= std::abs(lo - q->center[i]) ? hi : lo;
                }
            }
        }
        result.value = field.value(result.point);
        return result;
    }

    const MonotoneLinear* l = field.as_linear();
    // steepest point of the linear score in the ball; the value transform is
    // monotone so it shares the argmax
    const double sign = kind == ExtremumKind::Max ? 1.0 : -1.0;
    result.point = ball.center;
    if (ball.p == Norm::L2) {
        double n = 0.0;
        for (double w : l->weights) n += w * w;
        n = std::sqrt(n);
        if (n > 1e-300) {
            for (int i = 0; i < d; ++i) result.point[i] += sign * r * l->weights[i] / n;
        }
    } else {
        for (int i = 0; i < d; ++i) {
            if (l->weights[i] > 0.0) result.point[i] += sign * r;
            else if (l->weights[i] < 0.0) result.point[i] -= sign * r;
        }
    }
    result.value = field.value(result.point);
    return result;
}

}  // namespace

BallOptimum ball_extremum_grid(const ScalarField& field, const NormBall& ball, ExtremumKind kind,
                               double grid_pitch) {
    if (static_cast<int>(ball.center.size()) != field.dim()) {
        throw std::invalid_argument("ball_extremum: ball/field dimension mismatch");
    }
    const double pitch = grid_pitch > 0.0 ? grid_pitch : ball.radius / 200.0;
    BallOptimum result;
    result.method = BallOptimum::Method::Grid;
    result.point = ball.center;
    result.value = field.value(ball.center);
    for_each_lattice_point(ball, pitch, [&](const std::vector<double>& p) {
        const double v = field.value(p);
        if (better(kind, v, result.value)) {
            result.value = v;
            result.point = p;
        }
    });
    if (ball.radius > 0.0 && pitch > 0.0) {
        refine_on_ball(field, ball, kind, result.point, result.value, pitch);
    }
    return result;
}

BallOptimum ball_extremum(const ScalarField& field, const NormBall& ball, ExtremumKind kind,
                          double grid_pitch) {
    if (field.has_closed_form()) return closed_form_extremum(field, ball, kind);
    return ball_extremum_grid(field, ball, kind, grid_pitch);
}

BinaryDrqResult binary_drq(const ScalarField& field, const std::vector<double>& x, double epsilon,
                           double alpha, Norm p, double grid_pitch) {
    if (epsilon <= 0.0) throw std::invalid_argument("binary_drq: epsilon must be > 0");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("binary_drq: alpha must be in [0,1]");
    const double pitch = grid_pitch > 0.0 ? grid_pitch : epsilon / 200.0;

    BinaryDrqResult r;
    r.x_tilde0 = ball_extremum(field, NormBall{p, x, epsilon}, ExtremumKind::Min, pitch);
    r.x_tilde1 = ball_extremum(field, NormBall{p, x, epsilon}, ExtremumKind::Max, pitch);
    r.x_hat0 =
        ball_extremum(field, NormBall{p, r.x_tilde0.point, alpha * epsilon}, ExtremumKind::Max, pitch);
    r.x_hat1 =
        ball_extremum(field, NormBall{p, r.x_tilde1.point, alpha * epsilon}, ExtremumKind::Min, pitch);

    // the class-0 candidate wins ties
    if (r.x_hat0.value <= 1.0 - r.x_hat1.value) {
        r.u_drq = r.x_hat0.value;
    } else {
        r.u_drq = r.x_hat1.value;
    }
    r.label = r.u_drq >= 0.5 ? 1 : 0;
    return r;
}

WideMinimumCheck is_wide_local_minimum(const ScalarField& field, const std::vector<double>& x,
                                       double epsilon, Norm p, double grid_pitch) {
    const double pitch = grid_pitch > 0.0 ? grid_pitch : epsilon / 200.0;
    const double ux = field.value(x);
    WideMinimumCheck check{true, true};
    for_each_lattice_point(NormBall{p, x, epsilon}, pitch, [&](const std::vector<double>& pt) {
        bool is_center = true;
        for (std::size_t i = 0; i < pt.size(); ++i) {
            if (pt[i] != x[i]) {
                is_center = false;
                break;
            }
        }
        if (is_center) return;
        const double v = field.value(pt);
        if (v < ux - 1e-12) check.wide = false;
        if (v <= ux + 1e-12) check.strict = false;
    });
    if (!check.wide) check.strict = false;
    return check;
}

double sharpness(const ScalarField& field, const std::vector<double>& x, double epsilon,
                 double alpha, Norm p, double grid_pitch) {
    if (alpha < 0.0) throw std::invalid_argument("sharpness: alpha must be >= 0");
    if (!is_wide_local_minimum(field, x, epsilon, p, grid_pitch).wide) {
        throw std::domain_error("sharpness: x is not an epsilon-wide local minimum");
    }
    if (alpha == 0.0) return 0.0;
    const double pitch = grid_pitch > 0.0 ? grid_pitch : epsilon / 200.0;
    const auto hi = ball_extremum(field, NormBall{p, x, alpha * epsilon}, ExtremumKind::Max, pitch);
    const auto lo = ball_extremum(field, NormBall{p, x, epsilon}, ExtremumKind::Min, pitch);
    return hi.value - lo.value;
}

namespace {

CheckRow make_row(const std::string& name, double measured, double bound, double tol) {
    return CheckRow{name, measured, bound, tol, measured >= bound - tol};
}

}  // namespace

VerificationReport verify_monotonicity(const ScalarField& field, const std::vector<double>& x,
                                       double epsilon, double alpha_low, double alpha_high,
                                       Norm p, double grid_pitch) {
    if (!(0.0 <= alpha_low && alpha_low <= alpha_high && alpha_high <= 1.0)) {
        throw std::invalid_argument("verify_monotonicity: need 0 <= alpha_low <= alpha_high <= 1");
    }
    const double pitch = grid_pitch > 0.0 ? grid_pitch : epsilon / 200.0;
    const double tol = field.has_closed_form()
                           ? 1e-9
                           : 2.0 * field.lipschitz_bound(x, 2.5 * epsilon) * pitch + 1e-9;

    const auto x_tilde0 = ball_extremum(field, NormBall{p, x, epsilon}, ExtremumKind::Min, pitch);
    const auto x_tilde1 = ball_extremum(field, NormBall{p, x, epsilon}, ExtremumKind::Max, pitch);
    auto hat0 = [&](double a) {
        return ball_extremum(field, NormBall{p, x_tilde0.point, a * epsilon}, ExtremumKind::Max, pitch)
            .value;
    };
    auto hat1 = [&](double a) {
        return ball_extremum(field, NormBall{p, x_tilde1.point, a * epsilon}, ExtremumKind::Min, pitch)
            .value;
    };

    const double ux = field.value(x);
    VerificationReport report;
    report.rows.push_back(make_row("xhat0_alpha_monotone", hat0(alpha_high), hat0(alpha_low), tol));
    report.rows.push_back(make_row("xhat1_alpha_monotone", hat1(alpha_low), hat1(alpha_high), tol));
    report.rows.push_back(make_row("xhat0_zero_below_ux", ux, hat0(0.0), tol));
    report.rows.push_back(make_row("xhat0_one_above_ux", hat0(1.0), ux, tol));
    report.rows.push_back(make_row("xhat1_zero_above_ux", hat1(0.0), ux, tol));
    report.rows.push_back(make_row("xhat1_one_below_ux", ux, hat1(1.0), tol));
    for (const auto& row : report.rows) report.pass = report.pass && row.pass;
    return report;
}

VerificationReport verify_strong_convexity_bound(const ScalarField& field,
                                                 const std::vector<double>& x, double epsilon,
                                                 double alpha, bool use_grid, double grid_pitch) {
    const QuadraticBowl* q = field.as_quadratic();
    if (!q) throw std::domain_error("verify_strong_convexity_bound: quadratic family only");
    if (std::sqrt(dist2(x, q->center)) > 1e-12) {
        throw std::domain_error("verify_strong_convexity_bound: x must be the bowl minimum");
    }
    // every extremum the check touches stays below u0 + mu*eps^2, so that is
    // the range that must fit inside [0,1]
    if (q->u0 + q->mu * sq(epsilon) > 1.0 + 1e-12) {
        throw std::domain_error("verify_strong_convexity_bound: field leaves [0,1] on the eps ball");
    }
    const double pitch = grid_pitch > 0.0 ? grid_pitch : epsilon / 200.0;
    const double ux = field.value(x);
    const double tol = use_grid ? 1e-4 : 1e-9;

    double u_drq, g_alpha;
    if (use_grid) {
        const NormBall vicinity{Norm::L2, x, epsilon};
        const auto t0 = ball_extremum_grid(field, vicinity, ExtremumKind::Min, pitch);
        const auto t1 = ball_extremum_grid(field, vicinity, ExtremumKind::Max, pitch);
        const auto h0 = ball_extremum_grid(field, NormBall{Norm::L2, t0.point, alpha * epsilon},
                                           ExtremumKind::Max, pitch);
        const auto h1 = ball_extremum_grid(field, NormBall{Norm::L2, t1.point, alpha * epsilon},
                                           ExtremumKind::Min, pitch);
        u_drq = h0.value <= 1.0 - h1.value ? h0.value : h1.value;
        g_alpha = h0.value - t0.value;
    } else {
        const auto r = binary_drq(field, x, epsilon, alpha, Norm::L2, pitch);
        u_drq = r.u_drq;
        g_alpha = r.x_hat0.value - r.x_tilde0.value;
    }

    const double bound_sharpness = std::min(ux + g_alpha, ux + q->mu * sq(1.0 - alpha) * sq(epsilon));
    const double bound_corollary =
        std::min(ux + q->mu * sq(alpha) * sq(epsilon), ux + q->mu * sq(1.0 - alpha) * sq(epsilon));

    VerificationReport report;
    report.rows.push_back(make_row("drq_strong_convexity_bound", u_drq, bound_sharpness, tol));
    report.rows.push_back(make_row("drq_corollary_bound", u_drq, bound_corollary, tol));
    if (alpha == 0.5) {
        report.rows.push_back(
            make_row("drq_half_alpha_bound", u_drq, ux + q->mu * sq(epsilon) / 4.0, tol));
    }
    for (const auto& row : report.rows) report.pass = report.pass && row.pass;
    return report;
}

// ---- FieldClassifier ----

FieldClassifier::FieldClassifier(ScalarField field) : field_(std::move(field)) {}

std::vector<double> FieldClassifier::forward(const std::vector<double>& x) const {
    const double u = std::clamp(field_.value(x), 1e-12, 1.0 - 1e-12);
    return {0.0, std::log(u / (1.0 - u))};
}

std::vector<double> FieldClassifier::input_gradient(const std::vector<double>& x,
                                                    int target_class) const {
    if (target_class < 0 || target_class > 1) {
        throw std::invalid_argument("FieldClassifier: target class out of range");
    }
    const double u = std::clamp(field_.value(x), 1e-9, 1.0 - 1e-9);
    std::vector<double> g = field_.gradient(x);
    const double factor = (u - (target_class == 1 ? 1.0 : 0.0)) / (u * (1.0 - u));
    for (double& v : g) v *= factor;
    return g;
}

}  // namespace drq
