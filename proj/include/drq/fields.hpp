#pragma once

#include <string>
#include <variant>
#include <vector>

#include "drq/geometry.hpp"
#include "drq/model.hpp"

namespace drq {

// ---- closed-form binary classifier families, d in {1,2} ----

// u(x) = clamp(u0 + mu * |x - center|_2^2, 0, 1)
struct QuadraticBowl {
    double u0 = 0.0;
    double mu = 1.0;
    std::vector<double> center;
};

struct GaussianBump {
    double amplitude = 0.0;  // negative amplitudes plant dips
    std::vector<double> center;
    double sigma = 1.0;
};

// u(x) = clamp(base + sum_k a_k exp(-|x-c_k|^2 / (2 sigma_k^2)), 0, 1)
struct GaussianMixture {
    double base = 0.5;
    std::vector<GaussianBump> bumps;
};

// s(x) = w.x + b; u = clamp(s, 0, 1) or u = 1/(1+exp(-s))
struct MonotoneLinear {
    std::vector<double> weights;
    double bias = 0.0;
    bool sigmoid = false;
};

class ScalarField {
public:
    static ScalarField quadratic(double u0, double mu, std::vector<double> center);
    static ScalarField gaussian_mixture(double base, std::vector<GaussianBump> bumps);
    static ScalarField linear(std::vector<double> weights, double bias);
    static ScalarField sigmoid(std::vector<double> weights, double bias);

    int dim() const { return dim_; }
    double value(const std::vector<double>& x) const;
    // gradient of the unclamped evaluator; zero where the clamp is active
    std::vector<double> gradient(const std::vector<double>& x) const;

    // exact extrema available (quadratic and monotone-linear families)
    bool has_closed_form() const;
    // bound on |grad u| over B(center; radius), used to scale grid tolerances
    double lipschitz_bound(const std::vector<double>& center, double radius) const;
    std::string describe() const;

    const QuadraticBowl* as_quadratic() const;
    const MonotoneLinear* as_linear() const;
    const GaussianMixture* as_mixture() const;

private:
    ScalarField(int dim, std::variant<QuadraticBowl, GaussianMixture, MonotoneLinear> spec);
    int dim_;
    std::variant<QuadraticBowl, GaussianMixture, MonotoneLinear> spec_;
};

// ---- ball extrema ----

enum class ExtremumKind { Min, Max };

struct BallOptimum {
    std::vector<double> point;
    double value = 0.0;
    enum class Method { Grid, ClosedForm } method = Method::Grid;
};

// Exhaustive lattice search over the ball refined by a local halving-step
// pass; exact closed form for quadratic and monotone-linear fields.
// grid_pitch <= 0 selects radius/200.
BallOptimum ball_extremum(const ScalarField& field, const NormBall& ball, ExtremumKind kind,
                          double grid_pitch = 0.0);

// force the lattice route even when a closed form exists (oracle cross-checks)
BallOptimum ball_extremum_grid(const ScalarField& field, const NormBall& ball, ExtremumKind kind,
                               double grid_pitch = 0.0);

// ---- binary DRQ and the Appendix propositions ----

struct BinaryDrqResult {
    double u_drq = 0.0;
    int label = 0;  // round(u_drq), round(t)=1 iff t >= 0.5
    BallOptimum x_tilde0, x_tilde1, x_hat0, x_hat1;
};

BinaryDrqResult binary_drq(const ScalarField& field, const std::vector<double>& x, double epsilon,
                           double alpha, Norm p = Norm::L2, double grid_pitch = 0.0);

struct WideMinimumCheck {
    bool wide = false;
    bool strict = false;
};

WideMinimumCheck is_wide_local_minimum(const ScalarField& field, const std::vector<double>& x,
                                       double epsilon, Norm p = Norm::L2, double grid_pitch = 0.0);

// g_eps(alpha) = max_{B(x; alpha eps)} u - min_{B(x; eps)} u; requires x to
// be an eps-wide local minimum (checked on the lattice).
double sharpness(const ScalarField& field, const std::vector<double>& x, double epsilon,
                 double alpha, Norm p = Norm::L2, double grid_pitch = 0.0);

struct CheckRow {
    std::string check;
    double measured = 0.0;  // pass iff measured >= bound - tolerance
    double bound = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerificationReport {
    bool pass = true;
    std::vector<CheckRow> rows;
};

// alpha-monotonicity of the quantified confidences plus the alpha=0 / alpha=1
// extreme-case estimates.
VerificationReport verify_monotonicity(const ScalarField& field, const std::vector<double>& x,
                                       double epsilon, double alpha_low, double alpha_high,
                                       Norm p = Norm::L2, double grid_pitch = 0.0);

// Strong-convexity lower bounds on u_DRQ for the quadratic family at its
// minimum: the sharpness form, the corollary form, and the alpha=0.5 special
// case. use_grid switches from the exact route to the lattice route.
VerificationReport verify_strong_convexity_bound(const ScalarField& field,
                                                 const std::vector<double>& x, double epsilon,
                                                 double alpha, bool use_grid = false,
                                                 double grid_pitch = 0.0);

// ---- field-backed two-class classifier ----

// Exposes a scalar field as a differentiable 2-class classifier with softmax
// confidences (1-u, u), so attacks and DRQ run on closed-form decision
// surfaces that a lattice oracle can verify.
class FieldClassifier final : public Classifier {
public:
    explicit FieldClassifier(ScalarField field);
    int input_dim() const override { return field_.dim(); }
    int class_count() const override { return 2; }
    std::vector<double> forward(const std::vector<double>& x) const override;
    std::vector<double> input_gradient(const std::vector<double>& x, int target_class) const override;
    const ScalarField& field() const { return field_; }

private:
    ScalarField field_;
};

}  // namespace drq
