#pragma once

#include <optional>
#include <string>
#include <vector>

#include "drq/rng.hpp"

namespace drq {

enum class Norm { L2, Linf };

std::string to_string(Norm p);
Norm norm_from_string(const std::string& s);

// Optional per-coordinate data-domain box (e.g. [0,1] for pixel data).
// When configured it is intersected with every ball during projection.
struct DomainBox {
    double lo = 0.0;
    double hi = 1.0;
};

// lp constraint set B_p(center; radius)
struct NormBall {
    Norm p = Norm::Linf;
    std::vector<double> center;
    double radius = 0.0;
};

double norm(const std::vector<double>& v, Norm p);

bool contains(const NormBall& ball, const std::vector<double>& point, double tol = 1e-12);

// Nearest point of the ball in its own norm. With a domain box the ball
// projection and the box clamp are iterated twice; exact for Linf, a
// documented approximation for L2.
std::vector<double> project(const std::vector<double>& point, const NormBall& ball,
                            const std::optional<DomainBox>& domain = std::nullopt);

// Steepest-ascent unit step for the given norm. Zero gradient (L2 norm
// below 1e-12) gives the zero vector so attacks stall deterministically.
std::vector<double> ascent_direction(const std::vector<double>& gradient, Norm p);

// Uniform sample from B_p(0; radius), keyed by the generator state.
std::vector<double> uniform_in_ball(Norm p, int dim, double radius, SplitMix64& rng);

}  // namespace drq
