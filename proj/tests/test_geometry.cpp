#include "doctest.h"
#include "drq/geometry.hpp"
#include "test_support.hpp"

using namespace drq;

TEST_CASE("norm computes l2 and linf") {
    CHECK(norm({3.0, 4.0}, Norm::L2) == doctest::Approx(5.0));
    CHECK(norm({3.0, -4.0}, Norm::Linf) == doctest::Approx(4.0));
    CHECK(norm({0.0, 0.0}, Norm::L2) == 0.0);
    CHECK(norm({0.0, 0.0}, Norm::Linf) == 0.0);
}

TEST_CASE("project leaves interior points unchanged") {
    const NormBall ball{Norm::L2, {0.0, 0.0}, 1.0};
    const std::vector<double> x{0.3, -0.2};
    CHECK(project(x, ball) == x);
}

TEST_CASE("project rescales radially for l2") {
    const NormBall ball{Norm::L2, {0.0, 0.0}, 1.0};
    const auto p = project({3.0, 4.0}, ball);
    CHECK(p[0] == doctest::Approx(0.6));
    CHECK(p[1] == doctest::Approx(0.8));
}

TEST_CASE("project clamps per coordinate for linf") {
    const NormBall ball{Norm::Linf, {0.0, 0.0}, 0.5};
    const auto p = project({2.0, -0.2}, ball);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(-0.2));
}

TEST_CASE("project intersects the domain box") {
    const NormBall ball{Norm::Linf, {0.9, 0.9}, 0.5};
    const auto p = project({2.0, 0.8}, ball, DomainBox{0.0, 1.0});
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.8));
}

TEST_CASE("project is idempotent and lands inside the ball") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Norm p = trial % 2 ? Norm::L2 : Norm::Linf;
        const int d = 1 + static_cast<int>(rng.next_below(5));
        NormBall ball{p, testing::random_point(rng, d, -2.0, 2.0), rng.next_uniform(0.0, 1.5)};
        const auto x = testing::random_point(rng, d, -4.0, 4.0);
        const auto once = project(x, ball);
        const auto twice = project(once, ball);
        CHECK(once == twice);
        CHECK(contains(ball, once));
        if (contains(ball, x)) CHECK(project(x, ball) == x);
    }
}

TEST_CASE("ascent_direction uses sign for linf and normalization for l2") {
    const auto dlinf = ascent_direction({0.3, -2.0}, Norm::Linf);
    CHECK(dlinf[0] == 1.0);
    CHECK(dlinf[1] == -1.0);
    const auto dl2 = ascent_direction({3.0, 4.0}, Norm::L2);
    CHECK(dl2[0] == doctest::Approx(0.6));
    CHECK(dl2[1] == doctest::Approx(0.8));
    const auto zero = ascent_direction({0.0, 0.0}, Norm::L2);
    CHECK(zero == std::vector<double>{0.0, 0.0});
    const auto zero_inf = ascent_direction({0.0, 0.0}, Norm::Linf);
    CHECK(zero_inf == std::vector<double>{0.0, 0.0});
}

TEST_CASE("uniform_in_ball stays inside and is reproducible") {
    for (const Norm p : {Norm::L2, Norm::Linf}) {
        SplitMix64 rng(99);
        SplitMix64 rng2(99);
        for (int i = 0; i < 200; ++i) {
            const auto v = uniform_in_ball(p, 3, 0.7, rng);
            CHECK(norm(v, p) <= 0.7 + 1e-12);
            CHECK(v == uniform_in_ball(p, 3, 0.7, rng2));
        }
    }
    SplitMix64 rng(5);
    CHECK(uniform_in_ball(Norm::L2, 4, 0.0, rng) == std::vector<double>(4, 0.0));
}
