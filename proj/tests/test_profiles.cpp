#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "halfharmonic/errors.hpp"
#include "halfharmonic/profiles.hpp"

#include <cmath>
#include <random>

using namespace hh;

TEST_CASE("bubble values") {
    const Vec2 w0 = omega(0.0), w1 = omega(1.0);
    CHECK(w0.a == 0.0);
    CHECK(w0.b == -1.0);
    CHECK(w1.a == doctest::Approx(1.0));
    CHECK(w1.b == doctest::Approx(0.0));
    const Vec2 far = omega(1e8);
    CHECK(far.b == doctest::Approx(omega_infinity.b));
}

TEST_CASE("kernel elements at y = 2") {
    // omega'(2) = (2(1-4)/25, 8/25), so Z2 = (6/25, -8/25) and Z3 = 2 Z2.
    const Vec2 z2 = kernel_Z(2, 2.0), z3 = kernel_Z(3, 2.0), z1 = kernel_Z(1, 2.0);
    CHECK(z2.a == doctest::Approx(6.0 / 25.0).epsilon(1e-15));
    CHECK(z2.b == doctest::Approx(-8.0 / 25.0).epsilon(1e-15));
    CHECK(z3.a == doctest::Approx(12.0 / 25.0).epsilon(1e-15));
    CHECK(z3.b == doctest::Approx(-16.0 / 25.0).epsilon(1e-15));
    CHECK(z1.a == doctest::Approx(-omega(2.0).b));
    CHECK(z1.b == doctest::Approx(omega(2.0).a));
    CHECK_THROWS_AS(kernel_Z(4, 0.0), InvalidArgument);
}

TEST_CASE("Z2 is minus the derivative of omega") {
    for (double y : {-3.0, -0.4, 0.0, 0.7, 5.0}) {
        const double d = 1e-5;
        const Vec2 p = omega(y + d), m = omega(y - d), z = kernel_Z(2, y);
        CHECK(z.a == doctest::Approx(-(p.a - m.a) / (2 * d)).epsilon(1e-8));
        CHECK(z.b == doctest::Approx(-(p.b - m.b) / (2 * d)).epsilon(1e-8));
    }
}

TEST_CASE("property: kernel elements are tangent to omega") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> U(-50.0, 50.0);
    for (int k = 0; k < 200; ++k) {
        const double y = U(gen);
        for (int j = 1; j <= 3; ++j) CHECK(std::abs(dot(kernel_Z(j, y), omega(y))) < 1e-14);
    }
}

TEST_CASE("scaled bubble and tension coefficient") {
    const BubbleParams p{0.5, 2.0};
    const Vec2 a = scaled_bubble(p, 2.5), b = omega(1.0);
    CHECK(a.a == doctest::Approx(b.a));
    CHECK(a.b == doctest::Approx(b.b));
    CHECK_THROWS_AS(scaled_bubble(BubbleParams{0.0, 0.0}, 1.0), InvalidArgument);
    CHECK(tension_coeff_omega(0.0) == 2.0);
    CHECK(tension_coeff_omega(3.0) == doctest::Approx(0.2));
}

TEST_CASE("degree-one Mobius trace is a rotated bubble") {
    MobiusSpec m;
    m.degree = 1;
    m.scales = {1.0};
    m.centers = {0.0};
    for (double x : {-4.0, -1.0, 0.0, 0.3, 9.0}) {
        const Vec2 v = mobius_trace(m, x), w = omega(x);
        CHECK(v.a == doctest::Approx(w.b).epsilon(1e-14));
        CHECK(v.b == doctest::Approx(-w.a).epsilon(1e-14));
    }
}

TEST_CASE("property: Mobius traces have unit length") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> U(-3.0, 3.0), S(0.2, 4.0);
    for (int k = 0; k < 50; ++k) {
        MobiusSpec m;
        m.degree = 1 + k % 4;
        m.phase = U(gen);
        for (int d = 0; d < m.degree; ++d) {
            m.scales.push_back(S(gen));
            m.centers.push_back(U(gen));
        }
        const Vec2 v = mobius_trace(m, U(gen));
        CHECK(std::hypot(v.a, v.b) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("Mobius and multi-bubble validation") {
    MobiusSpec m;
    m.degree = 2;
    m.scales = {1.0};
    m.centers = {0.0};
    CHECK_THROWS_AS(validate(m), InvalidArgument);
    m.degree = 0;
    CHECK_THROWS_AS(validate(m), InvalidArgument);
    MultiBubble mb;
    CHECK_THROWS_AS(validate(mb), InvalidArgument);
    mb.bubbles = {{1.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(validate(mb), InvalidArgument);
}

TEST_CASE("multi-bubble ansatz superposes deviations from omega_inf") {
    MultiBubble mb;
    mb.bubbles = {{1.0, -50.0}, {1.0, 50.0}};
    const Vec2 v = multi_bubble(mb, -50.0);
    // Own center contributes omega(0) - omega_inf = (0, -2); the other omega(-100) - omega_inf.
    CHECK(v.a == doctest::Approx(-200.0 / 10001.0).epsilon(1e-14));
    CHECK(v.b == doctest::Approx(-1.0 + 9999.0 / 10001.0 - 1.0).epsilon(1e-14));
}
