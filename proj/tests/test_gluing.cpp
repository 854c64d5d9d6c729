#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "halfharmonic/errors.hpp"
#include "halfharmonic/gluing.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace hh;

namespace {

constexpr double pi = std::numbers::pi;

// int s^4/(1+s^2)^3 ds over the line: with s = tan(th) the integrand is
// sin^4(th), for which the trapezoid rule on a full period is exact.
double quartic_moment() {
    const int n = 64;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += std::pow(std::sin(-pi / 2 + pi * k / n), 4);
    return s * pi / n;
}

Field2 sample_vec(const std::function<Vec2(double)>& f, const GridSpec& g) {
    return sample2(
        [&f](double x, double& a, double& b) {
            const Vec2 v = f(x);
            a = v.a;
            b = v.b;
        },
        g);
}

}  // namespace

TEST_CASE("blow-up rate matches the quartic moment oracle") {
    const double m = quartic_moment();
    CHECK(m == doctest::Approx(3 * pi / 8).epsilon(1e-14));
    for (double eps : {0.01, 0.1, 0.5}) {
        // F = -(eps/pi) m, kappa0 = -(12/13) F
        const double oracle = 12.0 / 13.0 * eps * m / pi;
        CHECK(std::abs(kappa0(default_noise(eps)) - oracle) < 1e-8);
        CHECK(sign_functional(default_noise(eps)) == doctest::Approx(-eps * m / pi).epsilon(1e-9));
    }
    CHECK(std::abs(kappa0(default_noise(0.26)) - 0.09) < 1e-8);
}

TEST_CASE("blow-up rate does not depend on the noise center") {
    CHECK(kappa0(default_noise(0.1, 3.0)) == doctest::Approx(kappa0(default_noise(0.1))).epsilon(1e-10));
}

TEST_CASE("noise preconditions") {
    CHECK_THROWS_AS(validate(default_noise(0.0)), InvalidArgument);
    NoiseSpec n = default_noise(0.1);
    n.profile = [](double r) { return Vec2{0.0, 0.1 * r * r / (1 + r * r)}; };
    CHECK_THROWS_AS(validate(n), SignConditionError);
    CHECK_THROWS_AS(kappa0(n), SignConditionError);
}

TEST_CASE("the 7/24 integral") {
    // antiderivative -1/t + 1/t^2 - 1/(3 t^3) with t = 2 + s
    auto F = [](double s) {
        const double t = 2.0 + s;
        return -1.0 / t + 1.0 / (t * t) - 1.0 / (3 * t * t * t);
    };
    CHECK(std::abs(seven_twentyfourths(2.0) - (F(2.0) - F(0.0))) < 1e-12);
    CHECK(std::abs(seven_twentyfourths(2.0) - 19.0 / 192.0) < 1e-12);
    CHECK(std::abs(seven_twentyfourths(std::numeric_limits<double>::infinity()) - 7.0 / 24.0) < 1e-10);
    CHECK(seven_twentyfourths(0.0) == 0.0);
    // The tail beyond b is about 1/b.
    CHECK(std::abs(seven_twentyfourths(1e6) - (F(1e6) - F(0.0))) < 1e-12);
    CHECK_THROWS_AS(seven_twentyfourths(-1.0), InvalidArgument);
}

TEST_CASE("parameter ODE closed forms") {
    ParamOdeInput in;
    in.kappa0 = 0.03;
    in.d = 0.2;
    in.q = 1.5;
    in.t_end = 10.0;
    const ParamOdeSolution s = param_ode_solve(in);
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        CHECK(s.lambda_closed[i] == doctest::Approx(0.2 * std::exp(-0.1 * s.t[i])).epsilon(1e-12));
        CHECK(s.xi_closed[i] == doctest::Approx(1.5).epsilon(1e-14));
    }
    const double k = in.kappa0;
    in.h1 = [k](double t) { return std::exp(-k * 1.1 * t); };
    in.h2 = [k](double t) { return std::exp(-k * 1.1 * t); };
    CHECK(param_ode_solve(in).max_discrepancy() < 1e-8);
    in.h2 = [](double t) { return 1.0 / (1.0 + t); };
    CHECK_THROWS_AS(param_ode_solve(in), InvalidArgument);
}

TEST_CASE("cutoff profile") {
    CHECK(cutoff_profile(0.0) == 1.0);
    CHECK(cutoff_profile(1.0) == 1.0);
    CHECK(cutoff_profile(2.0) == 0.0);
    CHECK(cutoff_profile(3.0) == 0.0);
    double prev = 1.0;
    for (int k = 0; k <= 100; ++k) {
        const double s = 1.0 + 0.01 * k, v = cutoff_profile(s);
        CHECK(v <= prev + 1e-15);
        prev = v;
        if (k > 0 && k < 100) {
            const double d = 1e-6;
            CHECK(cutoff_profile_derivative(s) ==
                  doctest::Approx((cutoff_profile(s + d) - cutoff_profile(s - d)) / (2 * d)).epsilon(1e-5));
        }
    }
    CHECK(cutoff(10.5, 10.0, 2.0, 0.5) == 1.0);
    CHECK(cutoff(12.5, 10.0, 2.0, 0.5) == 0.0);
}

TEST_CASE("first correction") {
    ScaleHistory fixed{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.5; }};
    const std::vector<double> x{-3.0, 0.0, 2.0};
    for (double v : correction_phi0(fixed, 0.0, 2.0, x)) CHECK(v == 0.0);
    const double k = 0.05;
    ScaleHistory h{[k](double t) { return std::exp(-k * t); }, [k](double t) { return -k * std::exp(-k * t); },
                   [](double) { return 0.5; }};
    const auto v = correction_phi0(h, 0.0, 3.0, std::vector<double>{0.5 + 1.7, 0.5 - 1.7, 0.5});
    CHECK(v[0] == doctest::Approx(-v[1]).epsilon(1e-14));
    CHECK(std::abs(v[2]) < 1e-15);
    CHECK(v[0] > 0.0);
    CHECK_THROWS_AS(correction_phi0(h, 2.0, 1.0, x), InvalidArgument);
}

TEST_CASE("mode projections") {
    const GridSpec yg = make_grid(60.0, 4801);
    const double R = 10.0;
    const Field2 z2 = sample_vec([](double y) { return kernel_Z(2, y); }, yg);
    const Field2 z3 = sample_vec([](double y) { return kernel_Z(3, y); }, yg);
    // |Z2|^2 = 4/(1+y^2)^2 and |Z3|^2 = 4y^2/(1+y^2)^2 both integrate to 2 pi.
    CHECK(project_modes(yg, z2, 2, R) == doctest::Approx(2 * pi).epsilon(1e-4));
    CHECK(std::abs(project_modes(yg, z3, 2, R)) < 1e-12);
    CHECK(std::abs(project_modes(yg, z2, 3, R)) < 1e-12);
    const double kap = 0.02;
    Field2 E = z3;
    for (std::size_t i = 0; i < yg.N; ++i) {
        E.a[i] *= kap;
        E.b[i] *= kap;
    }
    CHECK(project_modes(yg, E, 3, R) == doctest::Approx(kap * 2 * pi).epsilon(1e-2));
    // Without the tail only the window |y| <= 2R counts.
    const double window = 4.0 * (std::atan(2 * R) - 2 * R / (1 + 4 * R * R));
    CHECK(project_modes(yg, z3, 3, R, false) == doctest::Approx(window).epsilon(1e-4));
}

TEST_CASE("error reduces to the scale mode without corrections") {
    const ParamState ps = make_param_state(default_noise(0.1));
    ErrorStarOptions opt;
    opt.include_phi0 = false;
    opt.include_noise = false;
    const GridSpec yg = make_grid(30.0, 601);
    const double t = 4.0;
    const Field2 E = error_star(ps, ModulationPath{}, nullptr, t, yg, opt);
    const double rate = ps.mu0_dot(t) / ps.mu0(t);
    for (std::size_t i = 0; i < yg.N; ++i) {
        const Vec2 z = kernel_Z(3, yg.x(i));
        CHECK(std::abs(E.a[i] + rate * z.a) < 1e-14);
        CHECK(std::abs(E.b[i] + rate * z.b) < 1e-14);
    }
}

TEST_CASE("error is affine in the modulation rates") {
    const NoiseSpec n = default_noise(0.1);
    const ParamState ps = make_param_state(n);
    const std::vector<double> x{-2.0, -0.3, 0.0, 0.9, 4.0};
    const ErrorStarParts p = error_star_parts(ps, ModulationPath{}, &n, 3.0, x);
    const Field2 a = p.evaluate(0.01, 0.0), b = p.evaluate(0.02, 0.0), c = p.evaluate(0.0, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(b.a[i] - a.a[i] == doctest::Approx(a.a[i] - c.a[i]));
}

TEST_CASE("gluing configuration") {
    GluingConfig c;
    CHECK(c.R() == 10.0);
    c.t0 = 30.0;
    CHECK(c.R() == doctest::Approx(std::exp(3.0)));
    GluingConfig bad;
    bad.dt = 0.0;
    CHECK_THROWS_AS(validate(bad), InvalidArgument);
    GluingConfig tight;
    tight.outer_L = 20.0;
    CHECK_THROWS_AS(make_problem(tight, default_noise(0.1)), InvalidArgument);
}

TEST_CASE("zero noise keeps the zero state") {
    GluingConfig c;
    c.outer_N = 1001;
    const GluingProblem P = make_problem(c, std::nullopt);
    CHECK(P.ps.kappa0 == 0.0);
    GluingState st = initial_state(P);
    for (int k = 0; k < 3; ++k) st = inner_outer_step(st, P);
    CHECK(st.lambda == 0.0);
    CHECK(st.xi1 == 0.0);
    CHECK(sup_norm(st.phi.as_field()) == 0.0);
    CHECK(sup_norm(st.psi) == 0.0);
}

TEST_CASE("default noise: orthogonality and tangency are maintained") {
    GluingConfig c;
    c.outer_N = 1001;
    const GluingProblem P = make_problem(c, default_noise(0.1));
    GluingState st = initial_state(P);
    for (int k = 0; k < 4; ++k) {
        st = inner_outer_step(st, P);
        CHECK(std::abs(st.proj_z2) < 1e-10);
        CHECK(std::abs(st.proj_z3) < 1e-10);
        double d = 0.0;
        for (std::size_t i = 0; i < P.inner.N; ++i)
            d = std::max(d, std::abs(st.phi.v1[i] * st.phi.base.u1[i] + st.phi.v2[i] * st.phi.base.u2[i]));
        CHECK(d <= 1e-10);
    }
    CHECK(st.t == doctest::Approx(c.t0 + 4 * c.dt));
    CHECK(st.tau > 0.0);
    const SphereMapField u = reconstruct(st, P);
    CHECK(u.grid == P.outer);
}

TEST_CASE("inconsistent states are rejected") {
    GluingConfig c;
    c.outer_N = 1001;
    const GluingProblem P = make_problem(c, default_noise(0.1));
    GluingState st = initial_state(P);
    GluingState drift = st;
    const std::size_t mid = P.inner.N / 2;
    drift.phi.v1[mid] += 1e-3 * drift.phi.base.u1[mid];
    drift.phi.v2[mid] += 1e-3 * drift.phi.base.u2[mid];
    CHECK_THROWS_AS(inner_outer_step(drift, P), ConsistencyError);
    GluingState clocks = st;
    clocks.t = c.t0 - 1.0;
    CHECK_THROWS_AS(inner_outer_step(clocks, P), ConsistencyError);
}
