#include "halfharmonic/linops.hpp"

#include "halfharmonic/errors.hpp"
#include "halfharmonic/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hh {

namespace {

constexpr double pi = std::numbers::pi;

// sum_i D(U_i, P_i) where (-Delta)^{1/2} U_i = T U_i is known in closed form.
std::vector<double> coupling_with_bubble(const GridSpec& g, const SphereMapField& U, const std::vector<double>& T,
                                         const Field2& P, Backend be) {
    const std::size_t n = g.N;
    std::vector<double> up1(n), up2(n);
    for (std::size_t i = 0; i < n; ++i) {
        up1[i] = U.u1[i] * P.a[i];
        up2[i] = U.u2[i] * P.b[i];
    }
    const auto lp1 = half_laplacian(g, P.a, be), lp2 = half_laplacian(g, P.b, be);
    const auto lu1 = half_laplacian(g, up1, be), lu2 = half_laplacian(g, up2, be);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = U.u1[i] * lp1[i] + P.a[i] * T[i] * U.u1[i] - lu1[i] + U.u2[i] * lp2[i] + P.b[i] * T[i] * U.u2[i] -
               lu2[i];
    }
    return d;
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

}  // namespace

SphereMapField LinearizedAt::bubble() const {
    return sample_map(
        [this](double x, double& a, double& b) {
            const Vec2 w = scaled_bubble(base, x);
            a = w.a;
            b = w.b;
        },
        grid);
}

std::vector<double> LinearizedAt::tension() const {
    std::vector<double> t(grid.N);
    for (std::size_t i = 0; i < grid.N; ++i) t[i] = tension_coeff_omega((grid.x(i) - base.xi) / base.mu) / base.mu;
    return t;
}

TangentField project_tangent(const LinearizedAt& L, const Field2& phi) {
    const SphereMapField U = L.bubble();
    const std::size_t n = L.grid.N;
    if (phi.size() != n) throw InvalidArgument("project_tangent: size mismatch");
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = phi.a[i] * U.u1[i] + phi.b[i] * U.u2[i];
        a[i] = phi.a[i] - d * U.u1[i];
        b[i] = phi.b[i] - d * U.u2[i];
    }
    return TangentField(U, std::move(a), std::move(b));
}

ScalarField normal_correction(const TangentField& phit) {
    const std::size_t n = phit.grid.N;
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double q = phit.v1[i] * phit.v1[i] + phit.v2[i] * phit.v2[i];
        if (q > 1.0) {
            std::ostringstream msg;
            msg << "normal_correction: |Pi phi| > 1 at x = " << phit.grid.x(i);
            throw DomainError(msg.str());
        }
        a[i] = std::sqrt(1.0 - q) - 1.0;
    }
    return ScalarField(phit.grid, std::move(a));
}

Field2 linearized_vector(const LinearizedAt& L, const TangentField& phit, Backend be) {
    const GridSpec& g = L.grid;
    const SphereMapField& U = phit.base;
    const auto T = L.tension();
    const Field2 P = phit.as_field();
    const auto d = coupling_with_bubble(g, U, T, P, be);
    const auto l1 = half_laplacian(g, P.a, be), l2 = half_laplacian(g, P.b, be);
    Field2 out(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        out.a[i] = -l1[i] + T[i] * P.a[i] + d[i] * U.u1[i];
        out.b[i] = -l2[i] + T[i] * P.b[i] + d[i] * U.u2[i];
    }
    return out;
}

CoefficientIntegrals coefficient_integrals(const BubbleParams& base, const VectorFn& phi, double x,
                                           double abs_tol) {
    const double mu = base.mu, xi = base.xi;
    const Vec2 px = phi(x);
    const double delta = 1e-5 * std::max(1.0, mu);
    const Vec2 pp = phi(x + delta), pm = phi(x - delta);
    const Vec2 slope{(pp.a - pm.a) / (2.0 * delta), (pp.b - pm.b) / (2.0 * delta)};
    auto quotient = [&](double s) -> Vec2 {
        const double ds = s - x;
        if (std::abs(ds) < 1e-6 * std::max(1.0, std::abs(x))) return slope;
        const Vec2 ps = phi(s);
        return {(ps.a - px.a) / ds, (ps.b - px.b) / ds};
    };
    QuadratureOptions opt;
    opt.abs_tol = abs_tol;
    const std::vector<double> breaks{x, xi};
    auto weighted = [&](int which) {
        return integrate_real_line(
                   [&](double s) {
                       const double y = (s - xi) / mu, q = y * y + 1.0, q2 = q * q;
                       const Vec2 dq = quotient(s);
                       switch (which) {
                           case 0:
                               return dq.a * 2.0 * y / q2;
                           case 1:
                               return dq.b * (y * y - 1.0) / q2;
                           case 2:
                               return dq.a * 2.0 * y * y / q2;
                           default:
                               return dq.b * y * (y * y - 1.0) / q2;
                       }
                   },
                   opt, breaks) /
               pi;
    };
    CoefficientIntegrals c;
    c.a_z2 = weighted(0);
    c.b_z2 = weighted(1);
    c.a_z3 = weighted(2);
    c.b_z3 = weighted(3);
    return c;
}

Vec2 reduced_linear_part(const BubbleParams& base, const VectorFn& phi, double x, double abs_tol) {
    const CoefficientIntegrals c = coefficient_integrals(base, phi, x, abs_tol);
    const double y = (x - base.xi) / base.mu;
    const Vec2 z2 = kernel_Z(2, y), z3 = kernel_Z(3, y);
    const double k2 = c.a_z2 + c.b_z2, k3 = c.a_z3 + c.b_z3;
    return {(k2 * z2.a + k3 * z3.a) / base.mu, (k2 * z2.b + k3 * z3.b) / base.mu};
}

DecompositionResult decomposition_check(const LinearizedAt& L, const VectorFn& phi, double window) {
    const GridSpec& g = L.grid;
    const Field2 sampled = sample2(
        [&phi](double x, double& a, double& b) {
            const Vec2 v = phi(x);
            a = v.a;
            b = v.b;
        },
        g);
    const TangentField P = project_tangent(L, sampled);
    DecompositionResult r;
    r.direct = linearized_vector(L, P);
    const SphereMapField& U = P.base;
    const auto l1 = half_laplacian(g, sampled.a), l2 = half_laplacian(g, sampled.b);
    r.decomposed = Field2(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i);
        if (std::abs(x - L.base.xi) > window) continue;
        r.nodes.push_back(i);
        const double m1 = -l1[i], m2 = -l2[i];
        const double d = m1 * U.u1[i] + m2 * U.u2[i];
        const Vec2 red = reduced_linear_part(L.base, phi, x);
        r.decomposed.a[i] = m1 - d * U.u1[i] + red.a;
        r.decomposed.b[i] = m2 - d * U.u2[i] + red.b;
        r.sup_difference = std::max({r.sup_difference, std::abs(r.decomposed.a[i] - r.direct.a[i]),
                                     std::abs(r.decomposed.b[i] - r.direct.b[i])});
    }
    return r;
}

Field2 nonlinear_remainder(const LinearizedAt& L, const TangentField& phit, const Field2& U_t) {
    const GridSpec& g = L.grid;
    const std::size_t n = g.N;
    const SphereMapField& U = phit.base;
    const ScalarField a = normal_correction(phit);
    const Field2 P = phit.as_field();
    std::vector<double> aU1(n), aU2(n);
    for (std::size_t i = 0; i < n; ++i) {
        aU1[i] = a.values[i] * U.u1[i];
        aU2[i] = a.values[i] * U.u2[i];
    }
    const std::vector<double> w1 = add(U.u1, P.a), w2 = add(U.u2, P.b);
    // Coefficient of Pi phi: the four bracketed integrals.
    std::vector<double> k = add(bilinear_form(g, aU1, w1), bilinear_form(g, aU2, w2));
    const auto t2 = add(bilinear_form(g, U.u1, P.a), bilinear_form(g, U.u2, P.b));
    const auto t3 = add(bilinear_form(g, P.a, P.a), bilinear_form(g, P.b, P.b));
    const auto t4 = add(bilinear_form(g, aU1, aU1), bilinear_form(g, aU2, aU2));
    for (std::size_t i = 0; i < n; ++i) k[i] += t2[i] + 0.5 * t3[i] + 0.5 * t4[i];
    const auto e1 = bilinear_form(g, a.values, U.u1), e2 = bilinear_form(g, a.values, U.u2);
    Field2 out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.a[i] = k[i] * P.a[i] - a.values[i] * U_t.a[i] - e1[i];
        out.b[i] = k[i] * P.b[i] - a.values[i] * U_t.b[i] - e2[i];
    }
    return out;
}

double lorentz_moment(const ScalarField& v) {
    const GridSpec& g = v.grid;
    std::vector<double> w(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i);
        w[i] = v.values[i] / (1.0 + x * x);
    }
    return trapezoid(g, w) + 2.0 * v.tail.c0 * std::atan(1.0 / g.L);
}

ScalarReduced scalar_reduced_apply(const ScalarReduced& v) {
    const GridSpec& g = v.v.grid;
    const auto lv = half_laplacian(g, v.v.values);
    const double m = lorentz_moment(v.v);
    std::vector<double> out(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        const double y = g.x(i), q = 1.0 + y * y;
        out[i] = -lv[i] + 2.0 / q * v.v.values[i] - 2.0 / (pi * q) * m;
    }
    return {ScalarField(g, std::move(out))};
}

}  // namespace hh
