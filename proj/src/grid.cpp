#include "halfharmonic/grid.hpp"

#include "halfharmonic/errors.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace hh {

std::vector<double> GridSpec::points() const {
    std::vector<double> x(N);
    for (std::size_t i = 0; i < N; ++i) x[i] = this->x(i);
    return x;
}

GridSpec make_grid(double L, long long N) {
    if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("make_grid: L must be positive");
    if (N < 4) throw InvalidArgument("make_grid: N must be at least 4");
    GridSpec g;
    g.L = L;
    g.N = static_cast<std::size_t>(N);
    g.h = 2.0 * L / static_cast<double>(N - 1);
    return g;
}

Tail fit_tail(const GridSpec& g, std::span<const double> f) {
    if (f.size() != g.N) throw InvalidArgument("fit_tail: size mismatch");
    const double cut = 0.9 * g.L;
    // Normal equations for [1, 1/x] in scaled form; the columns are well
    // separated because the band is symmetric about 0.
    double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i);
        if (std::abs(x) < cut) continue;
        const double z = g.L / x;
        s00 += 1.0;
        s01 += z;
        s11 += z * z;
        r0 += f[i];
        r1 += z * f[i];
        ++n;
    }
    if (n < 4) throw InvalidArgument("fit_tail: fewer than 4 points in the outer band");
    const double det = s00 * s11 - s01 * s01;
    Tail t;
    t.c0 = (s11 * r0 - s01 * r1) / det;
    t.c1 = (s00 * r1 - s01 * r0) / det * g.L;
    return t;
}

ScalarField::ScalarField(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.N) throw InvalidArgument("ScalarField: size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            std::ostringstream msg;
            msg << "non-finite sample at x = " << grid.x(i);
            throw NumericError(msg.str());
        }
    }
    tail = fit_tail(grid, values);
}

ScalarField sample(const std::function<double(double)>& f, const GridSpec& g) {
    std::vector<double> v(g.N);
    for (std::size_t i = 0; i < g.N; ++i) v[i] = f(g.x(i));
    return ScalarField(g, std::move(v));
}

Field2 sample2(const std::function<void(double, double&, double&)>& f, const GridSpec& g) {
    Field2 out(g.N);
    for (std::size_t i = 0; i < g.N; ++i) f(g.x(i), out.a[i], out.b[i]);
    return out;
}

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sup_norm(const Field2& v) { return std::max(sup_norm(v.a), sup_norm(v.b)); }

double sup_diff(const Field2& u, const Field2& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        m = std::max({m, std::abs(u.a[i] - v.a[i]), std::abs(u.b[i] - v.b[i])});
    return m;
}

SphereMapField::SphereMapField(const GridSpec& g, std::vector<double> a, std::vector<double> b,
                               bool renormalize)
    : grid(g), u1(std::move(a)), u2(std::move(b)) {
    if (u1.size() != g.N || u2.size() != g.N) throw InvalidArgument("SphereMapField: size mismatch");
    for (std::size_t i = 0; i < g.N; ++i) {
        const double r = std::hypot(u1[i], u2[i]);
        if (!std::isfinite(r) || r == 0.0) {
            std::ostringstream msg;
            msg << "SphereMapField: degenerate value at x = " << g.x(i);
            throw NumericError(msg.str());
        }
        if (renormalize) {
            u1[i] /= r;
            u2[i] /= r;
        } else if (std::abs(u1[i] * u1[i] + u2[i] * u2[i] - 1.0) > 1e-12) {
            std::ostringstream msg;
            msg << "SphereMapField: |u| != 1 at x = " << g.x(i);
            throw InvalidArgument(msg.str());
        }
    }
}

SphereMapField sample_map(const std::function<void(double, double&, double&)>& f, const GridSpec& g,
                          bool renormalize) {
    Field2 v = sample2(f, g);
    return SphereMapField(g, std::move(v.a), std::move(v.b), renormalize);
}

TangentField::TangentField(const SphereMapField& base_, std::vector<double> a, std::vector<double> b)
    : grid(base_.grid), v1(std::move(a)), v2(std::move(b)), base(base_) {
    if (v1.size() != grid.N || v2.size() != grid.N) throw InvalidArgument("TangentField: size mismatch");
    for (std::size_t i = 0; i < grid.N; ++i) {
        if (std::abs(v1[i] * base.u1[i] + v2[i] * base.u2[i]) > 1e-10) {
            std::ostringstream msg;
            msg << "TangentField: not tangent at x = " << grid.x(i);
            throw InvalidArgument(msg.str());
        }
    }
}

void write_csv(std::ostream& os, const ScalarField& f) {
    os << "x,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < f.grid.N; ++i) os << f.grid.x(i) << ',' << f.values[i] << '\n';
}

void write_csv(std::ostream& os, const SphereMapField& u) {
    os << "x,u1,u2\n" << std::setprecision(17);
    for (std::size_t i = 0; i < u.grid.N; ++i) os << u.grid.x(i) << ',' << u.u1[i] << ',' << u.u2[i] << '\n';
}

void write_csv(std::ostream& os, const GridSpec& g, const Field2& v) {
    os << "x,u1,u2\n" << std::setprecision(17);
    for (std::size_t i = 0; i < g.N; ++i) os << g.x(i) << ',' << v.a[i] << ',' << v.b[i] << '\n';
}

}  // namespace hh
