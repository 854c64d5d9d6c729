#include "halfharmonic/nonlocal.hpp"

#include "halfharmonic/errors.hpp"
#include "halfharmonic/quadrature.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace hh {

namespace {

constexpr double pi = std::numbers::pi;

struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution with new-array calls is.
const Plans& plans_for(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, Plans> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> re(n);
    std::vector<std::complex<double>> sp(n / 2 + 1);
    auto* cp = reinterpret_cast<fftw_complex*>(sp.data());
    const int ni = static_cast<int>(n);
    Plans p;
    p.forward = fftw_plan_dft_r2c_1d(ni, re.data(), cp, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_c2r_1d(ni, cp, re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    return cache.emplace(n, p).first->second;
}

// Applies the Fourier multiplier m(|k|) to r, treating the N samples as one
// period of length N*h.
template <class Symbol>
std::vector<double> apply_symbol(const GridSpec& g, std::span<const double> r, Symbol symbol) {
    const std::size_t n = g.N;
    const Plans& p = plans_for(n);
    std::vector<double> buf(r.begin(), r.end());
    std::vector<std::complex<double>> sp(n / 2 + 1);
    auto* cp = reinterpret_cast<fftw_complex*>(sp.data());
    fftw_execute_dft_r2c(p.forward, buf.data(), cp);
    const double dk = 2.0 * pi / (static_cast<double>(n) * g.h);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < sp.size(); ++j) sp[j] *= symbol(dk * static_cast<double>(j)) * scale;
    fftw_execute_dft_c2r(p.backward, cp, buf.data());
    for (double v : buf)
        if (!std::isfinite(v)) throw NumericError("spectral transform produced a non-finite value");
    return buf;
}

// Integral over s > L of 1/(s (s-x)^2).
double tail_I(double x, double L) {
    if (std::abs(x) < 0.5 * L) {
        double sum = 0.0, xk = 1.0, Lk = L * L;
        for (int k = 0; k < 200; ++k) {
            const double term = (k + 1.0) * xk / ((k + 2.0) * Lk);
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
            xk *= x;
            Lk *= L;
        }
        return sum;
    }
    return -std::log(L / (L - x)) / (x * x) + 1.0 / (x * (L - x));
}

// Integral over s > L of 1/(s^2 (s-x)^2).
double tail_J(double x, double L) {
    if (std::abs(x) < 0.5 * L) {
        double sum = 0.0, xk = 1.0, Lk = L * L * L;
        for (int k = 0; k < 200; ++k) {
            const double term = (k + 1.0) * xk / ((k + 3.0) * Lk);
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
            xk *= x;
            Lk *= L;
        }
        return sum;
    }
    return -2.0 * std::log(L / (L - x)) / (x * x * x) + 1.0 / (x * x * L) + 1.0 / (x * x * (L - x));
}

struct TailKernels {
    double A;  // int_{|s|>L} ds/(x-s)^2
    double B;  // int_{|s|>L} (1/s) ds/(x-s)^2
    double J;  // int_{|s|>L} (1/s^2) ds/(x-s)^2
};

TailKernels tail_kernels(double x, const GridSpec& g) {
    // Distances to the truncation points are floored at h/2 so the two end
    // nodes stay finite; only interior nodes are accurate.
    const double L = g.L;
    const double xc = std::clamp(x, -L + 0.5 * g.h, L - 0.5 * g.h);
    TailKernels k;
    k.A = 1.0 / (L - xc) + 1.0 / (L + xc);
    k.B = tail_I(xc, L) - tail_I(-xc, L);
    k.J = tail_J(xc, L) + tail_J(-xc, L);
    return k;
}

std::vector<double> inverse_square_table(const GridSpec& g) {
    std::vector<double> t(g.N, 0.0);
    for (std::size_t k = 1; k < g.N; ++k) {
        const double d = g.h * static_cast<double>(k);
        t[k] = 1.0 / (d * d);
    }
    return t;
}

std::vector<double> pv_half_laplacian(const GridSpec& g, std::span<const double> f) {
    const std::size_t n = g.N;
    const Tail tl = fit_tail(g, f);
    const auto inv = inverse_square_table(g);
    const auto f2 = second_derivative(g, f);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fi = f[i];
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = (j == 0 || j + 1 == n) ? 0.5 * g.h : g.h;
            s += w * (fi - f[j]) * inv[j > i ? j - i : i - j];
        }
        const TailKernels tk = tail_kernels(g.x(i), g);
        s += (fi - tl.c0) * tk.A - tl.c1 * tk.B;
        out[i] = s / pi - g.h / (2.0 * pi) * f2[i];
    }
    return out;
}

std::vector<double> pv_tension(const GridSpec& g, std::span<const double> u1, std::span<const double> u2) {
    const std::size_t n = g.N;
    const Tail t1 = fit_tail(g, u1), t2 = fit_tail(g, u2);
    const auto inv = inverse_square_table(g);
    const auto d1 = derivative(g, u1), d2 = derivative(g, u2);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = (j == 0 || j + 1 == n) ? 0.5 * g.h : g.h;
            if (j == i) {
                s += w * (d1[i] * d1[i] + d2[i] * d2[i]);
                continue;
            }
            const double a = u1[i] - u1[j], b = u2[i] - u2[j];
            s += w * (a * a + b * b) * inv[j > i ? j - i : i - j];
        }
        const TailKernels tk = tail_kernels(g.x(i), g);
        const double e1 = u1[i] - t1.c0, e2 = u2[i] - t2.c0;
        s += (e1 * e1 + e2 * e2) * tk.A - 2.0 * (e1 * t1.c1 + e2 * t2.c1) * tk.B +
             (t1.c1 * t1.c1 + t2.c1 * t2.c1) * tk.J;
        out[i] = s / (2.0 * pi);
    }
    return out;
}

void check_size(const GridSpec& g, std::span<const double> f) {
    if (f.size() != g.N) throw InvalidArgument("field size does not match grid");
}

}  // namespace

double trapezoid(const GridSpec& g, std::span<const double> f) {
    check_size(g, f);
    double s = 0.0;
    for (std::size_t i = 0; i < g.N; ++i) s += f[i];
    s -= 0.5 * (f.front() + f.back());
    return s * g.h;
}

std::vector<double> derivative(const GridSpec& g, std::span<const double> f) {
    check_size(g, f);
    const std::size_t n = g.N;
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * g.h);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * g.h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * g.h);
    return d;
}

std::vector<double> second_derivative(const GridSpec& g, std::span<const double> f) {
    check_size(g, f);
    const std::size_t n = g.N;
    std::vector<double> d(n);
    const double h2 = g.h * g.h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    return d;
}

TailSplit split_tail(const GridSpec& g, std::span<const double> f) {
    check_size(g, f);
    const double b = tail_width, cut = 0.9 * g.L, L2 = g.L * g.L;
    // Least squares on the outer band for c0 + c1 x/q + c3 x/q^2 + d L^2/q, q = x^2 + b^2.
    // The band is symmetric, so odd and even columns decouple. Columns are scaled to O(1) on the band.
    double p11 = 0, p13 = 0, p33 = 0, f1 = 0, f3 = 0;
    double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i);
        if (std::abs(x) < cut) continue;
        const double q = x * x + b * b, o1 = g.L * x / q, o3 = L2 * o1 / q, e = L2 / q;
        p11 += o1 * o1;
        p13 += o1 * o3;
        p33 += o3 * o3;
        f1 += o1 * f[i];
        f3 += o3 * f[i];
        s00 += 1.0;
        s01 += e;
        s11 += e * e;
        r0 += f[i];
        r1 += e * f[i];
        ++n;
    }
    if (n < 4) throw InvalidArgument("split_tail: fewer than 4 points in the outer band");
    TailSplit s;
    const double dodd = p11 * p33 - p13 * p13;
    s.c1 = (p33 * f1 - p13 * f3) / dodd * g.L;
    s.c3 = (p11 * f3 - p13 * f1) / dodd * g.L * L2;
    const double det = s00 * s11 - s01 * s01;
    s.c0 = (s11 * r0 - s01 * r1) / det;
    const double d = (s00 * r1 - s01 * r0) / det * L2;
    s.residual.resize(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i), q = x * x + b * b;
        s.residual[i] = f[i] - s.c0 - s.c1 * x / q - s.c3 * x / (q * q);
    }
    // The fitted d/q piece carries mass (d/b)(pi - 2 atan(L/b)) outside the grid.
    s.mass = trapezoid(g, s.residual) + d / b * (pi - 2.0 * std::atan(g.L / b));
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i);
        s.residual[i] -= s.mass * b / (pi * (x * x + b * b));
    }
    return s;
}

std::vector<double> half_laplacian(const GridSpec& g, std::span<const double> f, Backend be) {
    check_size(g, f);
    if (be == Backend::principal_value) return pv_half_laplacian(g, f);
    const TailSplit s = split_tail(g, f);
    auto out = apply_symbol(g, s.residual, [](double k) { return k; });
    const double b = tail_width;
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i), q = x * x + b * b;
        out[i] += s.c1 * 2.0 * b * x / (q * q) + s.c3 * x * (3.0 * b * b - x * x) / (b * q * q * q) +
                  s.mass * (b * b - x * x) / (pi * q * q);
    }
    return out;
}

ScalarField half_laplacian(const ScalarField& f, Backend b) {
    return ScalarField(f.grid, half_laplacian(f.grid, f.values, b));
}

std::vector<double> poisson_convolve(const GridSpec& g, std::span<const double> f, double t) {
    check_size(g, f);
    if (t < 0.0 || !std::isfinite(t)) throw InvalidArgument("poisson_convolve: t must be positive");
    if (t == 0.0) return {f.begin(), f.end()};
    const TailSplit s = split_tail(g, f);
    auto out = apply_symbol(g, s.residual, [t](double k) { return std::exp(-t * k); });
    const double a = tail_width + t;
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i), q = x * x + a * a;
        out[i] += s.c0 + s.c1 * x / q + s.c3 * a / tail_width * x / (q * q) + s.mass * a / (pi * q);
    }
    return out;
}

ScalarField poisson_convolve(const ScalarField& f, double t) {
    if (!(t > 0.0)) throw InvalidArgument("poisson_convolve: t must be positive");
    return ScalarField(f.grid, poisson_convolve(f.grid, f.values, t));
}

std::vector<double> semigroup_integral(const GridSpec& g, std::span<const double> f, double t) {
    check_size(g, f);
    if (t < 0.0 || !std::isfinite(t)) throw InvalidArgument("semigroup_integral: t must be nonnegative");
    if (t == 0.0) return std::vector<double>(g.N, 0.0);
    const TailSplit s = split_tail(g, f);
    auto out = apply_symbol(g, s.residual, [t](double k) { return k > 0.0 ? -std::expm1(-t * k) / k : t; });
    const double b = tail_width, a = b + t;
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i), qb = x * x + b * b, qa = x * x + a * a;
        out[i] += s.c0 * t + s.c1 * std::atan(x * t / (x * x + b * a)) + s.c3 * x / (2.0 * b) * (1.0 / qb - 1.0 / qa) +
                  s.mass / (2.0 * pi) * std::log1p(t * (2.0 * b + t) / (x * x + b * b));
    }
    return out;
}

std::vector<double> bilinear_form(const GridSpec& g, std::span<const double> a, std::span<const double> b,
                                  Backend be) {
    check_size(g, a);
    check_size(g, b);
    std::vector<double> ab(g.N);
    for (std::size_t i = 0; i < g.N; ++i) ab[i] = a[i] * b[i];
    const auto la = half_laplacian(g, a, be);
    const auto lb = half_laplacian(g, b, be);
    const auto lab = half_laplacian(g, ab, be);
    std::vector<double> out(g.N);
    for (std::size_t i = 0; i < g.N; ++i) out[i] = a[i] * lb[i] + b[i] * la[i] - lab[i];
    return out;
}

std::vector<double> tension_density(const GridSpec& g, std::span<const double> u1, std::span<const double> u2,
                                    Backend be) {
    check_size(g, u1);
    check_size(g, u2);
    if (be == Backend::principal_value) return pv_tension(g, u1, u2);
    const auto d1 = bilinear_form(g, u1, u1, be);
    const auto d2 = bilinear_form(g, u2, u2, be);
    std::vector<double> out(g.N);
    for (std::size_t i = 0; i < g.N; ++i) out[i] = 0.5 * (d1[i] + d2[i]);
    return out;
}

ScalarField tension_density(const SphereMapField& u, Backend be) {
    return ScalarField(u.grid, tension_density(u.grid, u.u1, u.u2, be));
}

ScalarField duhamel_solve(const DuhamelSource& src, double t) {
    if (!(src.t1 > src.t0)) throw InvalidArgument("duhamel_solve: empty window");
    if (t < src.t0 || t > src.t1) throw InvalidArgument("duhamel_solve: t outside the source window");
    const GridSpec& g = src.grid;
    std::vector<double> acc(g.N, 0.0);
    const double window = t - src.t0;
    if (window == 0.0) return ScalarField(g, acc);
    const double target = std::min(0.1, window / 64.0);
    const auto steps = static_cast<long long>(std::ceil(window / target - 1e-12));
    const double dt = window / static_cast<double>(steps);
    const GaussRule& rule = gauss_legendre(8);
    std::vector<double> fs(g.N);
    for (long long k = 0; k < steps; ++k) {
        const double a = src.t0 + dt * static_cast<double>(k);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = a + 0.5 * dt * (rule.nodes[q] + 1.0);
            for (std::size_t i = 0; i < g.N; ++i) fs[i] = src.f(g.x(i), s);
            const auto p = poisson_convolve(g, fs, t - s);
            const double w = 0.5 * dt * rule.weights[q];
            for (std::size_t i = 0; i < g.N; ++i) acc[i] += w * p[i];
        }
    }
    return ScalarField(g, std::move(acc));
}

double extension_kernel(double x, double a) {
    if (!(a > 0.0)) throw InvalidArgument("extension_kernel: a must be positive");
    return x / (x * x + a * a);
}

}  // namespace hh
