#include "halfharmonic/quadrature.hpp"

#include "halfharmonic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace hh {

namespace {

GaussRule build_rule(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.nodes[i] = -z;
        r.weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

double panel(const RealFn& f, double a, double b) {
    const GaussRule& g = gauss_legendre(15);
    const double c = 0.5 * (a + b), w = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(c + w * g.nodes[i]);
    return s * w;
}

double adapt(const RealFn& f, double a, double b, double whole, double tol, const QuadratureOptions& opt,
             int depth) {
    const double m = 0.5 * (a + b);
    const double left = panel(f, a, m), right = panel(f, m, b);
    const double both = left + right;
    // Below a few ulps of the panel sums the comparison only sees rounding.
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
    const double target = std::max({tol, opt.rel_tol * std::abs(both), floor});
    if (std::abs(both - whole) <= target || depth >= opt.max_depth) {
        if (!std::isfinite(both)) throw NumericError("quadrature: non-finite integrand");
        return both;
    }
    return adapt(f, a, m, left, 0.5 * tol, opt, depth + 1) + adapt(f, m, b, right, 0.5 * tol, opt, depth + 1);
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

double integrate(const RealFn& f, double a, double b, QuadratureOptions opt) {
    if (a == b) return 0.0;
    if (b < a) return -integrate(f, b, a, opt);
    return adapt(f, a, b, panel(f, a, b), opt.abs_tol, opt, 0);
}

double integrate_real_line(const RealFn& f, QuadratureOptions opt, const std::vector<double>& breaks) {
    const RealFn g = [&f](double th) {
        const double c = std::cos(th);
        return f(std::tan(th)) / (c * c);
    };
    std::vector<double> cuts{-std::numbers::pi / 2};
    std::vector<double> b = breaks;
    std::sort(b.begin(), b.end());
    for (double s : b) cuts.push_back(std::atan(s));
    cuts.push_back(std::numbers::pi / 2);
    double sum = 0.0;
    const double share = opt.abs_tol / static_cast<double>(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        QuadratureOptions o = opt;
        o.abs_tol = share;
        sum += integrate(g, cuts[i], cuts[i + 1], o);
    }
    return sum;
}

double integrate_to_infinity(const RealFn& f, double a, QuadratureOptions opt) {
    const RealFn g = [&f, a](double th) {
        const double c = std::cos(th);
        return f(a + std::tan(th)) / (c * c);
    };
    return integrate(g, 0.0, std::numbers::pi / 2, opt);
}

double integrate_compactified(const RealFn& f, double b, QuadratureOptions opt) {
    if (b < 0.0) throw InvalidArgument("integrate_compactified: b must be nonnegative");
    const double top = std::isinf(b) ? std::numbers::pi / 2 : std::atan(b);
    const RealFn g = [&f](double th) {
        const double c = std::cos(th);
        return f(std::tan(th)) / (c * c);
    };
    return integrate(g, 0.0, top, opt);
}

}  // namespace hh
