#include "halfharmonic/diagnostics.hpp"

#include "halfharmonic/errors.hpp"
#include "halfharmonic/nonlocal.hpp"

#include <cmath>

namespace hh {

double energy(const GridSpec& g, const Field2& u) {
    double e = 0.0;
    for (const auto* comp : {&u.a, &u.b}) {
        const Tail t = fit_tail(g, *comp);
        std::vector<double> v(comp->begin(), comp->end());
        for (double& x : v) x -= t.c0;
        const auto lv = half_laplacian(g, v);
        std::vector<double> w(g.N);
        for (std::size_t i = 0; i < g.N; ++i) w[i] = v[i] * lv[i];
        e += 0.5 * trapezoid(g, w);
    }
    return e;
}

double energy(const SphereMapField& u) { return energy(u.grid, u.as_field()); }

BubbleParams extract_bubble(const SphereMapField& u) {
    const GridSpec& g = u.grid;
    const auto& v = u.u2;
    std::size_t i = 0;
    for (std::size_t k = 1; k < g.N; ++k)
        if (v[k] < v[i]) i = k;
    if (!(v[i] < -0.9)) throw NoBubbleError("extract_bubble: no minimum of u2 below -0.9");
    if (i == 0 || i + 1 == g.N) throw ResolutionError("extract_bubble: minimum at the grid boundary");
    const double a = v[i - 1], b = v[i], c = v[i + 1];
    const double curv = a - 2.0 * b + c;
    const double shift = curv > 0.0 ? 0.5 * (a - c) / curv : 0.0;
    const double xi = g.x(i) + shift * g.h;

    std::size_t r = i;
    while (r + 1 < g.N && v[r + 1] < 0.0) ++r;
    std::size_t l = i;
    while (l > 0 && v[l - 1] < 0.0) --l;
    if (r + 1 >= g.N || l == 0) throw ResolutionError("extract_bubble: zero crossings not bracketed");
    const double xr = g.x(r) + (0.0 - v[r]) / (v[r + 1] - v[r]) * g.h;
    const double xl = g.x(l - 1) + (0.0 - v[l - 1]) / (v[l] - v[l - 1]) * g.h;
    BubbleParams p;
    p.mu = 0.5 * (xr - xl);
    p.xi = xi;
    if (!(p.mu > 0.0)) throw ResolutionError("extract_bubble: degenerate scale");
    return p;
}

DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series) {
    if (series.size() < 10) throw InvalidArgument("fit_decay_rate: need at least 10 samples");
    const double n = static_cast<double>(series.size());
    double st = 0, sy = 0;
    for (const auto& [t, mu] : series) {
        if (!(mu > 0.0)) throw InvalidArgument("fit_decay_rate: mu must be positive");
        st += t;
        sy += std::log(mu);
    }
    const double tm = st / n, ym = sy / n;
    double stt = 0, sty = 0, syy = 0;
    for (const auto& [t, mu] : series) {
        const double dt = t - tm, dy = std::log(mu) - ym;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if (stt == 0.0) throw InvalidArgument("fit_decay_rate: times must not all coincide");
    const double slope = sty / stt;
    DecayFit f;
    f.kappa = -slope;
    const double ss_res = syy - slope * sty;
    f.r_squared = syy > 1e-300 ? 1.0 - std::max(0.0, ss_res) / syy : 1.0;
    return f;
}

void validate(const WeightedNormSpec& spec) {
    if (!spec.mu0) throw InvalidArgument("weighted_norm: missing mu0 clock");
    if (spec.kind == NormKind::inner_holder && !(spec.holder > 0.5 && spec.holder < 1.0))
        throw InvalidArgument("weighted_norm: Holder exponent must lie in (1/2, 1)");
    if (!(spec.R > 0.0)) throw InvalidArgument("weighted_norm: R must be positive");
    if (!(spec.spatial >= 0.0)) throw InvalidArgument("weighted_norm: spatial exponent must be nonnegative");
}

double holder_seminorm(const SpaceTimeSlice& s, double eta, double R) {
    const std::size_t n = s.y.size();
    const bool vec = !s.b.empty();
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(s.y[i]) > R) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dy = std::abs(s.y[j] - s.y[i]);
            if (dy > 1.0) break;
            if (std::abs(s.y[j]) > R || dy == 0.0) continue;
            double d = s.a[j] - s.a[i];
            if (vec) d = std::hypot(d, s.b[j] - s.b[i]);
            best = std::max(best, std::abs(d) / std::pow(dy, eta));
        }
    }
    return best;
}

double weighted_norm(const std::vector<SpaceTimeSlice>& f, const WeightedNormSpec& spec) {
    validate(spec);
    double m = 0.0;
    for (const auto& s : f) {
        const bool vec = !s.b.empty();
        auto mag = [&](std::size_t i) { return vec ? std::hypot(s.a[i], s.b[i]) : std::abs(s.a[i]); };
        const double mu0 = spec.mu0(s.t);
        switch (spec.kind) {
            case NormKind::source: {
                const double scale = std::pow(mu0, spec.time - 1.0);
                for (std::size_t i = 0; i < s.y.size(); ++i)
                    m = std::max(m, mag(i) * (1.0 + std::pow(std::abs(s.y[i]), spec.spatial)) / scale);
                break;
            }
            case NormKind::inner_field: {
                const double scale = std::pow(mu0, spec.time);
                const std::size_t n = s.y.size();
                for (std::size_t i = 0; i < n; ++i) {
                    double grad = 0.0;
                    if (std::abs(s.y[i]) <= 2.0 * spec.R && n >= 3) {
                        const std::size_t lo = i == 0 ? 0 : i - 1, hi = i + 1 == n ? n - 1 : i + 1;
                        const double dy = s.y[hi] - s.y[lo];
                        const double ga = (s.a[hi] - s.a[lo]) / dy;
                        const double gb = vec ? (s.b[hi] - s.b[lo]) / dy : 0.0;
                        grad = std::hypot(ga, gb);
                    }
                    const double lhs = (1.0 + std::abs(s.y[i])) * grad + mag(i);
                    m = std::max(m, lhs * (1.0 + std::pow(std::abs(s.y[i]), spec.spatial)) / scale);
                }
                break;
            }
            case NormKind::inner_holder: {
                const double semi = holder_seminorm(s, spec.holder, 2.0 * spec.R);
                const double w = std::pow(s.tau, spec.time);
                for (std::size_t i = 0; i < s.y.size(); ++i) {
                    if (std::abs(s.y[i]) > 2.0 * spec.R) continue;
                    const double inner = mag(i) + (1.0 + std::pow(std::abs(s.y[i]), spec.holder)) * semi;
                    m = std::max(m, w * (1.0 + std::pow(std::abs(s.y[i]), spec.spatial)) * inner);
                }
                break;
            }
            case NormKind::time_weight: {
                const double scale = std::pow(mu0, -spec.time);
                for (std::size_t i = 0; i < s.a.size(); ++i) m = std::max(m, scale * mag(i));
                break;
            }
        }
    }
    return m;
}

}  // namespace hh
