#include "halfharmonic/gluing.hpp"

#include "halfharmonic/errors.hpp"
#include "halfharmonic/linops.hpp"
#include "halfharmonic/nonlocal.hpp"
#include "halfharmonic/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

namespace hh {

namespace {

constexpr double pi = std::numbers::pi;

// Composite 8-point Gauss rule on [a, b], panels of width at most min(0.1, (b-a)/64).
template <class F>
void for_each_history_node(double a, double b, F&& f) {
    const double window = b - a;
    if (!(window > 0.0)) return;
    const double target = std::min(0.1, window / 64.0);
    const auto panels = static_cast<long long>(std::ceil(window / target - 1e-12));
    const double w = window / static_cast<double>(panels);
    const GaussRule& rule = gauss_legendre(8);
    for (long long k = 0; k < panels; ++k) {
        const double left = a + w * static_cast<double>(k);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
            f(left + 0.5 * w * (rule.nodes[q] + 1.0), 0.5 * w * rule.weights[q]);
    }
}

// Four-point Lagrange interpolation on a uniform grid; `outside` beyond [-L, L].
double interp_cubic(const GridSpec& g, const std::vector<double>& v, double x, double outside) {
    if (x < -g.L || x > g.L) return outside;
    const double s = (x + g.L) / g.h;
    auto i = static_cast<long long>(std::floor(s));
    const auto n = static_cast<long long>(g.N);
    i = std::clamp(i, 1LL, n - 3);
    const double u = s - static_cast<double>(i);
    const double w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
    const double w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
    const double w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
    const double w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
    return w0 * v[i - 1] + w1 * v[i] + w2 * v[i + 1] + w3 * v[i + 2];
}

Field2 omega_on(const GridSpec& g, double center, double scale) {
    Field2 w(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        const Vec2 o = omega((g.x(i) - center) / scale);
        w.a[i] = o.a;
        w.b[i] = o.b;
    }
    return w;
}

std::vector<double> dot(const Field2& u, const Field2& v) {
    std::vector<double> d(u.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = u.a[i] * v.a[i] + u.b[i] * v.b[i];
    return d;
}

Field2 project_off(const Field2& v, const Field2& U) {
    Field2 out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v.a[i] * U.a[i] + v.b[i] * U.b[i];
        out.a[i] = v.a[i] - d * U.a[i];
        out.b[i] = v.b[i] - d * U.b[i];
    }
    return out;
}

void axpy(Field2& y, double s, const Field2& x) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        y.a[i] += s * x.a[i];
        y.b[i] += s * x.b[i];
    }
}

// (D(c, U1), D(c, U2))
Field2 bilinear_against(const GridSpec& g, const std::vector<double>& c, const Field2& U) {
    Field2 d(bilinear_form(g, c, U.a), bilinear_form(g, c, U.b));
    return d;
}

// (1/pi) int (a(x) - a(s)) c(s) (b(x) - b(s))/(x - s)^2 ds over the support of c.
std::vector<double> trilinear(const GridSpec& g, const std::vector<double>& a, const std::vector<double>& c,
                              const std::vector<double>& b) {
    const std::size_t n = g.N;
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < n; ++j)
        if (c[j] != 0.0) support.push_back(j);
    std::vector<double> out(n, 0.0);
    if (support.empty()) return out;
    const auto da = derivative(g, a), db = derivative(g, b);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j : support) {
            if (j == i) {
                acc += da[i] * c[i] * db[i];
                continue;
            }
            const double r = g.h * (static_cast<double>(i) - static_cast<double>(j));
            acc += (a[i] - a[j]) * c[j] * (b[i] - b[j]) / (r * r);
        }
        out[i] = acc * g.h / pi;
    }
    return out;
}

struct SampledPath {
    std::vector<PathSample> s;

    PathSample at(double t) const {
        if (t <= s.front().t) return s.front();
        if (t >= s.back().t) return s.back();
        const auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const PathSample& p) { return v < p.t; });
        const PathSample& hi = *it;
        const PathSample& lo = *(it - 1);
        const double w = (t - lo.t) / (hi.t - lo.t);
        PathSample r;
        r.t = t;
        r.lambda = lo.lambda + w * (hi.lambda - lo.lambda);
        r.lambda_dot = lo.lambda_dot + w * (hi.lambda_dot - lo.lambda_dot);
        r.xi1 = lo.xi1 + w * (hi.xi1 - lo.xi1);
        r.xi1_dot = lo.xi1_dot + w * (hi.xi1_dot - lo.xi1_dot);
        return r;
    }
};

ScaleHistory history_of(const ParamState& ps, const ModulationPath& path) {
    ScaleHistory h;
    h.mu = [ps, path](double s) { return ps.mu0(s) + path.lambda(s); };
    h.mu_dot = [ps, path](double s) { return ps.mu0_dot(s) + path.lambda_dot(s); };
    h.xi = [ps, path](double s) { return ps.q + path.xi1(s); };
    return h;
}

}  // namespace

Vec2 NoiseSpec::operator()(double x) const {
    const double r = x - q;
    if (profile) return profile(r);
    return {0.0, -epsilon * r * r / (1.0 + r * r)};
}

NoiseSpec default_noise(double epsilon, double q) {
    NoiseSpec n;
    n.epsilon = epsilon;
    n.q = q;
    return n;
}

double sign_functional(const NoiseSpec& n) {
    const double z0 = n(n.q).b;
    QuadratureOptions opt;
    opt.abs_tol = 1e-13;
    const double v = integrate_real_line(
        [&](double s) {
            const double w = s * s + 1.0;
            return (n(s + n.q).b - z0) * s * s / (w * w);
        },
        opt);
    return v / pi;
}

void validate(const NoiseSpec& n) {
    if (!(n.epsilon > 0.0) || !std::isfinite(n.epsilon)) throw InvalidArgument("noise: epsilon must be positive");
    if (!std::isfinite(n.q)) throw InvalidArgument("noise: center must be finite");
    const double f = sign_functional(n);
    if (!(f < -1e-13)) {
        std::ostringstream msg;
        msg << "noise: sign functional " << f << " is not negative";
        throw SignConditionError(msg.str());
    }
}

double kappa0(const NoiseSpec& n) {
    validate(n);
    return -12.0 / 13.0 * sign_functional(n);
}

double seven_twentyfourths(double b) {
    if (!(b >= 0.0)) throw InvalidArgument("seven_twentyfourths: upper limit must be nonnegative");
    if (b == 0.0) return 0.0;
    QuadratureOptions opt;
    opt.abs_tol = 1e-15;
    return integrate_compactified(
        [](double s) {
            const double a = 2.0 + s, a2 = a * a;
            return (1.0 + s) * (1.0 + s) / (a2 * a2);
        },
        b, opt);
}

double ParamState::mu0(double t) const { return std::exp(-kappa0 * t); }
double ParamState::mu0_dot(double t) const { return -kappa0 * std::exp(-kappa0 * t); }

ParamState make_param_state(const NoiseSpec& n) {
    ParamState p;
    p.kappa0 = kappa0(n);
    p.q = n.q;
    return p;
}

std::vector<double> correction_phi0(const ScaleHistory& h, double t0, double t, const std::vector<double>& x) {
    if (t < t0) throw InvalidArgument("correction_phi0: t precedes t0");
    std::vector<double> out(x.size(), 0.0);
    for_each_history_node(t0, t, [&](double s, double w) {
        const double p = -2.0 * h.mu_dot(s);
        if (p == 0.0) return;
        const double a = h.mu(s) + t - s, c = h.xi(s);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = x[i] - c;
            out[i] += w * p * r / (r * r + a * a);
        }
    });
    return out;
}

ScalarField correction_phi0(const ScaleHistory& h, double t0, double t, const GridSpec& g) {
    return ScalarField(g, correction_phi0(h, t0, t, g.points()));
}

Field2 ErrorStarParts::evaluate(double mu_dot, double xi_dot) const {
    Field2 e = constant;
    axpy(e, mu_dot, d_mu_dot);
    axpy(e, xi_dot, d_xi_dot);
    return e;
}

ErrorStarParts error_star_parts(const ParamState& ps, const ModulationPath& path, const NoiseSpec* noise, double t,
                                const std::vector<double>& x, const ErrorStarOptions& opt) {
    const double mu = ps.mu0(t) + path.lambda(t);
    if (!(mu > 0.0)) throw NumericError("error_star: scale mu is not positive");
    const double xi = ps.q + path.xi1(t);
    const std::size_t n = x.size();
    const bool with_noise = opt.include_noise && noise != nullptr;
    ErrorStarParts E{Field2(n), Field2(n), Field2(n)};

    const ScaleHistory hist = history_of(ps, path);
    std::vector<double> psi0(n, 0.0), h2(n, 0.0), h3(n, 0.0);
    if (opt.include_phi0 && t > opt.history_start) {
        psi0 = correction_phi0(hist, opt.history_start, t, x);
        // Reduced part of Phi0, centered at the current xi.
        for_each_history_node(opt.history_start, t, [&](double s, double w) {
            const double p = -2.0 * hist.mu_dot(s);
            if (p == 0.0) return;
            const double A = (hist.mu(s) + t - s) / mu;
            const double c = w * p / (mu * mu) / ((A + 1.0) * (A + 1.0));
            for (std::size_t i = 0; i < n; ++i) {
                const double y = (x[i] - xi) / mu, d = A * A + y * y;
                h3[i] += c * A * A / d;
                h2[i] -= c * y / d;
            }
        });
    }

    const BubbleParams base{mu, xi};
    const VectorFn zstar = [noise](double s) { return (*noise)(s); };
    for (std::size_t i = 0; i < n; ++i) {
        const double y = (x[i] - xi) / mu, q = 1.0 + y * y, q3 = q * q * q;
        const Vec2 U = omega(y), z2 = kernel_Z(2, y), z3 = kernel_Z(3, y);
        if (opt.include_phi0) {
            E.d_mu_dot.a[i] = -4.0 * y * (y * y - 1.0) / q3 / mu;
            E.d_mu_dot.b[i] = 8.0 * y * y / q3 / mu;
        } else {
            E.d_mu_dot.a[i] = -z3.a / mu;
            E.d_mu_dot.b[i] = -z3.b / mu;
        }
        E.d_xi_dot.a[i] = -z2.a / mu;
        E.d_xi_dot.b[i] = -z2.b / mu;

        E.constant.a[i] = h2[i] * z2.a + h3[i] * z3.a;
        E.constant.b[i] = h2[i] * z2.b + h3[i] * z3.b;
        Vec2 V{psi0[i], 0.0};
        if (with_noise) {
            const Vec2 red = reduced_linear_part(base, zstar, x[i]);
            E.constant.a[i] += red.a;
            E.constant.b[i] += red.b;
            const Vec2 z = (*noise)(x[i]);
            V.a += z.a;
            V.b += z.b;
        }
        // (V.U) U_t + (V.U_t) U with U_t = (mu'/mu) Z3 + (xi'/mu) Z2
        const double vu = dot(V, U);
        E.d_mu_dot.a[i] += (vu * z3.a + dot(V, z3) * U.a) / mu;
        E.d_mu_dot.b[i] += (vu * z3.b + dot(V, z3) * U.b) / mu;
        E.d_xi_dot.a[i] += (vu * z2.a + dot(V, z2) * U.a) / mu;
        E.d_xi_dot.b[i] += (vu * z2.b + dot(V, z2) * U.b) / mu;
    }
    return E;
}

Field2 error_star(const ParamState& ps, const ModulationPath& path, const NoiseSpec* noise, double t,
                  const GridSpec& yg, const ErrorStarOptions& opt) {
    const double mu = ps.mu0(t) + path.lambda(t);
    const double xi = ps.q + path.xi1(t);
    std::vector<double> x(yg.N);
    for (std::size_t i = 0; i < yg.N; ++i) x[i] = xi + mu * yg.x(i);
    const ErrorStarParts E = error_star_parts(ps, path, noise, t, x, opt);
    return E.evaluate(ps.mu0_dot(t) + path.lambda_dot(t), path.xi1_dot(t));
}

double project_modes(const GridSpec& yg, const Field2& E, int j, double R, bool with_tail) {
    if (E.size() != yg.N) throw InvalidArgument("project_modes: size mismatch");
    if (!(R > 0.0)) throw InvalidArgument("project_modes: R must be positive");
    const double edge = 2.0 * R;
    std::vector<double> f(yg.N);
    for (std::size_t i = 0; i < yg.N; ++i) {
        const Vec2 z = kernel_Z(j, yg.x(i));
        f[i] = E.a[i] * z.a + E.b[i] * z.b;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < yg.N; ++i) {
        double a = yg.x(i), b = yg.x(i + 1);
        if (b <= -edge || a >= edge) continue;
        double fa = f[i], fb = f[i + 1];
        if (a < -edge) {
            fa = fa + (fb - fa) * (-edge - a) / (b - a);
            a = -edge;
        }
        if (b > edge) {
            fb = fa + (fb - fa) * (edge - a) / (b - a);
            b = edge;
        }
        sum += 0.5 * (b - a) * (fa + fb);
    }
    // Power-law tails fitted to the two outermost nodes inside each side of the ball.
    auto tail = [&](bool right) {
        long long i1 = -1, i2 = -1;
        for (std::size_t k = 0; k < yg.N; ++k) {
            const double y = right ? yg.x(k) : -yg.x(yg.N - 1 - k);
            const std::size_t idx = right ? k : yg.N - 1 - k;
            if (y <= edge && y > 0.0) {
                i2 = i1;
                i1 = static_cast<long long>(idx);
            }
        }
        if (i1 < 0 || i2 < 0) return 0.0;
        const double y1 = std::abs(yg.x(i1)), y2 = std::abs(yg.x(i2));
        const double v1 = f[i1], v2 = f[i2];
        if (v1 == 0.0 || v1 * v2 <= 0.0 || y1 <= y2) return 0.0;
        const double p = std::log(v2 / v1) / std::log(y1 / y2);
        if (!(p > 1.05)) return 0.0;
        const double at_edge = v1 * std::pow(y1 / edge, p);
        return at_edge * edge / (p - 1.0);
    };
    if (with_tail && yg.L > edge) sum += tail(true) + tail(false);
    return sum;
}

double ParamOdeSolution::max_discrepancy() const {
    double m = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        m = std::max({m, std::abs(lambda_closed[i] - lambda_rk4[i]), std::abs(xi_closed[i] - xi_rk4[i])});
    return m;
}

ParamOdeSolution param_ode_solve(const ParamOdeInput& in) {
    if (!(in.kappa0 >= 0.0)) throw InvalidArgument("param_ode_solve: kappa0 must be nonnegative");
    if (!(in.t_end > in.t0)) throw InvalidArgument("param_ode_solve: empty time window");
    if (in.rk4_steps == 0) throw InvalidArgument("param_ode_solve: need at least one step");
    const double c = 10.0 / 3.0 * in.kappa0;
    QuadratureOptions opt;
    opt.abs_tol = 1e-14;

    // Convergence of int_t^inf h2: partial integrals over growing windows must settle.
    const double t_end = in.t_end;
    const double i2 = integrate(in.h2, t_end, t_end + 1e2, opt);
    const double i4 = i2 + integrate(in.h2, t_end + 1e2, t_end + 1e4, opt);
    const double i6 = i4 + integrate(in.h2, t_end + 1e4, t_end + 1e6, opt);
    if (!std::isfinite(i6) || std::abs(i6 - i4) > 1e-8 * std::max(1.0, std::abs(i6)))
        throw InvalidArgument("param_ode_solve: tail integral of the xi forcing diverges");
    // Compactifying the whole tail packs oscillations against the endpoint; only the far remainder goes there.
    const double tail_end = i6 + integrate_to_infinity(in.h2, t_end + 1e6, opt);

    auto lambda_closed = [&](double t) {
        const double forced = integrate([&](double s) { return std::exp(-c * (t - s)) * in.h1(s); }, in.t0, t, opt);
        return in.d * std::exp(-c * t) + forced;
    };
    auto xi_closed = [&](double t) { return in.q - tail_end - integrate(in.h2, t, t_end, opt); };

    ParamOdeSolution sol;
    const std::size_t stride = std::max<std::size_t>(1, in.rk4_steps / 100);
    const double dt = (t_end - in.t0) / static_cast<double>(in.rk4_steps);
    double lam = in.d * std::exp(-c * in.t0);
    double xi = xi_closed(in.t0);
    auto record = [&](double t) {
        sol.t.push_back(t);
        sol.lambda_rk4.push_back(lam);
        sol.xi_rk4.push_back(xi);
        sol.lambda_closed.push_back(lambda_closed(t));
        sol.xi_closed.push_back(xi_closed(t));
    };
    record(in.t0);
    auto fl = [&](double t, double l) { return in.h1(t) - c * l; };
    for (std::size_t k = 0; k < in.rk4_steps; ++k) {
        const double t = in.t0 + dt * static_cast<double>(k);
        const double k1 = fl(t, lam), k2 = fl(t + 0.5 * dt, lam + 0.5 * dt * k1);
        const double k3 = fl(t + 0.5 * dt, lam + 0.5 * dt * k2), k4 = fl(t + dt, lam + dt * k3);
        lam += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        xi += dt / 6.0 * (in.h2(t) + 4.0 * in.h2(t + 0.5 * dt) + in.h2(t + dt));
        if ((k + 1) % stride == 0 || k + 1 == in.rk4_steps) record(in.t0 + dt * static_cast<double>(k + 1));
    }
    return sol;
}

double cutoff_profile(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const double fa = std::exp(-1.0 / (2.0 - s)), fb = std::exp(-1.0 / (s - 1.0));
    return fa / (fa + fb);
}

double cutoff_profile_derivative(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    const double a = 2.0 - s, b = s - 1.0;
    const double fa = std::exp(-1.0 / a), fb = std::exp(-1.0 / b);
    const double den = fa + fb;
    return -fa * fb * (1.0 / (a * a) + 1.0 / (b * b)) / (den * den);
}

double cutoff(double x, double xi, double R, double mu0) { return cutoff_profile(std::abs(x - xi) / (R * mu0)); }

double GluingConfig::R() const { return std::max(10.0, std::exp(rho * t0)); }

void validate(const GluingConfig& c) {
    if (!(c.rho > 0.0 && c.rho < 1.0)) throw InvalidArgument("gluing: rho must lie in (0, 1)");
    if (!(c.sigma > 0.0 && c.sigma <= 1.0)) throw InvalidArgument("gluing: sigma must lie in (0, 1]");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InvalidArgument("gluing: alpha must lie in (0, 1)");
    if (!(c.t0 >= 0.0) || !std::isfinite(c.t0)) throw InvalidArgument("gluing: t0 must be nonnegative");
    if (!(c.dt > 0.0)) throw InvalidArgument("gluing: dt must be positive");
    if (!(c.t_end > c.t0)) throw InvalidArgument("gluing: t_end must exceed t0");
    if (!(c.outer_L > 0.0) || c.outer_N < 4) throw InvalidArgument("gluing: invalid outer grid");
}

GluingProblem make_problem(const GluingConfig& cfg, const std::optional<NoiseSpec>& noise) {
    validate(cfg);
    GluingProblem P;
    P.cfg = cfg;
    P.noise = noise;
    if (noise) P.ps = make_param_state(*noise);
    P.outer = make_grid(cfg.outer_L, cfg.outer_N);
    const double R = cfg.R(), mu0 = P.ps.mu0(cfg.t0);
    if (4.0 * R * mu0 + std::abs(P.ps.q) >= cfg.outer_L)
        throw InvalidArgument("gluing: outer grid does not contain the inner region 4 R mu0");
    const double hy = std::min(P.outer.h / mu0, 0.05 * R);
    const double Y = 4.0 * R;
    P.inner = make_grid(Y, 2 * static_cast<long long>(std::ceil(Y / hy)) + 1);
    return P;
}

GluingState initial_state(const GluingProblem& P) {
    GluingState st;
    const Field2 w = omega_on(P.inner, 0.0, 1.0);
    const SphereMapField base(P.inner, w.a, w.b);
    st.phi = TangentField(base, std::vector<double>(P.inner.N, 0.0), std::vector<double>(P.inner.N, 0.0));
    st.psi = Field2(P.outer.N);
    st.t = P.cfg.t0;
    st.path.push_back(PathSample{st.t, 0.0, 0.0, 0.0, 0.0});
    return st;
}

ModulationPath path_of(const GluingState& st) {
    auto sp = std::make_shared<SampledPath>(SampledPath{st.path});
    ModulationPath m;
    m.lambda = [sp](double t) { return sp->at(t).lambda; };
    m.lambda_dot = [sp](double t) { return sp->at(t).lambda_dot; };
    m.xi1 = [sp](double t) { return sp->at(t).xi1; };
    m.xi1_dot = [sp](double t) { return sp->at(t).xi1_dot; };
    return m;
}

namespace {

void check_state(const GluingState& st, const GluingProblem& P) {
    if (!(st.phi.grid == P.inner) || st.psi.size() != P.outer.N)
        throw ConsistencyError("gluing: state does not match the problem grids");
    if (!std::isfinite(st.t) || !std::isfinite(st.tau) || st.t < P.cfg.t0 - 1e-12 || st.tau < 0.0)
        throw ConsistencyError("gluing: clocks out of range");
    if (st.path.empty() || std::abs(st.path.back().t - st.t) > 1e-12 || st.path.back().lambda != st.lambda ||
        st.path.back().xi1 != st.xi1)
        throw ConsistencyError("gluing: modulation path does not end at the current state");
    for (std::size_t i = 0; i < P.inner.N; ++i) {
        const double d = st.phi.v1[i] * st.phi.base.u1[i] + st.phi.v2[i] * st.phi.base.u2[i];
        if (!(std::abs(d) <= 1e-6)) {
            std::ostringstream msg;
            msg << "gluing: constraint drift |phi . omega| = " << std::abs(d) << " at y = " << P.inner.x(i);
            throw ConsistencyError(msg.str());
        }
    }
}

struct OuterFields {
    Field2 phi;       // phi((x - xi)/mu0)
    Field2 grad_phi;  // d_y phi at the same point
};

OuterFields phi_on_outer(const GluingState& st, const GluingProblem& P, double xi, double mu0) {
    const GridSpec& gi = P.inner;
    const GridSpec& go = P.outer;
    const auto d1 = derivative(gi, st.phi.v1), d2 = derivative(gi, st.phi.v2);
    OuterFields o{Field2(go.N), Field2(go.N)};
    for (std::size_t i = 0; i < go.N; ++i) {
        const double y = (go.x(i) - xi) / mu0;
        o.phi.a[i] = interp_cubic(gi, st.phi.v1, y, 0.0);
        o.phi.b[i] = interp_cubic(gi, st.phi.v2, y, 0.0);
        o.grad_phi.a[i] = interp_cubic(gi, d1, y, 0.0);
        o.grad_phi.b[i] = interp_cubic(gi, d2, y, 0.0);
    }
    return o;
}

}  // namespace

GluingState inner_outer_step(const GluingState& st, const GluingProblem& P) {
    check_state(st, P);
    const GluingConfig& cfg = P.cfg;
    const ParamState& ps = P.ps;
    const NoiseSpec* noise = P.noise ? &*P.noise : nullptr;
    const GridSpec& gi = P.inner;
    const GridSpec& go = P.outer;
    const double R = cfg.R(), dt = cfg.dt, t = st.t;
    const double mu0 = ps.mu0(t), mu0_dot = ps.mu0_dot(t);
    const double mu = mu0 + st.lambda;
    if (!(mu > 0.0)) throw NumericError("gluing: scale mu = mu0 + lambda is not positive");
    const double xi = ps.q + st.xi1;
    const double r = mu0 / mu;
    const ModulationPath path = path_of(st);
    ErrorStarOptions eo;
    eo.include_phi0 = cfg.include_phi0;
    eo.history_start = cfg.t0;

    // Inner geometry: omega(y) and W(y) = omega(mu0 y/mu) = U(xi + mu0 y).
    const Field2 om = omega_on(gi, 0.0, 1.0);
    const Field2 W = omega_on(gi, 0.0, 1.0 / r);
    std::vector<double> x_in(gi.N);
    for (std::size_t i = 0; i < gi.N; ++i) x_in[i] = xi + mu0 * gi.x(i);
    const ErrorStarParts Ein = error_star_parts(ps, path, noise, t, x_in, eo);
    const ErrorStarParts Eout = error_star_parts(ps, path, noise, t, go.points(), eo);

    // psi feedback: Q = T_U Pi psi - G + (G.U) U with G = (D(psi.U, U1), D(psi.U, U2)).
    const Field2 Uo = omega_on(go, xi, mu);
    const Field2& psi = st.psi;
    const Field2 G = bilinear_against(go, dot(psi, Uo), Uo);
    const auto gU = dot(G, Uo);
    const Field2 pipsi = project_off(psi, Uo);
    Field2 Q_in(go.N), Q_out(go.N);
    for (std::size_t i = 0; i < go.N; ++i) {
        const double y = (go.x(i) - xi) / mu, TU = 2.0 / (mu * (1.0 + y * y));
        Q_in.a[i] = TU * pipsi.a[i] - G.a[i] + gU[i] * Uo.a[i];
        Q_in.b[i] = TU * pipsi.b[i] - G.b[i] + gU[i] * Uo.b[i];
        Q_out.a[i] = TU * psi.a[i] - G.a[i] + gU[i] * Uo.a[i];
        Q_out.b[i] = TU * psi.b[i] - G.b[i] + gU[i] * Uo.b[i];
    }

    // B terms on the inner grid.
    const Field2 ph = st.phi.as_field();
    const auto pw = dot(ph, W), po = dot(ph, om);
    const Field2 DW = bilinear_against(gi, pw, W), Do = bilinear_against(gi, po, om);
    const auto DWw = dot(DW, W), Doo = dot(Do, om);

    Field2 Hf(gi.N);
    const Field2 Ef = Ein.evaluate(mu0_dot, 0.0);
    const Field2 PEf = project_off(Ef, W), PEl = project_off(Ein.d_mu_dot, W), PEx = project_off(Ein.d_xi_dot, W);
    Field2 Hl(gi.N), Hx(gi.N);
    for (std::size_t i = 0; i < gi.N; ++i) {
        const double y = gi.x(i), xq = x_in[i];
        const double b1 = 2.0 * r / (1.0 + r * r * y * y) - 2.0 / (1.0 + y * y);
        Hf.a[i] = mu0 * PEf.a[i] + mu0 * interp_cubic(go, Q_in.a, xq, 0.0) + b1 * ph.a[i] - DW.a[i] + Do.a[i] +
                  DWw[i] * W.a[i] - Doo[i] * om.a[i];
        Hf.b[i] = mu0 * PEf.b[i] + mu0 * interp_cubic(go, Q_in.b, xq, 0.0) + b1 * ph.b[i] - DW.b[i] + Do.b[i] +
                  DWw[i] * W.b[i] - Doo[i] * om.b[i];
        Hl.a[i] = mu0 * PEl.a[i];
        Hl.b[i] = mu0 * PEl.b[i];
        Hx.a[i] = mu0 * PEx.a[i];
        Hx.b[i] = mu0 * PEx.b[i];
    }

    // Orthogonality of H against Z2 and Z3 on B_2R fixes lambda' and xi'.
    auto proj = [&](const Field2& f, int j) { return project_modes(gi, f, j, R, false); };
    const double m11 = proj(Hl, 2), m12 = proj(Hx, 2), m21 = proj(Hl, 3), m22 = proj(Hx, 3);
    const double f2 = proj(Hf, 2), f3 = proj(Hf, 3);
    const double det = m11 * m22 - m12 * m21;
    const double scale = std::max({std::abs(m11 * m22), std::abs(m12 * m21), 1e-300});
    if (!(std::abs(det) > 1e-12 * scale)) throw ConsistencyError("gluing: degenerate orthogonality system");
    const double lambda_dot = (-f2 * m22 + f3 * m12) / det;
    const double xi_dot = (-f3 * m11 + f2 * m21) / det;
    Field2 H = Hf;
    axpy(H, lambda_dot, Hl);
    axpy(H, xi_dot, Hx);

    GluingState next;
    next.proj_z2 = proj(H, 2);
    next.proj_z3 = proj(H, 3);

    // lambda' + c lambda = h1 with h1 frozen over the step.
    const double c = 10.0 / 3.0 * ps.kappa0;
    const double h1 = lambda_dot + c * st.lambda;
    next.lambda = c > 0.0 ? std::exp(-c * dt) * st.lambda + (1.0 - std::exp(-c * dt)) / c * h1 : st.lambda + dt * h1;
    next.xi1 = st.xi1 + dt * xi_dot;

    // Inner step in tau, dt = mu0 dtau.
    const double dtau = dt / mu0;
    {
        const auto Dsum = [&] {
            auto d = bilinear_form(gi, om.a, ph.a);
            const auto d2 = bilinear_form(gi, om.b, ph.b);
            for (std::size_t i = 0; i < gi.N; ++i) d[i] += d2[i];
            return d;
        }();
        std::vector<double> fa(gi.N), fb(gi.N);
        for (std::size_t i = 0; i < gi.N; ++i) {
            const double T = tension_coeff_omega(gi.x(i));
            fa[i] = T * ph.a[i] + Dsum[i] * om.a[i] + H.a[i];
            fb[i] = T * ph.b[i] + Dsum[i] * om.b[i] + H.b[i];
        }
        const auto pa = poisson_convolve(gi, ph.a, dtau), pb = poisson_convolve(gi, ph.b, dtau);
        const auto qa = semigroup_integral(gi, fa, dtau), qb = semigroup_integral(gi, fb, dtau);
        std::vector<double> na(gi.N), nb(gi.N);
        double drift = 0.0;
        for (std::size_t i = 0; i < gi.N; ++i) {
            const double mask = cutoff_profile(std::abs(gi.x(i)) / (2.0 * R));
            const double va = mask * (pa[i] + qa[i]), vb = mask * (pb[i] + qb[i]);
            const double d = va * om.a[i] + vb * om.b[i];
            na[i] = va - d * om.a[i];
            nb[i] = vb - d * om.b[i];
            if (!std::isfinite(na[i]) || !std::isfinite(nb[i])) throw NumericError("gluing: inner field is not finite");
            drift = std::max(drift, std::abs(na[i] * om.a[i] + nb[i] * om.b[i]));
        }
        if (drift > 1e-10) throw ConsistencyError("gluing: tangency lost after re-projection");
        next.phi = TangentField(st.phi.base, std::move(na), std::move(nb));
    }

    // Outer step with the dissipative half-Laplacian.
    {
        const double mu_dot = mu0_dot + lambda_dot;
        const OuterFields pf = phi_on_outer(st, P, xi, mu0);
        std::vector<double> eta(go.N), eta_t(go.N);
        for (std::size_t i = 0; i < go.N; ++i) {
            const double dx = go.x(i) - xi, s = std::abs(dx) / (R * mu0);
            eta[i] = cutoff_profile(s);
            const double sgn = dx > 0.0 ? 1.0 : (dx < 0.0 ? -1.0 : 0.0);
            eta_t[i] = cutoff_profile_derivative(s) * (-sgn * xi_dot / (R * mu0) - s * mu0_dot / mu0);
        }
        const auto lap_eta = half_laplacian(go, eta);
        const auto ca = bilinear_form(go, eta, pf.phi.a), cb = bilinear_form(go, eta, pf.phi.b);
        const auto phiU = dot(pf.phi, Uo);
        Field2 C3(trilinear(go, eta, phiU, Uo.a), trilinear(go, eta, phiU, Uo.b));
        const auto C3U = dot(C3, Uo);

        // N_U(Pi[Phi0 + Z* + eta phi + psi])
        Field2 V = psi;
        if (cfg.include_phi0 && t > cfg.t0) {
            const auto p0 = correction_phi0(history_of(ps, path), cfg.t0, t, go.points());
            for (std::size_t i = 0; i < go.N; ++i) V.a[i] += p0[i];
        }
        for (std::size_t i = 0; i < go.N; ++i) {
            V.a[i] += eta[i] * pf.phi.a[i];
            V.b[i] += eta[i] * pf.phi.b[i];
            if (noise) {
                const Vec2 z = (*noise)(go.x(i));
                V.a[i] += z.a;
                V.b[i] += z.b;
            }
        }
        const LinearizedAt Lo{BubbleParams{mu, xi}, go};
        const TangentField PV = project_tangent(Lo, V);
        Field2 Ut(go.N);
        for (std::size_t i = 0; i < go.N; ++i) {
            const double y = (go.x(i) - xi) / mu;
            const Vec2 z2 = kernel_Z(2, y), z3 = kernel_Z(3, y);
            Ut.a[i] = (mu_dot * z3.a + xi_dot * z2.a) / mu;
            Ut.b[i] = (mu_dot * z3.b + xi_dot * z2.b) / mu;
        }
        const Field2 NU = nonlinear_remainder(Lo, PV, Ut);
        const Field2 PE = project_off(Eout.evaluate(mu_dot, xi_dot), Uo);

        std::vector<double> sa(go.N), sb(go.N);
        for (std::size_t i = 0; i < go.N; ++i) {
            const double y0 = (go.x(i) - xi) / mu0, e = eta[i], oe = 1.0 - e;
            const double transport = e * (mu0_dot / mu0 * y0 + xi_dot / mu0);
            sa[i] = oe * Q_out.a[i] + transport * pf.grad_phi.a[i] + NU.a[i] + oe * PE.a[i] -
                    lap_eta[i] * pf.phi.a[i] + ca[i] - eta_t[i] * pf.phi.a[i] - C3.a[i] + C3U[i] * Uo.a[i];
            sb[i] = oe * Q_out.b[i] + transport * pf.grad_phi.b[i] + NU.b[i] + oe * PE.b[i] -
                    lap_eta[i] * pf.phi.b[i] + cb[i] - eta_t[i] * pf.phi.b[i] - C3.b[i] + C3U[i] * Uo.b[i];
        }
        const auto pa = poisson_convolve(go, psi.a, dt), pb = poisson_convolve(go, psi.b, dt);
        const auto qa = semigroup_integral(go, sa, dt), qb = semigroup_integral(go, sb, dt);
        next.psi = Field2(go.N);
        for (std::size_t i = 0; i < go.N; ++i) {
            next.psi.a[i] = pa[i] + qa[i];
            next.psi.b[i] = pb[i] + qb[i];
            if (!std::isfinite(next.psi.a[i]) || !std::isfinite(next.psi.b[i]))
                throw NumericError("gluing: outer field is not finite");
        }
    }

    next.t = t + dt;
    next.tau = st.tau + dtau;
    next.path = st.path;
    next.path.back().lambda_dot = lambda_dot;
    next.path.back().xi1_dot = xi_dot;
    next.path.push_back(PathSample{next.t, next.lambda, lambda_dot, next.xi1, xi_dot});
    return next;
}

SphereMapField reconstruct(const GluingState& st, const GluingProblem& P) {
    const GridSpec& go = P.outer;
    const ParamState& ps = P.ps;
    const double t = st.t, mu0 = ps.mu0(t), mu = mu0 + st.lambda, xi = ps.q + st.xi1;
    if (!(mu > 0.0)) throw NumericError("reconstruct: scale mu is not positive");
    const OuterFields pf = phi_on_outer(st, P, xi, mu0);
    Field2 V = st.psi;
    if (P.cfg.include_phi0 && t > P.cfg.t0) {
        const auto p0 = correction_phi0(history_of(ps, path_of(st)), P.cfg.t0, t, go.points());
        for (std::size_t i = 0; i < go.N; ++i) V.a[i] += p0[i];
    }
    for (std::size_t i = 0; i < go.N; ++i) {
        const double e = cutoff(go.x(i), xi, P.cfg.R(), mu0);
        V.a[i] += e * pf.phi.a[i];
        V.b[i] += e * pf.phi.b[i];
        if (P.noise) {
            const Vec2 z = (*P.noise)(go.x(i));
            V.a[i] += z.a;
            V.b[i] += z.b;
        }
    }
    const LinearizedAt L{BubbleParams{mu, xi}, go};
    const TangentField PV = project_tangent(L, V);
    const ScalarField a = normal_correction(PV);
    std::vector<double> u1(go.N), u2(go.N);
    for (std::size_t i = 0; i < go.N; ++i) {
        const double k = 1.0 + a.values[i];
        u1[i] = k * PV.base.u1[i] + PV.v1[i];
        u2[i] = k * PV.base.u2[i] + PV.v2[i];
    }
    return SphereMapField(go, std::move(u1), std::move(u2), true);
}

}  // namespace hh
