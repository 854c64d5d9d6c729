// One line per acceptance criterion; exit status is nonzero if any fails.

#include "halfharmonic/config.hpp"
#include "halfharmonic/diagnostics.hpp"
#include "halfharmonic/flow.hpp"
#include "halfharmonic/gluing.hpp"
#include "halfharmonic/linops.hpp"
#include "halfharmonic/nonlocal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hh;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double interior = 50.0;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

const GridSpec& verify_grid() {
    static const GridSpec g = default_config().verify_grid;
    return g;
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

double sup_inside(const GridSpec& g, const std::vector<double>& v, const std::function<double(double)>& ref,
                  double r = interior) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.N; ++i)
        if (std::abs(g.x(i)) <= r) m = std::max(m, std::abs(v[i] - ref(g.x(i))));
    return m;
}

double zero(double) { return 0.0; }

void criterion1() {
    const Stopwatch sw;
    const GridSpec& g = verify_grid();
    const Field2 w = sample_vec(omega, g);
    const auto l1 = half_laplacian(g, w.a), l2 = half_laplacian(g, w.b);
    double m = 0.0;
    for (std::size_t i = 0; i < g.N; ++i) {
        const double x = g.x(i);
        if (std::abs(x) > interior) continue;
        const double f = 2.0 / (1.0 + x * x);
        m = std::max({m, std::abs(l1[i] - f * w.a[i]), std::abs(l2[i] - f * w.b[i])});
    }
    const double s = sw.seconds();
    report(1, "half-harmonic identity", m <= 1e-4 && s < 5.0,
           "sup " + fmt(m) + " <= 1e-4, " + fmt(s) + " s < 5 s");
}

void criterion2() {
    const Stopwatch sw;
    const GridSpec& g = verify_grid();
    const LinearizedAt L{BubbleParams{}, g};
    double kz = 0.0;
    for (int j = 1; j <= 3; ++j) {
        const TangentField P = project_tangent(L, sample_vec([j](double y) { return kernel_Z(j, y); }, g));
        const Field2 out = linearized_vector(L, P);
        kz = std::max({kz, sup_inside(g, out.a, zero), sup_inside(g, out.b, zero)});
    }
    double sr = 0.0;
    const std::function<double(double)> fs[] = {
        [](double y) { return 2.0 / (1.0 + y * y); },
        [](double y) { return 2.0 * y / (1.0 + y * y); },
        [](double) { return 1.0; },
    };
    for (const auto& f : fs) sr = std::max(sr, sup_inside(g, scalar_reduced_apply({sample(f, g)}).v.values, zero));
    const double s = sw.seconds();
    report(2, "kernel annihilation and scalar reduction", kz <= 1e-4 && sr <= 1e-6 && s < 10.0,
           "max_j |L Z_j| " + fmt(kz) + " <= 1e-4, max |L w| " + fmt(sr) + " <= 1e-6, " + fmt(s) + " s < 10 s");
}

void criterion3() {
    const Stopwatch sw;
    const double inf = std::abs(seven_twentyfourths(std::numeric_limits<double>::infinity()) - 7.0 / 24.0);
    const double two = std::abs(seven_twentyfourths(2.0) - 19.0 / 192.0);
    const double s = sw.seconds();
    report(3, "7/24 integral", inf <= 1e-10 && two <= 1e-12 && s < 1.0,
           "|I(inf) - 7/24| " + fmt(inf) + " <= 1e-10, |I(2) - 19/192| " + fmt(two) + " <= 1e-12, " + fmt(s) +
               " s < 1 s");
}

void criterion4() {
    const GridSpec& g = verify_grid();
    const double e1 = std::abs(energy(g, sample_vec(omega, g)) - pi);
    MultiBubble mb;
    mb.bubbles = {{1.0, -50.0}, {1.0, 50.0}};
    const double e2 = std::abs(energy(g, sample_vec([&mb](double x) { return multi_bubble(mb, x); }, g)) - 2 * pi);
    MobiusSpec m;
    m.degree = 2;
    m.scales = {1.0, 1.0};
    m.centers = {-5.0, 5.0};
    const double e3 = std::abs(energy(g, sample_vec([&m](double x) { return mobius_trace(m, x); }, g)) - 2 * pi);
    report(4, "energy quantization", e1 <= 1e-3 && e2 <= 2e-2 && e3 <= 2e-2,
           "|E(w) - pi| " + fmt(e1) + " <= 1e-3, two bubbles " + fmt(e2) + " <= 2e-2, Mobius d=2 " + fmt(e3) +
               " <= 2e-2");
}

void criterion5() {
    double m = 0.0;
    for (double eps : {0.01, 0.1, 0.5}) m = std::max(m, std::abs(kappa0(default_noise(eps)) - 9.0 * eps / 26.0));
    report(5, "kappa0 closed form", m <= 1e-8, "max |kappa0 - 9 eps/26| " + fmt(m) + " <= 1e-8");
}

void criterion6() {
    const GridSpec& g = verify_grid();
    const ScalarField f = sample([](double x) { return std::exp(-x * x) + 1.0 / (1.0 + x * x); }, g);
    const auto ts = poisson_convolve(g, poisson_convolve(g, f.values, 0.4), 0.9);
    const auto direct = poisson_convolve(g, f.values, 1.3);
    double semi = 0.0;
    for (std::size_t i = 0; i < g.N; ++i)
        if (std::abs(g.x(i)) <= interior) semi = std::max(semi, std::abs(ts[i] - direct[i]));
    const std::vector<double> ones(g.N, 1.0);
    const double one = sup_inside(g, poisson_convolve(g, ones, 0.7), [](double) { return 1.0; }, g.L);
    const ScalarField c = sample([](double x) { return 0.3 / (pi * (x * x + 0.09)); }, g);
    const double shift =
        sup_inside(g, poisson_convolve(g, c.values, 1.2), [](double x) { return 1.5 / (pi * (x * x + 2.25)); });
    report(6, "semigroup laws", semi <= 1e-6 && one <= 1e-10 && shift <= 1e-6,
           "|P_t P_s f - P_{t+s} f| " + fmt(semi) + " <= 1e-6, |P_t 1 - 1| " + fmt(one) + " <= 1e-10, Cauchy shift " +
               fmt(shift) + " <= 1e-6");
}

void criterion7() {
    const GridSpec& g = verify_grid();
    std::mt19937 gen(977u);
    auto unif = [&gen](double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(gen()) / 4294967296.0); };
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double ca = unif(-0.4, 0.4), cb = unif(-0.4, 0.4), sa = unif(0.5, 2.0), sb = unif(0.5, 2.0);
        const double ma = unif(-2.0, 2.0), mb = unif(-2.0, 2.0), fr = unif(0.2, 1.5);
        for (const BubbleParams b : {BubbleParams{1.0, 0.0}, BubbleParams{0.5, 2.0}}) {
            const VectorFn phi = [=](double x) {
                const double u = x - b.xi;
                return Vec2{ca * std::exp(-(u - ma) * (u - ma) / (2 * sa * sa)) * std::cos(fr * u),
                            cb * std::exp(-(u - mb) * (u - mb) / (2 * sb * sb))};
            };
            worst = std::max(worst, decomposition_check(LinearizedAt{b, g}, phi).sup_difference);
        }
    }
    report(7, "linearized operator decomposition", worst <= 1e-6,
           "max over 5 fields x 2 bubbles " + fmt(worst) + " <= 1e-6");
}

void criterion8() {
    auto diff = [](const GridSpec& g) {
        const ScalarField f = sample([](double x) { return omega(x).a; }, g);
        const auto sp = half_laplacian(g, f.values, Backend::spectral);
        const auto pv = half_laplacian(g, f.values, Backend::principal_value);
        double m = 0.0;
        for (std::size_t i = 0; i < g.N; ++i)
            if (std::abs(g.x(i)) <= interior) m = std::max(m, std::abs(sp[i] - pv[i]));
        return m;
    };
    const GridSpec& g = verify_grid();
    const double coarse = diff(g);
    const double fine = diff(make_grid(g.L, 2 * static_cast<long long>(g.N) - 1));
    report(8, "backend agreement", coarse <= 1e-3 && fine < coarse,
           "sup " + fmt(coarse) + " <= 1e-3, halved h " + fmt(fine) + " < " + fmt(coarse));
}

void criterion9() {
    const GridSpec& g = verify_grid();
    double ext = 0.0;
    for (double a : {0.5, 1.0, 2.0}) {
        const ScalarField k = sample([a](double x) { return extension_kernel(x, a); }, g);
        const auto lk = half_laplacian(g, k.values);
        // d_a [x/(x^2+a^2)] = -2 a x/(x^2+a^2)^2, so d_a k + Lambda k should vanish.
        ext = std::max(ext, sup_inside(g, lk, [a](double x) {
                           const double q = x * x + a * a;
                           return 2.0 * a * x / (q * q);
                       }));
    }
    const double kap = 9.0 * 0.1 / 26.0, t0 = 1.0, t1 = 4.0;
    ScaleHistory h;
    h.mu = [kap](double s) { return std::exp(-kap * s); };
    h.mu_dot = [kap](double s) { return -kap * std::exp(-kap * s); };
    h.xi = [](double) { return 0.0; };
    const ScalarField direct = correction_phi0(h, t0, t1, g);
    DuhamelSource src{g, [&h](double x, double s) {
                          const double m = h.mu(s);
                          return -2.0 * h.mu_dot(s) * x / (x * x + m * m);
                      },
                      t0, t1};
    const ScalarField mild = duhamel_solve(src, t1);
    double phi = 0.0;
    for (std::size_t i = 0; i < g.N; ++i)
        if (std::abs(g.x(i)) <= interior) phi = std::max(phi, std::abs(direct.values[i] - mild.values[i]));
    report(9, "extension kernel and first correction", ext <= 1e-5 && phi <= 1e-5,
           "|d_a k + Lambda k| " + fmt(ext) + " <= 1e-5, two formulas " + fmt(phi) + " <= 1e-5");
}

void criterion10() {
    const double k = 9.0 * 0.1 / 26.0, sigma = 0.1;
    ParamOdeInput in;
    in.kappa0 = k;
    in.d = 0.25;
    in.q = 0.7;
    in.t0 = 10.0;
    in.t_end = 40.0;
    double closed = 0.0;
    {
        const ParamOdeSolution s = param_ode_solve(in);
        for (std::size_t i = 0; i < s.t.size(); ++i)
            closed = std::max({closed, std::abs(s.lambda_closed[i] - 0.25 * std::exp(-10.0 / 3.0 * k * s.t[i])),
                               std::abs(s.xi_closed[i] - 0.7)});
    }
    in.h1 = [k, sigma](double t) { return std::exp(-k * (1 + sigma) * t); };
    in.h2 = [k, sigma](double t) { return std::exp(-k * (1 + sigma) * t) * std::cos(t); };
    const double disc = param_ode_solve(in).max_discrepancy();
    report(10, "parameter ODE", disc <= 1e-8 && closed <= 1e-12,
           "closed form vs RK4 " + fmt(disc) + " <= 1e-8, unforced closed forms " + fmt(closed));
}

void criterion11() {
    const GridSpec& g = verify_grid();
    double constraint = 0.0, rise = -std::numeric_limits<double>::infinity();
    FlowConfig cfg;
    const double amps[][3] = {{0.1, 0.5, 1.0}, {0.3, -1.0, 0.7}, {0.2, 2.0, 2.0}};
    for (const auto& p : amps) {
        SphereMapField u = sample_map(
            [&p](double x, double& a, double& b) {
                const Vec2 w = omega(x);
                const double e = p[0] * std::exp(-(x - p[1]) * (x - p[1]) / (p[2] * p[2]));
                a = w.a + e;
                b = w.b - 0.5 * e;
            },
            g, true);
        double e = energy(u);
        for (int k = 0; k < 150; ++k) {
            u = step(u, cfg);
            for (std::size_t i = 0; i < g.N; ++i)
                constraint = std::max(constraint, std::abs(std::hypot(u.u1[i], u.u2[i]) - 1.0));
            const double en = energy(u);
            rise = std::max(rise, en - e);
            e = en;
        }
    }
    // Stationarity: one-step drift of omega against dt^2 + dt h^2 under refinement.
    std::vector<double> C;
    for (long long n : {4096LL, 8192LL, 16384LL}) {
        const GridSpec gr = make_grid(g.L, n);
        const SphereMapField w = LinearizedAt{BubbleParams{}, gr}.bubble();
        const SphereMapField u = step(w, cfg);
        const double dt = effective_dt(cfg, gr);
        C.push_back(sup_diff(u.as_field(), w.as_field()) / (dt * dt + dt * gr.h * gr.h));
    }
    const double spread = *std::max_element(C.begin(), C.end()) / *std::min_element(C.begin(), C.end());
    report(11, "flow properties", constraint <= 1e-14 && rise <= 1e-6 && spread <= 2.0,
           "sphere " + fmt(constraint) + " <= 1e-14, max energy rise " + fmt(rise) + " <= 1e-6, C = " + fmt(C[0]) +
               ", " + fmt(C[1]) + ", " + fmt(C[2]) + " (max/min " + fmt(spread) + " <= 2)");
}

void criterion12() {
    RunConfig cfg = default_config();
    cfg.grid = make_grid(400.0, 65536);
    cfg.initial.kind = InitialKind::noisy_bubble;
    cfg.noise.epsilon = 0.1;
    cfg.flow.t_end = 30.0;
    cfg.flow.stride = 200;
    cfg.flow.keep_states = false;
    std::vector<std::pair<double, double>> mu;
    bool lost = false;
    const Trajectory tr = run_flow(initial_map(cfg), cfg.flow);
    for (const auto& s : tr.diagnostics) {
        if (std::isfinite(s.mu))
            mu.emplace_back(s.t, s.mu);
        else
            lost = true;
    }
    bool decreasing = !lost && mu.size() >= 2;
    std::size_t first_rise = 0;
    for (std::size_t i = 1; i < mu.size() && decreasing; ++i)
        if (!(mu[i].second < mu[i - 1].second)) {
            decreasing = false;
            first_rise = i;
        }
    const double k0 = 9.0 * 0.1 / 26.0;
    DecayFit fit;
    if (mu.size() >= 10) fit = fit_decay_rate(mu);
    const bool within = fit.kappa >= k0 / 3.0 && fit.kappa <= 3.0 * k0;
    std::string detail = "mu(0) " + fmt(mu.empty() ? NAN : mu.front().second) + " -> mu(30) " +
                         fmt(mu.empty() ? NAN : mu.back().second) + ", strictly decreasing " +
                         (decreasing ? "yes" : "no");
    if (!decreasing && first_rise > 0) detail += " (first rise at t = " + fmt(mu[first_rise].first) + ")";
    detail += ", R^2 " + fmt(fit.r_squared) + " >= 0.9, kappa_fit " + fmt(fit.kappa) + " in [" + fmt(k0 / 3) + ", " +
              fmt(3 * k0) + "]";
    report(12, "blow-up trend", decreasing && fit.r_squared >= 0.9 && within, detail);
}

void criterion13() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "hhflow_acceptance";
    fs::remove_all(base);
    auto run = [&](const std::string& tag) {
        const fs::path out = base / tag;
        const std::string cmd = std::string(HHFLOW_PATH) + " verify --out " + out.string() + " > /dev/null";
        const int rc = std::system(cmd.c_str());
        std::ifstream is(out / "verify.jsonl", std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        return std::pair{rc, ss.str()};
    };
    const auto [rc1, a] = run("first");
    const auto [rc2, b] = run("second");
    const bool same = !a.empty() && a == b;
    report(13, "determinism", same && rc1 == 0 && rc2 == 0,
           std::string("reports ") + (same ? "byte-identical" : "differ") + " (" + std::to_string(a.size()) +
               " bytes), exit codes " + std::to_string(rc1) + ", " + std::to_string(rc2));
}

}  // namespace

int main() {
    const std::function<void()> all[] = {criterion1, criterion2, criterion3,  criterion4,  criterion5,
                                         criterion6, criterion7, criterion8,  criterion9,  criterion10,
                                         criterion11, criterion12, criterion13};
    int id = 1;
    for (const auto& c : all) {
        try {
            c();
        } catch (const std::exception& e) {
            report(id, "criterion raised", false, e.what());
        }
        ++id;
    }
    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
