#include "halfharmonic/flow.hpp"

#include "halfharmonic/diagnostics.hpp"
#include "halfharmonic/errors.hpp"
#include "halfharmonic/profiles.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace hh {

Scheme parse_scheme(const std::string& name) {
    if (name == "semi-implicit-spectral") return Scheme::semi_implicit_spectral;
    if (name == "explicit-pv") return Scheme::explicit_pv;
    throw InvalidArgument("unknown scheme: " + name);
}

std::string to_string(Scheme s) {
    return s == Scheme::semi_implicit_spectral ? "semi-implicit-spectral" : "explicit-pv";
}

void validate(const FlowConfig& cfg) {
    if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt)) throw InvalidArgument("flow: dt must be positive");
    if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) throw InvalidArgument("flow: t_end must be positive");
    if (cfg.stride == 0) throw InvalidArgument("flow: stride must be at least 1");
}

double effective_dt(const FlowConfig& cfg, const GridSpec& g) { return cfg.dt > 0.0 ? cfg.dt : 0.25 * g.h; }

Field2 rhs(const SphereMapField& u, Backend b) {
    const GridSpec& g = u.grid;
    const auto T = tension_density(g, u.u1, u.u2, b);
    const auto l1 = half_laplacian(g, u.u1, b), l2 = half_laplacian(g, u.u2, b);
    Field2 out(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        out.a[i] = -l1[i] + T[i] * u.u1[i];
        out.b[i] = -l2[i] + T[i] * u.u2[i];
    }
    return out;
}

namespace {

SphereMapField finish(const GridSpec& g, std::vector<double> a, std::vector<double> b, bool renormalize) {
    for (std::size_t i = 0; i < g.N; ++i) {
        const double r = std::hypot(a[i], b[i]);
        if (!(r > 0.0) || !std::isfinite(r)) {
            std::ostringstream msg;
            msg << "step: degenerate vector at x = " << g.x(i);
            throw NumericError(msg.str());
        }
        if (renormalize) {
            a[i] /= r;
            b[i] /= r;
        } else if (std::abs(r * r - 1.0) > 1e-12) {
            std::ostringstream msg;
            msg << "step: sphere constraint lost at x = " << g.x(i) << " without renormalization";
            throw NumericError(msg.str());
        }
    }
    return SphereMapField(g, std::move(a), std::move(b));
}

}  // namespace

SphereMapField step(const SphereMapField& u, const FlowConfig& cfg) {
    validate(cfg);
    const GridSpec& g = u.grid;
    const double dt = effective_dt(cfg, g);
    const std::size_t n = g.N;
    std::vector<double> a(n), b(n);
    if (cfg.scheme == Scheme::semi_implicit_spectral) {
        const auto T = tension_density(g, u.u1, u.u2);
        std::vector<double> f1(n), f2(n);
        for (std::size_t i = 0; i < n; ++i) {
            f1[i] = T[i] * u.u1[i];
            f2[i] = T[i] * u.u2[i];
        }
        const auto p1 = poisson_convolve(g, u.u1, dt), p2 = poisson_convolve(g, u.u2, dt);
        const auto q1 = semigroup_integral(g, f1, dt), q2 = semigroup_integral(g, f2, dt);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = p1[i] + q1[i];
            b[i] = p2[i] + q2[i];
        }
    } else {
        const Field2 r = rhs(u, Backend::principal_value);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = u.u1[i] + dt * r.a[i];
            b[i] = u.u2[i] + dt * r.b[i];
        }
    }
    return finish(g, std::move(a), std::move(b), cfg.renormalize);
}

FlowSample measure(const SphereMapField& u, double t) {
    FlowSample s;
    s.t = t;
    s.energy = energy(u);
    const GridSpec& g = u.grid;
    double dev = 0.0;
    try {
        const BubbleParams p = extract_bubble(u);
        s.mu = p.mu;
        s.xi = p.xi;
        for (std::size_t i = 0; i < g.N; ++i) {
            const Vec2 w = scaled_bubble(p, g.x(i));
            dev = std::max({dev, std::abs(u.u1[i] - w.a), std::abs(u.u2[i] - w.b)});
        }
    } catch (const NoBubbleError&) {
        s.mu = s.xi = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < g.N; ++i)
            dev = std::max({dev, std::abs(u.u1[i] - omega_infinity.a), std::abs(u.u2[i] - omega_infinity.b)});
    } catch (const ResolutionError&) {
        s.mu = s.xi = std::numeric_limits<double>::quiet_NaN();
        dev = std::numeric_limits<double>::quiet_NaN();
    }
    s.sup_norm_deviation = dev;
    return s;
}

Trajectory run_flow(const SphereMapField& u0, const FlowConfig& cfg, const FlowObserver& observer) {
    validate(cfg);
    const double dt = effective_dt(cfg, u0.grid);
    const auto nsteps = static_cast<std::size_t>(std::ceil(cfg.t_end / dt - 1e-9));
    Trajectory tr;
    auto record = [&](const SphereMapField& u, double t) {
        tr.times.push_back(t);
        tr.diagnostics.push_back(measure(u, t));
        if (cfg.keep_states) tr.states.push_back(u);
        if (observer) observer(tr.diagnostics.back(), u);
    };
    SphereMapField u = u0;
    record(u, 0.0);
    for (std::size_t k = 1; k <= nsteps; ++k) {
        u = step(u, cfg);
        if (k % cfg.stride == 0 || k == nsteps) record(u, static_cast<double>(k) * dt);
    }
    return tr;
}

void write_csv_header(std::ostream& os) { os << "t,energy,mu,xi,sup_norm_deviation\n"; }

void write_csv_row(std::ostream& os, const FlowSample& s) {
    os << std::setprecision(17) << s.t << ',' << s.energy << ',' << s.mu << ',' << s.xi << ','
       << s.sup_norm_deviation << '\n';
}

void write_csv(std::ostream& os, const Trajectory& tr) {
    write_csv_header(os);
    for (const auto& s : tr.diagnostics) write_csv_row(os, s);
}

}  // namespace hh
