#pragma once

#include "halfharmonic/grid.hpp"
#include "halfharmonic/profiles.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace hh {

// Far-field noise Z*0(x) = profile(x - q). The default profile is
// (0, -eps r^2/(1+r^2)).
struct NoiseSpec {
    double epsilon = 0.1;
    double q = 0.0;
    std::function<Vec2(double r)> profile;

    Vec2 operator()(double x) const;
};

NoiseSpec default_noise(double epsilon, double q = 0.0);

// (1/pi) int (z2(s+q) - z2(q))/s * s^3/(s^2+1)^2 ds; must be negative.
double sign_functional(const NoiseSpec& n);

// Throws InvalidArgument for epsilon <= 0, SignConditionError when the
// functional is not negative.
void validate(const NoiseSpec& n);

// -(12/13) times the sign functional.
double kappa0(const NoiseSpec& n);

// int_0^b (1+s)^2/(2+s)^4 ds, b may be infinite.
double seven_twentyfourths(double b);

struct ParamState {
    double kappa0 = 0.0;
    double q = 0.0;

    double mu0(double t) const;
    double mu0_dot(double t) const;
};

ParamState make_param_state(const NoiseSpec& n);

// mu(t), its derivative and the center xi(t) along a run.
struct ScaleHistory {
    std::function<double(double)> mu;
    std::function<double(double)> mu_dot;
    std::function<double(double)> xi;
};

// psi0(x, t) = int_{t0}^t p(s) (x - xi(s))/((x - xi(s))^2 + (mu(s) + t - s)^2) ds, p = -2 mu'.
ScalarField correction_phi0(const ScaleHistory& h, double t0, double t, const GridSpec& g);
std::vector<double> correction_phi0(const ScaleHistory& h, double t0, double t, const std::vector<double>& x);

// lambda(t), xi1(t) and their rates; mu = mu0 + lambda, xi = q + xi1.
struct ModulationPath {
    std::function<double(double)> lambda = [](double) { return 0.0; };
    std::function<double(double)> lambda_dot = [](double) { return 0.0; };
    std::function<double(double)> xi1 = [](double) { return 0.0; };
    std::function<double(double)> xi1_dot = [](double) { return 0.0; };
};

struct ErrorStarOptions {
    bool include_phi0 = true;
    bool include_noise = true;
    double history_start = 0.0;
};

// E* = constant + mu' * d_mu_dot + xi' * d_xi_dot at physical points x.
struct ErrorStarParts {
    Field2 constant;
    Field2 d_mu_dot;
    Field2 d_xi_dot;

    Field2 evaluate(double mu_dot, double xi_dot) const;
};

ErrorStarParts error_star_parts(const ParamState& ps, const ModulationPath& path, const NoiseSpec* noise, double t,
                                const std::vector<double>& x, const ErrorStarOptions& opt = {});

// E* evaluated at the path's own rates, as a field of y = (x - xi)/mu on yg.
Field2 error_star(const ParamState& ps, const ModulationPath& path, const NoiseSpec* noise, double t,
                  const GridSpec& yg, const ErrorStarOptions& opt = {});

// int_{|y| <= 2R} E . Z_j dy by trapezoid, plus (when requested) a power-law
// tail beyond 2R fitted to the outermost nodes. Without the tail it is linear in E.
double project_modes(const GridSpec& yg, const Field2& E, int j, double R, bool with_tail = true);

struct ParamOdeInput {
    double kappa0 = 0.0;
    std::function<double(double)> h1 = [](double) { return 0.0; };
    std::function<double(double)> h2 = [](double) { return 0.0; };
    double d = 0.0;
    double q = 0.0;
    double t0 = 0.0;
    double t_end = 1.0;
    std::size_t rk4_steps = 2000;
};

struct ParamOdeSolution {
    std::vector<double> t;
    std::vector<double> lambda_closed;
    std::vector<double> lambda_rk4;
    std::vector<double> xi_closed;
    std::vector<double> xi_rk4;

    double max_discrepancy() const;
};

// lambda' + (10/3) kappa0 lambda = h1 with lambda = e^{-ct}[d + int_{t0}^t e^{cs} h1],
// xi' = h2 with xi(t) = q - int_t^inf h2. Both are also integrated by RK4.
ParamOdeSolution param_ode_solve(const ParamOdeInput& in);

// Smooth cutoff: 1 on [0, 1], 0 on [2, inf).
double cutoff_profile(double s);
double cutoff_profile_derivative(double s);
// eta0(|x - xi|/(R mu0))
double cutoff(double x, double xi, double R, double mu0);

struct GluingConfig {
    double t0 = 10.0;
    double rho = 0.1;
    double sigma = 0.1;
    double alpha = 0.5;
    double dt = 0.05;
    double t_end = 12.0;
    double outer_L = 50.0;
    long long outer_N = 2001;
    bool include_phi0 = true;

    // e^{rho t0}, floored at 10.
    double R() const;
};

void validate(const GluingConfig& cfg);

struct GluingProblem {
    GluingConfig cfg;
    ParamState ps;
    std::optional<NoiseSpec> noise;
    GridSpec inner;
    GridSpec outer;
};

// Without noise the scale stays fixed (kappa0 = 0).
GluingProblem make_problem(const GluingConfig& cfg, const std::optional<NoiseSpec>& noise);

struct PathSample {
    double t = 0.0;
    double lambda = 0.0;
    double lambda_dot = 0.0;
    double xi1 = 0.0;
    double xi1_dot = 0.0;
};

struct GluingState {
    TangentField phi;  // inner grid, tangent to omega(y)
    Field2 psi;        // outer grid
    double lambda = 0.0;
    double xi1 = 0.0;
    double t = 0.0;
    double tau = 0.0;
    std::vector<PathSample> path;
    double proj_z2 = 0.0;
    double proj_z3 = 0.0;
};

GluingState initial_state(const GluingProblem& P);

ModulationPath path_of(const GluingState& st);

GluingState inner_outer_step(const GluingState& st, const GluingProblem& P);

// U + Pi[Phi0 + Z* + eta phi + psi] + a U on the outer grid.
SphereMapField reconstruct(const GluingState& st, const GluingProblem& P);

}  // namespace hh
