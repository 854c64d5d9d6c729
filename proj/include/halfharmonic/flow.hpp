#pragma once

#include "halfharmonic/grid.hpp"
#include "halfharmonic/nonlocal.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace hh {

enum class Scheme {
    // exact semigroup on the half-Laplacian, exponential Euler on the tension term
    semi_implicit_spectral,
    // forward Euler with the quadrature backend
    explicit_pv,
};

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

struct FlowConfig {
    double dt = 0.0;  // 0 selects 0.25 h
    double t_end = 1.0;
    Scheme scheme = Scheme::semi_implicit_spectral;
    bool renormalize = true;
    std::size_t stride = 1;  // steps between recorded samples
    bool keep_states = true;
};

void validate(const FlowConfig& cfg);
double effective_dt(const FlowConfig& cfg, const GridSpec& g);

// -(-Delta)^{1/2} u + T(u) u
Field2 rhs(const SphereMapField& u, Backend b = Backend::spectral);

SphereMapField step(const SphereMapField& u, const FlowConfig& cfg);

struct FlowSample {
    double t = 0.0;
    double energy = 0.0;
    double mu = 0.0;  // NaN when no bubble is detected
    double xi = 0.0;
    double sup_norm_deviation = 0.0;  // sup |u - U_{mu,xi}|, or sup |u - omega_inf| without a bubble
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SphereMapField> states;
    std::vector<FlowSample> diagnostics;
};

FlowSample measure(const SphereMapField& u, double t);

// Called on every recorded sample, in order.
using FlowObserver = std::function<void(const FlowSample&, const SphereMapField&)>;

Trajectory run_flow(const SphereMapField& u0, const FlowConfig& cfg, const FlowObserver& observer = {});

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const FlowSample& s);
void write_csv(std::ostream& os, const Trajectory& tr);

}  // namespace hh
