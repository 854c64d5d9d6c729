#pragma once

#include "halfharmonic/grid.hpp"
#include "halfharmonic/profiles.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace hh {

// (1/2) int v . (-Delta)^{1/2} v with v = u minus its fitted far-field value.
double energy(const GridSpec& g, const Field2& u);
double energy(const SphereMapField& u);

// Center from the minimum of u2, scale from the zero crossings of u2.
BubbleParams extract_bubble(const SphereMapField& u);

struct DecayFit {
    double kappa = 0.0;
    double r_squared = 0.0;
};

// Least squares of log mu against t; mu ~ exp(-kappa t).
DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series);

// One time slice of a space-time field (scalar fields leave b empty).
struct SpaceTimeSlice {
    double t = 0.0;
    double tau = 0.0;
    std::vector<double> y;
    std::vector<double> a;
    std::vector<double> b;
};

enum class NormKind {
    // least M with |f| <= M mu0^{nu-1}/(1 + |y|^{1+alpha}); spatial = 1+alpha
    source,
    // least M with (1+|y|)|phi'| chi_{|y|<=2R} + |phi| <= M mu0^sigma/(1+|y|^alpha)
    inner_field,
    // sup tau^nu (1+|y|^a)(|h| + (1+|y|^eta) chi [h]_{eta, B_2R})
    inner_holder,
    // sup mu0^{-delta} |h(t)|
    time_weight,
};

struct WeightedNormSpec {
    NormKind kind = NormKind::source;
    double spatial = 1.0;
    double time = 0.0;
    double holder = 0.0;  // eta in (1/2, 1) for inner_holder
    double R = 10.0;
    std::function<double(double)> mu0 = [](double) { return 1.0; };
};

void validate(const WeightedNormSpec& spec);
double weighted_norm(const std::vector<SpaceTimeSlice>& f, const WeightedNormSpec& spec);

// Largest |h(y1) - h(y2)|/|y1 - y2|^eta over pairs in B_R with |y1 - y2| <= 1.
double holder_seminorm(const SpaceTimeSlice& s, double eta, double R);

}  // namespace hh
