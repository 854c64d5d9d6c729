#pragma once

#include <functional>
#include <vector>

namespace hh {

using RealFn = std::function<double(double)>;

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 0.0;
    int max_depth = 48;
};

// Adaptive Gauss-Legendre: a 15-point panel is accepted when it agrees with
// the sum over its two halves.
double integrate(const RealFn& f, double a, double b, QuadratureOptions opt = {});

// Integral over the real line through s = tan(theta); optional breakpoints
// (in s) split the theta interval.
double integrate_real_line(const RealFn& f, QuadratureOptions opt = {},
                           const std::vector<double>& breaks = {});

// Integral over [a, infinity) through s = a + tan(theta).
double integrate_to_infinity(const RealFn& f, double a, QuadratureOptions opt = {});

// Integral over [0, b] in the compactified variable s = tan(theta); finite
// for b = infinity.
double integrate_compactified(const RealFn& f, double b, QuadratureOptions opt = {});

// Fixed n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

}  // namespace hh
