#pragma once

#include "halfharmonic/grid.hpp"
#include "halfharmonic/nonlocal.hpp"
#include "halfharmonic/profiles.hpp"

#include <functional>

namespace hh {

// Linearization around U = omega((x - xi)/mu) on a grid.
struct LinearizedAt {
    BubbleParams base;
    GridSpec grid;

    SphereMapField bubble() const;
    // 2/(mu (1 + y^2)), the tension density of U.
    std::vector<double> tension() const;
};

struct ScalarReduced {
    ScalarField v;
};

using VectorFn = std::function<Vec2(double)>;

TangentField project_tangent(const LinearizedAt& L, const Field2& phi);

// a = sqrt(1 - |Pi phi|^2) - 1, so that |U + Pi phi + a U| = 1.
ScalarField normal_correction(const TangentField& phit);

// -(-Delta)^{1/2} phi + T(U) phi + (sum_i D(U_i, phi_i)) U.
Field2 linearized_vector(const LinearizedAt& L, const TangentField& phit, Backend b = Backend::spectral);

// The four weighted difference-quotient integrals multiplying Z2 and Z3.
struct CoefficientIntegrals {
    double a_z2 = 0.0;  // weight 2s/(s^2+1)^2 on the first component
    double b_z2 = 0.0;  // weight (s^2-1)/(s^2+1)^2 on the second
    double a_z3 = 0.0;  // weight 2s^2/(s^2+1)^2
    double b_z3 = 0.0;  // weight s(s^2-1)/(s^2+1)^2
};

// (1/pi) int (f(s) - f(x))/(s - x) w((s - xi)/mu) ds for each weight, with f
// given in closed form.
CoefficientIntegrals coefficient_integrals(const BubbleParams& base, const VectorFn& phi, double x,
                                           double abs_tol = 1e-10);

// mu^{-1} [(a_z2 + b_z2) Z2(y) + (a_z3 + b_z3) Z3(y)].
Vec2 reduced_linear_part(const BubbleParams& base, const VectorFn& phi, double x, double abs_tol = 1e-10);

struct DecompositionResult {
    double sup_difference = 0.0;
    Field2 direct;
    Field2 decomposed;
    std::vector<std::size_t> nodes;  // grid indices where the pipelines were compared
};

// L_U[Pi phi] computed directly and as Pi[-(-Delta)^{1/2} phi] + reduced part,
// compared on nodes with |x - xi| <= window.
DecompositionResult decomposition_check(const LinearizedAt& L, const VectorFn& phi, double window = 25.0);

// N_U(Pi phi) including the -a U_t term.
Field2 nonlinear_remainder(const LinearizedAt& L, const TangentField& phit, const Field2& U_t);

// -(-Delta)^{1/2} v + 2/(1+y^2) v - (2/(pi (1+y^2))) int v/(1+s^2) ds.
ScalarReduced scalar_reduced_apply(const ScalarReduced& v);

// int v/(1+s^2) ds with the tail of v extended analytically.
double lorentz_moment(const ScalarField& v);

}  // namespace hh
