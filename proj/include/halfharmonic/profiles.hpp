#pragma once

#include <vector>

namespace hh {

struct Vec2 {
    double a = 0.0;
    double b = 0.0;
};

inline double dot(Vec2 u, Vec2 v) { return u.a * v.a + u.b * v.b; }

struct BubbleParams {
    double mu = 1.0;
    double xi = 0.0;
};

struct MultiBubble {
    std::vector<BubbleParams> bubbles;
};

struct MobiusSpec {
    int degree = 1;
    double phase = 0.0;
    std::vector<double> scales;
    std::vector<double> centers;
};

constexpr Vec2 omega_infinity{0.0, 1.0};

// (2x/(x^2+1), (x^2-1)/(x^2+1))
Vec2 omega(double x);
Vec2 scaled_bubble(const BubbleParams& p, double x);

// Z1 = (-w2, w1), Z2 = -w', Z3 = y Z2.
Vec2 kernel_Z(int j, double y);

// omega_inf + sum_j (omega((x - xi_j)/mu_j) - omega_inf); not unit length.
Vec2 multi_bubble(const MultiBubble& mb, double x);
void validate(const MultiBubble& mb);

// exp(i phase) prod_k (lambda_k (x - a_k) - i)/(lambda_k (x - a_k) + i) as (Re, Im).
Vec2 mobius_trace(const MobiusSpec& m, double x);
void validate(const MobiusSpec& m);

// 2/(1+y^2): the tension density of omega.
double tension_coeff_omega(double y);

}  // namespace hh
