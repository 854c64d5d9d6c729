#pragma once

#include "halfharmonic/grid.hpp"

#include <functional>
#include <span>
#include <vector>

namespace hh {

enum class Backend { spectral, principal_value };

// Decomposition used by every spectral operator:
//   f = c0 + c1 x/(x^2+b^2) + c3 x/(x^2+b^2)^2 + m b/(pi (x^2+b^2)) + r
// where (c0, c1, c3) is the fitted tail and m the mass of f minus those
// pieces. The odd x/(x^2+b^2)^2 term keeps the residual from jumping at the
// periodic seam. The operators act exactly on the model pieces and through an
// FFT multiplier on the residual r.
struct TailSplit {
    double c0 = 0.0;
    double c1 = 0.0;
    double c3 = 0.0;
    double mass = 0.0;
    std::vector<double> residual;
};

inline constexpr double tail_width = 1.0;

TailSplit split_tail(const GridSpec& g, std::span<const double> f);

// (-Delta)^{1/2}
std::vector<double> half_laplacian(const GridSpec& g, std::span<const double> f,
                                   Backend b = Backend::spectral);
ScalarField half_laplacian(const ScalarField& f, Backend b = Backend::spectral);

// Convolution with P_t(x) = t/(pi (t^2+x^2)), i.e. exp(-t (-Delta)^{1/2}).
std::vector<double> poisson_convolve(const GridSpec& g, std::span<const double> f, double t);
ScalarField poisson_convolve(const ScalarField& f, double t);

// int_0^t P_s * f ds, the multiplier (1 - exp(-t|k|))/|k|.
std::vector<double> semigroup_integral(const GridSpec& g, std::span<const double> f, double t);

// (1/pi) int (a(x)-a(s))(b(x)-b(s))/(x-s)^2 ds = a La b + b La a - La(ab).
std::vector<double> bilinear_form(const GridSpec& g, std::span<const double> a, std::span<const double> b,
                                  Backend be = Backend::spectral);

// (1/2pi) int |u(x)-u(s)|^2/(x-s)^2 ds
ScalarField tension_density(const SphereMapField& u, Backend b = Backend::spectral);
std::vector<double> tension_density(const GridSpec& g, std::span<const double> u1,
                                    std::span<const double> u2, Backend b = Backend::spectral);

// Source f(x, s) of psi_t = -(-Delta)^{1/2} psi + f on the window [t0, t1].
struct DuhamelSource {
    GridSpec grid;
    std::function<double(double x, double s)> f;
    double t0 = 0.0;
    double t1 = 0.0;
};

// Mild solution at time t with zero datum at t0.
ScalarField duhamel_solve(const DuhamelSource& src, double t);

// x/(x^2+a^2); its harmonic extension in a solves d_a k = -(-Delta)^{1/2} k.
double extension_kernel(double x, double a);

// Centered first and second differences (one-sided at the ends).
std::vector<double> derivative(const GridSpec& g, std::span<const double> f);
std::vector<double> second_derivative(const GridSpec& g, std::span<const double> f);

// Trapezoid rule over the grid.
double trapezoid(const GridSpec& g, std::span<const double> f);

}  // namespace hh
