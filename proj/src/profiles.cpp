#include "halfharmonic/profiles.hpp"

#include "halfharmonic/errors.hpp"

#include <cmath>
#include <complex>

namespace hh {

Vec2 omega(double x) {
    if (std::isinf(x)) return omega_infinity;
    const double d = x * x + 1.0;
    return {2.0 * x / d, (x * x - 1.0) / d};
}

Vec2 scaled_bubble(const BubbleParams& p, double x) {
    if (!(p.mu > 0.0)) throw InvalidArgument("scaled_bubble: mu must be positive");
    return omega((x - p.xi) / p.mu);
}

Vec2 kernel_Z(int j, double y) {
    const double d = y * y + 1.0;
    switch (j) {
        case 1:
            return {(1.0 - y * y) / d, 2.0 * y / d};
        case 2:
            return {2.0 * (y * y - 1.0) / (d * d), -4.0 * y / (d * d)};
        case 3:
            return {2.0 * y * (y * y - 1.0) / (d * d), -4.0 * y * y / (d * d)};
        default:
            throw InvalidArgument("kernel_Z: j must be 1, 2 or 3");
    }
}

void validate(const MultiBubble& mb) {
    if (mb.bubbles.empty()) throw InvalidArgument("multi_bubble: no bubbles");
    for (const auto& b : mb.bubbles)
        if (!(b.mu > 0.0)) throw InvalidArgument("multi_bubble: mu must be positive");
    for (std::size_t i = 0; i < mb.bubbles.size(); ++i)
        for (std::size_t j = i + 1; j < mb.bubbles.size(); ++j) {
            const auto& p = mb.bubbles[i];
            const auto& q = mb.bubbles[j];
            if (!(std::abs(p.xi - q.xi) > 10.0 * (p.mu + q.mu)))
                throw InvalidArgument("multi_bubble: bubbles too close");
        }
}

Vec2 multi_bubble(const MultiBubble& mb, double x) {
    validate(mb);
    Vec2 u = omega_infinity;
    for (const auto& p : mb.bubbles) {
        const Vec2 w = scaled_bubble(p, x);
        u.a += w.a - omega_infinity.a;
        u.b += w.b - omega_infinity.b;
    }
    return u;
}

void validate(const MobiusSpec& m) {
    if (m.degree < 1) throw InvalidArgument("mobius: degree must be at least 1");
    if (m.scales.size() != static_cast<std::size_t>(m.degree) || m.centers.size() != m.scales.size())
        throw InvalidArgument("mobius: need one (scale, center) pair per degree");
    for (double l : m.scales)
        if (!(l > 0.0)) throw InvalidArgument("mobius: scales must be positive");
}

Vec2 mobius_trace(const MobiusSpec& m, double x) {
    validate(m);
    const std::complex<double> I(0.0, 1.0);
    std::complex<double> z = std::polar(1.0, m.phase);
    for (int k = 0; k < m.degree; ++k) {
        const double s = m.scales[k] * (x - m.centers[k]);
        z *= (s - I) / (s + I);
    }
    z /= std::abs(z);
    return {z.real(), z.imag()};
}

double tension_coeff_omega(double y) { return 2.0 / (1.0 + y * y); }

}  // namespace hh
