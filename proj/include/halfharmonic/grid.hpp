#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace hh {

// Uniform symmetric grid on [-L, L]. The spectral backend treats the N
// nodes as one period of length N*h.
struct GridSpec {
    double L = 0.0;
    std::size_t N = 0;
    double h = 0.0;
    bool periodic = true;

    double x(std::size_t i) const { return -L + h * static_cast<double>(i); }
    std::vector<double> points() const;
    bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(double L, long long N);

// Far-field model f(x) ~ c0 + c1/x.
struct Tail {
    double c0 = 0.0;
    double c1 = 0.0;
};

// Least squares over the outermost 10% of nodes (|x| >= 0.9 L).
Tail fit_tail(const GridSpec& g, std::span<const double> f);

struct ScalarField {
    GridSpec grid;
    std::vector<double> values;
    Tail tail;

    ScalarField() = default;
    ScalarField(const GridSpec& g, std::vector<double> v);
};

ScalarField sample(const std::function<double(double)>& f, const GridSpec& g);

// Unconstrained pair of real samples (vector-valued fields in R^2).
struct Field2 {
    std::vector<double> a;
    std::vector<double> b;

    Field2() = default;
    explicit Field2(std::size_t n) : a(n, 0.0), b(n, 0.0) {}
    Field2(std::vector<double> a_, std::vector<double> b_) : a(std::move(a_)), b(std::move(b_)) {}
    std::size_t size() const { return a.size(); }
};

Field2 sample2(const std::function<void(double, double&, double&)>& f, const GridSpec& g);
double sup_norm(std::span<const double> v);
double sup_norm(const Field2& v);
double sup_diff(const Field2& u, const Field2& v);

struct SphereMapField {
    GridSpec grid;
    std::vector<double> u1;
    std::vector<double> u2;

    SphereMapField() = default;
    // Rejects |u| != 1 beyond 1e-12 unless renormalize is set.
    SphereMapField(const GridSpec& g, std::vector<double> a, std::vector<double> b,
                   bool renormalize = false);
    Field2 as_field() const { return Field2(u1, u2); }
};

SphereMapField sample_map(const std::function<void(double, double&, double&)>& f,
                          const GridSpec& g, bool renormalize = false);

struct TangentField {
    GridSpec grid;
    std::vector<double> v1;
    std::vector<double> v2;
    SphereMapField base;

    TangentField() = default;
    // Rejects |v.u| > 1e-10.
    TangentField(const SphereMapField& base_, std::vector<double> a, std::vector<double> b);
    Field2 as_field() const { return Field2(v1, v2); }
};

void write_csv(std::ostream& os, const ScalarField& f);
void write_csv(std::ostream& os, const SphereMapField& u);
void write_csv(std::ostream& os, const GridSpec& g, const Field2& v);

}  // namespace hh
