#pragma once

#include <complex>
#include <cstddef>
#include <span>

// Element-wise hot loops, each in a serial and an OpenMP variant. The two
// variants run identical per-element expressions, so results are bitwise
// equal regardless of thread count; tests compare them directly. Dispatch
// picks the OpenMP path only above a grain size, small arrays stay serial.
//
// Reductions (norms, inner products, energy sums) are NOT here: they
// accumulate serially in long double so that results do not depend on the
// number of threads. See grid.cpp.

namespace kge::kernels {

/// Arrays shorter than this run serially even when parallel dispatch is on.
inline constexpr std::size_t grain_size = 4096;

/// Global toggle for the dispatching wrappers. Defaults to on when built
/// with OpenMP. Thread-safe to read, set once at startup.
void set_parallel(bool on);
bool parallel_enabled();

/// Number of OpenMP threads the parallel variants will use (1 without OpenMP).
int thread_count();

namespace serial {

/// out[j] = wl*u[j-1] + wc*u[j] + wr*u[j+1], indices wrapping periodically.
void periodic_three_point(std::span<double> out, std::span<const double> u,
                          double wl, double wc, double wr);

/// out[j] = coef * u[j]^power  (integer power, repeated multiplication).
void power_scaled(std::span<double> out, std::span<const double> u,
                  int power, double coef);

/// out[j] = a*x[j] + b*y[j].
void linear2(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y);

/// out[j] = a*x[j] + b*y[j] + c*z[j].
void linear3(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y,
             double c, std::span<const double> z);

/// out[j] = (1/(p+2)) * sum_{i=0..p+1} v[j]^i w[j]^{p+1-i}.
/// Difference quotient of F(u) = u^{p+2}/(p+2); equals v^{p+1} when w == v.
void symmetric_quotient(std::span<double> out, std::span<const double> v,
                        std::span<const double> w, int p);

/// Per-mode update shared by both compact schemes:
/// out[l] = inv_m[l]*(a*un[l] - b*f[l]) - um[l].
void mode_update(std::span<std::complex<double>> out,
                 std::span<const std::complex<double>> un,
                 std::span<const std::complex<double>> um,
                 std::span<const std::complex<double>> f,
                 std::span<const double> inv_m, double a, double b);

/// Trigonometric two-step recurrence update:
/// out[l] = two_cos[l]*un[l] - um[l] - filt[l]*f[l].
void oscillator_update(std::span<std::complex<double>> out,
                       std::span<const std::complex<double>> un,
                       std::span<const std::complex<double>> um,
                       std::span<const std::complex<double>> f,
                       std::span<const double> two_cos,
                       std::span<const double> filt);

}  // namespace serial

namespace openmp {

// Same contracts as serial::, parallelised with OpenMP when available.

void periodic_three_point(std::span<double> out, std::span<const double> u,
                          double wl, double wc, double wr);
void power_scaled(std::span<double> out, std::span<const double> u,
                  int power, double coef);
void linear2(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y);
void linear3(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y,
             double c, std::span<const double> z);
void symmetric_quotient(std::span<double> out, std::span<const double> v,
                        std::span<const double> w, int p);
void mode_update(std::span<std::complex<double>> out,
                 std::span<const std::complex<double>> un,
                 std::span<const std::complex<double>> um,
                 std::span<const std::complex<double>> f,
                 std::span<const double> inv_m, double a, double b);
void oscillator_update(std::span<std::complex<double>> out,
                       std::span<const std::complex<double>> un,
                       std::span<const std::complex<double>> um,
                       std::span<const std::complex<double>> f,
                       std::span<const double> two_cos,
                       std::span<const double> filt);

}  // namespace openmp

// Dispatching wrappers used by the solver code.

void periodic_three_point(std::span<double> out, std::span<const double> u,
                          double wl, double wc, double wr);
void power_scaled(std::span<double> out, std::span<const double> u,
                  int power, double coef);
void linear2(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y);
void linear3(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y,
             double c, std::span<const double> z);
void symmetric_quotient(std::span<double> out, std::span<const double> v,
                        std::span<const double> w, int p);
void mode_update(std::span<std::complex<double>> out,
                 std::span<const std::complex<double>> un,
                 std::span<const std::complex<double>> um,
                 std::span<const std::complex<double>> f,
                 std::span<const double> inv_m, double a, double b);
void oscillator_update(std::span<std::complex<double>> out,
                       std::span<const std::complex<double>> un,
                       std::span<const std::complex<double>> um,
                       std::span<const std::complex<double>> f,
                       std::span<const double> two_cos,
                       std::span<const double> filt);

/// x^n for small non-negative integer n, by repeated multiplication in a
/// fixed order so every call site agrees bitwise.
inline double pow_int(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

}  // namespace kge::kernels
