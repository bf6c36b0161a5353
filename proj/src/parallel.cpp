#include "kge/parallel.hpp"

#include <atomic>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kge::kernels {

namespace {

std::atomic<bool> g_parallel{
#ifdef _OPENMP
    true
#else
    false
#endif
};

// Per-element expressions live here so both variants inline the exact same
// arithmetic. Do not duplicate these into the loops.

inline double three_point_at(std::span<const double> u, std::size_t j,
                             std::size_t n, double wl, double wc, double wr) {
    const std::size_t jm = (j == 0) ? n - 1 : j - 1;
    const std::size_t jp = (j + 1 == n) ? 0 : j + 1;
    return wl * u[jm] + wc * u[j] + wr * u[jp];
}

inline double quotient_at(double v, double w, int p) {
    // Difference quotient of u^{p+2}/(p+2). The equal-argument case returns
    // the power itself so the algebraic identity G(v,v) = v^{p+1} is exact.
    if (v == w) return pow_int(v, p + 1);
    double s = 0.0;
    for (int i = 0; i <= p + 1; ++i) s += pow_int(v, i) * pow_int(w, p + 1 - i);
    return s / static_cast<double>(p + 2);
}

inline std::complex<double> mode_update_at(std::complex<double> un,
                                           std::complex<double> um,
                                           std::complex<double> f,
                                           double inv_m, double a, double b) {
    return std::complex<double>(inv_m * (a * un.real() - b * f.real()) - um.real(),
                                inv_m * (a * un.imag() - b * f.imag()) - um.imag());
}

inline std::complex<double> oscillator_update_at(std::complex<double> un,
                                                 std::complex<double> um,
                                                 std::complex<double> f,
                                                 double two_cos, double filt) {
    return std::complex<double>(two_cos * un.real() - um.real() - filt * f.real(),
                                two_cos * un.imag() - um.imag() - filt * f.imag());
}

}  // namespace

void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace serial {

void periodic_three_point(std::span<double> out, std::span<const double> u,
                          double wl, double wc, double wr) {
    const std::size_t n = u.size();
    for (std::size_t j = 0; j < n; ++j)
        out[j] = three_point_at(u, j, n, wl, wc, wr);
}

void power_scaled(std::span<double> out, std::span<const double> u,
                  int power, double coef) {
    const std::size_t n = u.size();
    for (std::size_t j = 0; j < n; ++j) out[j] = coef * pow_int(u[j], power);
}

void linear2(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y) {
    const std::size_t n = x.size();
    for (std::size_t j = 0; j < n; ++j) out[j] = a * x[j] + b * y[j];
}

void linear3(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y,
             double c, std::span<const double> z) {
    const std::size_t n = x.size();
    for (std::size_t j = 0; j < n; ++j) out[j] = a * x[j] + b * y[j] + c * z[j];
}

void symmetric_quotient(std::span<double> out, std::span<const double> v,
                        std::span<const double> w, int p) {
    const std::size_t n = v.size();
    for (std::size_t j = 0; j < n; ++j) out[j] = quotient_at(v[j], w[j], p);
}

void mode_update(std::span<std::complex<double>> out,
                 std::span<const std::complex<double>> un,
                 std::span<const std::complex<double>> um,
                 std::span<const std::complex<double>> f,
                 std::span<const double> inv_m, double a, double b) {
    const std::size_t n = un.size();
    for (std::size_t l = 0; l < n; ++l)
        out[l] = mode_update_at(un[l], um[l], f[l], inv_m[l], a, b);
}

void oscillator_update(std::span<std::complex<double>> out,
                       std::span<const std::complex<double>> un,
                       std::span<const std::complex<double>> um,
                       std::span<const std::complex<double>> f,
                       std::span<const double> two_cos,
                       std::span<const double> filt) {
    const std::size_t n = un.size();
    for (std::size_t l = 0; l < n; ++l)
        out[l] = oscillator_update_at(un[l], um[l], f[l], two_cos[l], filt[l]);
}

}  // namespace serial

namespace openmp {

// Without OpenMP these compile to the same serial loops.

void periodic_three_point(std::span<double> out, std::span<const double> u,
                          double wl, double wc, double wr) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j)
        out[j] = three_point_at(u, static_cast<std::size_t>(j),
                                static_cast<std::size_t>(n), wl, wc, wr);
}

void power_scaled(std::span<double> out, std::span<const double> u,
                  int power, double coef) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = coef * pow_int(u[j], power);
}

void linear2(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = a * x[j] + b * y[j];
}

void linear3(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y,
             double c, std::span<const double> z) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j)
        out[j] = a * x[j] + b * y[j] + c * z[j];
}

void symmetric_quotient(std::span<double> out, std::span<const double> v,
                        std::span<const double> w, int p) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = quotient_at(v[j], w[j], p);
}

void mode_update(std::span<std::complex<double>> out,
                 std::span<const std::complex<double>> un,
                 std::span<const std::complex<double>> um,
                 std::span<const std::complex<double>> f,
                 std::span<const double> inv_m, double a, double b) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(un.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t l = 0; l < n; ++l)
        out[l] = mode_update_at(un[l], um[l], f[l], inv_m[l], a, b);
}

void oscillator_update(std::span<std::complex<double>> out,
                       std::span<const std::complex<double>> un,
                       std::span<const std::complex<double>> um,
                       std::span<const std::complex<double>> f,
                       std::span<const double> two_cos,
                       std::span<const double> filt) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(un.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t l = 0; l < n; ++l)
        out[l] = oscillator_update_at(un[l], um[l], f[l], two_cos[l], filt[l]);
}

}  // namespace openmp

namespace {
inline bool go_parallel(std::size_t n) {
    return parallel_enabled() && n >= grain_size;
}
}  // namespace

void periodic_three_point(std::span<double> out, std::span<const double> u,
                          double wl, double wc, double wr) {
    if (go_parallel(u.size()))
        openmp::periodic_three_point(out, u, wl, wc, wr);
    else
        serial::periodic_three_point(out, u, wl, wc, wr);
}

void power_scaled(std::span<double> out, std::span<const double> u,
                  int power, double coef) {
    if (go_parallel(u.size()))
        openmp::power_scaled(out, u, power, coef);
    else
        serial::power_scaled(out, u, power, coef);
}

void linear2(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y) {
    if (go_parallel(x.size()))
        openmp::linear2(out, a, x, b, y);
    else
        serial::linear2(out, a, x, b, y);
}

void linear3(std::span<double> out, double a, std::span<const double> x,
             double b, std::span<const double> y,
             double c, std::span<const double> z) {
    if (go_parallel(x.size()))
        openmp::linear3(out, a, x, b, y, c, z);
    else
        serial::linear3(out, a, x, b, y, c, z);
}

void symmetric_quotient(std::span<double> out, std::span<const double> v,
                        std::span<const double> w, int p) {
    if (go_parallel(v.size()))
        openmp::symmetric_quotient(out, v, w, p);
    else
        serial::symmetric_quotient(out, v, w, p);
}

void mode_update(std::span<std::complex<double>> out,
                 std::span<const std::complex<double>> un,
                 std::span<const std::complex<double>> um,
                 std::span<const std::complex<double>> f,
                 std::span<const double> inv_m, double a, double b) {
    if (go_parallel(un.size()))
        openmp::mode_update(out, un, um, f, inv_m, a, b);
    else
        serial::mode_update(out, un, um, f, inv_m, a, b);
}

void oscillator_update(std::span<std::complex<double>> out,
                       std::span<const std::complex<double>> un,
                       std::span<const std::complex<double>> um,
                       std::span<const std::complex<double>> f,
                       std::span<const double> two_cos,
                       std::span<const double> filt) {
    if (go_parallel(un.size()))
        openmp::oscillator_update(out, un, um, f, two_cos, filt);
    else
        serial::oscillator_update(out, un, um, f, two_cos, filt);
}

}  // namespace kge::kernels
