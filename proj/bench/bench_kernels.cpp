// Timing harness for the element-wise kernels: serial variant against the
// OpenMP one across sizes on both sides of the dispatch grain, best-of-five
// wall times. Also confirms the two variants produce bitwise identical
// output, which is what lets the dispatcher pick either. Not part of the
// test suite; run it by hand when touching the hot loops.

#include <algorithm>
#include <chrono>
#include <complex>
#include <cstdio>
#include <cstring>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kge/parallel.hpp"

using namespace kge;

namespace {

using clock_type = std::chrono::steady_clock;

std::mt19937 rng(12345);

std::vector<double> random_reals(std::size_t n) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

std::vector<std::complex<double>> random_complex(std::size_t n) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<std::complex<double>> v(n);
    for (auto& x : v) x = {d(rng), d(rng)};
    return v;
}

template <typename F>
double best_ns_per_element(F&& body, std::size_t n) {
    // Aim for roughly 4M elements per measurement so small sizes loop more.
    const int reps = static_cast<int>((4u << 20) / n) + 1;
    double best = 1e300;
    for (int round = 0; round < 5; ++round) {
        const auto t0 = clock_type::now();
        for (int i = 0; i < reps; ++i) body();
        const double s = std::chrono::duration<double>(clock_type::now() - t0).count();
        best = std::min(best, s / reps);
    }
    return best * 1e9 / static_cast<double>(n);
}

template <typename T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

struct Row {
    const char* kernel;
    std::size_t n;
    double serial_ns;
    double openmp_ns;
    bool match;
};

void print_rows(const std::vector<Row>& rows) {
    std::printf("%-20s %9s %14s %14s %9s %6s\n", "kernel", "n", "serial ns/el",
                "openmp ns/el", "speedup", "match");
    for (const Row& r : rows)
        std::printf("%-20s %9zu %14.3f %14.3f %9.2f %6s\n", r.kernel, r.n, r.serial_ns,
                    r.openmp_ns, r.serial_ns / r.openmp_ns, r.match ? "yes" : "NO");
}

}  // namespace

int main() {
    std::printf("OpenMP threads: %d, dispatch grain: %zu elements\n\n", kernels::thread_count(),
                kernels::grain_size);

    const std::vector<std::size_t> sizes{1024, 4096, 16384, 65536, 262144, 1048576};
    std::vector<Row> rows;

    for (std::size_t n : sizes) {
        const std::vector<double> u = random_reals(n);
        const std::vector<double> y = random_reals(n);
        const std::vector<double> z = random_reals(n);
        std::vector<double> a(n), b(n);

        rows.push_back({"periodic_three_point", n,
                        best_ns_per_element(
                            [&] { kernels::serial::periodic_three_point(a, u, 1.0, 10.0, 1.0); },
                            n),
                        best_ns_per_element(
                            [&] { kernels::openmp::periodic_three_point(b, u, 1.0, 10.0, 1.0); },
                            n),
                        same_bits(a, b)});

        rows.push_back(
            {"power_scaled", n,
             best_ns_per_element([&] { kernels::serial::power_scaled(a, u, 3, 0.25); }, n),
             best_ns_per_element([&] { kernels::openmp::power_scaled(b, u, 3, 0.25); }, n),
             same_bits(a, b)});

        rows.push_back(
            {"linear3", n,
             best_ns_per_element([&] { kernels::serial::linear3(a, 1.0, u, 0.5, y, 0.25, z); },
                                 n),
             best_ns_per_element([&] { kernels::openmp::linear3(b, 1.0, u, 0.5, y, 0.25, z); },
                                 n),
             same_bits(a, b)});

        rows.push_back(
            {"symmetric_quotient", n,
             best_ns_per_element([&] { kernels::serial::symmetric_quotient(a, u, y, 2); }, n),
             best_ns_per_element([&] { kernels::openmp::symmetric_quotient(b, u, y, 2); }, n),
             same_bits(a, b)});

        const std::vector<std::complex<double>> un = random_complex(n);
        const std::vector<std::complex<double>> um = random_complex(n);
        const std::vector<std::complex<double>> f = random_complex(n);
        std::vector<std::complex<double>> ca(n), cb(n);

        rows.push_back(
            {"mode_update", n,
             best_ns_per_element([&] { kernels::serial::mode_update(ca, un, um, f, u, 2.0, 0.5); },
                                 n),
             best_ns_per_element([&] { kernels::openmp::mode_update(cb, un, um, f, u, 2.0, 0.5); },
                                 n),
             same_bits(ca, cb)});

        rows.push_back(
            {"oscillator_update", n,
             best_ns_per_element(
                 [&] { kernels::serial::oscillator_update(ca, un, um, f, u, y); }, n),
             best_ns_per_element(
                 [&] { kernels::openmp::oscillator_update(cb, un, um, f, u, y); }, n),
             same_bits(ca, cb)});
    }

    print_rows(rows);

    bool all_match = true;
    for (const Row& r : rows) all_match &= r.match;
    if (!all_match) {
        std::printf("\nserial and OpenMP outputs differ\n");
        return 1;
    }
    return 0;
}
