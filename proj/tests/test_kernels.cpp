#include "kge/parallel.hpp"

#include <doctest.h>

#include <complex>
#include <random>
#include <vector>

using namespace kge;

namespace {

std::vector<double> random_values(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

std::vector<std::complex<double>> random_complex(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<std::complex<double>> v(n);
    for (auto& x : v) x = {dist(rng), dist(rng)};
    return v;
}

}  // namespace

TEST_CASE("integer power helper") {
    CHECK(kernels::pow_int(2.0, 10) == 1024.0);
    CHECK(kernels::pow_int(7.5, 0) == 1.0);
    CHECK(kernels::pow_int(-3.0, 3) == -27.0);
    CHECK(kernels::pow_int(0.5, 2) == 0.25);
}

TEST_CASE("quotient kernel hand values") {
    std::vector<double> out(3), v{3.0, 2.0, 1.5}, w{3.0, 0.0, 1.5};
    kernels::serial::symmetric_quotient(out, v, w, 2);
    CHECK(out[0] == 27.0);            // equal arguments collapse to v^(p+1)
    CHECK(out[1] == doctest::Approx(2.0));  // (8+0+0+0)/4
    CHECK(out[2] == kernels::pow_int(1.5, 3));
}

TEST_CASE("quotient kernel is symmetric in its arguments") {
    const std::size_t n = 257;
    std::vector<double> v = random_values(n, 1), w = random_values(n, 2);
    std::vector<double> a(n), b(n);
    for (int p : {1, 2, 3}) {
        kernels::serial::symmetric_quotient(a, v, w, p);
        kernels::serial::symmetric_quotient(b, w, v, p);
        for (std::size_t j = 0; j < n; ++j)
            CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-14));
    }
}

TEST_CASE("mode update hand value") {
    std::vector<std::complex<double>> out(1), un{{1.0, 2.0}}, um{{0.0, 1.0}}, f{{0.5, 0.0}};
    std::vector<double> inv{2.0};
    kernels::serial::mode_update(out, un, um, f, inv, 3.0, 1.0);
    // 2*(3*(1+2i) - 0.5) - i = 5 + 11i
    CHECK(out[0].real() == doctest::Approx(5.0));
    CHECK(out[0].imag() == doctest::Approx(11.0));
}

TEST_CASE("oscillator update hand value") {
    std::vector<std::complex<double>> out(1), un{{2.0, 0.0}}, um{{1.0, -1.0}}, f{{0.5, 0.5}};
    std::vector<double> two_cos{1.5}, filt{0.2};
    kernels::serial::oscillator_update(out, un, um, f, two_cos, filt);
    // 1.5*2 - (1-i) - 0.2*(0.5+0.5i) = 1.9 + 0.9i
    CHECK(out[0].real() == doctest::Approx(1.9));
    CHECK(out[0].imag() == doctest::Approx(0.9));
}

TEST_CASE("serial and parallel variants agree bitwise") {
    // One size below the dispatch grain and one well above it.
    for (std::size_t n : {513u, 3u * static_cast<unsigned>(kernels::grain_size)}) {
        CAPTURE(n);
        std::vector<double> u = random_values(n, 10), y = random_values(n, 11),
                            z = random_values(n, 12);
        std::vector<double> a(n), b(n);

        kernels::serial::periodic_three_point(a, u, 0.25, -0.5, 0.25);
        kernels::openmp::periodic_three_point(b, u, 0.25, -0.5, 0.25);
        CHECK(a == b);

        kernels::serial::power_scaled(a, u, 3, 0.7);
        kernels::openmp::power_scaled(b, u, 3, 0.7);
        CHECK(a == b);

        kernels::serial::linear2(a, 1.5, u, -2.0, y);
        kernels::openmp::linear2(b, 1.5, u, -2.0, y);
        CHECK(a == b);

        kernels::serial::linear3(a, 1.5, u, -2.0, y, 0.3, z);
        kernels::openmp::linear3(b, 1.5, u, -2.0, y, 0.3, z);
        CHECK(a == b);

        kernels::serial::symmetric_quotient(a, u, y, 2);
        kernels::openmp::symmetric_quotient(b, u, y, 2);
        CHECK(a == b);

        std::vector<std::complex<double>> cu = random_complex(n, 20), cm = random_complex(n, 21),
                                          cf = random_complex(n, 22);
        std::vector<double> inv = random_values(n, 23), filt = random_values(n, 24);
        std::vector<std::complex<double>> ca(n), cb(n);
        kernels::serial::mode_update(ca, cu, cm, cf, inv, 2.5, 0.5);
        kernels::openmp::mode_update(cb, cu, cm, cf, inv, 2.5, 0.5);
        CHECK(ca == cb);

        kernels::serial::oscillator_update(ca, cu, cm, cf, inv, filt);
        kernels::openmp::oscillator_update(cb, cu, cm, cf, inv, filt);
        CHECK(ca == cb);
    }
}

TEST_CASE("dispatch mode never changes results") {
    const bool was = kernels::parallel_enabled();
    const std::size_t n = 2 * kernels::grain_size;
    std::vector<double> u = random_values(n, 30), y = random_values(n, 31);
    std::vector<double> on(n), off(n);

    kernels::set_parallel(true);
    kernels::periodic_three_point(on, u, 1.0, -2.0, 1.0);
    kernels::set_parallel(false);
    kernels::periodic_three_point(off, u, 1.0, -2.0, 1.0);
    CHECK(on == off);

    kernels::set_parallel(true);
    kernels::linear2(on, 0.5, u, 0.5, y);
    kernels::set_parallel(false);
    kernels::linear2(off, 0.5, u, 0.5, y);
    CHECK(on == off);

    kernels::set_parallel(was);
}

TEST_CASE("three point kernel wraps its ends") {
    std::vector<double> u{1.0, 2.0, 3.0, 4.0}, out(4);
    kernels::serial::periodic_three_point(out, u, 1.0, 0.0, 0.0);  // left neighbour only
    CHECK(out[0] == 4.0);
    CHECK(out[1] == 1.0);
    CHECK(out[3] == 3.0);
    kernels::serial::periodic_three_point(out, u, 0.0, 0.0, 1.0);  // right neighbour only
    CHECK(out[0] == 2.0);
    CHECK(out[3] == 1.0);
}
