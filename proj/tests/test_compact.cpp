#include "kge/compact_operator.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "kge/fourier.hpp"

using namespace kge;

namespace {

constexpr double pi = std::numbers::pi;

GridFunction random_field(const PeriodicGrid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridFunction u(g);
    for (int j = 0; j < g.m; ++j) u[j] = dist(rng);
    return u;
}

// Dense circulant solve at m = 8, Gaussian elimination in long double.
std::array<double, 8> dense_solve8(const std::array<double, 8>& rhs) {
    constexpr int n = 8;
    long double a[n][n + 1] = {};
    for (int i = 0; i < n; ++i) {
        a[i][i] = 10.0L / 12.0L;
        a[i][(i + 1) % n] = 1.0L / 12.0L;
        a[i][(i + n - 1) % n] = 1.0L / 12.0L;
        a[i][n] = rhs[static_cast<std::size_t>(i)];
    }
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        for (int c = 0; c <= n; ++c) std::swap(a[col][c], a[pivot][c]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const long double f = a[r][col] / a[col][col];
            for (int c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::array<double, 8> x{};
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(a[i][n] / a[i][i]);
    return x;
}

}  // namespace

TEST_CASE("stencil application on an impulse") {
    PeriodicGrid g(0.0, 4.0, 4);
    CompactOperator A(g);
    GridFunction e0(g, {1.0, 0.0, 0.0, 0.0});
    GridFunction r = A.apply(e0);
    CHECK(r[0] == 10.0 / 12.0);
    CHECK(r[1] == 1.0 / 12.0);
    CHECK(r[2] == 0.0);
    CHECK(r[3] == 1.0 / 12.0);
}

TEST_CASE("symbol values and range") {
    CHECK(compact_symbol(0, 4) == doctest::Approx(1.0));
    CHECK(compact_symbol(1, 4) == doctest::Approx(10.0 / 12.0));
    CHECK(compact_symbol(2, 4) == doctest::Approx(2.0 / 3.0));
    for (int m : {8, 64, 358}) {
        for (int k = 0; k < m; ++k) {
            const double s = compact_symbol(k, m);
            CHECK(s >= 2.0 / 3.0 - 1e-15);
            CHECK(s <= 1.0 + 1e-15);
        }
    }
}

TEST_CASE("laplacian symbol matches the difference operator") {
    PeriodicGrid g(0.0, 2.0 * pi, 32);
    GridFunction u = random_field(g, 8);
    SpectralCoefficients d2 = dft(second_diff(u));
    SpectralCoefficients base = dft(u);
    for (int k = 0; k < g.m; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const double lam2 = laplacian_symbol(k, g.m, g.h);
        CHECK(std::abs(d2.c[i] + lam2 * base.c[i]) < 1e-12 * (1.0 + lam2));
    }
}

TEST_CASE("solve inverts apply") {
    for (int m : {8, 20, 64}) {
        CAPTURE(m);
        PeriodicGrid g(0.0, 2.0 * pi, m);
        CompactOperator A(g);
        GridFunction u = random_field(g, 21u + static_cast<unsigned>(m));
        GridFunction back = A.solve(A.apply(u));
        for (int j = 0; j < m; ++j) CHECK(std::abs(back[j] - u[j]) < 1e-13);
        GridFunction fwd = A.apply(A.solve(u));
        for (int j = 0; j < m; ++j) CHECK(std::abs(fwd[j] - u[j]) < 1e-13);
    }
}

TEST_CASE("solve agrees with a dense elimination") {
    PeriodicGrid g(0.0, 2.0 * pi, 8);
    CompactOperator A(g);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::array<double, 8> rhs{};
        GridFunction b(g);
        for (int j = 0; j < 8; ++j) {
            rhs[static_cast<std::size_t>(j)] = dist(rng);
            b[j] = rhs[static_cast<std::size_t>(j)];
        }
        GridFunction x = A.solve(b);
        std::array<double, 8> y = dense_solve8(rhs);
        for (int j = 0; j < 8; ++j) CHECK(std::abs(x[j] - y[static_cast<std::size_t>(j)]) < 1e-13);
    }
}

TEST_CASE("alternating vector is the worst amplification") {
    // The half-mode symbol is exactly 2/3, so inversion scales by 3/2.
    PeriodicGrid g(0.0, 2.0 * pi, 16);
    CompactOperator A(g);
    GridFunction nyq(g);
    for (int j = 0; j < g.m; ++j) nyq[j] = (j % 2 == 0) ? 1.0 : -1.0;
    GridFunction s = A.solve(nyq);
    for (int j = 0; j < g.m; ++j) CHECK(s[j] == doctest::Approx(1.5 * nyq[j]).epsilon(1e-12));
    GridFunction a = A.apply(nyq);
    for (int j = 0; j < g.m; ++j) CHECK(a[j] == doctest::Approx(2.0 / 3.0 * nyq[j]).epsilon(1e-14));
}

TEST_CASE("operator commutes with the second difference") {
    for (int m : {8, 32}) {
        CAPTURE(m);
        PeriodicGrid g(0.0, 2.0 * pi, m);
        CompactOperator A(g);
        GridFunction u = random_field(g, 55u + static_cast<unsigned>(m));
        GridFunction left = A.apply(second_diff(u));
        GridFunction right = second_diff(A.apply(u));
        const double scale = std::max(1.0, norm_linf(left));
        for (int j = 0; j < m; ++j) CHECK(std::abs(left[j] - right[j]) <= 1e-12 * scale);

        GridFunction ileft = A.solve(second_diff(u));
        GridFunction iright = second_diff(A.solve(u));
        const double iscale = std::max(1.0, norm_linf(ileft));
        for (int j = 0; j < m; ++j) CHECK(std::abs(ileft[j] - iright[j]) <= 1e-12 * iscale);
    }
}

TEST_CASE("summation by parts for the difference pair") {
    PeriodicGrid g(0.0, 2.0 * pi, 64);
    for (unsigned seed = 0; seed < 10; ++seed) {
        GridFunction u = random_field(g, 100 + seed);
        GridFunction v = random_field(g, 200 + seed);
        const double lhs = inner(second_diff(u), v);
        const double rhs = -inner(forward_diff(u), forward_diff(v));
        const double scale = std::max(1.0, std::abs(lhs));
        CHECK(std::abs(lhs - rhs) <= 1e-11 * scale);
    }
}

TEST_CASE("weighted norm equivalence") {
    for (int m : {8, 64, 256}) {
        CAPTURE(m);
        PeriodicGrid g(0.0, 2.0 * pi, m);
        CompactOperator A(g);
        for (unsigned seed = 0; seed < 5; ++seed) {
            GridFunction u = random_field(g, 300 + seed + static_cast<unsigned>(m));
            const double plain = norm_l2(u);
            const double weighted = star_norm(A, u);
            CHECK(weighted >= plain * (1.0 - 1e-12));
            CHECK(weighted <= std::sqrt(1.5) * plain * (1.0 + 1e-12));
            CHECK(star_norm_via_solve(A, u) == doctest::Approx(weighted).epsilon(1e-12));
        }
        // The alternating vector hits the upper constant sqrt(6)/2.
        GridFunction nyq(g);
        for (int j = 0; j < g.m; ++j) nyq[j] = (j % 2 == 0) ? 1.0 : -1.0;
        CHECK(star_norm(A, nyq) ==
              doctest::Approx(0.5 * std::sqrt(6.0) * norm_l2(nyq)).epsilon(1e-12));
    }
}

TEST_CASE("operator rejects foreign grids") {
    PeriodicGrid g(0.0, 2.0 * pi, 8);
    PeriodicGrid other(0.0, 1.0, 8);
    CompactOperator A(g);
    GridFunction w(other);
    CHECK_THROWS_AS(A.apply(w), GridMismatchError);
    CHECK_THROWS_AS(A.solve(w), GridMismatchError);
    CHECK_THROWS_AS(star_norm(A, w), GridMismatchError);
}
