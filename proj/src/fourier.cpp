#include "kge/fourier.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <unordered_map>

namespace kge {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

struct Plan {
    int n = 0;
    bool pow2 = false;
    // radix-2 pieces
    std::vector<int> bitrev;
    std::vector<std::complex<double>> w;  // exp(-2 pi i k / n), k < n/2
    // Bluestein pieces
    int pad = 0;
    std::vector<std::complex<double>> chirp;  // exp(-i pi j^2 / n), j < n
    std::vector<std::complex<double>> bhat;   // padded FFT of the conjugate chirp
};

void fill_pow2(Plan& p) {
    const int n = p.n;
    p.bitrev.assign(static_cast<std::size_t>(n), 0);
    int bits = 0;
    while ((1 << bits) < n) ++bits;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < bits; ++b)
            if (i & (1 << b)) r |= 1 << (bits - 1 - b);
        p.bitrev[static_cast<std::size_t>(i)] = r;
    }
    p.w.resize(static_cast<std::size_t>(n / 2));
    for (int k = 0; k < n / 2; ++k) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        p.w[static_cast<std::size_t>(k)] = {std::cos(ang), std::sin(ang)};
    }
}

void fft_pow2(std::span<std::complex<double>> x, const Plan& p, bool inverse) {
    const int n = p.n;
    for (int i = 0; i < n; ++i) {
        const int r = p.bitrev[static_cast<std::size_t>(i)];
        if (i < r) std::swap(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(r)]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len / 2;
        const int step = n / len;
        for (int start = 0; start < n; start += len) {
            for (int k = 0; k < half; ++k) {
                std::complex<double> w = p.w[static_cast<std::size_t>(k * step)];
                if (inverse) w = std::conj(w);
                const std::size_t lo = static_cast<std::size_t>(start + k);
                const std::size_t hi = lo + static_cast<std::size_t>(half);
                const std::complex<double> t = w * x[hi];
                x[hi] = x[lo] - t;
                x[lo] += t;
            }
        }
    }
}

const Plan& plan_for(int n);

void fill_bluestein(Plan& p) {
    const int n = p.n;
    p.pad = next_pow2(2 * n - 1);
    p.chirp.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        // Phase is pi*j^2/n; reduce j^2 mod 2n exactly in integers first so
        // large j does not lose precision in the angle.
        const long long m = (static_cast<long long>(j) * j) % (2LL * n);
        const double ang = -std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
        p.chirp[static_cast<std::size_t>(j)] = {std::cos(ang), std::sin(ang)};
    }
    std::vector<std::complex<double>> b(static_cast<std::size_t>(p.pad), {0.0, 0.0});
    b[0] = std::conj(p.chirp[0]);
    for (int j = 1; j < n; ++j) {
        const std::complex<double> v = std::conj(p.chirp[static_cast<std::size_t>(j)]);
        b[static_cast<std::size_t>(j)] = v;
        b[static_cast<std::size_t>(p.pad - j)] = v;
    }
    fft_pow2(b, plan_for(p.pad), false);
    p.bhat = std::move(b);
}

const Plan& plan_for(int n) {
    thread_local std::unordered_map<int, std::unique_ptr<Plan>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto plan = std::make_unique<Plan>();
        plan->n = n;
        plan->pow2 = is_pow2(n);
        if (plan->pow2)
            fill_pow2(*plan);
        else
            fill_bluestein(*plan);
        it = cache.emplace(n, std::move(plan)).first;
    }
    return *it->second;
}

void fft_bluestein(std::span<std::complex<double>> x, const Plan& p) {
    const int n = p.n;
    const Plan& pp = plan_for(p.pad);
    std::vector<std::complex<double>> a(static_cast<std::size_t>(p.pad), {0.0, 0.0});
    for (int j = 0; j < n; ++j)
        a[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] * p.chirp[static_cast<std::size_t>(j)];
    fft_pow2(a, pp, false);
    for (int j = 0; j < p.pad; ++j)
        a[static_cast<std::size_t>(j)] *= p.bhat[static_cast<std::size_t>(j)];
    fft_pow2(a, pp, true);
    const double scale = 1.0 / static_cast<double>(p.pad);
    for (int k = 0; k < n; ++k)
        x[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] * scale * p.chirp[static_cast<std::size_t>(k)];
}

}  // namespace

void fft(std::span<std::complex<double>> x, bool inverse) {
    const int n = static_cast<int>(x.size());
    if (n <= 1) return;
    const Plan& p = plan_for(n);
    if (p.pow2) {
        fft_pow2(x, p, inverse);
        return;
    }
    if (inverse) {
        for (auto& v : x) v = std::conj(v);
        fft_bluestein(x, p);
        for (auto& v : x) v = std::conj(v);
    } else {
        fft_bluestein(x, p);
    }
}

void SpectralCoefficients::symmetrize() {
    const int m = grid.m;
    c[0] = {c[0].real(), 0.0};
    if (m % 2 == 0) c[static_cast<std::size_t>(m / 2)] = {c[static_cast<std::size_t>(m / 2)].real(), 0.0};
    for (int l = 1; l < (m + 1) / 2; ++l) {
        auto& a = c[static_cast<std::size_t>(l)];
        auto& b = c[static_cast<std::size_t>(m - l)];
        const std::complex<double> avg = 0.5 * (a + std::conj(b));
        a = avg;
        b = std::conj(avg);
    }
}

SpectralCoefficients dft(const GridFunction& u) {
    const int m = u.size();
    SpectralCoefficients s(u.grid());
    for (int j = 0; j < m; ++j) s.c[static_cast<std::size_t>(j)] = {u[j], 0.0};
    fft(s.c, false);
    const double scale = 1.0 / static_cast<double>(m);
    for (auto& v : s.c) v *= scale;
    return s;
}

GridFunction inverse_dft(const SpectralCoefficients& s) {
    const int m = s.grid.m;
    if (static_cast<int>(s.c.size()) != m)
        throw GridMismatchError("coefficient count does not match grid size");

    double cmax = 0.0;
    for (const auto& v : s.c)
        cmax = std::max(cmax, std::max(std::abs(v.real()), std::abs(v.imag())));
    const double tol = 1e-10 * std::max(1.0, cmax);

    for (int k = 0; k <= m / 2; ++k) {
        const std::complex<double> d =
            s.c[static_cast<std::size_t>(k)] - std::conj(s.c[static_cast<std::size_t>((m - k) % m)]);
        if (std::abs(d) > tol)
            throw SymmetryError("coefficients are not conjugate-symmetric at mode " +
                                std::to_string(SpectralCoefficients::mode_of_index(k, m)));
    }

    std::vector<std::complex<double>> x(s.c);
    fft(x, true);
    GridFunction u(s.grid);
    for (int j = 0; j < m; ++j) {
        const std::complex<double> v = x[static_cast<std::size_t>(j)];
        if (std::abs(v.imag()) > tol)
            throw SymmetryError("inverse transform produced an imaginary residue");
        u[j] = v.real();
    }
    return u;
}

}  // namespace kge
