#pragma once

#include <complex>
#include <span>
#include <vector>

#include "kge/grid.hpp"

namespace kge {

/// Fourier coefficients of a real grid function, stored in standard FFT
/// order: index k = 0..m-1 holds wave number l = k for k < m/2 and l = k-m
/// otherwise. For real data coeff_{-l} = conj(coeff_l).
struct SpectralCoefficients {
    PeriodicGrid grid;
    std::vector<std::complex<double>> c;

    SpectralCoefficients() = default;
    explicit SpectralCoefficients(const PeriodicGrid& g) : grid(g), c(g.m) {}

    /// Signed wave number of storage index k.
    static int mode_of_index(int k, int m) { return k < m / 2 ? k : k - m; }

    /// Access by signed wave number l in [-m/2, m/2-1].
    std::complex<double>& at_mode(int l) { return c[static_cast<std::size_t>(l >= 0 ? l : l + grid.m)]; }
    std::complex<double> at_mode(int l) const { return c[static_cast<std::size_t>(l >= 0 ? l : l + grid.m)]; }

    /// Snap back onto the conjugate-symmetric subspace. Recurrences that
    /// carry coefficients across many steps drift off it through rounding
    /// and would eventually trip the inverse-transform check.
    void symmetrize();
};

/// Forward transform: coeff_l = (1/m) sum_j u_j exp(-2 pi i j l / m).
SpectralCoefficients dft(const GridFunction& u);

/// Inverse transform back to a real grid function. Checks conjugate
/// symmetry first and the residual imaginary parts after, both against
/// 1e-10 relative to max(1, |coeff|_inf); throws SymmetryError on failure.
GridFunction inverse_dft(const SpectralCoefficients& s);

/// Unnormalized in-place complex DFT of any length: radix-2 when the length
/// is a power of two, Bluestein's algorithm otherwise. inverse flips the
/// exponent sign; no 1/n factor is applied either way. Plans are cached per
/// thread.
void fft(std::span<std::complex<double>> x, bool inverse);

}  // namespace kge
