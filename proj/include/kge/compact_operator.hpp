#pragma once

#include "kge/fourier.hpp"
#include "kge/grid.hpp"

namespace kge {

/// Fourier symbol of the (1,10,1)/12 averaging stencil at storage index k:
/// (10 + 2 cos(2 pi k / m)) / 12, in [2/3, 1] for even m.
double compact_symbol(int k, int m);

/// Symbol of minus the periodic second difference: (2/h)^2 sin^2(pi k / m).
double laplacian_symbol(int k, int m, double h);

/// The averaging operator that turns the three-point second difference into
/// a fourth-order approximation. apply uses the stencil; solve inverts via
/// the DFT (the operator is circulant, so it diagonalises exactly).
class CompactOperator {
public:
    explicit CompactOperator(const PeriodicGrid& g);

    const PeriodicGrid& grid() const { return grid_; }
    const std::vector<double>& symbol() const { return symbol_; }

    /// (u_{j-1} + 10 u_j + u_{j+1}) / 12 with periodic wrap.
    GridFunction apply(const GridFunction& u) const;

    /// Inverse: divide each Fourier coefficient by the symbol.
    GridFunction solve(const GridFunction& rhs) const;

private:
    PeriodicGrid grid_;
    std::vector<double> symbol_;
};

/// Weighted norm sqrt((A^{-1} u, u)) evaluated in Fourier space:
/// sqrt((b-a) * sum_k |u_hat_k|^2 / symbol_k).
double star_norm(const CompactOperator& A, const GridFunction& u);

/// Same norm through the physical-space route inner(solve(u), u). Kept as a
/// cross-check of the spectral path; the two agree to roundoff.
double star_norm_via_solve(const CompactOperator& A, const GridFunction& u);

}  // namespace kge
