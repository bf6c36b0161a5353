#include "kge/compact_operator.hpp"

#include <cmath>
#include <numbers>

#include "kge/parallel.hpp"

namespace kge {

double compact_symbol(int k, int m) {
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
    return (10.0 + 2.0 * std::cos(ang)) / 12.0;
}

double laplacian_symbol(int k, int m, double h) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(m));
    const double lam = 2.0 / h * s;
    return lam * lam;
}

CompactOperator::CompactOperator(const PeriodicGrid& g) : grid_(g) {
    symbol_.resize(static_cast<std::size_t>(g.m));
    for (int k = 0; k < g.m; ++k)
        symbol_[static_cast<std::size_t>(k)] = compact_symbol(k, g.m);
}

GridFunction CompactOperator::apply(const GridFunction& u) const {
    if (!(u.grid() == grid_)) throw GridMismatchError("operand grid differs from operator grid");
    GridFunction r(grid_);
    kernels::periodic_three_point(r.values(), u.values(), 1.0 / 12.0, 10.0 / 12.0, 1.0 / 12.0);
    return r;
}

GridFunction CompactOperator::solve(const GridFunction& rhs) const {
    if (!(rhs.grid() == grid_)) throw GridMismatchError("operand grid differs from operator grid");
    SpectralCoefficients s = dft(rhs);
    for (int k = 0; k < grid_.m; ++k)
        s.c[static_cast<std::size_t>(k)] /= symbol_[static_cast<std::size_t>(k)];
    return inverse_dft(s);
}

double star_norm(const CompactOperator& A, const GridFunction& u) {
    if (!(u.grid() == A.grid())) throw GridMismatchError("operand grid differs from operator grid");
    const SpectralCoefficients s = dft(u);
    long double acc = 0.0L;
    for (int k = 0; k < A.grid().m; ++k) {
        const long double mag = std::norm(s.c[static_cast<std::size_t>(k)]);
        acc += mag / static_cast<long double>(A.symbol()[static_cast<std::size_t>(k)]);
    }
    return std::sqrt(static_cast<double>(acc * static_cast<long double>(A.grid().length())));
}

double star_norm_via_solve(const CompactOperator& A, const GridFunction& u) {
    return std::sqrt(inner(A.solve(u), u));
}

}  // namespace kge
