#include "kge/grid.hpp"

#include <cmath>
#include <cstdlib>

#include "kge/parallel.hpp"

namespace kge {

PeriodicGrid::PeriodicGrid(double a, double b, int m) : a(a), b(b), m(m) {
    if (!(b > a)) throw ConfigError("grid needs b > a");
    if (m < 4 || m % 2 != 0)
        throw ConfigError("grid needs an even node count >= 4, got " + std::to_string(m));
    h = (b - a) / static_cast<double>(m);
}

GridFunction::GridFunction(const PeriodicGrid& g, std::vector<double> values)
    : grid_(g), v_(std::move(values)) {
    if (static_cast<int>(v_.size()) != g.m)
        throw GridMismatchError("value count does not match grid size");
}

GridFunction sample(const PeriodicGrid& g, const std::function<double(double)>& f) {
    GridFunction u(g);
    for (int j = 0; j < g.m; ++j) u[j] = f(g.node(j));
    return u;
}

void require_same_grid(const GridFunction& u, const GridFunction& v) {
    if (!(u.grid() == v.grid()))
        throw GridMismatchError("grid functions live on different grids");
}

GridFunction forward_diff(const GridFunction& u) {
    GridFunction r(u.grid());
    const double inv_h = 1.0 / u.grid().h;
    kernels::periodic_three_point(r.values(), u.values(), 0.0, -inv_h, inv_h);
    return r;
}

GridFunction backward_diff(const GridFunction& u) {
    GridFunction r(u.grid());
    const double inv_h = 1.0 / u.grid().h;
    kernels::periodic_three_point(r.values(), u.values(), -inv_h, inv_h, 0.0);
    return r;
}

GridFunction second_diff(const GridFunction& u) {
    GridFunction r(u.grid());
    const double inv_h2 = 1.0 / (u.grid().h * u.grid().h);
    kernels::periodic_three_point(r.values(), u.values(), inv_h2, -2.0 * inv_h2, inv_h2);
    return r;
}

GridFunction subtract(const GridFunction& u, const GridFunction& v) {
    require_same_grid(u, v);
    GridFunction r(u.grid());
    kernels::linear2(r.values(), 1.0, u.values(), -1.0, v.values());
    return r;
}

GridFunction cyclic_shift(const GridFunction& u, int s) {
    const int m = u.size();
    GridFunction r(u.grid());
    for (int j = 0; j < m; ++j) r[j] = u[((j + s) % m + m) % m];
    return r;
}

GridFunction restrict_to(const GridFunction& u, const PeriodicGrid& coarse) {
    const PeriodicGrid& fine = u.grid();
    if (fine.a != coarse.a || fine.b != coarse.b || fine.m % coarse.m != 0)
        throw GridMismatchError("restriction target is not a node subset");
    const int stride = fine.m / coarse.m;
    GridFunction r(coarse);
    for (int j = 0; j < coarse.m; ++j) r[j] = u[j * stride];
    return r;
}

// Reductions accumulate left to right in long double on one thread; results
// are independent of kernel dispatch mode.

double norm_l2(const GridFunction& u) {
    long double s = 0.0L;
    for (int j = 0; j < u.size(); ++j) {
        const long double x = u[j];
        s += x * x;
    }
    return std::sqrt(static_cast<double>(s * static_cast<long double>(u.grid().h)));
}

double norm_linf(const GridFunction& u) {
    double m = 0.0;
    for (int j = 0; j < u.size(); ++j) m = std::max(m, std::abs(u[j]));
    return m;
}

double inner(const GridFunction& u, const GridFunction& v) {
    require_same_grid(u, v);
    long double s = 0.0L;
    for (int j = 0; j < u.size(); ++j)
        s += static_cast<long double>(u[j]) * static_cast<long double>(v[j]);
    return static_cast<double>(s * static_cast<long double>(u.grid().h));
}

double power_sum(const GridFunction& u, int q) {
    long double s = 0.0L;
    for (int j = 0; j < u.size(); ++j) {
        const long double x = std::abs(static_cast<long double>(u[j]));
        long double t = 1.0L;
        for (int i = 0; i < q; ++i) t *= x;
        s += t;
    }
    return static_cast<double>(s * static_cast<long double>(u.grid().h));
}

}  // namespace kge
