#pragma once

#include <functional>
#include <span>
#include <vector>

#include "kge/errors.hpp"

namespace kge {

/// Uniform periodic mesh on [a,b) with m cells; node j sits at a + j*h.
/// m must be even and >= 4 so the Nyquist mode and the compact stencil are
/// well defined.
struct PeriodicGrid {
    double a = 0.0;
    double b = 1.0;
    int m = 4;
    double h = 0.25;

    PeriodicGrid() = default;
    PeriodicGrid(double a, double b, int m);

    double node(int j) const { return a + h * static_cast<double>(j); }
    double length() const { return b - a; }

    friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;
};

/// Real values at the nodes of a PeriodicGrid. The grid is stored by value
/// (it is four words); two functions are compatible iff their grids compare
/// equal.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(const PeriodicGrid& g) : grid_(g), v_(g.m, 0.0) {}
    GridFunction(const PeriodicGrid& g, std::vector<double> values);

    const PeriodicGrid& grid() const { return grid_; }
    int size() const { return grid_.m; }

    double& operator[](int j) { return v_[static_cast<std::size_t>(j)]; }
    double operator[](int j) const { return v_[static_cast<std::size_t>(j)]; }

    std::span<double> values() { return v_; }
    std::span<const double> values() const { return v_; }

private:
    PeriodicGrid grid_;
    std::vector<double> v_;
};

/// Evaluate f at every node.
GridFunction sample(const PeriodicGrid& g, const std::function<double(double)>& f);

/// Throws GridMismatchError unless u and v live on the same grid.
void require_same_grid(const GridFunction& u, const GridFunction& v);

/// (u_{j+1} - u_j)/h with periodic wrap.
GridFunction forward_diff(const GridFunction& u);

/// (u_j - u_{j-1})/h with periodic wrap.
GridFunction backward_diff(const GridFunction& u);

/// (u_{j+1} - 2u_j + u_{j-1})/h^2 with periodic wrap.
GridFunction second_diff(const GridFunction& u);

/// u - v (same grid).
GridFunction subtract(const GridFunction& u, const GridFunction& v);

/// Values rotated by s nodes: result[j] = u[(j+s) mod m]. Test helper for
/// translation-invariance checks.
GridFunction cyclic_shift(const GridFunction& u, int s);

/// Restriction to a coarser grid whose nodes are a subset of u's nodes
/// (same interval, u.m divisible by coarse.m). Picks values by index.
GridFunction restrict_to(const GridFunction& u, const PeriodicGrid& coarse);

/// sqrt(h * sum u_j^2), accumulated serially in long double.
double norm_l2(const GridFunction& u);

/// max |u_j|.
double norm_linf(const GridFunction& u);

/// h * sum u_j v_j, accumulated serially in long double.
double inner(const GridFunction& u, const GridFunction& v);

/// h * sum |u_j|^q for integer q >= 1, accumulated serially in long double.
double power_sum(const GridFunction& u, int q);

}  // namespace kge
