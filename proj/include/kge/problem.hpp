#pragma once

#include <functional>
#include <string>

#include "kge/grid.hpp"

namespace kge {

enum class ProblemVariant {
    periodic_interval,      ///< genuinely periodic problem on (a,b)
    whole_space_truncated,  ///< decaying data on the eps-dependent interval
};

/// One instance of the wave problem
///   u_tt - u_xx + u + eps^p u^{p+1} = 0,  u(x,0) = phi(x),  u_t(x,0) = gamma(x)
/// on a periodic interval. The nonlinearity strength eps lies in (0,1] and
/// the integer power p >= 1 controls how weak it is.
struct ProblemSpec {
    PeriodicGrid grid;
    double epsilon = 1.0;
    int p = 1;
    ProblemVariant variant = ProblemVariant::periodic_interval;
    std::function<double(double)> phi;
    std::function<double(double)> gamma;
    /// Analytic second derivative of phi, used by the default accurate
    /// starting step. A starting step asked to use it will refuse to run
    /// if it is missing; the discrete-operator variant never needs it.
    std::function<double(double)> phi_xx;
    /// Stable identifier of the initial data for reference caching; empty
    /// disables the disk cache for runs built from this spec.
    std::string data_tag;

    void validate() const;
    double eps_pow_p() const;
};

/// phi = 3/(2+cos x), gamma = sin x on (0, 2 pi) with m nodes.
ProblemSpec make_torus_problem(double epsilon, int p, int m);

/// Gaussian bump data on the eps-dependent truncation interval
/// (-4-1/eps, 4+1/eps): phi = exp(-x^2), gamma = 1/(exp(x^2)+exp(-x^2)).
/// The node count is 2*round((b-a)/(2*h_request)); the actual spacing is
/// recomputed from it and may differ slightly from h_request.
ProblemSpec make_whole_space_problem(double epsilon, int p, double h_request);

}  // namespace kge
