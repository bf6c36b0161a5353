#include "kge/problem.hpp"

#include <cmath>
#include <numbers>

#include "kge/parallel.hpp"

namespace kge {

void ProblemSpec::validate() const {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw ConfigError("epsilon must lie in (0, 1]");
    if (p < 1) throw ConfigError("p must be a positive integer");
    if (!phi || !gamma) throw ConfigError("initial data functions are required");
}

double ProblemSpec::eps_pow_p() const { return kernels::pow_int(epsilon, p); }

ProblemSpec make_torus_problem(double epsilon, int p, int m) {
    ProblemSpec spec;
    spec.grid = PeriodicGrid(0.0, 2.0 * std::numbers::pi, m);
    spec.epsilon = epsilon;
    spec.p = p;
    spec.phi = [](double x) { return 3.0 / (2.0 + std::cos(x)); };
    spec.gamma = [](double x) { return std::sin(x); };
    spec.phi_xx = [](double x) {
        const double c = std::cos(x);
        const double s = std::sin(x);
        const double d = 2.0 + c;
        return 3.0 * (c * d + 2.0 * s * s) / (d * d * d);
    };
    spec.data_tag = "smooth_torus";
    spec.validate();
    return spec;
}

ProblemSpec make_whole_space_problem(double epsilon, int p, double h_request) {
    if (!(h_request > 0.0)) throw ConfigError("mesh request must be positive");
    const double half = 4.0 + 1.0 / epsilon;
    const double length = 2.0 * half;
    const int m = 2 * static_cast<int>(std::lround(length / (2.0 * h_request)));
    ProblemSpec spec;
    spec.grid = PeriodicGrid(-half, half, m);
    spec.epsilon = epsilon;
    spec.p = p;
    spec.variant = ProblemVariant::whole_space_truncated;
    spec.phi = [](double x) { return std::exp(-x * x); };
    spec.gamma = [](double x) { return 1.0 / (std::exp(x * x) + std::exp(-x * x)); };
    spec.phi_xx = [](double x) { return (4.0 * x * x - 2.0) * std::exp(-x * x); };
    spec.data_tag = "gaussian_packet";
    spec.validate();
    return spec;
}

}  // namespace kge
