#include "kge/oscillatory.hpp"

#include <cmath>
#include <sstream>

#include "kge/diagnostics.hpp"
#include "kge/parallel.hpp"

namespace kge {

const char* to_string(OscFirstStep m) {
    switch (m) {
        case OscFirstStep::taylor: return "taylor";
        case OscFirstStep::regularized_literal: return "regularized_literal";
        default: return "regularized_product";
    }
}

namespace {

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double alpha_of(const ProblemSpec& spec) {
    const double e = spec.eps_pow_p();
    return e * e;
}

}  // namespace

SchemeState osc_first_step(const ProblemSpec& spec, double k, OscFirstStep mode,
                           bool discrete_laplacian) {
    if (!(k > 0.0)) throw ConfigError("time step must be positive");
    const double eps_p = spec.eps_pow_p();
    const double alpha = alpha_of(spec);
    double c1 = 0.0;
    double c2 = 0.0;
    switch (mode) {
        case OscFirstStep::taylor:
            c1 = k / eps_p;
            c2 = 0.5 * k * k / alpha;
            break;
        case OscFirstStep::regularized_literal:
            c1 = std::sin(k / eps_p);
            c2 = 0.5 * k * std::sin(k / alpha);
            break;
        case OscFirstStep::regularized_product:
            c1 = std::sin(k / eps_p);
            c2 = 0.5 * (k / eps_p) * std::sin(k / eps_p);
            break;
    }
    SchemeState st = taylor_first_level(spec, c1, c2, discrete_laplacian);
    st.dt = k;
    return st;
}

int osc_step(SchemeState& st, const ProblemSpec& spec, SchemeKind kind,
             const NonlinearSolverConfig& solver) {
    const CompactStepper stepper(spec.grid, kind, st.dt, alpha_of(spec), spec.epsilon,
                                 spec.p, solver);
    return stepper.advance(st);
}

Trajectory osc_integrate(const ProblemSpec& spec, SchemeKind kind, double k,
                         double s_final, const RunConfig& cfg, OscFirstStep first) {
    const long n_steps = detail::resolve_step_count(k, s_final);
    const CompactStepper stepper(spec.grid, kind, k, alpha_of(spec), spec.epsilon,
                                 spec.p, cfg.solver, cfg.amplitude_cap);
    SchemeState st = osc_first_step(spec, k, first, cfg.discrete_laplacian_first_step);
    Trajectory traj = detail::run_levels(stepper, std::move(st), n_steps, spec, cfg);

    const double edge = boundary_band_max(traj.final_state.curr);
    traj.metadata = {
        {"variant", spec.variant == ProblemVariant::whole_space_truncated
                        ? "whole_space_truncated"
                        : "periodic_interval"},
        {"equation", "oscillatory"},
        {"scheme", to_string(kind)},
        {"a", format_double(spec.grid.a)},
        {"b", format_double(spec.grid.b)},
        {"m", std::to_string(spec.grid.m)},
        {"h", format_double(spec.grid.h)},
        {"epsilon", format_double(spec.epsilon)},
        {"p", std::to_string(spec.p)},
        {"alpha", format_double(stepper.alpha())},
        {"dt", format_double(k)},
        {"steps", std::to_string(n_steps)},
        {"s_final", format_double(s_final)},
        {"first_step", to_string(first)},
        {"first_step_laplacian", cfg.discrete_laplacian_first_step ? "discrete" : "analytic"},
        {"sigma_max", format_double(traj.sigma_max)},
        {"nonlinear_iterations_total", std::to_string(traj.nonlinear_iterations_total)},
        {"boundary_max_abs", format_double(edge)},
    };
    if (traj.max_energy_drift)
        traj.metadata.emplace_back("max_energy_drift", format_double(*traj.max_energy_drift));
    return traj;
}

double osc_energy(SchemeState& st, const ProblemSpec& spec, double k) {
    return detail::two_level_energy(st, spec, k, alpha_of(spec));
}

double boundary_band_max(const GridFunction& v, double fraction) {
    const int m = v.size();
    const int band = std::max(1, static_cast<int>(std::floor(fraction * 0.5 * m)));
    double worst = 0.0;
    for (int i = 0; i < band; ++i) {
        worst = std::max(worst, std::abs(v[i]));
        worst = std::max(worst, std::abs(v[m - 1 - i]));
    }
    return worst;
}

}  // namespace kge
