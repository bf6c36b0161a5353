#include "kge/diagnostics.hpp"

#include <cmath>
#include <numbers>

#include "kge/parallel.hpp"

namespace kge {

double error_functional(const GridFunction& numeric, const GridFunction& reference) {
    const GridFunction d = subtract(numeric, reference);
    const double a = norm_l2(d);
    const double b = norm_l2(forward_diff(d));
    return std::sqrt(a * a + b * b);
}

double weighted_grad_sq(const SpectralCoefficients& s) {
    const int m = s.grid.m;
    long double acc = 0.0L;
    for (int k = 0; k < m; ++k) {
        const double w = laplacian_symbol(k, m, s.grid.h) / compact_symbol(k, m);
        acc += static_cast<long double>(w) *
               static_cast<long double>(std::norm(s.c[static_cast<std::size_t>(k)]));
    }
    return static_cast<double>(acc) * s.grid.length();
}

namespace detail {

double two_level_energy(SchemeState& st, const ProblemSpec& spec, double dt, double alpha) {
    require_same_grid(st.prev, st.curr);
    if (!(st.prev.grid() == spec.grid))
        throw GridMismatchError("state grid differs from problem grid");
    if (!st.prev_hat) st.prev_hat = dft(st.prev);
    if (!st.curr_hat) st.curr_hat = dft(st.curr);

    const PeriodicGrid& g = spec.grid;
    long double dsq = 0.0L;
    for (int j = 0; j < g.m; ++j) {
        const long double d = static_cast<long double>(st.curr[j]) - static_cast<long double>(st.prev[j]);
        dsq += d * d;
    }
    const double kinetic = alpha * (g.h * static_cast<double>(dsq)) / (dt * dt);

    const double grad = 0.5 * (weighted_grad_sq(*st.prev_hat) + weighted_grad_sq(*st.curr_hat));
    const double mass = 0.5 * (power_sum(st.prev, 2) + power_sum(st.curr, 2));
    const double pot = spec.eps_pow_p() / static_cast<double>(spec.p + 2) *
                       (power_sum(st.prev, spec.p + 2) + power_sum(st.curr, spec.p + 2));
    return kinetic + grad + mass + pot;
}

}  // namespace detail

double discrete_energy(SchemeState& st, const ProblemSpec& spec, double tau) {
    return detail::two_level_energy(st, spec, tau, 1.0);
}

double discrete_energy(const GridFunction& prev, const GridFunction& curr,
                       double tau, const ProblemSpec& spec) {
    SchemeState st;
    st.prev = prev;
    st.curr = curr;
    return detail::two_level_energy(st, spec, tau, 1.0);
}

std::optional<double> semi_implicit_dt_bound(double eps_pow_p, double sigma_max, double alpha) {
    const double e = eps_pow_p * sigma_max;
    if (e <= 1.0) return std::nullopt;
    return 2.0 * std::sqrt(alpha) / std::sqrt(e - 1.0);
}

namespace {

StabilityReport build_report(const PeriodicGrid& g, SchemeKind kind, double tau,
                             double epsilon, int p, double sigma_max) {
    StabilityReport r;
    r.kind = kind;
    r.dt = tau;
    r.epsilon = epsilon;
    r.p = p;
    r.sigma_max = sigma_max;
    const double eps_p = kernels::pow_int(epsilon, p);
    const double freeze = eps_p * sigma_max;
    const double t2 = tau * tau;
    const int m = g.m;
    r.mode.resize(static_cast<std::size_t>(m));
    r.lambda.resize(static_cast<std::size_t>(m));
    r.c.resize(static_cast<std::size_t>(m));
    r.theta.resize(static_cast<std::size_t>(m));
    r.xi_mag.resize(static_cast<std::size_t>(m));
    double worst = 0.0;
    for (int k = 0; k < m; ++k) {
        const int l = SpectralCoefficients::mode_of_index(k, m);
        const double sl = std::sin(std::numbers::pi * static_cast<double>(l) / static_cast<double>(m));
        const double lam = 2.0 / g.h * sl;
        const double c = 3.0 / (3.0 - sl * sl);
        const double clam2 = c * lam * lam;
        double theta;
        if (kind == SchemeKind::implicit)
            theta = 2.0 / (2.0 + t2 * (1.0 + freeze + clam2));
        else
            theta = (2.0 - t2 * freeze) / (2.0 + t2 * (1.0 + clam2));
        const std::size_t i = static_cast<std::size_t>(k);
        r.mode[i] = l;
        r.lambda[i] = lam;
        r.c[i] = c;
        r.theta[i] = theta;
        const double at = std::abs(theta);
        r.xi_mag[i] = at <= 1.0 ? 1.0 : at + std::sqrt(theta * theta - 1.0);
        worst = std::max(worst, at);
    }
    r.max_abs_theta = worst;
    r.stable = worst <= 1.0;
    if (kind == SchemeKind::implicit) {
        r.unconditionally_stable = true;
    } else {
        r.unconditionally_stable = freeze <= 1.0;
        if (!r.unconditionally_stable) r.dt_bound = semi_implicit_dt_bound(eps_p, sigma_max);
    }
    return r;
}

}  // namespace

StabilityReport stability_report(const PeriodicGrid& g, SchemeKind kind, double tau,
                                 double epsilon, int p, double sigma_max) {
    return build_report(g, kind, tau, epsilon, p, sigma_max);
}

StabilityReport osc_stability_report(const PeriodicGrid& g, SchemeKind kind, double k,
                                     double epsilon, int p, double sigma_max) {
    const double eps_p = kernels::pow_int(epsilon, p);
    StabilityReport r = build_report(g, kind, k / eps_p, epsilon, p, sigma_max);
    r.dt = k;
    r.alpha = eps_p * eps_p;
    if (r.dt_bound) r.dt_bound = eps_p * (*r.dt_bound);
    return r;
}

double sigma_max_of(const Trajectory& t) { return t.sigma_max; }

double sigma_from_levels(const std::vector<Snapshot>& levels, int p) {
    double s = 0.0;
    for (const Snapshot& snap : levels)
        s = std::max(s, kernels::pow_int(norm_linf(snap.u), p));
    return s;
}

}  // namespace kge
