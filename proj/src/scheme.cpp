#include "kge/scheme.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "kge/compact_operator.hpp"
#include "kge/diagnostics.hpp"
#include "kge/parallel.hpp"

namespace kge {

const char* to_string(SchemeKind k) {
    return k == SchemeKind::implicit ? "implicit" : "semi_implicit";
}

GridFunction g_quotient(const GridFunction& v, const GridFunction& w, int p) {
    require_same_grid(v, w);
    GridFunction r(v.grid());
    kernels::symmetric_quotient(r.values(), v.values(), w.values(), p);
    return r;
}

namespace {

/// Max |u_j|, throwing on NaN/Inf or amplitudes beyond cap. The step index
/// of the error is filled by the caller.
double checked_amplitude(const GridFunction& u, double cap) {
    double m = 0.0;
    for (int j = 0; j < u.size(); ++j) {
        const double x = u[j];
        if (!std::isfinite(x)) throw BlowUpError("solution left the finite range", -1, x);
        m = std::max(m, std::abs(x));
    }
    if (m > cap) {
        std::ostringstream os;
        os << "amplitude " << m << " exceeds the blow-up cap " << cap;
        throw BlowUpError(os.str(), -1, m);
    }
    return m;
}

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

SchemeState taylor_first_level(const ProblemSpec& spec, double c1, double c2,
                               bool discrete_laplacian) {
    spec.validate();
    const PeriodicGrid& g = spec.grid;
    GridFunction u0 = sample(g, spec.phi);
    GridFunction vel = sample(g, spec.gamma);

    GridFunction pxx(g);
    if (discrete_laplacian) {
        CompactOperator A(g);
        pxx = A.solve(second_diff(u0));
    } else {
        if (!spec.phi_xx)
            throw ConfigError("analytic phi_xx missing; request the discrete starting step instead");
        pxx = sample(g, spec.phi_xx);
    }

    GridFunction f(g);
    kernels::power_scaled(f.values(), u0.values(), spec.p + 1, 1.0);
    GridFunction accel(g);
    kernels::linear3(accel.values(), 1.0, pxx.values(), -1.0, u0.values(),
                     -spec.eps_pow_p(), f.values());

    SchemeState st;
    st.curr = GridFunction(g);
    kernels::linear3(st.curr.values(), 1.0, u0.values(), c1, vel.values(), c2, accel.values());
    st.prev = std::move(u0);
    st.n = 1;
    st.sigma_max_running = std::max(kernels::pow_int(norm_linf(st.prev), spec.p),
                                    kernels::pow_int(norm_linf(st.curr), spec.p));
    return st;
}

SchemeState first_step(const ProblemSpec& spec, double tau, bool discrete_laplacian) {
    if (!(tau > 0.0)) throw ConfigError("time step must be positive");
    SchemeState st = taylor_first_level(spec, tau, 0.5 * tau * tau, discrete_laplacian);
    st.dt = tau;
    return st;
}

CompactStepper::CompactStepper(const PeriodicGrid& g, SchemeKind kind, double dt,
                               double alpha, double epsilon, int p,
                               NonlinearSolverConfig solver, double amplitude_cap)
    : grid_(g),
      kind_(kind),
      dt_(dt),
      alpha_(alpha),
      eps_pow_p_(kernels::pow_int(epsilon, p)),
      p_(p),
      solver_(solver),
      cap_(amplitude_cap) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(alpha > 0.0)) throw ConfigError("time-scaling factor must be positive");
    const double inv_dt2 = alpha_ / (dt_ * dt_);
    two_inv_dt2_ = 2.0 * inv_dt2;
    inv_mult_.resize(static_cast<std::size_t>(g.m));
    for (int k = 0; k < g.m; ++k) {
        const double lin = laplacian_symbol(k, g.m, g.h) / compact_symbol(k, g.m) + 1.0;
        inv_mult_[static_cast<std::size_t>(k)] = 1.0 / (inv_dt2 + 0.5 * lin);
    }
}

void CompactStepper::ensure_spectra(SchemeState& st) const {
    if (!st.prev_hat) st.prev_hat = dft(st.prev);
    if (!st.curr_hat) st.curr_hat = dft(st.curr);
}

GridFunction CompactStepper::advance_semi_implicit(SchemeState& st,
                                                   SpectralCoefficients& out_hat) const {
    GridFunction f(grid_);
    kernels::power_scaled(f.values(), st.curr.values(), p_ + 1, 1.0);
    const SpectralCoefficients f_hat = dft(f);
    kernels::mode_update(out_hat.c, st.curr_hat->c, st.prev_hat->c, f_hat.c,
                         inv_mult_, two_inv_dt2_, eps_pow_p_);
    GridFunction next = inverse_dft(out_hat);
    checked_amplitude(next, cap_);
    return next;
}

GridFunction CompactStepper::advance_implicit(SchemeState& st,
                                              SpectralCoefficients& out_hat,
                                              int& iters) const {
    GridFunction v(grid_);
    kernels::linear2(v.values(), 2.0, st.curr.values(), -1.0, st.prev.values());
    GridFunction quot(grid_);
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= solver_.max_iterations; ++it) {
        kernels::symmetric_quotient(quot.values(), v.values(), st.prev.values(), p_);
        const SpectralCoefficients q_hat = dft(quot);
        kernels::mode_update(out_hat.c, st.curr_hat->c, st.prev_hat->c, q_hat.c,
                             inv_mult_, two_inv_dt2_, eps_pow_p_);
        GridFunction vn = inverse_dft(out_hat);
        const double amp = checked_amplitude(vn, cap_);
        double delta = 0.0;
        for (int j = 0; j < grid_.m; ++j)
            delta = std::max(delta, std::abs(vn[j] - v[j]));
        v = std::move(vn);
        residual = delta;
        if (delta <= solver_.tolerance * std::max(1.0, amp)) {
            iters = it;
            return v;
        }
    }
    throw NonlinearSolveError("fixed-point iteration did not converge",
                              solver_.max_iterations, residual);
}

int CompactStepper::advance(SchemeState& st) const {
    if (!(st.prev.grid() == grid_) || !(st.curr.grid() == grid_))
        throw GridMismatchError("state grid differs from stepper grid");
    if (st.dt != dt_)
        throw ConfigError("state step size differs from stepper step size");
    ensure_spectra(st);
    SpectralCoefficients new_hat(grid_);
    int iters = 0;
    GridFunction next = (kind_ == SchemeKind::semi_implicit)
                            ? advance_semi_implicit(st, new_hat)
                            : advance_implicit(st, new_hat, iters);
    // The spectra are carried into the next step; without the projection the
    // conjugate pairs drift apart by rounding, linearly in the step count.
    new_hat.symmetrize();
    st.sigma_max_running =
        std::max(st.sigma_max_running, kernels::pow_int(norm_linf(next), p_));
    st.prev = std::move(st.curr);
    st.curr = std::move(next);
    st.prev_hat = std::move(st.curr_hat);
    st.curr_hat = std::move(new_hat);
    st.n += 1;
    return iters;
}

int step(SchemeState& st, const ProblemSpec& spec, SchemeKind kind,
         const NonlinearSolverConfig& solver) {
    const CompactStepper stepper(spec.grid, kind, st.dt, 1.0, spec.epsilon, spec.p, solver);
    return stepper.advance(st);
}

namespace detail {

long resolve_step_count(double dt, double t_final) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(t_final > 0.0)) throw ConfigError("final time must be positive");
    const long n = std::lround(t_final / dt);
    if (n < 1 || std::abs(static_cast<double>(n) * dt - t_final) > 1e-9 * t_final)
        throw ConfigError("final time " + format_double(t_final) +
                          " is not an integer number of steps of " + format_double(dt));
    return n;
}

Trajectory run_levels(const CompactStepper& stepper, SchemeState st, long n_steps,
                      const ProblemSpec& spec, const RunConfig& cfg) {
    const double dt = stepper.dt();
    Trajectory traj;
    traj.dt = dt;
    traj.steps = n_steps;

    long energy_stride = cfg.energy_stride;
    if (energy_stride < 0)
        energy_stride = (stepper.kind() == SchemeKind::implicit) ? 1 : 100;

    std::set<long> snap_levels;
    for (double t : cfg.snapshot_times) {
        const long lev = std::lround(t / dt);
        if (lev < 0 || lev > n_steps ||
            std::abs(static_cast<double>(lev) * dt - t) > 1e-9 * std::max(std::abs(t), dt))
            throw ConfigError("snapshot time " + format_double(t) + " is not on the step grid");
        snap_levels.insert(lev);
    }
    auto wants_snapshot = [&](long lev) {
        if (snap_levels.count(lev)) return true;
        return cfg.snapshot_stride > 0 && lev % cfg.snapshot_stride == 0;
    };
    auto take_snapshot = [&](long lev, const GridFunction& u) {
        if (wants_snapshot(lev))
            traj.snapshots.push_back({lev, static_cast<double>(lev) * dt, u});
    };
    auto record_energy = [&](SchemeState& s, bool force) {
        if (energy_stride == 0) return;
        const long pair = s.n - 1;
        if (!force && pair % energy_stride != 0) return;
        if (!traj.energy.empty() && traj.energy.back().n == pair) return;
        const double e = detail::two_level_energy(s, spec, dt, stepper.alpha());
        traj.energy.push_back({pair, static_cast<double>(pair) * dt, e});
    };
    auto enforce = [&](const SchemeState& s) {
        if (!cfg.enforce_stability) return;
        const auto bound =
            semi_implicit_dt_bound(stepper.eps_pow_p(), s.sigma_max_running, stepper.alpha());
        if (bound && dt >= *bound)
            throw StabilityError("step size " + format_double(dt) +
                                     " violates the stability bound " + format_double(*bound),
                                 dt, *bound);
    };

    take_snapshot(0, st.prev);
    take_snapshot(1, st.curr);
    record_energy(st, false);
    if (stepper.kind() == SchemeKind::semi_implicit) enforce(st);

    while (st.n < n_steps) {
        try {
            traj.nonlinear_iterations_total += stepper.advance(st);
        } catch (BlowUpError& e) {
            e.step = st.n + 1;
            throw;
        } catch (NonlinearSolveError& e) {
            e.step = st.n + 1;
            throw;
        }
        if (stepper.kind() == SchemeKind::semi_implicit) enforce(st);
        take_snapshot(st.n, st.curr);
        record_energy(st, st.n == n_steps);
    }

    traj.sigma_max = st.sigma_max_running;
    if (!traj.energy.empty()) {
        const double e0 = traj.energy.front().value;
        double drift = 0.0;
        for (const EnergySample& s : traj.energy)
            drift = std::max(drift, std::abs(s.value - e0));
        traj.max_energy_drift = drift;
    }
    traj.final_state = std::move(st);
    return traj;
}

}  // namespace detail

Trajectory integrate(const ProblemSpec& spec, SchemeKind kind, double tau,
                     double t_final, const RunConfig& cfg) {
    const long n_steps = detail::resolve_step_count(tau, t_final);
    const CompactStepper stepper(spec.grid, kind, tau, 1.0, spec.epsilon, spec.p,
                                 cfg.solver, cfg.amplitude_cap);
    SchemeState st = first_step(spec, tau, cfg.discrete_laplacian_first_step);
    Trajectory traj = detail::run_levels(stepper, std::move(st), n_steps, spec, cfg);

    traj.metadata = {
        {"variant", spec.variant == ProblemVariant::whole_space_truncated
                        ? "whole_space_truncated"
                        : "periodic_interval"},
        {"equation", "standard"},
        {"scheme", to_string(kind)},
        {"a", format_double(spec.grid.a)},
        {"b", format_double(spec.grid.b)},
        {"m", std::to_string(spec.grid.m)},
        {"h", format_double(spec.grid.h)},
        {"epsilon", format_double(spec.epsilon)},
        {"p", std::to_string(spec.p)},
        {"dt", format_double(tau)},
        {"steps", std::to_string(n_steps)},
        {"t_final", format_double(t_final)},
        {"first_step", cfg.discrete_laplacian_first_step ? "discrete" : "analytic"},
        {"sigma_max", format_double(traj.sigma_max)},
        {"nonlinear_iterations_total", std::to_string(traj.nonlinear_iterations_total)},
    };
    if (traj.max_energy_drift)
        traj.metadata.emplace_back("max_energy_drift", format_double(*traj.max_energy_drift));
    return traj;
}

}  // namespace kge
