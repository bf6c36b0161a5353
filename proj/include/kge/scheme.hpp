#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kge/fourier.hpp"
#include "kge/grid.hpp"
#include "kge/problem.hpp"

namespace kge {

enum class SchemeKind {
    implicit,       ///< nonlinear term as the symmetric difference quotient of the potential
    semi_implicit,  ///< nonlinear term evaluated at the known middle level
};

const char* to_string(SchemeKind k);

struct NonlinearSolverConfig {
    /// Fixed-point stop: max-norm update below tol * max(1, |u|_inf).
    double tolerance = 1e-13;
    int max_iterations = 200;
};

/// Two consecutive solution levels. curr is level n, prev is level n-1.
/// dt is the step the state marches with (tau for the standard form, k for
/// the rescaled form). sigma_max_running tracks max over levels 0..n of
/// |u|_inf^p and never decreases. The spectra of both levels are cached
/// after a step so the next step costs two transforms instead of four; if
/// you mutate the values directly, call invalidate_spectra().
struct SchemeState {
    GridFunction prev;
    GridFunction curr;
    long n = 1;
    double dt = 0.0;
    double sigma_max_running = 0.0;
    std::optional<SpectralCoefficients> prev_hat;
    std::optional<SpectralCoefficients> curr_hat;

    void invalidate_spectra() {
        prev_hat.reset();
        curr_hat.reset();
    }
};

/// Pointwise difference quotient of the potential u^{p+2}/(p+2):
/// G(v,w) = (1/(p+2)) sum_{i=0..p+1} v^i w^{p+1-i}; equals v^{p+1} at v == w.
GridFunction g_quotient(const GridFunction& v, const GridFunction& w, int p);

/// Taylor starting level: u^1 = phi + c1*gamma + c2*(phi_xx - phi - eps^p phi^{p+1}).
/// Shared by the standard form (c1 = tau, c2 = tau^2/2) and the rescaled
/// form, which passes eps-scaled coefficients. With discrete_laplacian the
/// averaging-operator inverse of the second difference replaces phi_xx;
/// without it, a missing phi_xx is a ConfigError. The caller fills dt.
SchemeState taylor_first_level(const ProblemSpec& spec, double c1, double c2,
                               bool discrete_laplacian);

/// Levels u^0, u^1 for step size tau via the Taylor start above.
SchemeState first_step(const ProblemSpec& spec, double tau, bool discrete_laplacian = false);

/// One step of either compact scheme, shared by the standard equation
/// (alpha = 1) and the rescaled slow-time equation (alpha = eps^{2p}).
/// Both schemes invert (alpha/dt^2 + L/2) per Fourier mode, where L is the
/// fourth-order compact approximation of (1 - d_xx).
class CompactStepper {
public:
    CompactStepper(const PeriodicGrid& g, SchemeKind kind, double dt, double alpha,
                   double epsilon, int p, NonlinearSolverConfig solver = {},
                   double amplitude_cap = 1e12);

    /// Advance one level in place, updating the running sigma bound and the
    /// cached spectra. Returns the number of fixed-point iterations used
    /// (0 for the semi-implicit scheme). Throws BlowUpError or
    /// NonlinearSolveError; the step field of either is filled by the caller
    /// that knows the global index.
    int advance(SchemeState& st) const;

    SchemeKind kind() const { return kind_; }
    double dt() const { return dt_; }
    double alpha() const { return alpha_; }
    double eps_pow_p() const { return eps_pow_p_; }

private:
    PeriodicGrid grid_;
    SchemeKind kind_;
    double dt_;
    double alpha_;
    double eps_pow_p_;
    int p_;
    NonlinearSolverConfig solver_;
    double cap_;
    double two_inv_dt2_;
    std::vector<double> inv_mult_;  // 1/(alpha/dt^2 + (c_k lam_k^2 + 1)/2)

    void ensure_spectra(SchemeState& st) const;
    GridFunction advance_semi_implicit(SchemeState& st, SpectralCoefficients& out_hat) const;
    GridFunction advance_implicit(SchemeState& st, SpectralCoefficients& out_hat, int& iters) const;
};

/// Convenience wrapper: build a stepper for the standard equation with the
/// state's own dt and advance once. Bitwise identical to what integrate()
/// does internally.
int step(SchemeState& st, const ProblemSpec& spec, SchemeKind kind,
         const NonlinearSolverConfig& solver = {});

struct EnergySample {
    long n;
    double t;
    double value;
};

struct Snapshot {
    long n;
    double t;
    GridFunction u;
};

struct RunConfig {
    NonlinearSolverConfig solver{};
    bool discrete_laplacian_first_step = false;
    /// Energy recording stride; -1 picks the scheme default (every level for
    /// implicit, every 100 for semi-implicit), 0 disables.
    long energy_stride = -1;
    /// Store every k-th level as a snapshot; 0 stores none.
    long snapshot_stride = 0;
    /// Extra times to snapshot; each must land on a step within 1e-9 rel.
    std::vector<double> snapshot_times;
    bool enforce_stability = false;
    double amplitude_cap = 1e12;
};

struct Trajectory {
    SchemeState final_state;
    double dt = 0.0;
    long steps = 0;
    /// Running max over all levels (including the starting ones) of |u|_inf^p.
    double sigma_max = 0.0;
    std::optional<double> max_energy_drift;
    long nonlinear_iterations_total = 0;
    std::vector<EnergySample> energy;
    std::vector<Snapshot> snapshots;
    std::vector<std::pair<std::string, std::string>> metadata;
};

/// March the standard equation to t_final. t_final/tau must round to an
/// integer step count within 1e-9 relative, else ConfigError. The result of
/// the march is bitwise identical to first_step followed by repeated step().
Trajectory integrate(const ProblemSpec& spec, SchemeKind kind, double tau,
                     double t_final, const RunConfig& cfg = {});

namespace detail {

/// Step-count helper shared by all integrators: llround(t_final/dt), with a
/// ConfigError unless the product lands back on t_final within 1e-9 rel.
long resolve_step_count(double dt, double t_final);

/// The march loop shared by integrate and the rescaled-form integrator:
/// advances st to level n_steps, recording energy, snapshots, sigma, and
/// optional stability enforcement. Metadata is left to the caller.
Trajectory run_levels(const CompactStepper& stepper, SchemeState st, long n_steps,
                      const ProblemSpec& spec, const RunConfig& cfg);

}  // namespace detail

}  // namespace kge
