#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kge/compact_operator.hpp"
#include "kge/scheme.hpp"

namespace kge {

/// sqrt(|d|_l2^2 + |forward_diff(d)|_l2^2) for d = numeric - reference.
/// Both arguments must share a grid; restrict the reference beforehand.
double error_functional(const GridFunction& numeric, const GridFunction& reference);

/// One convergence-table cell: which run produced which error.
struct ErrorRecord {
    double h = 0.0;
    double dt = 0.0;
    double epsilon = 1.0;
    int p = 1;
    double t_eval = 0.0;
    double e_value = 0.0;
    std::string scheme;
    std::string reference;
    bool failed = false;
    std::string note;
};

/// (b-a) * sum_k (lam_k^2 / symbol_k) |u_hat_k|^2, the weighted gradient
/// seminorm that appears in the discrete energy. Equals star_norm of the
/// forward difference squared, evaluated without forming the difference.
double weighted_grad_sq(const SpectralCoefficients& s);

namespace detail {
/// Energy of the level pair in st for either form; alpha = 1 gives the
/// standard energy, alpha = eps^{2p} the slow-time one. Fills the spectral
/// caches of st if absent.
double two_level_energy(SchemeState& st, const ProblemSpec& spec, double dt, double alpha);
}  // namespace detail

/// Conserved energy of the implicit scheme for the standard form:
///   |d_t u|_l2^2 + (|d_x prev|_*^2 + |d_x curr|_*^2)/2
///   + (|prev|_l2^2 + |curr|_l2^2)/2 + eps^p/(p+2) * sum |u|^{p+2} terms.
double discrete_energy(const GridFunction& prev, const GridFunction& curr,
                       double tau, const ProblemSpec& spec);

/// Same quantity evaluated through a state's cached spectra (filling them
/// if needed); what integrate() records along a run.
double discrete_energy(SchemeState& st, const ProblemSpec& spec, double tau);

/// Largest dt the semi-implicit scheme tolerates: 2*sqrt(alpha)/sqrt(e-1)
/// with e = eps^p * sigma_max, or nothing when e <= 1 (no condition).
std::optional<double> semi_implicit_dt_bound(double eps_pow_p, double sigma_max,
                                             double alpha = 1.0);

/// Linearized per-mode growth analysis of either scheme. theta is the
/// midpoint of the two characteristic roots xi of xi^2 - 2 theta xi + 1 = 0;
/// the mode is non-growing exactly when |theta| <= 1.
struct StabilityReport {
    SchemeKind kind = SchemeKind::implicit;
    double dt = 0.0;
    double alpha = 1.0;
    double epsilon = 1.0;
    int p = 1;
    double sigma_max = 0.0;
    std::vector<int> mode;        // signed wave number per storage index
    std::vector<double> lambda;   // (2/h) sin(pi l / M), signed
    std::vector<double> c;        // 3/(3 - sin^2(pi l / M)), in [1, 3/2]
    std::vector<double> theta;
    std::vector<double> xi_mag;   // larger root magnitude; 1 when |theta| <= 1
    bool unconditionally_stable = false;
    std::optional<double> dt_bound;  // semi-implicit bound when conditional
    bool stable = false;             // max |theta| <= 1
    double max_abs_theta = 0.0;
};

/// Report for the standard form (dt = tau).
StabilityReport stability_report(const PeriodicGrid& g, SchemeKind kind, double tau,
                                 double epsilon, int p, double sigma_max);

/// Report for the slow-time form (dt = k): the same analysis at tau = k/eps^p,
/// with the bound rescaled to a bound on k.
StabilityReport osc_stability_report(const PeriodicGrid& g, SchemeKind kind, double k,
                                     double epsilon, int p, double sigma_max);

/// The running bound captured by a trajectory.
double sigma_max_of(const Trajectory& t);

/// Recompute the bound from stored levels; equals the captured value when
/// every level was stored.
double sigma_from_levels(const std::vector<Snapshot>& levels, int p);

}  // namespace kge
