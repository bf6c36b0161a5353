#pragma once

#include "kge/scheme.hpp"

namespace kge {

/// Starting-step choices for the slow-time form. The plain Taylor step is
/// the default. The two regularized variants replace the eps-divided
/// coefficients by bounded sine expressions; they differ in how the squared
/// coefficient is read (see osc_first_step) and agree with the Taylor step
/// to third order in the step for fixed eps.
enum class OscFirstStep {
    taylor,
    regularized_literal,
    regularized_product,
};

const char* to_string(OscFirstStep m);

/// Starting levels for the slow-time form
///   eps^{2p} v_ss - v_xx + v + eps^p v^{p+1} = 0,  s = eps^p t,
/// with step k in s. Coefficients per mode:
///   taylor:              v^1 = phi + (k/eps^p) gamma + (k^2/(2 eps^{2p})) accel
///   regularized_literal: k/eps^p -> sin(k/eps^p),  k^2/eps^{2p} -> k sin(k/eps^{2p})
///   regularized_product: k/eps^p -> sin(k/eps^p),  k^2/eps^{2p} -> (k/eps^p) sin(k/eps^p)
/// where accel = phi_xx - phi - eps^p phi^{p+1}. At eps = 1 the Taylor
/// variant reproduces first_step bit-for-bit.
SchemeState osc_first_step(const ProblemSpec& spec, double k,
                           OscFirstStep mode = OscFirstStep::taylor,
                           bool discrete_laplacian = false);

/// One step of either scheme for the slow-time form (alpha = eps^{2p}).
int osc_step(SchemeState& st, const ProblemSpec& spec, SchemeKind kind,
             const NonlinearSolverConfig& solver = {});

/// March the slow-time form to s_final. Same contract as integrate().
Trajectory osc_integrate(const ProblemSpec& spec, SchemeKind kind, double k,
                         double s_final, const RunConfig& cfg = {},
                         OscFirstStep first = OscFirstStep::taylor);

/// Conserved energy of the implicit slow-time scheme: the standard energy
/// with the kinetic term scaled by eps^{2p}. Equals discrete_energy when
/// eps = 1 and k = tau.
double osc_energy(SchemeState& st, const ProblemSpec& spec, double k);

/// Max |v_j| over the outer fraction of the interval adjacent to the
/// periodic boundary. Small values certify that a truncated whole-space
/// domain was wide enough.
double boundary_band_max(const GridFunction& v, double fraction = 0.1);

}  // namespace kge
