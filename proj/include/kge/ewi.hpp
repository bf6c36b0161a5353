#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "kge/fourier.hpp"
#include "kge/problem.hpp"

namespace kge {

struct EwiOptions {
    /// Drop the nonlinear source entirely. The recurrence is then the exact
    /// propagator of the linear equation, useful for calibration tests.
    bool include_nonlinear = true;
    double amplitude_cap = 1e12;
};

/// Gautschi-type exponential wave integrator with pseudospectral treatment
/// of the nonlinearity. Produces the reference solutions the compact
/// schemes are measured against; it shares no spatial discretisation with
/// them (trigonometric interpolation instead of finite differences), so an
/// agreement between the two is meaningful.
///
/// Per mode l with frequency w = sqrt(1 + mu^2), mu = 2 pi l / (b - a):
///   u^1   = cos(w tau) u^0 + sin(w tau)/w * gamma - tau^2/2 sinc^2(w tau/2) f^0
///   u^{n+1} = 2 cos(w tau) u^n - u^{n-1} - tau^2 sinc^2(w tau/2) f^n
/// where f = eps^p u^{p+1} is evaluated on the nodes and transformed.
class EwiSolver {
public:
    EwiSolver(const ProblemSpec& spec, double tau, EwiOptions opt = {});

    /// Advance one level. Throws BlowUpError past the amplitude cap.
    void advance();

    long level() const { return n_; }
    double tau() const { return tau_; }
    const ProblemSpec& spec() const { return spec_; }
    const GridFunction& current() const { return curr_phys_; }
    const SpectralCoefficients& current_hat() const { return curr_hat_; }
    const std::vector<double>& omega() const { return omega_; }

private:
    ProblemSpec spec_;
    double tau_;
    EwiOptions opt_;
    std::vector<double> omega_;
    std::vector<double> two_cos_;  // 2 cos(w tau)
    std::vector<double> filt_;     // tau^2 sinc^2(w tau / 2)
    SpectralCoefficients prev_hat_;
    SpectralCoefficients curr_hat_;
    GridFunction curr_phys_;
    long n_ = 1;

    SpectralCoefficients source_hat(const GridFunction& u) const;
};

/// March to t_final; the step count must resolve exactly as in integrate().
GridFunction ewi_solve(const ProblemSpec& spec, double t_final, double tau,
                       const EwiOptions& opt = {});

/// Keyed store of fine-grid reference solutions. Always caches in memory;
/// with a directory it also persists runs as CSV so repeated studies skip
/// the expensive solves. Files are named by a hash of the key and carry the
/// full key in their header line, which is verified on read. Safe to share
/// between worker threads.
class ReferenceCache {
public:
    ReferenceCache() = default;
    explicit ReferenceCache(std::string directory);

    const std::string& directory() const { return dir_; }

    /// nullopt on miss. A disk entry must match the expected grid exactly.
    std::optional<GridFunction> find(const std::string& key, const PeriodicGrid& expected);

    void store(const std::string& key, const GridFunction& u);

    long hits() const;
    long misses() const;

private:
    std::string dir_;
    mutable std::mutex mu_;
    std::map<std::string, GridFunction> mem_;
    long hits_ = 0;
    long misses_ = 0;

    std::string path_for(const std::string& key) const;
};

/// Cache key for a reference run; exact (%a formatting), so distinct
/// parameters never collide. Empty when the spec has no data_tag, which
/// disables caching for that spec.
std::string reference_key(const ProblemSpec& fine, double tau, double t_final);

/// Reference solution at t_final restricted to spec's own grid. The fine
/// grid is built from h_request by the same even-rounding rule as the
/// problem factories and must contain the study grid's nodes; tau_request
/// is adjusted to the nearest exact divisor of t_final. With a cache the
/// fine solve happens at most once per parameter set.
GridFunction reference_solution(const ProblemSpec& spec, double t_final,
                                double h_request, double tau_request,
                                ReferenceCache* cache = nullptr);

}  // namespace kge
