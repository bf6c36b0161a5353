#include "kge/ewi.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "kge/errors.hpp"
#include "kge/parallel.hpp"
#include "kge/scheme.hpp"

namespace kge {

namespace {

void check_finite(const GridFunction& u, double cap, long step) {
    for (int j = 0; j < u.size(); ++j) {
        const double x = u[j];
        if (!std::isfinite(x)) throw BlowUpError("reference solution left the finite range", step, x);
        if (std::abs(x) > cap) {
            std::ostringstream os;
            os << "reference amplitude " << std::abs(x) << " exceeds the blow-up cap " << cap;
            throw BlowUpError(os.str(), step, std::abs(x));
        }
    }
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

EwiSolver::EwiSolver(const ProblemSpec& spec, double tau, EwiOptions opt)
    : spec_(spec),
      tau_(tau),
      opt_(opt),
      prev_hat_(spec.grid),
      curr_hat_(spec.grid),
      curr_phys_(spec.grid) {
    spec_.validate();
    if (!(tau > 0.0)) throw ConfigError("time step must be positive");

    const int m = spec_.grid.m;
    const double len = spec_.grid.length();
    omega_.resize(static_cast<std::size_t>(m));
    two_cos_.resize(static_cast<std::size_t>(m));
    filt_.resize(static_cast<std::size_t>(m));
    std::vector<double> cos_t(static_cast<std::size_t>(m));
    std::vector<double> vel_t(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const int l = SpectralCoefficients::mode_of_index(k, m);
        const double mu = 2.0 * M_PI * static_cast<double>(l) / len;
        const double w = std::sqrt(1.0 + mu * mu);
        const double s = sinc(0.5 * w * tau_);
        omega_[static_cast<std::size_t>(k)] = w;
        cos_t[static_cast<std::size_t>(k)] = std::cos(w * tau_);
        vel_t[static_cast<std::size_t>(k)] = std::sin(w * tau_) / w;
        two_cos_[static_cast<std::size_t>(k)] = 2.0 * std::cos(w * tau_);
        filt_[static_cast<std::size_t>(k)] = tau_ * tau_ * s * s;
    }

    const GridFunction u0 = sample(spec_.grid, spec_.phi);
    const GridFunction g0 = sample(spec_.grid, spec_.gamma);
    prev_hat_ = dft(u0);
    const SpectralCoefficients gamma_hat = dft(g0);
    const SpectralCoefficients f0 = source_hat(u0);
    for (int k = 0; k < m; ++k) {
        const auto i = static_cast<std::size_t>(k);
        curr_hat_.c[i] = cos_t[i] * prev_hat_.c[i] + vel_t[i] * gamma_hat.c[i] -
                         0.5 * filt_[i] * f0.c[i];
    }
    curr_phys_ = inverse_dft(curr_hat_);
    check_finite(curr_phys_, opt_.amplitude_cap, 1);
}

SpectralCoefficients EwiSolver::source_hat(const GridFunction& u) const {
    if (!opt_.include_nonlinear) return SpectralCoefficients(spec_.grid);
    GridFunction f(spec_.grid);
    kernels::power_scaled(f.values(), u.values(), spec_.p + 1, spec_.eps_pow_p());
    return dft(f);
}

void EwiSolver::advance() {
    const SpectralCoefficients f = source_hat(curr_phys_);
    SpectralCoefficients next(spec_.grid);
    kernels::oscillator_update(next.c, curr_hat_.c, prev_hat_.c, f.c, two_cos_, filt_);
    next.symmetrize();  // carried spectra; see CompactStepper::advance
    prev_hat_ = std::move(curr_hat_);
    curr_hat_ = std::move(next);
    curr_phys_ = inverse_dft(curr_hat_);
    ++n_;
    check_finite(curr_phys_, opt_.amplitude_cap, n_);
}

GridFunction ewi_solve(const ProblemSpec& spec, double t_final, double tau,
                       const EwiOptions& opt) {
    const long steps = detail::resolve_step_count(tau, t_final);
    EwiSolver solver(spec, tau, opt);
    while (solver.level() < steps) solver.advance();
    return solver.current();
}

ReferenceCache::ReferenceCache(std::string directory) : dir_(std::move(directory)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::string ReferenceCache::path_for(const std::string& key) const {
    char name[32];
    std::snprintf(name, sizeof name, "%016llx.csv",
                  static_cast<unsigned long long>(fnv1a(key)));
    return (std::filesystem::path(dir_) / name).string();
}

std::optional<GridFunction> ReferenceCache::find(const std::string& key,
                                                const PeriodicGrid& expected) {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = mem_.find(key); it != mem_.end() && it->second.grid() == expected) {
        ++hits_;
        return it->second;
    }
    if (!dir_.empty()) {
        std::ifstream in(path_for(key));
        if (in) {
            std::string line;
            if (std::getline(in, line) && line == "# key=" + key && std::getline(in, line)) {
                std::vector<double> values;
                values.reserve(static_cast<std::size_t>(expected.m));
                while (std::getline(in, line)) {
                    const auto comma = line.find(',');
                    if (comma == std::string::npos) break;
                    values.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
                }
                if (static_cast<int>(values.size()) == expected.m) {
                    GridFunction u(expected, std::move(values));
                    mem_.insert_or_assign(key, u);
                    ++hits_;
                    return u;
                }
            }
        }
    }
    ++misses_;
    return std::nullopt;
}

void ReferenceCache::store(const std::string& key, const GridFunction& u) {
    std::lock_guard<std::mutex> lock(mu_);
    mem_.insert_or_assign(key, u);
    if (dir_.empty()) return;
    const std::string path = path_for(key);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigError("cannot write reference cache file " + tmp);
        out << "# key=" << key << "\nx,u\n";
        char row[80];
        for (int j = 0; j < u.size(); ++j) {
            std::snprintf(row, sizeof row, "%.17g,%.17g\n", u.grid().node(j), u[j]);
            out << row;
        }
        if (!out) throw ConfigError("write failed for reference cache file " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

long ReferenceCache::hits() const {
    std::lock_guard<std::mutex> lock(mu_);
    return hits_;
}

long ReferenceCache::misses() const {
    std::lock_guard<std::mutex> lock(mu_);
    return misses_;
}

std::string reference_key(const ProblemSpec& fine, double tau, double t_final) {
    if (fine.data_tag.empty()) return {};
    char buf[256];
    std::snprintf(buf, sizeof buf, "|a=%a|b=%a|m=%d|eps=%a|p=%d|tau=%a|t=%a",
                  fine.grid.a, fine.grid.b, fine.grid.m, fine.epsilon, fine.p, tau,
                  t_final);
    return "ewi|" + fine.data_tag + buf;
}

GridFunction reference_solution(const ProblemSpec& spec, double t_final,
                                double h_request, double tau_request,
                                ReferenceCache* cache) {
    spec.validate();
    if (!(h_request > 0.0)) throw ConfigError("reference mesh size must be positive");
    if (!(tau_request > 0.0)) throw ConfigError("reference time step must be positive");
    const double len = spec.grid.length();
    const int fine_m = 2 * static_cast<int>(std::lround(len / (2.0 * h_request)));
    if (fine_m < 4) throw ConfigError("reference mesh size too coarse for the interval");
    if (fine_m % spec.grid.m != 0) {
        std::ostringstream os;
        os << "reference grid (m=" << fine_m << ") does not contain the study grid (m="
           << spec.grid.m << ")";
        throw ConfigError(os.str());
    }
    ProblemSpec fine = spec;
    fine.grid = PeriodicGrid(spec.grid.a, spec.grid.b, fine_m);

    const long steps = std::max<long>(1, std::llround(t_final / tau_request));
    const double tau = t_final / static_cast<double>(steps);
    const std::string key = reference_key(fine, tau, t_final);
    if (cache != nullptr && !key.empty()) {
        if (auto hit = cache->find(key, fine.grid)) return restrict_to(*hit, spec.grid);
    }
    GridFunction u = ewi_solve(fine, t_final, tau);
    if (cache != nullptr && !key.empty()) cache->store(key, u);
    return restrict_to(u, spec.grid);
}

}  // namespace kge
