#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kge/diagnostics.hpp"
#include "kge/ewi.hpp"
#include "kge/oscillatory.hpp"
#include "kge/scheme.hpp"

namespace kge {

// ---------------------------------------------------------------------------
// Config files: key=value lines, '#' comments, order preserved.

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

class ConfigMap {
public:
    static ConfigMap parse(std::istream& in);
    static ConfigMap parse_file(const std::string& path);

    bool has(const std::string& key) const;
    const ConfigEntry* find(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    /// Numbers accept plain literals plus pi and power forms: "pi/8",
    /// "3*pi/4", "2^-2/3", "1/64".
    double get_number(const std::string& key, double fallback) const;
    long get_integer(const std::string& key, long fallback) const;
    bool get_flag(const std::string& key, bool fallback) const;
    std::vector<double> get_number_list(const std::string& key) const;

    /// ConfigError naming the first key outside the known set, with its line.
    void require_known(const std::vector<std::string>& known) const;

    void set(const std::string& key, const std::string& value);
    const std::vector<ConfigEntry>& entries() const { return entries_; }

private:
    std::vector<ConfigEntry> entries_;
};

/// Parse one number in the accepted grammar; ConfigError on junk.
double parse_number(const std::string& text);

// ---------------------------------------------------------------------------
// Study plans and convergence tables.

enum class StudyAxis { spatial, temporal };

enum class ProblemFamily {
    standard_torus,           ///< the plain equation on (0, 2 pi)
    oscillatory_torus,        ///< slow-time form on (0, 2 pi)
    oscillatory_whole_space,  ///< slow-time form on the truncated interval
};

const char* to_string(StudyAxis a);
const char* to_string(ProblemFamily f);
StudyAxis axis_from_string(const std::string& s);
ProblemFamily family_from_string(const std::string& s);
SchemeKind scheme_from_string(const std::string& s);
OscFirstStep first_step_mode_from_string(const std::string& s);

/// One convergence sweep: rows over epsilons, columns over a halved
/// resolution on one axis while the other axis and the final time follow
/// eps power rules. Resolutions are requests; grids are rounded to even
/// node counts and steps to exact divisors of the final time, and the
/// actual values are what lands in the table.
struct StudyPlan {
    std::string name = "study";
    StudyAxis axis = StudyAxis::spatial;
    ProblemFamily family = ProblemFamily::standard_torus;
    SchemeKind scheme = SchemeKind::semi_implicit;
    OscFirstStep osc_first_step = OscFirstStep::taylor;
    bool discrete_first_step = false;
    int p = 2;
    std::vector<double> epsilons;
    std::vector<double> full_extra_epsilons;  ///< appended when running --full
    int levels = 5;                           ///< columns; halvings = levels - 1
    double base_resolution = 0.0;  ///< h0 (spatial) or dt0 (temporal), halved per column
    double fixed_coef = 0.0;       ///< frozen axis: value = coef * eps^exponent
    double fixed_eps_exponent = 0.0;
    double final_time_coef = 1.0;  ///< t (or s) of comparison = coef * eps^exponent
    double final_time_eps_exponent = 0.0;
    double reference_h = 0.0;      ///< fine-grid request; 0 = study grid (temporal only)
    double reference_dt = 0.0;     ///< reference step request, same time variable
    double reference_dt_eps_exponent = 0.0;
    /// Compare each cell against its own solution instead of the integrator
    /// reference; every error is then exactly zero. Plumbing check only.
    bool self_reference = false;

    bool oscillatory() const { return family != ProblemFamily::standard_torus; }
    /// ConfigError on structural problems: empty rows, too few levels, a
    /// reference not at least four times finer than the finest column.
    void validate() const;
};

/// Named plans matching the published parameter grids; ConfigError for an
/// unknown name. Available: table1 table2 (standard equation, spatial and
/// temporal), table3 table4 (slow-time whole-space, spatial and temporal).
StudyPlan study_preset(const std::string& name);
std::vector<std::string> study_preset_names();

/// Build a plan from a config: an optional preset is applied first, then
/// every other key overrides. Unknown keys are rejected with line numbers.
StudyPlan plan_from_config(const ConfigMap& cfg);

struct ConvergenceCell {
    ErrorRecord record;
    std::optional<double> order;  ///< vs the previous column; absent in column 0
};

struct ConvergenceTable {
    StudyPlan plan;
    std::vector<double> epsilons;  ///< effective row list (with --full extras)
    std::vector<std::vector<ConvergenceCell>> rows;
    std::vector<int> diagonal;     ///< per row: leftmost column on the meshing diagonal
    std::vector<std::pair<std::string, std::string>> metadata;
};

/// log2(e_coarse / e_fine); std::domain_error unless both are positive.
double observed_order(double e_coarse, double e_fine);

/// Column index of the resolution matching the meshing strategy for the
/// row's epsilon (the bold entries of the published tables): full fourth
/// or second order accuracy is expected at this column and to its right.
int diagonal_column(const StudyPlan& plan, double epsilon);

struct StudyOptions {
    int workers = 1;
    bool full = false;               ///< include full_extra_epsilons
    bool enforce_stability = false;
    std::string cache_dir;           ///< reference cache directory; empty = memory only
};

/// Run the sweep: references first (one fine solve per row, cached), then
/// the table cells, optionally across worker threads. A failing cell is
/// recorded and the study continues; the assembled output is independent
/// of scheduling.
ConvergenceTable run_study(const StudyPlan& plan, const StudyOptions& options = {});

// ---------------------------------------------------------------------------
// Single runs, figure data, stability reports (the other CLI verbs).

struct RunRequest {
    ProblemFamily family = ProblemFamily::standard_torus;
    SchemeKind scheme = SchemeKind::semi_implicit;
    OscFirstStep osc_first_step = OscFirstStep::taylor;
    double epsilon = 1.0;
    int p = 2;
    double h_request = 0.0;
    double dt = 0.0;
    double t_final = 1.0;  ///< s_final for the slow-time families
    RunConfig run;
};

RunRequest run_from_config(const ConfigMap& cfg);
Trajectory execute_run(const RunRequest& req);

enum class ProfileMode { time_series, final_profile };

struct ProfileRequest {
    ProfileMode mode = ProfileMode::time_series;
    ProblemFamily family = ProblemFamily::oscillatory_torus;
    SchemeKind scheme = SchemeKind::semi_implicit;
    OscFirstStep osc_first_step = OscFirstStep::taylor;
    int p = 2;
    std::vector<double> epsilons;
    double h_request = 0.0;
    double dt = 0.0;       ///< step request, adjusted per epsilon to divide s_final
    double s_final = 1.0;
    double probe_x = 3.141592653589793;  ///< time-series probe location
};

struct ProfileSeries {
    double epsilon = 1.0;
    int m = 0;
    double probe = 0.0;                          ///< actual probe node (time series)
    std::vector<std::pair<double, double>> points;  ///< (s, v(probe,s)) or (x, v(x,s_final))
};

ProfileRequest profile_from_config(const ConfigMap& cfg);
std::vector<ProfileSeries> emit_profile(const ProfileRequest& req);

struct StabilityRequest {
    ProblemFamily family = ProblemFamily::standard_torus;
    SchemeKind scheme = SchemeKind::semi_implicit;
    double epsilon = 1.0;
    int p = 2;
    double h_request = 0.0;
    double dt = 0.0;
    /// Amplitude bound |u|_inf^p entering the frozen-coefficient analysis;
    /// defaults to the value of the family's own initial datum.
    std::optional<double> sigma_max;
};

StabilityRequest stability_from_config(const ConfigMap& cfg);
StabilityReport execute_stability(const StabilityRequest& req);

// ---------------------------------------------------------------------------
// CSV and metadata emission. All writers produce byte-identical output for
// identical inputs (fixed formats, no locale dependence).

void write_table_csv(std::ostream& out, const ConvergenceTable& table);
void write_metadata(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& kv);
void write_energy_csv(std::ostream& out, const Trajectory& traj);
void write_snapshot_csv(std::ostream& out, const GridFunction& u);
void write_profile_csv(std::ostream& out, const std::vector<ProfileSeries>& series);
void write_stability_csv(std::ostream& out, const StabilityReport& report);

}  // namespace kge
