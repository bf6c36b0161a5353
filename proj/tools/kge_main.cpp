// Command-line front end: run / study / profile / stability, all driven by
// key=value config files. Numerical work lives in the library; this file
// only wires configs to calls and results to files.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kge/errors.hpp"
#include "kge/study.hpp"

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& dir, const std::string& name,
                const std::function<void(std::ostream&)>& emit) {
    fs::create_directories(dir);
    const fs::path path = dir / name;
    std::ofstream out(path);
    if (!out) throw kge::ConfigError("cannot open " + path.string() + " for writing");
    emit(out);
    out.flush();
    if (!out) throw kge::ConfigError("write failed for " + path.string());
}

int do_run(const kge::ConfigMap& cfg, const fs::path& dir, bool enforce) {
    kge::RunRequest req = kge::run_from_config(cfg);
    req.run.enforce_stability = enforce;
    const kge::Trajectory traj = kge::execute_run(req);

    write_file(dir, "solution.csv",
               [&](std::ostream& out) { kge::write_snapshot_csv(out, traj.final_state.curr); });
    if (!traj.energy.empty())
        write_file(dir, "energy.csv", [&](std::ostream& out) { kge::write_energy_csv(out, traj); });
    for (const kge::Snapshot& snap : traj.snapshots) {
        char name[48];
        std::snprintf(name, sizeof name, "snapshot_%08ld.csv", snap.n);
        write_file(dir, name, [&](std::ostream& out) { kge::write_snapshot_csv(out, snap.u); });
    }
    write_file(dir, "metadata.txt",
               [&](std::ostream& out) { kge::write_metadata(out, traj.metadata); });

    std::cout << "run: " << traj.steps << " steps of " << traj.dt << ", sigma_max " << traj.sigma_max;
    if (traj.max_energy_drift.has_value()) std::cout << ", energy drift " << *traj.max_energy_drift;
    std::cout << "\n";
    return 0;
}

int do_study(const kge::ConfigMap& cfg, const fs::path& dir, const kge::StudyOptions& opts) {
    const kge::StudyPlan plan = kge::plan_from_config(cfg);
    const kge::ConvergenceTable table = kge::run_study(plan, opts);

    write_file(dir, plan.name + ".csv",
               [&](std::ostream& out) { kge::write_table_csv(out, table); });
    write_file(dir, plan.name + "_metadata.txt",
               [&](std::ostream& out) { kge::write_metadata(out, table.metadata); });

    int failed = 0;
    for (const auto& row : table.rows)
        for (const auto& cell : row)
            if (cell.record.failed) ++failed;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::printf("eps %-12g", table.epsilons[r]);
        for (const auto& cell : table.rows[r]) {
            if (cell.record.failed)
                std::printf("     failed");
            else
                std::printf("  %9.3e", cell.record.e_value);
        }
        std::printf("\n%16s", "order");
        for (std::size_t j = 0; j < table.rows[r].size(); ++j) {
            const auto& cell = table.rows[r][j];
            if (cell.order.has_value())
                std::printf("  %9.2f", *cell.order);
            else
                std::printf("  %9s", "-");
        }
        std::printf("\n");
    }
    if (failed > 0) {
        std::cerr << failed << " table cell(s) failed; see " << (dir / (plan.name + ".csv")).string()
                  << "\n";
        return 2;
    }
    return 0;
}

int do_profile(const kge::ConfigMap& cfg, const fs::path& dir) {
    const kge::ProfileRequest req = kge::profile_from_config(cfg);
    const std::vector<kge::ProfileSeries> series = kge::emit_profile(req);

    write_file(dir, "profile.csv",
               [&](std::ostream& out) { kge::write_profile_csv(out, series); });
    std::vector<std::pair<std::string, std::string>> md;
    md.emplace_back("mode", req.mode == kge::ProfileMode::time_series ? "time_series" : "final_profile");
    md.emplace_back("family", kge::to_string(req.family));
    md.emplace_back("scheme", kge::to_string(req.scheme));
    md.emplace_back("p", std::to_string(req.p));
    for (const kge::ProfileSeries& s : series) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", s.epsilon);
        md.emplace_back("epsilon", buf);
        md.emplace_back("m", std::to_string(s.m));
        std::snprintf(buf, sizeof buf, "%.17g", s.probe);
        md.emplace_back(req.mode == kge::ProfileMode::time_series ? "probe_x" : "profile_time", buf);
    }
    write_file(dir, "profile_metadata.txt",
               [&](std::ostream& out) { kge::write_metadata(out, md); });
    std::cout << "profile: " << series.size() << " series written\n";
    return 0;
}

int do_stability(const kge::ConfigMap& cfg, const fs::path& dir) {
    const kge::StabilityRequest req = kge::stability_from_config(cfg);
    const kge::StabilityReport rep = kge::execute_stability(req);

    write_file(dir, "stability.csv",
               [&](std::ostream& out) { kge::write_stability_csv(out, rep); });
    std::vector<std::pair<std::string, std::string>> md;
    char buf[64];
    md.emplace_back("scheme", kge::to_string(rep.kind));
    std::snprintf(buf, sizeof buf, "%.17g", rep.dt);
    md.emplace_back("dt", buf);
    std::snprintf(buf, sizeof buf, "%.17g", rep.epsilon);
    md.emplace_back("epsilon", buf);
    md.emplace_back("p", std::to_string(rep.p));
    std::snprintf(buf, sizeof buf, "%.17g", rep.sigma_max);
    md.emplace_back("sigma_max", buf);
    md.emplace_back("stable", rep.stable ? "1" : "0");
    md.emplace_back("unconditionally_stable", rep.unconditionally_stable ? "1" : "0");
    std::snprintf(buf, sizeof buf, "%.17g", rep.max_abs_theta);
    md.emplace_back("max_abs_theta", buf);
    if (rep.dt_bound.has_value()) {
        std::snprintf(buf, sizeof buf, "%.17g", *rep.dt_bound);
        md.emplace_back("dt_bound", buf);
    }
    write_file(dir, "stability_metadata.txt",
               [&](std::ostream& out) { kge::write_metadata(out, md); });

    if (rep.stable)
        std::cout << "stable (max |theta| = " << rep.max_abs_theta << ")\n";
    else
        std::cout << "UNSTABLE (max |theta| = " << rep.max_abs_theta << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourth-order compact finite difference solver for the weakly "
                 "nonlinear Klein-Gordon equation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string cache_dir;
    if (const char* env = std::getenv("KGE_CACHE_DIR")) cache_dir = env;
    int workers = 1;
    bool enforce = false;
    bool full = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "parameter file (key=value lines)")->required();
        cmd->add_option("--out", out_dir, "output directory (default: current)");
        cmd->add_flag("--enforce-stability", enforce,
                      "fail instead of warn when the step violates the stability bound");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "integrate one problem and dump the results");
    add_common(run_cmd);
    CLI::App* study_cmd = app.add_subcommand("study", "produce a convergence table");
    add_common(study_cmd);
    study_cmd->add_option("--workers", workers, "concurrent table cells (default 1)");
    study_cmd->add_flag("--full", full, "include the expensive epsilon rows");
    study_cmd->add_option("--cache-dir", cache_dir,
                          "reference cache directory (default: $KGE_CACHE_DIR)");
    CLI::App* profile_cmd = app.add_subcommand("profile", "emit solution profiles for plotting");
    add_common(profile_cmd);
    CLI::App* stability_cmd = app.add_subcommand("stability", "linearized stability report");
    add_common(stability_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        const kge::ConfigMap cfg = kge::ConfigMap::parse_file(config_path);
        const fs::path dir(out_dir);
        if (run_cmd->parsed()) return do_run(cfg, dir, enforce);
        if (study_cmd->parsed()) {
            kge::StudyOptions opts;
            opts.workers = workers;
            opts.full = full;
            opts.enforce_stability = enforce;
            opts.cache_dir = cache_dir;
            return do_study(cfg, dir, opts);
        }
        if (profile_cmd->parsed()) return do_profile(cfg, dir);
        return do_stability(cfg, dir);
    } catch (const kge::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const kge::SolverFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
