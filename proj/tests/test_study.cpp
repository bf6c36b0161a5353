#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "kge/errors.hpp"
#include "kge/study.hpp"

using namespace kge;

namespace {

ConfigMap config_from(const std::string& text) {
    std::istringstream in(text);
    return ConfigMap::parse(in);
}

int caught_line(const std::string& text, const std::string& needle) {
    try {
        plan_from_config(config_from(text));
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
        return e.line();
    }
    return -2;
}

int sign_changes(const std::vector<std::pair<double, double>>& pts) {
    int n = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i - 1].second * pts[i].second < 0.0) ++n;
    return n;
}

}  // namespace

TEST_CASE("number grammar") {
    CHECK(parse_number("pi/8") == M_PI / 8.0);
    CHECK(parse_number("3*pi/4") == 3.0 * M_PI / 4.0);
    CHECK(parse_number("2^-2/3") == std::pow(2.0, -2.0 / 3.0));
    CHECK(parse_number("1/64") == 0.015625);
    CHECK(parse_number("2e-5") == 2e-5);
    CHECK(parse_number(" pi ") == M_PI);
    CHECK(parse_number("1 / 64") == 0.015625);
    CHECK(parse_number("4^0.5") == 2.0);

    CHECK_THROWS_AS(parse_number("banana"), ConfigError);
    CHECK_THROWS_AS(parse_number("3pi"), ConfigError);
    CHECK_THROWS_AS(parse_number("2^"), ConfigError);
    CHECK_THROWS_AS(parse_number("1//2"), ConfigError);
    CHECK_THROWS_AS(parse_number(""), ConfigError);
}

TEST_CASE("config parsing and lookup") {
    const ConfigMap cfg = config_from(
        "# leading comment\n"
        "a = 1 # trailing comment\n"
        "\n"
        "flag = on\n"
        "list = 1, 1/2, 2^-2\n"
        "text = hello there\n");
    CHECK(cfg.has("a"));
    CHECK_FALSE(cfg.has("missing"));
    CHECK(cfg.find("a")->value == "1");
    CHECK(cfg.find("a")->line == 2);
    CHECK(cfg.get_number("a", 0.0) == 1.0);
    CHECK(cfg.get_number("missing", 7.5) == 7.5);
    CHECK(cfg.get_integer("a", 0) == 1);
    CHECK(cfg.get_flag("flag", false));
    CHECK_FALSE(cfg.get_flag("missing", false));
    CHECK(cfg.get_string("text", "") == "hello there");

    const auto xs = cfg.get_number_list("list");
    REQUIRE(xs.size() == 3);
    CHECK(xs[0] == 1.0);
    CHECK(xs[1] == 0.5);
    CHECK(xs[2] == 0.25);
    CHECK(cfg.get_number_list("missing").empty());

    CHECK_THROWS_AS(cfg.get_number("text", 0.0), ConfigError);
    CHECK_THROWS_AS(cfg.require_known({"a", "flag", "list"}), ConfigError);
    try {
        cfg.require_known({"a", "flag", "list", "text"});
    } catch (...) {
        FAIL("known set should pass");
    }
}

TEST_CASE("config parse errors carry line numbers") {
    try {
        config_from("a=1\na=2\n");
        FAIL("duplicate accepted");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
    try {
        config_from("a=1\njust words\n");
        FAIL("missing = accepted");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(config_from(" = 3\n"), ConfigError);
    try {
        config_from("x=1\ny=2.5\n").get_integer("y", 0);
        FAIL("non-integer accepted");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(config_from("f=maybe\n").get_flag("f", false), ConfigError);
}

TEST_CASE("config set overrides or appends") {
    ConfigMap cfg = config_from("a=1\n");
    cfg.set("a", "9");
    cfg.set("b", "2");
    CHECK(cfg.get_number("a", 0.0) == 9.0);
    CHECK(cfg.get_number("b", 0.0) == 2.0);
    CHECK(cfg.entries().size() == 2);
}

TEST_CASE("preset parameter grids") {
    const StudyPlan t1 = study_preset("table1");
    CHECK(t1.axis == StudyAxis::spatial);
    CHECK(t1.family == ProblemFamily::standard_torus);
    CHECK(t1.scheme == SchemeKind::semi_implicit);
    CHECK(t1.p == 2);
    CHECK(t1.epsilons == std::vector<double>{1.0, 0.25, 0.0625});
    CHECK(t1.full_extra_epsilons == std::vector<double>{1.0 / 64.0});
    CHECK(t1.levels == 5);
    CHECK(t1.base_resolution == M_PI / 8.0);
    CHECK(t1.fixed_coef == 2e-5);
    CHECK(t1.final_time_eps_exponent == -2.0);
    CHECK(t1.reference_h == M_PI / 512.0);
    CHECK(t1.reference_dt == 2e-5);

    const StudyPlan t2 = study_preset("table2");
    CHECK(t2.axis == StudyAxis::temporal);
    CHECK(t2.epsilons.size() == 5);
    CHECK(t2.levels == 6);
    CHECK(t2.base_resolution == 0.1);
    CHECK(t2.fixed_coef == M_PI / 256.0);
    CHECK(t2.reference_h == 0.0);
    CHECK(t2.reference_dt == 2e-5);

    const StudyPlan t3 = study_preset("table3");
    CHECK(t3.axis == StudyAxis::spatial);
    CHECK(t3.family == ProblemFamily::oscillatory_whole_space);
    CHECK(t3.p == 1);
    CHECK(t3.epsilons == std::vector<double>{1.0, 0.0625});
    CHECK(t3.levels == 4);
    CHECK(t3.base_resolution == 0.5);
    CHECK(t3.fixed_coef == 1e-4);
    CHECK(t3.fixed_eps_exponent == 2.0 / 3.0);
    CHECK(t3.reference_h == 1.0 / 64.0);

    const StudyPlan t4 = study_preset("table4");
    CHECK(t4.axis == StudyAxis::temporal);
    CHECK(t4.family == ProblemFamily::oscillatory_whole_space);
    CHECK(t4.p == 1);
    REQUIRE(t4.epsilons.size() == 5);
    CHECK(t4.epsilons[1] == std::pow(2.0, -2.0 / 3.0));
    CHECK(t4.epsilons[4] == std::pow(2.0, -8.0 / 3.0));
    CHECK(t4.levels == 6);
    CHECK(t4.base_resolution == 0.1);
    CHECK(t4.fixed_coef == 1.0 / 64.0);

    for (const std::string& name : study_preset_names()) study_preset(name).validate();
    CHECK(study_preset_names() ==
          std::vector<std::string>{"table1", "table2", "table3", "table4"});
    CHECK_THROWS_AS(study_preset("table9"), ConfigError);
}

TEST_CASE("plan validation rejects structural problems") {
    StudyPlan plan = study_preset("table1");
    plan.reference_h = M_PI / 256.0;  // only 2x finer than the last column
    CHECK_THROWS_AS(plan.validate(), ConfigError);

    plan = study_preset("table2");
    plan.reference_dt = 0.01;
    CHECK_THROWS_AS(plan.validate(), ConfigError);

    plan = study_preset("table1");
    plan.levels = 2;
    CHECK_THROWS_AS(plan.validate(), ConfigError);

    plan = study_preset("table1");
    plan.epsilons.push_back(2.0);
    CHECK_THROWS_AS(plan.validate(), ConfigError);

    plan = study_preset("table1");
    plan.epsilons = {};
    CHECK_THROWS_AS(plan.validate(), ConfigError);

    // Self-reference short-circuits the reference checks entirely.
    plan = study_preset("table1");
    plan.reference_h = 0.0;
    plan.reference_dt = 0.0;
    plan.self_reference = true;
    plan.validate();
}

TEST_CASE("plan from config") {
    const StudyPlan plan = plan_from_config(config_from(
        "name=tiny\n"
        "axis=temporal\n"
        "family=torus\n"
        "scheme=implicit\n"
        "first_step=discrete\n"
        "p=1\n"
        "epsilons=1,1/2\n"
        "levels=3\n"
        "base_dt=0.2\n"
        "fixed_h=pi/8\n"
        "t_final=1\n"
        "ref_dt=1e-2\n"));
    CHECK(plan.name == "tiny");
    CHECK(plan.axis == StudyAxis::temporal);
    CHECK(plan.scheme == SchemeKind::implicit);
    CHECK(plan.discrete_first_step);
    CHECK(plan.p == 1);
    CHECK(plan.epsilons == std::vector<double>{1.0, 0.5});
    CHECK(plan.levels == 3);
    CHECK(plan.base_resolution == 0.2);
    CHECK(plan.fixed_coef == M_PI / 8.0);
    CHECK(plan.final_time_coef == 1.0);
    CHECK(plan.reference_dt == 1e-2);
    CHECK_FALSE(plan.self_reference);

    // A preset is a starting point; later keys override it.
    const StudyPlan clipped = plan_from_config(config_from(
        "preset=table1\n"
        "epsilons=1,0.25\n"));
    CHECK(clipped.epsilons == std::vector<double>{1.0, 0.25});
    CHECK(clipped.levels == 5);
    CHECK(clipped.base_resolution == M_PI / 8.0);

    const StudyPlan self = plan_from_config(config_from(
        "axis=temporal\n"
        "epsilons=1\n"
        "levels=3\n"
        "base_dt=0.1\n"
        "fixed_h=pi/8\n"
        "t_final=0.4\n"
        "reference=self\n"));
    CHECK(self.self_reference);
}

TEST_CASE("plan config errors point at the offending line") {
    CHECK(caught_line("axis=spatial\nepsilons=1\nbase_dt=0.1\n", "base_dt") == 3);
    CHECK(caught_line("axis=spatial\nepsilons=1\nfixed_h=0.3\n", "fixed_h") == 3);
    CHECK(caught_line("axis=temporal\nepsilons=1\nbase_h=0.5\n", "base_h") == 3);
    CHECK(caught_line("axis=temporal\nepsilons=1\nfixed_dt=0.5\n", "fixed_dt") == 3);
    CHECK(caught_line("axis=temporal\nepsilons=1\nref_h=0.01\n", "ref_h") == 3);
    CHECK(caught_line("axis=temporal\nfixed_dt_eps_exp=1\n", "fixed_dt_eps_exp") == 2);
    CHECK(caught_line("axis=temporal\nbogus=3\n", "bogus") == 2);
    CHECK(caught_line("first_step=maybe\nepsilons=1\n", "first_step") == 1);
    CHECK(caught_line("reference=oracle\nepsilons=1\n", "reference") == 1);
    CHECK(caught_line("axis=diagonal\n", "axis") == 1);
    CHECK(caught_line("family=plane\n", "family") == 1);
    CHECK(caught_line("scheme=explicit\n", "scheme") == 1);
}

TEST_CASE("observed order") {
    CHECK(observed_order(1.50e-2, 9.58e-4) == doctest::Approx(3.969).epsilon(1e-3));
    const double y = 0.3;
    CHECK(observed_order(8.0 * y, y) == 3.0);
    CHECK_THROWS_AS(observed_order(0.0, 1e-3), std::domain_error);
    CHECK_THROWS_AS(observed_order(1e-3, -1e-3), std::domain_error);
}

TEST_CASE("diagonal columns match the published bold entries") {
    const StudyPlan t1 = study_preset("table1");
    CHECK(diagonal_column(t1, 1.0) == 1);
    CHECK(diagonal_column(t1, 0.25) == 2);
    CHECK(diagonal_column(t1, 0.0625) == 3);
    CHECK(diagonal_column(t1, 1.0 / 64.0) == 4);
    CHECK(diagonal_column(t1, std::pow(2.0, -12)) == 4);  // clamped to the last column

    const StudyPlan t2 = study_preset("table2");
    CHECK(diagonal_column(t2, 1.0) == 0);
    CHECK(diagonal_column(t2, 0.5) == 1);
    CHECK(diagonal_column(t2, 0.25) == 2);
    CHECK(diagonal_column(t2, 0.125) == 3);
    CHECK(diagonal_column(t2, 0.0625) == 4);

    const StudyPlan t3 = study_preset("table3");
    CHECK(diagonal_column(t3, 1.0) == 1);
    CHECK(diagonal_column(t3, 0.0625) == 2);
    CHECK(diagonal_column(t3, 1.0 / 256.0) == 3);

    const StudyPlan t4 = study_preset("table4");
    CHECK(diagonal_column(t4, 1.0) == 0);
    CHECK(diagonal_column(t4, std::pow(2.0, -2.0 / 3.0)) == 1);
    CHECK(diagonal_column(t4, std::pow(2.0, -4.0 / 3.0)) == 2);
    CHECK(diagonal_column(t4, 0.25) == 3);
    CHECK(diagonal_column(t4, std::pow(2.0, -8.0 / 3.0)) == 4);
}

TEST_CASE("self-reference study yields exact zeros and no orders") {
    StudyPlan plan;
    plan.name = "plumbing";
    plan.axis = StudyAxis::temporal;
    plan.epsilons = {1.0, 0.5};
    plan.levels = 3;
    plan.base_resolution = 0.1;
    plan.fixed_coef = 2.0 * M_PI / 16.0;
    plan.final_time_coef = 0.4;
    plan.self_reference = true;

    const ConvergenceTable table = run_study(plan);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.diagonal == std::vector<int>{0, 1});
    for (const auto& row : table.rows) {
        REQUIRE(row.size() == 3);
        for (const auto& cell : row) {
            CHECK_FALSE(cell.record.failed);
            CHECK(cell.record.e_value == 0.0);
            CHECK(cell.record.reference == "self");
            CHECK_FALSE(cell.order.has_value());
        }
    }

    std::ostringstream csv;
    write_table_csv(csv, table);
    const std::string text = csv.str();
    std::size_t zeros = 0;
    for (std::size_t at = text.find("0.00000e+00"); at != std::string::npos;
         at = text.find("0.00000e+00", at + 1))
        ++zeros;
    CHECK(zeros == 6);
    CHECK(text.find("nan") == std::string::npos);

    bool saw_self = false;
    for (const auto& [k, v] : table.metadata) {
        if (k == "reference") saw_self = v == "self";
        CHECK(k != "cache_hits");  // no cache in self-reference mode
    }
    CHECK(saw_self);
}

TEST_CASE("temporal study converges at second order and is scheduling independent") {
    StudyPlan plan;
    plan.name = "dt-sweep";
    plan.axis = StudyAxis::temporal;
    plan.epsilons = {1.0, 0.5};
    plan.levels = 3;
    plan.base_resolution = 0.2;
    // m = 64 keeps the fixed-axis spatial error far below the coarsest dt error.
    plan.fixed_coef = 2.0 * M_PI / 64.0;
    plan.final_time_coef = 1.2;
    plan.reference_dt = 1e-3;
    plan.validate();

    StudyOptions serial;
    serial.workers = 1;
    const ConvergenceTable one = run_study(plan, serial);

    for (const auto& row : one.rows) {
        REQUIRE(row.size() == 3);
        CHECK(row[0].record.e_value > row[1].record.e_value);
        CHECK(row[1].record.e_value > row[2].record.e_value);
        REQUIRE(row[2].order.has_value());
        CHECK(*row[2].order > 1.5);
        CHECK(*row[2].order < 2.5);
        CHECK(row[0].record.reference == "ewi_fp");
    }

    // One reference per row, refetched from cache by every cell.
    bool hits = false, misses = false;
    for (const auto& [k, v] : one.metadata) {
        if (k == "cache_hits") hits = v == "6";
        if (k == "cache_misses") misses = v == "2";
    }
    CHECK(hits);
    CHECK(misses);

    StudyOptions pooled;
    pooled.workers = 4;
    const ConvergenceTable many = run_study(plan, pooled);
    const ConvergenceTable again = run_study(plan, pooled);

    std::ostringstream c1, c4, c4b;
    write_table_csv(c1, one);
    write_table_csv(c4, many);
    write_table_csv(c4b, again);
    CHECK(c1.str() == c4.str());  // bytes, not tolerances
    CHECK(c4.str() == c4b.str());

    std::ostringstream m4, m4b;
    write_metadata(m4, many.metadata);
    write_metadata(m4b, again.metadata);
    CHECK(m4.str() == m4b.str());
}

TEST_CASE("unstable cells fail alone and poison only their order entries") {
    StudyPlan plan;
    plan.name = "coarse-start";
    plan.axis = StudyAxis::temporal;
    plan.epsilons = {1.0};
    plan.levels = 3;
    plan.base_resolution = 1.6;
    plan.fixed_coef = 2.0 * M_PI / 16.0;
    plan.final_time_coef = 8.0;
    plan.reference_dt = 1e-2;
    plan.validate();

    StudyOptions opt;
    opt.enforce_stability = true;  // dt = 1.6 and 0.8 both exceed the bound
    const ConvergenceTable table = run_study(plan, opt);

    REQUIRE(table.rows.size() == 1);
    const auto& row = table.rows[0];
    REQUIRE(row.size() == 3);
    CHECK(row[0].record.failed);
    CHECK(row[1].record.failed);
    CHECK_FALSE(row[2].record.failed);
    CHECK_FALSE(row[0].record.note.empty());
    CHECK(row[2].record.e_value > 0.0);
    for (const auto& cell : row) CHECK_FALSE(cell.order.has_value());

    std::ostringstream csv;
    write_table_csv(csv, table);
    const std::string text = csv.str();
    std::size_t nans = 0;
    for (std::size_t at = text.find("nan"); at != std::string::npos; at = text.find("nan", at + 1))
        ++nans;
    CHECK(nans == 2);

    bool counted = false;
    for (const auto& [k, v] : table.metadata)
        if (k == "row0_failed_cells") counted = v == "2";
    CHECK(counted);
}

TEST_CASE("table csv format is frozen") {
    ConvergenceTable table;
    table.plan.axis = StudyAxis::spatial;
    table.epsilons = {0.5};
    table.rows.resize(1);
    ConvergenceCell c0, c1, c2;
    c0.record.h = 0.5;
    c0.record.e_value = 1.5e-2;
    c1.record.h = 0.25;
    c1.record.e_value = 9.58e-4;
    c1.order = 3.97;
    c2.record.h = 0.125;
    c2.record.failed = true;
    table.rows[0] = {c0, c1, c2};

    std::ostringstream out;
    write_table_csv(out, table);
    CHECK(out.str() ==
          "epsilon,resolution,error,order\n"
          "0.5,0.5,1.50000e-02,\n"
          "0.5,0.25,9.58000e-04,3.97\n"
          "0.5,0.125,nan,\n");

    std::ostringstream md;
    write_metadata(md, {{"a", "1"}, {"b", "x y"}});
    CHECK(md.str() == "a=1\nb=x y\n");
}

TEST_CASE("profile csv format is frozen") {
    ProfileSeries s;
    s.epsilon = 0.5;
    s.points = {{0.0, 3.0}, {0.25, -1.5}};
    std::ostringstream out;
    write_profile_csv(out, {s});
    CHECK(out.str() ==
          "epsilon,coord,value\n"
          "0.5,0,3\n"
          "0.5,0.25,-1.5\n");
}

TEST_CASE("run request parsing") {
    const RunRequest req = run_from_config(config_from(
        "family=torus\n"
        "scheme=implicit\n"
        "m=16\n"
        "dt=0.05\n"
        "t_final=0.2\n"
        "energy_stride=2\n"));
    CHECK(req.scheme == SchemeKind::implicit);
    CHECK(req.h_request == 2.0 * M_PI / 16.0);
    CHECK(req.dt == 0.05);
    CHECK(req.run.energy_stride == 2);

    const Trajectory traj = execute_run(req);
    CHECK(traj.steps == 4);
    CHECK(traj.final_state.n == 4);

    CHECK_THROWS_AS(run_from_config(config_from("m=15\ndt=0.1\nt_final=1\n")), ConfigError);
    CHECK_THROWS_AS(run_from_config(config_from("h=0.1\nm=16\ndt=0.1\nt_final=1\n")), ConfigError);
    CHECK_THROWS_AS(run_from_config(config_from("m=16\nt_final=1\n")), ConfigError);
    CHECK_THROWS_AS(run_from_config(config_from("m=16\ndt=0.1\n")), ConfigError);
    CHECK_THROWS_AS(
        run_from_config(config_from("family=whole_space\nm=16\ndt=0.1\nt_final=1\n")),
        ConfigError);
}

TEST_CASE("stability request parsing and default amplitude") {
    const StabilityRequest req = stability_from_config(config_from("m=16\ndt=0.5\n"));
    CHECK_FALSE(req.sigma_max.has_value());
    const StabilityReport rep = execute_stability(req);
    CHECK(rep.sigma_max == 9.0);  // datum peaks at 3, p = 2
    CHECK(rep.mode.size() == 16);

    std::ostringstream out;
    write_stability_csv(out, rep);
    CHECK(out.str().rfind("l,lambda,c,theta\n", 0) == 0);

    CHECK_THROWS_AS(stability_from_config(config_from("dt=0.5\n")), ConfigError);
    CHECK_THROWS_AS(stability_from_config(config_from("m=16\n")), ConfigError);
}

TEST_CASE("profile request parsing") {
    const ProfileRequest req = profile_from_config(config_from(
        "mode=final_profile\n"
        "family=oscillatory_torus\n"
        "epsilons=0.5\n"
        "h=pi/8\n"
        "dt=0.01\n"
        "s_final=0.5\n"));
    CHECK(req.mode == ProfileMode::final_profile);
    CHECK(req.epsilons == std::vector<double>{0.5});
    CHECK(req.s_final == 0.5);

    CHECK_THROWS_AS(profile_from_config(config_from("mode=sideways\n")), ConfigError);
    ProfileRequest bad = req;
    bad.epsilons = {};
    CHECK_THROWS_AS(emit_profile(bad), ConfigError);
    bad = req;
    bad.dt = 0.0;
    CHECK_THROWS_AS(emit_profile(bad), ConfigError);
}

TEST_CASE("probe series starts at the datum and oscillation count scales like 1/eps^p") {
    ProfileRequest req;
    req.mode = ProfileMode::time_series;
    req.family = ProblemFamily::oscillatory_torus;
    req.p = 2;
    req.epsilons = {0.125, 0.0625};
    req.h_request = 2.0 * M_PI / 16.0;
    req.dt = 1.0 / 1280.0;
    req.s_final = 0.5;

    const auto series = emit_profile(req);
    REQUIRE(series.size() == 2);
    for (const auto& s : series) {
        CHECK(s.m == 16);
        CHECK(s.probe == M_PI);
        REQUIRE(!s.points.empty());
        CHECK(s.points[0].first == 0.0);
        CHECK(s.points[0].second == 3.0);  // datum value at the probe, exactly
    }

    // Halving eps quadruples the oscillation frequency in slow time (p = 2).
    const double ratio = static_cast<double>(sign_changes(series[1].points)) /
                         static_cast<double>(sign_changes(series[0].points));
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);
}

TEST_CASE("final profile mode returns the last spatial frame") {
    ProfileRequest req;
    req.mode = ProfileMode::final_profile;
    req.family = ProblemFamily::oscillatory_torus;
    req.p = 2;
    req.epsilons = {0.5};
    req.h_request = 2.0 * M_PI / 16.0;
    req.dt = 0.01;
    req.s_final = 0.5;

    const auto series = emit_profile(req);
    REQUIRE(series.size() == 1);
    CHECK(series[0].probe == 0.5);
    REQUIRE(series[0].points.size() == 16);
    CHECK(series[0].points[0].first == 0.0);
    CHECK(series[0].points[5].first == doctest::Approx(5.0 * 2.0 * M_PI / 16.0));
}
