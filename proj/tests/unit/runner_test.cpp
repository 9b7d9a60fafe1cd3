#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fks/runner.hpp"

using namespace fks;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::current_path() / "runner-test-output" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_run() {
  RunConfig c;
  c.name = "small";
  c.alpha = 1.0;
  c.grid = {256, 15.0};
  c.initial = {Family::gaussian, 1.0, 1.0, 0.0};
  c.control.dt_max = 1e-2;
  c.horizon = 0.5;
  c.observation_interval = 0.1;
  c.gns_budget = 20;
  return c;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(exit_code(Outcome::completed) == kExitOk);
  CHECK(exit_code(Outcome::blowup_detected) == kExitOk);
  CHECK(exit_code(Outcome::step_limit) == kExitOk);
  CHECK(exit_code(Outcome::resolution_lost) == kExitResolutionLost);
  CHECK(exit_code(Outcome::step_floor) == kExitResolutionLost);
}

TEST_CASE("single run artifacts") {
  auto c = small_run();
  c.output_dir = scratch("run_a").string();
  const auto r = run(c);
  CHECK(r.trajectory.outcome == Outcome::completed);
  REQUIRE(r.C_hat);
  CHECK_FALSE(r.blowup);
  REQUIRE(r.criteria.size() == 1);
  CHECK(r.criteria[0].criterion == "global_smallness");
  CHECK(r.criteria[0].satisfied);

  const fs::path dir = c.output_dir;
  for (const char* f : {"config.json", "diagnostics.csv", "criteria.csv", "summary"}) CHECK(fs::exists(dir / f));
  CHECK_FALSE(fs::exists(dir / "summary.tmp"));
  CHECK(fs::exists(dir / "snapshots" / "t_0.5.csv"));
  CHECK(std::distance(fs::directory_iterator(dir / "snapshots"), fs::directory_iterator{}) == 6);
  CHECK(parse_run_config(slurp(dir / "config.json")).horizon == c.horizon);

  const auto s = read_summary(dir / "summary");
  CHECK(s.at("outcome") == "completed");
  CHECK(s.at("global_criterion") == "1");
  CHECK(s.at("blowup_criterion") == "na");
  CHECK(s.at("observations") == "6");

  std::ifstream diag(dir / "diagnostics.csv");
  const auto rows = read_diagnostics_csv(diag);
  REQUIRE(rows.size() == 6);
  CHECK(rows.back().time == 0.5);

  // identical inputs give identical bytes
  auto c2 = c;
  c2.output_dir = scratch("run_b").string();
  run(c2);
  CHECK(slurp(dir / "diagnostics.csv") == slurp(fs::path(c2.output_dir) / "diagnostics.csv"));
  CHECK(slurp(dir / "snapshots" / "t_0.3.csv") == slurp(fs::path(c2.output_dir) / "snapshots" / "t_0.3.csv"));
  CHECK(slurp(dir / "summary") == slurp(fs::path(c2.output_dir) / "summary"));

  RunContext quiet;
  quiet.write_artifacts = false;
  auto c3 = c;
  c3.output_dir = scratch("run_c").string();
  run(c3, quiet);
  CHECK_FALSE(fs::exists(c3.output_dir));

  auto bad = c;
  bad.grid.n = 100;
  CHECK_THROWS_AS(run(bad), ConfigError);
}

TEST_CASE("sub-critical exponent reports both criteria") {
  auto c = small_run();
  c.alpha = 0.5;
  c.initial = {Family::gaussian, 3.0, 1.0, 0.0};
  c.horizon = 0.05;
  c.observation_interval = 0.05;
  c.output_dir = scratch("run_half").string();
  const auto r = run(c);
  REQUIRE(r.blowup);
  CHECK(r.criteria.size() == 2);
  CHECK(r.blowup->mass == doctest::Approx(3.0).epsilon(1e-10));
  CHECK_FALSE(std::isnan(r.trajectory.diagnostics.front().i_lambda));
  CHECK(r.trajectory.diagnostics.front().i_lambda <= r.initial_first_moment);
  const auto s = read_summary(fs::path(c.output_dir) / "summary");
  CHECK(s.at("blowup_criterion") == "0");

  // odd data: the criterion is skipped rather than failing the run
  c.initial.center = 1.0;
  c.output_dir = scratch("run_half_shifted").string();
  const auto shifted = run(c);
  CHECK(shifted.criteria.size() == 1);
  CHECK(shifted.criteria[0].criterion == "global_smallness");
}

TEST_CASE("one-cell sweep matches a direct run") {
  SweepConfig s;
  s.base = small_run();
  s.alphas = {1.0};
  s.masses = {1.5};
  s.scales = {1.0};
  s.output_dir = scratch("sweep1").string();
  const auto rows = sweep(s);
  REQUIRE(rows.size() == 1);

  auto c = s.cell(1.0, 1.5, 1.0);
  c.output_dir = scratch("sweep1_direct").string();
  const auto r = run(c);
  REQUIRE(rows[0].outcome);
  CHECK(*rows[0].outcome == r.trajectory.outcome);
  CHECK(rows[0].time == r.trajectory.final_time);
  CHECK(rows[0].first_moment == r.initial_first_moment);
  CHECK(rows[0].global_criterion == r.criteria[0].satisfied);
  CHECK_FALSE(rows[0].blowup_criterion);

  const fs::path cell = fs::path(s.output_dir) / cell_directory_name(1.0, 1.5, 1.0);
  CHECK(slurp(cell / "diagnostics.csv") == slurp(fs::path(c.output_dir) / "diagnostics.csv"));
  CHECK(fs::exists(fs::path(s.output_dir) / "phase.csv"));
}

TEST_CASE("sweep resume and phase table") {
  SweepConfig s;
  s.base = small_run();
  s.base.keep_snapshots = false;
  s.alphas = {1.0};
  s.masses = {0.5, 1.0};
  s.scales = {0.8, 1.0};
  s.parallelism = 2;
  s.output_dir = scratch("sweep_resume").string();
  const auto first = sweep(s);
  REQUIRE(first.size() == 4);
  for (const auto& p : first) CHECK(p.note.empty());
  const std::string table = slurp(fs::path(s.output_dir) / "phase.csv");
  CHECK(table.rfind("alpha,M,scale,first_moment,global_criterion,blowup_criterion,outcome,time,note\n", 0) == 0);

  // a cell without a summary counts as unfinished and is run again
  const fs::path redo = fs::path(s.output_dir) / cell_directory_name(1.0, 1.0, 0.8);
  const fs::path kept = fs::path(s.output_dir) / cell_directory_name(1.0, 0.5, 1.0);
  const auto kept_diag = slurp(kept / "diagnostics.csv");
  const auto kept_time = fs::last_write_time(kept / "summary");
  fs::remove(redo / "summary");
  const auto second = sweep(s);
  REQUIRE(second.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CAPTURE(i);
    CHECK(second[i].mass == first[i].mass);
    CHECK(second[i].scale == first[i].scale);
    CHECK(second[i].outcome == first[i].outcome);
    CHECK(second[i].time == first[i].time);
    CHECK(second[i].first_moment == first[i].first_moment);
    const bool rerun = second[i].mass == 1.0 && second[i].scale == 0.8;
    CHECK(second[i].note == (rerun ? "" : "resumed"));
  }
  CHECK(fs::exists(redo / "summary"));
  CHECK(slurp(kept / "diagnostics.csv") == kept_diag);
  CHECK(fs::last_write_time(kept / "summary") == kept_time);
}

TEST_CASE("failed cells are recorded") {
  SweepConfig s;
  s.base = small_run();
  s.base.keep_snapshots = false;
  s.alphas = {1.0};
  s.masses = {1.0};
  s.scales = {1.0};
  s.output_dir = scratch("sweep_fail").string();
  // a file where the cell directory should go
  fs::create_directories(s.output_dir);
  std::ofstream(fs::path(s.output_dir) / cell_directory_name(1.0, 1.0, 1.0)) << "x";
  const auto rows = sweep(s);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].outcome);
  CHECK(rows[0].note.rfind("error: ", 0) == 0);
  CHECK(audit_sweep(rows).failed_cells == 1);
}

TEST_CASE("sweep audit") {
  auto pt = [](double m, Outcome o, bool crit) {
    PhasePoint p;
    p.alpha = 0.5;
    p.mass = m;
    p.scale = 1.0;
    p.blowup_criterion = crit;
    p.outcome = o;
    return p;
  };
  const PhasePoint rows[] = {pt(1.0, Outcome::completed, false), pt(2.0, Outcome::blowup_detected, true),
                             pt(3.0, Outcome::completed, true)};
  const auto a = audit_sweep(rows);
  CHECK(a.criterion_cells == 2);
  CHECK(a.criterion_cells_detected == 1);
  CHECK(a.monotonicity_violations == 1);
  CHECK(a.failed_cells == 0);
  CHECK(cell_directory_name(0.5, 100.0, 12.0) == "cell_a0.5_M100_s12");
}
