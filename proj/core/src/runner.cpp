#include "fks/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fks/inequality.hpp"

namespace fks {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string flag(bool b) { return b ? "1" : "0"; }

Summary make_summary(const RunResult& r) {
  const auto& t = r.trajectory;
  Summary s;
  s["outcome"] = std::string(to_string(t.outcome));
  s["message"] = t.message;
  s["alpha"] = format_number(r.config.alpha);
  s["mass"] = format_number(r.config.initial.mass);
  s["scale"] = format_number(r.config.initial.scale);
  s["initial_first_moment"] = format_number(r.initial_first_moment);
  s["final_time"] = format_number(t.final_time);
  s["steps"] = std::to_string(t.steps);
  s["rejected"] = std::to_string(t.rejected);
  s["last_dt"] = format_number(t.last_dt);
  s["observations"] = std::to_string(t.diagnostics.size());
  s["max_relative_mass_drift"] = format_number(t.max_relative_mass_drift);
  s["positivity_flag_time"] = t.positivity_flag_time ? format_number(*t.positivity_flag_time) : "none";
  if (!t.diagnostics.empty()) {
    const auto& d = t.diagnostics.back();
    s["final_mass"] = format_number(d.mass);
    s["final_l2"] = format_number(d.l2);
    s["final_l_inv_alpha"] = format_number(d.l_inv_alpha);
    s["final_l_inf"] = format_number(d.l_inf);
    s["final_first_moment"] = format_number(d.first_moment);
    s["final_min_value"] = format_number(d.min_value);
    s["final_tail_fraction"] = format_number(d.tail_fraction);
  }
  s["C_hat"] = r.C_hat ? format_number(*r.C_hat) : "na";
  s["global_criterion"] = "na";
  s["blowup_criterion"] = "na";
  for (const auto& c : r.criteria) {
    if (c.criterion == "global_smallness") s["global_criterion"] = flag(c.satisfied);
    if (c.criterion == "blowup") s["blowup_criterion"] = flag(c.satisfied);
  }
  return s;
}

void write_artifacts(const RunResult& r) {
  const fs::path dir = r.directory;
  fs::create_directories(dir);
  // A previous run in the same directory must not leave stale files behind.
  fs::remove(dir / "summary");
  fs::remove_all(dir / "snapshots");

  write_text(dir / "config.json", to_json_string(r.config));
  {
    std::ofstream out(dir / "diagnostics.csv", std::ios::binary);
    write_diagnostics_csv(out, r.trajectory.diagnostics);
  }
  {
    std::ofstream out(dir / "criteria.csv", std::ios::binary);
    write_criteria_csv(out, r.criteria);
  }
  if (r.config.keep_snapshots) {
    fs::create_directories(dir / "snapshots");
    for (std::size_t i = 0; i < r.trajectory.snapshots.size(); ++i) {
      write_field_csv((dir / "snapshots" / ("t_" + format_number(r.trajectory.times[i]) + ".csv")).string(),
                      r.trajectory.snapshots[i]);
    }
  }
  std::string text;
  for (const auto& [k, v] : make_summary(r)) text += k + "=" + v + "\n";
  // Written last and renamed into place: its presence marks a finished run.
  write_text(dir / "summary.tmp", text);
  fs::rename(dir / "summary.tmp", dir / "summary");
}

}  // namespace

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::resolution_lost:
    case Outcome::step_floor:
      return kExitResolutionLost;
    default:
      return kExitOk;
  }
}

double gns_constant_for(double alpha, std::uint64_t seed, long budget) {
  return estimate_gns_constant(1.0 / alpha, alpha, TrialFamily{}, budget, seed).C_hat;
}

double alpha1_mass_threshold(std::uint64_t seed, long budget) { return 4.0 / gns_constant_for(1.0, seed, budget); }

RunResult run(const RunConfig& config, const RunContext& ctx) {
  config.validate();
  RunResult r;
  r.config = config;
  r.directory = config.output_dir;
  const Grid grid = config.make_grid();
  const Field rho0 = synthesize_initial(config.initial, grid);
  r.initial_first_moment = first_moment(rho0);
  const double a = config.alpha;

  if (a <= 1.0) {
    r.C_hat = ctx.C_hat ? *ctx.C_hat : gns_constant_for(a, config.seed, config.gns_budget);
    r.criteria.push_back(check_global_smallness(rho0, a, *r.C_hat));
  }

  std::shared_ptr<const TestFunction> tf;
  double lambda = 0.0;
  if (a < 1.0) {
    tf = ctx.test_function;
    if (!tf || tf->alpha != a || tf->beta != config.effective_beta()) {
      tf = std::make_shared<const TestFunction>(build_test_function(a, config.effective_beta()));
    }
    r.blowup = make_blowup_criterion(*tf, mass(rho0));
    lambda = r.blowup->lambda;
    try {
      r.criteria.push_back(check_blowup_criterion(rho0, a, *r.blowup, *tf));
    } catch (const std::invalid_argument& e) {
      // odd data: the criterion does not apply
      if (ctx.log) *ctx.log << "blow-up criterion skipped: " << e.what() << '\n';
    }
  }

  SimState state{config.frame, 0.0, rho0, FractionalExponent(a), config.chi};
  Observer obs;
  obs.interval = config.observation_interval;
  obs.keep_snapshots = config.keep_snapshots || !ctx.write_artifacts;
  if (tf) obs.diagnose = make_diagnoser(tf, lambda);
  const BlowupThresholds thr = config.thresholds;
  obs.monitor = [thr](const DiagnosticsRow& init, const DiagnosticsRow& cur, bool final) {
    return classify_blowup(init, cur, final, thr);
  };
  DynamicsOptions dyn;
  dyn.dealias = config.dealias;
  dyn.confinement = config.confinement;
  r.trajectory = advance(state, config.horizon, config.control, obs, dyn);
  if (ctx.log) {
    *ctx.log << (config.name.empty() ? "run" : config.name) << ": " << to_string(r.trajectory.outcome) << " at t = "
             << format_number(r.trajectory.final_time) << " after " << r.trajectory.steps << " steps\n";
  }
  if (ctx.write_artifacts) write_artifacts(r);
  return r;
}

std::vector<std::string> preset_names() {
  return {"subcritical-alpha1", "subcritical-alpha1-rescaled", "pure-diffusion-rescaled", "supercritical-alpha05",
          "supercritical-alpha1"};
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  c.name = std::string(name);
  c.output_dir = "runs/" + c.name;
  c.control.dt_min = 1e-7;
  if (name == "subcritical-alpha1" || name == "subcritical-alpha1-rescaled") {
    c.alpha = 1.0;
    c.grid = {2048, 20.0};
    c.initial = {Family::gaussian, 0.5 * alpha1_mass_threshold(c.seed, c.gns_budget), 1.0, 0.0};
    if (name == "subcritical-alpha1") {
      c.horizon = 10.0;
      c.observation_interval = 0.1;
    } else {
      c.frame = Frame::rescaled;
      c.horizon = 8.0;
      c.observation_interval = 0.25;
    }
    return c;
  }
  if (name == "pure-diffusion-rescaled") {
    c.alpha = 1.0;
    c.chi = 0.0;
    c.frame = Frame::rescaled;
    c.grid = {2048, 40.0};
    c.initial = {Family::gaussian, 1.0, 1.0, 0.0};
    c.horizon = 10.0;
    c.observation_interval = 0.5;
    return c;
  }
  if (name == "supercritical-alpha05") {
    // Wide datum: detection needs 1e4 x the initial peak, so the peak starts low.
    c.alpha = 0.5;
    c.grid = {2048, 60.0};
    c.initial = {Family::gaussian, 380.0, 8.0, 0.0};
    c.horizon = 1.0;
    c.observation_interval = 0.005;
    return c;
  }
  if (name == "supercritical-alpha1") {
    c.alpha = 1.0;
    c.grid = {2048, 10.0};
    c.initial = {Family::gaussian, 4.0 * alpha1_mass_threshold(c.seed, c.gns_budget), 1.0, 0.0};
    c.horizon = 2.0;
    c.observation_interval = 0.01;
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + std::string(name) + "' (" + known + ")");
}

Summary read_summary(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  Summary s;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    s[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return s;
}

std::string cell_directory_name(double alpha, double mass, double scale) {
  return "cell_a" + format_number(alpha) + "_M" + format_number(mass) + "_s" + format_number(scale);
}

namespace {

PhasePoint point_from_summary(const Summary& s) {
  auto num = [&](const char* k) {
    const auto it = s.find(k);
    if (it == s.end()) throw std::runtime_error(std::string("summary lacks ") + k);
    return std::strtod(it->second.c_str(), nullptr);
  };
  PhasePoint p;
  p.alpha = num("alpha");
  p.mass = num("mass");
  p.scale = num("scale");
  p.first_moment = num("initial_first_moment");
  p.global_criterion = s.at("global_criterion") == "1";
  if (s.at("blowup_criterion") != "na") p.blowup_criterion = s.at("blowup_criterion") == "1";
  p.outcome = parse_outcome(s.at("outcome"));
  p.time = num("final_time");
  return p;
}

}  // namespace

std::vector<PhasePoint> sweep(const SweepConfig& config, std::ostream* log) {
  config.validate();
  struct Cell {
    double alpha, mass, scale;
  };
  std::vector<Cell> cells;
  for (double a : config.alphas) {
    for (double s : config.scales) {
      for (double m : config.masses) cells.push_back({a, m, s});
    }
  }
  const fs::path root = config.output_dir;
  fs::create_directories(root);

  // Shared per-alpha pieces, computed once up front.
  std::map<double, double> c_hat;
  std::map<double, std::shared_ptr<const TestFunction>> tfs;
  for (double a : config.alphas) {
    const RunConfig probe = config.cell(a, config.masses.front(), config.scales.front());
    if (a <= 1.0 && !c_hat.count(a)) c_hat[a] = gns_constant_for(a, probe.seed, probe.gns_budget);
    if (a < 1.0 && !tfs.count(a)) {
      tfs[a] = std::make_shared<const TestFunction>(build_test_function(a, probe.effective_beta()));
    }
  }

  std::vector<PhasePoint> rows(cells.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      RunConfig rc = config.cell(c.alpha, c.mass, c.scale);
      const fs::path dir = root / cell_directory_name(c.alpha, c.mass, c.scale);
      rc.output_dir = dir.string();
      PhasePoint& p = rows[i];
      p.alpha = c.alpha;
      p.mass = c.mass;
      p.scale = c.scale;
      std::string line;
      try {
        if (fs::exists(dir / "summary")) {
          p = point_from_summary(read_summary(dir / "summary"));
          p.note = "resumed";
        } else {
          RunContext ctx;
          if (c_hat.count(c.alpha)) ctx.C_hat = c_hat.at(c.alpha);
          if (tfs.count(c.alpha)) ctx.test_function = tfs.at(c.alpha);
          run(rc, ctx);
          p = point_from_summary(read_summary(dir / "summary"));
        }
        line = cell_directory_name(c.alpha, c.mass, c.scale) + ": " + std::string(to_string(*p.outcome)) +
               (p.note.empty() ? "" : " (" + p.note + ")");
      } catch (const std::exception& e) {
        p.outcome.reset();
        p.note = std::string("error: ") + e.what();
        line = cell_directory_name(c.alpha, c.mass, c.scale) + ": " + p.note;
      }
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << line << '\n';
      }
    }
  };
  const int workers = std::min<int>(config.parallelism, static_cast<int>(cells.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
  }

  std::ofstream out(root / "phase.csv", std::ios::binary);
  write_phase_csv(out, rows);
  return rows;
}

void write_phase_csv(std::ostream& os, std::span<const PhasePoint> rows) {
  os << "alpha,M,scale,first_moment,global_criterion,blowup_criterion,outcome,time,note\n";
  for (const auto& p : rows) {
    std::string note = p.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '\n', ' ');
    os << format_number(p.alpha) << ',' << format_number(p.mass) << ',' << format_number(p.scale) << ','
       << format_number(p.first_moment) << ',' << (p.global_criterion ? 1 : 0) << ','
       << (p.blowup_criterion ? (*p.blowup_criterion ? "1" : "0") : "na") << ','
       << (p.outcome ? std::string(to_string(*p.outcome)) : std::string()) << ',' << format_number(p.time) << ','
       << note << '\n';
  }
}

SweepAudit audit_sweep(std::span<const PhasePoint> rows) {
  SweepAudit a;
  for (const auto& p : rows) {
    if (!p.outcome) {
      ++a.failed_cells;
      continue;
    }
    if (p.blowup_criterion.value_or(false)) {
      ++a.criterion_cells;
      if (*p.outcome == Outcome::blowup_detected) ++a.criterion_cells_detected;
    }
    if (*p.outcome != Outcome::blowup_detected) continue;
    for (const auto& q : rows) {
      if (q.outcome == Outcome::completed && q.alpha == p.alpha && q.scale == p.scale && q.mass > p.mass) {
        ++a.monotonicity_violations;
        break;
      }
    }
  }
  return a;
}

SweepConfig default_phase_sweep() {
  SweepConfig s;
  RunConfig& b = s.base;
  b.name = "phase";
  b.alpha = 0.5;
  b.grid = {2048, 7.5};
  b.initial = {Family::gaussian, 100.0, 1.0, 0.0};
  b.control.dt_min = 1e-7;
  b.horizon = 1.0;
  b.observation_interval = 0.02;
  b.keep_snapshots = false;
  s.alphas = {0.5};
  s.masses = {100.0, 200.0, 300.0, 400.0, 500.0};
  s.scales = {6.0, 12.0, 24.0, 48.0, 96.0};
  s.output_dir = "sweep";
  return s;
}

}  // namespace fks
