#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "fieldcable/io.hpp"
#include "fieldcable/study.hpp"

namespace fs = std::filesystem;
using namespace fieldcable;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kUsage = 2, kRuntime = 3 };

struct Options {
  std::vector<std::string> paths;
  std::string output_dir = "fieldcable_out";
  int threads = 1;
  bool export_operators = false;
  bool export_fields = false;
  std::optional<std::uint64_t> seed;
  int levels = 3;
};

std::mutex out_mutex;

void say(const std::string& s) {
  std::lock_guard<std::mutex> lock(out_mutex);
  std::cout << s << std::flush;
}

void warn(const std::string& s) {
  std::lock_guard<std::mutex> lock(out_mutex);
  std::cerr << s << std::endl;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text << "\n";
}

fs::path scenario_dir(const Options& o, const Scenario& sc) {
  fs::path d = fs::path(o.output_dir) / sc.name;
  fs::create_directories(d);
  return d;
}

int cmd_validate(const Options& o, const std::string& path) {
  const Scenario sc = load_scenario(path);
  ValidationReport rep = validate_scenario(sc);
  // Resolution and coupling checks need the discretization.
  if (rep.ok()) {
    try {
      build_model(sc);
    } catch (const GridError& e) {
      rep.messages.push_back(std::string("grid resolution: ") + e.what());
    } catch (const CouplingError& e) {
      rep.messages.push_back(std::string("coupling: ") + e.what());
    }
  }
  const bool ok = rep.ok() && rep.messages.empty();
  const std::string j = io::validation_json(rep);
  write_text(scenario_dir(o, sc) / "validation.json", j);
  say(j + "\n");
  return ok ? kOk : kInvalid;
}

int cmd_certify(const Options& o, const std::string& path) {
  const Scenario sc = load_scenario(path);
  const auto model = build_model(sc);
  BoundaryConditionSpec spec = sc.boundary;
  if (sc.colocated_output && check_admissible(spec.W_B()).admissible) spec = resolved_boundary(sc);
  const Certificate cert = certify(spec, model->bundle.hd_min, model->bundle.hd_max);
  const std::string j = io::certificate_json(cert, spec);
  write_text(scenario_dir(o, sc) / "certificate.json", j);
  say(j + "\n");
  return cert.admissibility.admissible ? kOk : kInvalid;
}

void export_operators(const fs::path& dir, const OperatorBundle& b) {
  io::write_matrix_market((dir / "J.mtx").string(), b.J);
  io::write_matrix_market((dir / "R.mtx").string(), b.R);
  io::write_matrix_market((dir / "H.mtx").string(), b.H);
  io::write_matrix_market((dir / "B1.mtx").string(), b.B1);
  io::write_matrix_market((dir / "B2.mtx").string(), b.B2);
}

int cmd_simulate(const Options& o, const std::string& path) {
  Scenario sc = load_scenario(path);
  if (o.seed) sc.seed = *o.seed;
  const auto model = build_model(sc);
  const BoundaryConditionSpec spec = resolved_boundary(sc);
  const AdmissibilityReport ar = check_admissible(spec.W_B());
  if (!ar.admissible) {
    warn(path + ": boundary conditions are not admissible");
    return kInvalid;
  }
  const SystemNode node(model->bundle, spec, sc.bc_tol);
  VecC x0 = initial_state(*model, sc.initial, sc.seed);
  if (sc.initial.kind == InitialCondition::Kind::random)
    x0 = make_compatible(node, x0, sc.sim.input.eval(0.0, spec.m()));
  const Trajectory tr = run(node, sc.sim, x0);
  const Certificate cert = certify(spec, model->bundle.hd_min, model->bundle.hd_max);
  const double wp = cert.wellposed ? wellposedness_ratio(tr, cert.c_t) : std::numeric_limits<double>::quiet_NaN();
  double drift = std::numeric_limits<double>::quiet_NaN();
  if (!tr.energy.empty() && tr.energy.front() > 0.0) {
    drift = 0.0;
    for (double e : tr.energy) drift = std::max(drift, std::abs(e - tr.energy.front()) / tr.energy.front());
  }
  const fs::path dir = scenario_dir(o, sc);
  io::write_trajectory_csv((dir / "trajectory.csv").string(), tr);
  const std::string j = io::summary_json(tr, cert, wp, drift);
  write_text(dir / "summary.json", j);
  if (o.export_operators) export_operators(dir, model->bundle);
  if (o.export_fields) io::write_vtk_fields((dir / "fields.vtk").string(), *model, tr.final_state);
  say(j + "\n");
  return kOk;
}

nlohmann::json row_json(const StudyRow& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["h"] = r.h;
  j["error"] = r.error;
  nlohmann::json ord = nlohmann::json::array();
  for (double p : r.order) ord.push_back(std::isfinite(p) ? nlohmann::json(p) : nlohmann::json(nullptr));
  j["order"] = ord;
  return j;
}

std::string row_text(const StudyRow& r) {
  std::ostringstream os;
  os << r.name << "\n";
  for (std::size_t i = 0; i < r.error.size(); ++i) {
    os << "  h=" << r.h[i] << "  error=" << r.error[i];
    if (i > 0) os << "  order=" << r.order[i - 1];
    os << "\n";
  }
  return os.str();
}

int cmd_converge(const Options& o, const std::string& path) {
  Scenario sc = load_scenario(path);
  if (o.seed) sc.seed = *o.seed;
  const auto model = build_model(sc);
  std::vector<StudyRow> rows;
  const double r = sc.geometry.cables.empty() ? 0.1 : sc.geometry.cables.front().radius();
  const double l = sc.geometry.cables.empty() ? 1.0 : sc.geometry.cables.front().length();
  rows.push_back(pmag_oracle_study(r, l, 8, o.levels + 1));
  if (!model->couplings.empty()) rows.push_back(trace_constant_study(*model));
  const BoundaryConditionSpec spec = resolved_boundary(sc);
  if (check_admissible(spec.W_B()).admissible) {
    const SystemNode node(model->bundle, spec, sc.bc_tol);
    VecC x0 = initial_state(*model, sc.initial, sc.seed);
    x0 = make_compatible(node, x0, sc.sim.input.eval(0.0, spec.m()));
    rows.push_back(ledger_order_study(node, sc.sim, x0, o.levels));
  }
  nlohmann::json j = nlohmann::json::array();
  std::string text;
  for (const auto& row : rows) {
    j.push_back(row_json(row));
    text += row_text(row);
  }
  write_text(scenario_dir(o, sc) / "converge.json", j.dump(2));
  say(text);
  return kOk;
}

int guarded(const std::function<int(const Options&, const std::string&)>& f, const Options& o,
            const std::string& path) {
  try {
    return f(o, path);
  } catch (const ConfigError& e) {
    warn(path + ": configuration error: " + e.what());
    return kUsage;
  } catch (const SolverError& e) {
    warn(path + ": solver error: " + e.what());
    return kRuntime;
  } catch (const Error& e) {
    warn(path + ": " + e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    warn(path + ": runtime error: " + e.what());
    return kRuntime;
  }
}

// Scenario-level parallelism; the worst exit code wins.
int for_each_scenario(const Options& o, const std::function<int(const Options&, const std::string&)>& f) {
  std::vector<int> codes(o.paths.size(), kOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < o.paths.size(); i = next++) codes[i] = guarded(f, o, o.paths[i]);
  };
  const int n = std::max(1, std::min<int>(o.threads, static_cast<int>(o.paths.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled field and transmission-line simulator"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("scenario", o.paths, "Scenario JSON file(s)")->required()->check(CLI::ExistingFile);
    sub->add_option("--output-dir", o.output_dir, "Directory for reports and data");
    sub->add_option("--threads", o.threads, "Scenarios processed in parallel")->check(CLI::PositiveNumber);
  };
  CLI::App* validate = app.add_subcommand("validate", "Check geometry, materials and boundary conditions");
  common(validate);
  CLI::App* cert = app.add_subcommand("certify", "Certify the boundary-condition matrices");
  common(cert);
  CLI::App* simulate = app.add_subcommand("simulate", "Integrate and write the trajectory and energy ledger");
  common(simulate);
  simulate->add_flag("--export-operators", o.export_operators, "Write J, R, H, B1, B2 in Matrix Market format");
  simulate->add_flag("--export-fields", o.export_fields, "Write the final fields as legacy VTK");
  CLI::Option* seed_opt = simulate->add_option("--seed", seed, "Override the scenario seed");
  CLI::App* converge = app.add_subcommand("converge", "Refinement studies");
  common(converge);
  converge->add_option("--levels", o.levels, "Refinement levels")->check(CLI::Range(2, 8));
  CLI::Option* seed_conv = converge->add_option("--seed", seed, "Override the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (seed_opt->count() > 0 || seed_conv->count() > 0) o.seed = seed;

  if (validate->parsed()) return for_each_scenario(o, cmd_validate);
  if (cert->parsed()) return for_each_scenario(o, cmd_certify);
  if (simulate->parsed()) return for_each_scenario(o, cmd_simulate);
  return for_each_scenario(o, cmd_converge);
}
