#include "fieldcable/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fieldcable/linalg.hpp"

namespace fieldcable {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const char* key, double def, const std::string& path) {
  auto it = j.find(key);
  return it == j.end() ? def : number(*it, path + "." + key);
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

cplx complex_entry(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  fail(path, "expected a number or a [re, im] pair");
}

Vec3 vec3(const json& j, const std::string& path) {
  if (j.is_number()) return Vec3::Constant(j.get<double>());
  if (!j.is_array() || j.size() != 3) fail(path, "expected 3 numbers");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

VecC cvector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  VecC v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = complex_entry(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

// Rows of entries; a bare number stands for a multiple of the identity when `square` > 0.
MatC matrix(const json& j, const std::string& path, int square = 0) {
  if (j.is_number() && square > 0) return MatC::Identity(square, square) * j.get<double>();
  if (!j.is_array()) fail(path, "expected a matrix (array of rows)");
  if (j.empty()) return MatC();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  MatC m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) fail(rp, "rows must be arrays of equal length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = complex_entry(j[r][c], rp + "[" + std::to_string(c) + "]");
  }
  if (square > 0 && (m.rows() != square || m.cols() != square))
    fail(path, "expected a " + std::to_string(square) + "x" + std::to_string(square) + " matrix");
  return m;
}

MaterialProfile profile(const json& j, int k, const std::string& path) {
  if (j.is_object()) {
    const json& eta = field(j, "eta", path);
    const json& vals = field(j, "values", path);
    if (!eta.is_array() || !vals.is_array() || eta.size() != vals.size() || eta.empty())
      fail(path, "eta and values must be arrays of equal nonzero length");
    MaterialProfile p;
    for (std::size_t i = 0; i < eta.size(); ++i) {
      p.eta.push_back(number(eta[i], path + ".eta[" + std::to_string(i) + "]"));
      p.values.push_back(matrix(vals[i], path + ".values[" + std::to_string(i) + "]", k));
    }
    return p;
  }
  return MaterialProfile::constant(matrix(j, path, k));
}

CableCurve cable(const json& j, const std::string& path) {
  const json& tj = field(j, "type", path);
  if (!tj.is_string()) fail(path + ".type", "expected a string");
  const std::string type = tj.get<std::string>();
  const double r = number(field(j, "radius", path), path + ".radius");
  if (type == "segment")
    return CableCurve::segment(vec3(field(j, "start", path), path + ".start"), vec3(field(j, "end", path), path + ".end"), r);
  if (type == "arc")
    return CableCurve::arc(vec3(field(j, "center", path), path + ".center"), vec3(field(j, "u", path), path + ".u"),
                           vec3(field(j, "v", path), path + ".v"), number(field(j, "rho", path), path + ".rho"),
                           number_or(j, "phi0", 0.0, path), number(field(j, "sweep", path), path + ".sweep"), r);
  if (type == "helix")
    return CableCurve::helix(vec3(field(j, "base", path), path + ".base"), vec3(field(j, "axis", path), path + ".axis"),
                             number(field(j, "coil_radius", path), path + ".coil_radius"),
                             number(field(j, "turns", path), path + ".turns"),
                             number(field(j, "height", path), path + ".height"), r);
  if (type == "spline") {
    const json& pts = field(j, "points", path);
    if (!pts.is_array() || pts.size() < 2) fail(path + ".points", "expected at least two points");
    std::vector<Vec3> p;
    for (std::size_t i = 0; i < pts.size(); ++i) p.push_back(vec3(pts[i], path + ".points[" + std::to_string(i) + "]"));
    return CableCurve::spline(p, r);
  }
  fail(path + ".type", "unknown cable type '" + type + "'");
}

InputSignal input_signal(const json& j, int m, const std::string& path) {
  InputSignal s;
  const std::string kind = j.value("kind", std::string("zero"));
  if (kind == "zero") return s;
  if (kind == "step") {
    s.kind = InputSignal::Kind::step;
    s.t0 = number_or(j, "t0", 0.0, path);
    s.rise = number_or(j, "rise", 0.0, path);
  } else if (kind == "sine") {
    s.kind = InputSignal::Kind::sine;
    s.omega = number(field(j, "omega", path), path + ".omega");
    s.phase = number_or(j, "phase", 0.0, path);
  } else if (kind == "table") {
    s.kind = InputSignal::Kind::table;
    const json& t = field(j, "times", path);
    const json& v = field(j, "values", path);
    if (!t.is_array() || !v.is_array() || t.size() != v.size() || t.empty())
      fail(path, "times and values must be arrays of equal nonzero length");
    for (std::size_t i = 0; i < t.size(); ++i) {
      s.times.push_back(number(t[i], path + ".times[" + std::to_string(i) + "]"));
      VecC row = cvector(v[i], path + ".values[" + std::to_string(i) + "]");
      if (row.size() != m) fail(path + ".values[" + std::to_string(i) + "]", "expected one value per input port");
      s.values.push_back(row);
    }
    return s;
  } else {
    fail(path + ".kind", "unknown input kind '" + kind + "'");
  }
  s.amplitude = cvector(field(j, "amplitude", path), path + ".amplitude");
  if (s.amplitude.size() != m) fail(path + ".amplitude", "expected one value per input port (m = " + std::to_string(m) + ")");
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  Scenario sc;
  sc.name = root.value("name", std::string("scenario"));
  if (root.contains("seed")) sc.seed = static_cast<std::uint64_t>(integer(root["seed"], "seed"));

  const json& g = field(root, "geometry", "");
  const json& box = field(g, "box", "geometry");
  sc.geometry.box.lo = vec3(field(box, "lo", "geometry.box"), "geometry.box.lo");
  sc.geometry.box.hi = vec3(field(box, "hi", "geometry.box"), "geometry.box.hi");
  sc.geometry.collar_halfwidth = number_or(g, "collar_halfwidth", 0.25, "geometry");
  if (g.contains("cables")) {
    if (!g["cables"].is_array()) fail("geometry.cables", "expected an array");
    for (std::size_t i = 0; i < g["cables"].size(); ++i)
      sc.geometry.cables.push_back(cable(g["cables"][i], "geometry.cables[" + std::to_string(i) + "]"));
  }

  if (root.contains("grid")) {
    const json& gr = root["grid"];
    if (gr.contains("cells")) {
      const json& c = gr["cells"];
      if (!c.is_array() || c.size() != 3) fail("grid.cells", "expected 3 integers");
      for (int d = 0; d < 3; ++d) sc.cells[d] = integer(c[d], "grid.cells[" + std::to_string(d) + "]");
    }
    if (gr.contains("theta")) sc.n_theta = integer(gr["theta"], "grid.theta");
  }

  const json& ln = field(root, "line", "");
  const int k = integer(field(ln, "k", "line"), "line.k");
  if (k < 1) fail("line.k", "must be positive");
  if (ln.contains("cells")) sc.line_cells = integer(ln["cells"], "line.cells");
  sc.line.k = k;
  sc.line.C = profile(field(ln, "C", "line"), k, "line.C");
  sc.line.L = profile(field(ln, "L", "line"), k, "line.L");
  sc.line.R = ln.contains("R") ? profile(ln["R"], k, "line.R") : MaterialProfile::constant(MatC::Zero(k, k));
  sc.line.G = ln.contains("G") ? profile(ln["G"], k, "line.G") : MaterialProfile::constant(MatC::Zero(k, k));

  if (root.contains("field")) {
    const json& f = root["field"];
    if (f.contains("eps")) sc.eps = vec3(f["eps"], "field.eps");
    if (f.contains("mu")) sc.mu = vec3(f["mu"], "field.mu");
    if (f.contains("sigma")) sc.sigma = vec3(f["sigma"], "field.sigma");
  }

  const json& bc = field(root, "boundary", "");
  sc.boundary.k = k;
  if (bc.contains("W_B")) {
    const MatC wb = matrix(bc["W_B"], "boundary.W_B");
    const int m = integer(field(bc, "m", "boundary"), "boundary.m");
    if (wb.rows() != 2 * k || wb.cols() != 4 * k) fail("boundary.W_B", "expected a 2k x 4k matrix");
    if (m < 0 || m > 2 * k) fail("boundary.m", "must lie in [0, 2k]");
    sc.boundary.W_inp = wb.topRows(m);
    sc.boundary.W_0 = wb.bottomRows(2 * k - m);
  } else {
    sc.boundary.W_inp = bc.contains("W_inp") ? matrix(bc["W_inp"], "boundary.W_inp") : MatC();
    sc.boundary.W_0 = bc.contains("W_0") ? matrix(bc["W_0"], "boundary.W_0") : MatC();
  }
  if (bc.contains("W_out")) sc.boundary.W_out = matrix(bc["W_out"], "boundary.W_out");
  sc.colocated_output = bc.value("colocated_output", false);
  if (sc.colocated_output && bc.contains("W_out")) fail("boundary", "give either W_out or colocated_output, not both");
  if (bc.contains("bc_tol")) sc.bc_tol = number(bc["bc_tol"], "boundary.bc_tol");
  sc.boundary.check_shapes();

  if (root.contains("simulation")) {
    const json& s = root["simulation"];
    sc.sim.dt = number_or(s, "dt", sc.sim.dt, "simulation");
    sc.sim.T = number_or(s, "T", sc.sim.T, "simulation");
    sc.sim.solver_tol = number_or(s, "solver_tol", sc.sim.solver_tol, "simulation");
    if (s.contains("record_stride")) sc.sim.record_stride = integer(s["record_stride"], "simulation.record_stride");
    if (s.contains("input")) sc.sim.input = input_signal(s["input"], sc.boundary.m(), "simulation.input");
    if (!(sc.sim.dt > 0.0) || !(sc.sim.T >= sc.sim.dt)) fail("simulation", "need dt > 0 and T >= dt");
    if (s.contains("initial")) {
      const json& ic = s["initial"];
      const std::string kind = ic.value("kind", std::string("zero"));
      if (kind == "zero") {
        sc.initial.kind = InitialCondition::Kind::zero;
      } else if (kind == "lifted_voltage") {
        sc.initial.kind = InitialCondition::Kind::lifted_voltage;
        sc.initial.voltage = cvector(field(ic, "voltage", "simulation.initial"), "simulation.initial.voltage");
        if (sc.initial.voltage.size() != k) fail("simulation.initial.voltage", "expected one value per line");
      } else if (kind == "random") {
        sc.initial.kind = InitialCondition::Kind::random;
        sc.initial.amplitude = number_or(ic, "amplitude", 1.0, "simulation.initial");
      } else {
        fail("simulation.initial.kind", "unknown initial condition '" + kind + "'");
      }
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

BoundaryConditionSpec resolved_boundary(const Scenario& sc) {
  BoundaryConditionSpec spec = sc.boundary;
  if (sc.colocated_output) spec.W_out = build_colocated_output(spec.W_B(), spec.m()).W_out;
  return spec;
}

std::unique_ptr<Model> build_model(const Scenario& sc) {
  auto model = std::make_unique<Model>();
  model->scenario = sc;
  if (sc.geometry.cables.size() > static_cast<std::size_t>(sc.line.k))
    throw ConfigError("more cables than lines: each cable drives one line");
  model->geometry = Geometry::build(sc.geometry);
  model->grid = YeeGrid::build(model->geometry, sc.cells);
  model->line_grid = LineGrid(sc.line_cells);
  model->line = assemble_line(sc.line, model->line_grid);
  model->field = FieldMaterials::uniform(model->grid.cell_count(), sc.eps, sc.mu, sc.sigma);
  model->maxwell = assemble_curls(model->grid, model->field);
  for (std::size_t i = 0; i < model->geometry.cable_count(); ++i)
    model->couplings.push_back(
        build_cable_coupling(model->geometry, i, model->grid, model->line_grid, sc.n_theta, static_cast<int>(i)));
  model->bundle = assemble_system(model->line, model->maxwell, model->couplings);
  return model;
}

VecC initial_state(const Model& model, const InitialCondition& ic, std::uint64_t seed) {
  const BlockLayout& l = model.bundle.layout;
  const int k = l.k;
  VecC x = VecC::Zero(l.size());
  switch (ic.kind) {
    case InitialCondition::Kind::zero:
      break;
    case InitialCondition::Kind::lifted_voltage: {
      if (ic.voltage.size() != k) throw ConfigError("lifted voltage needs one amplitude per line");
      const LineGrid& g = model.line_grid;
      std::vector<VecC> v_line(k, VecC(g.nodes()));
      for (int j = 0; j < g.nodes(); ++j) {
        const double s = std::sin(M_PI * g.node_eta(j));
        VecC v(k);
        for (int i = 0; i < k; ++i) v(i) = ic.voltage(i) * s * s;
        const VecC q = model.scenario.line.C.at(g.node_eta(j)) * v;
        x.segment(l.off_q() + j * k, k) = q;
        for (int i = 0; i < k; ++i) v_line[i](j) = v(i);
      }
      for (const auto& cc : model.couplings) {
        const VecC e = lift_voltage(cc.chart, model.grid, g, v_line[cc.line]);
        x.segment(l.off_D(), l.n_D) += e.cwiseQuotient(model.maxwell.H_D.cast<cplx>());
      }
      break;
    }
    case InitialCondition::Kind::random: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> nd(0.0, ic.amplitude);
      for (int i = 0; i < l.n_psi; ++i) x(l.off_psi() + i) = nd(rng);
      for (int i = 0; i < l.n_q; ++i) x(l.off_q() + i) = nd(rng);
      for (int i = 0; i < l.n_D; ++i) x(l.off_D() + i) = nd(rng);
      // B as a discrete curl keeps the magnetic divergence at zero.
      VecR a(l.n_D);
      for (int i = 0; i < l.n_D; ++i) a(i) = nd(rng);
      const double h = model.grid.h_max();
      x.segment(l.off_B(), l.n_B) = (h * (model.maxwell.C_E * a)).cast<cplx>();
      break;
    }
  }
  return x;
}

VecC make_compatible(const SystemNode& node, const VecC& x, const VecC& u0) {
  const OperatorBundle& b = node.bundle();
  const MatC wb = node.spec().W_B();
  const int nb = static_cast<int>(wb.rows());
  Eigen::JacobiSVD<MatC> svd(wb.leftCols(nb), Eigen::ComputeFullU);
  int r = 0;
  for (int i = 0; i < nb; ++i)
    if (svd.singularValues()(i) > 1e-10 * svd.singularValues()(0)) ++r;
  if (r == nb) return x;
  const MatC u0b = svd.matrixU().rightCols(nb - r);
  const SpMatC zh = b.ports_matrix() * b.H;
  const MatC kmat = u0b.adjoint() * wb * MatC(zh);
  VecC g = VecC::Zero(nb);
  g.head(u0.size()) = u0;
  const VecC rhs = kmat * x - u0b.adjoint() * g;
  const MatC kk = kmat * kmat.adjoint();
  return x - kmat.adjoint() * kk.ldlt().solve(rhs);
}

bool ValidationReport::ok() const { return geometry.ok() && line.ok && field.ok && boundary.admissible; }

ValidationReport validate_scenario(const Scenario& sc) {
  ValidationReport rep;
  rep.geometry = validate_geometry(sc.geometry);
  for (const auto& m : rep.geometry.messages) rep.messages.push_back("geometry: " + m);
  rep.line = validate_line_materials(sc.line);
  for (const auto& m : rep.line.messages) rep.messages.push_back(m);
  rep.field = validate_field_materials(FieldMaterials::uniform(1, sc.eps, sc.mu, sc.sigma));
  for (const auto& m : rep.field.messages) rep.messages.push_back(m);
  rep.boundary = check_admissible(sc.boundary.W_B());
  if (!rep.boundary.full_rank) rep.messages.push_back("boundary conditions: W_B must have full row rank");
  if (!rep.boundary.psd) rep.messages.push_back("boundary conditions: W_B Sigma W_B^H must be positive semidefinite");
  return rep;
}

}  // namespace fieldcable
