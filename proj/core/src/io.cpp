#include "fieldcable/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include <nlohmann/json.hpp>

namespace fieldcable::io {

using nlohmann::json;

namespace {

std::ofstream open(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_matrix_market(const std::string& path, const SpMatC& a) {
  auto out = open(path);
  out << "%%MatrixMarket matrix coordinate complex general\n";
  out << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
  for (int col = 0; col < a.outerSize(); ++col)
    for (SpMatC::InnerIterator it(a, col); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value().real() << " " << it.value().imag() << "\n";
}

void write_matrix_market(const std::string& path, const SpMatR& a) {
  auto out = open(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
  for (int col = 0; col < a.outerSize(); ++col)
    for (SpMatR::InnerIterator it(a, col); it; ++it) out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

void write_vtk_fields(const std::string& path, const Model& model, const VecC& x) {
  const YeeGrid& g = model.grid;
  const BlockLayout& l = model.bundle.layout;
  if (x.size() != l.size()) throw ConfigError("state size does not match the model");
  const VecC e = model.bundle.H * x;
  const auto& n = g.dims();
  auto out = open(path);
  out << "# vtk DataFile Version 3.0\nfield snapshot\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << n[0] + 1 << " " << n[1] + 1 << " " << n[2] + 1 << "\n";
  out << "ORIGIN " << g.origin().transpose() << "\nSPACING " << g.spacing().transpose() << "\n";
  out << "CELL_DATA " << g.cell_count() << "\n";
  out << "SCALARS tag int 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) out << g.cell_tag(i, j, k) << "\n";
  out << "VECTORS E double\n";
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        Vec3 v = Vec3::Zero();
        for (int a = 0; a < 3; ++a) {
          const int b = (a + 1) % 3, c = (a + 2) % 3;
          for (int db = 0; db <= 1; ++db)
            for (int dc = 0; dc <= 1; ++dc) {
              std::array<int, 3> idx{i, j, k};
              idx[b] += db;
              idx[c] += dc;
              const int d = g.edge_dof(a, idx);
              if (d >= 0) v(a) += 0.25 * e(l.off_D() + d).real();
            }
        }
        out << v.transpose() << "\n";
      }
  out << "VECTORS B double\n";
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        Vec3 v = Vec3::Zero();
        for (int a = 0; a < 3; ++a)
          for (int d = 0; d <= 1; ++d) {
            std::array<int, 3> idx{i, j, k};
            idx[a] += d;
            const int f = g.face_dof(a, idx);
            if (f >= 0) v(a) += 0.5 * x(l.off_B() + f).real();
          }
        out << v.transpose() << "\n";
      }
}

void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  auto out = open(path);
  const int m = tr.u.empty() ? 0 : static_cast<int>(tr.u.front().size());
  const int p = tr.y.empty() ? 0 : static_cast<int>(tr.y.front().size());
  bool complex_values = false;
  for (std::size_t r = 0; r < tr.t.size(); ++r) {
    if (m > 0 && tr.u[r].imag().cwiseAbs().maxCoeff() > 0.0) complex_values = true;
    if (p > 0 && tr.y[r].imag().cwiseAbs().maxCoeff() > 0.0) complex_values = true;
  }
  out << "t,energy,supplied,dissipated,boundary_term,residual";
  for (int i = 0; i < m; ++i) out << ",u_" << i + 1;
  for (int i = 0; i < p; ++i) out << ",y_" << i + 1;
  if (complex_values) {
    for (int i = 0; i < m; ++i) out << ",u_" << i + 1 << "_im";
    for (int i = 0; i < p; ++i) out << ",y_" << i + 1 << "_im";
  }
  out << "\n";
  for (std::size_t r = 0; r < tr.t.size(); ++r) {
    out << tr.t[r] << "," << tr.energy[r] << "," << tr.supplied[r] << "," << tr.dissipated[r] << ","
        << tr.boundary[r] << "," << tr.residual[r];
    for (int i = 0; i < m; ++i) out << "," << tr.u[r](i).real();
    for (int i = 0; i < p; ++i) out << "," << tr.y[r](i).real();
    if (complex_values) {
      for (int i = 0; i < m; ++i) out << "," << tr.u[r](i).imag();
      for (int i = 0; i < p; ++i) out << "," << tr.y[r](i).imag();
    }
    out << "\n";
  }
}

std::string certificate_json(const Certificate& c, const BoundaryConditionSpec& spec) {
  const AdmissibilityReport& a = c.admissibility;
  json j;
  j["flags"] = {{"admissible", a.admissible}, {"strict", a.strict},     {"skew", a.skew},
                {"max_dissipative", c.max_dissipative}, {"colocated", c.colocated}, {"wellposed", c.wellposed}};
  j["dimensions"] = {{"k", spec.k}, {"m", spec.m()}, {"p", spec.p()}};
  j["margins"] = {{"W_B_sigma_min", a.sigma_min}, {"W_B_sigma_max", a.sigma_max},
                  {"form_min_eig", a.form_min},   {"form_max_eig", a.form_max},
                  {"colocation_max_eig", c.col2_max}};
  if (c.wellposed) {
    j["constants"] = {{"delta", c.delta}, {"gamma", c.gamma}, {"c", c.c},
                      {"c_t", c.c_t},     {"c_energy", c.c_energy}, {"hd_min", c.hd_min}, {"hd_max", c.hd_max}};
  } else {
    j["constants"] = nullptr;
  }
  j["messages"] = c.messages;
  return j.dump(2);
}

std::string validation_json(const ValidationReport& rep) {
  json j;
  j["ok"] = rep.ok();
  json cables = json::array();
  for (const auto& c : rep.geometry.cables)
    cables.push_back({{"arclength", c.arclength},
                      {"curvature", c.curvature},
                      {"containment", c.containment},
                      {"disjoint", c.disjoint},
                      {"open", c.open},
                      {"arclength_dev", c.arclength_dev},
                      {"curvature_margin", c.curvature_margin},
                      {"containment_margin", c.containment_margin},
                      {"disjoint_margin", number_or_null(c.disjoint_margin)}});
  j["geometry"] = {{"ok", rep.geometry.ok()}, {"box", rep.geometry.box_ok}, {"collar", rep.geometry.collar_ok},
                   {"cables", cables}};
  j["line_parameters"] = {{"ok", rep.line.ok},
                          {"C_min_eig", rep.line.c_min_eig},
                          {"L_min_eig", rep.line.l_min_eig},
                          {"R_herm_min_eig", rep.line.r_min_eig},
                          {"G_herm_min_eig", rep.line.g_min_eig}};
  j["field_materials"] = {{"ok", rep.field.ok},
                          {"eps_min", rep.field.eps_min},
                          {"mu_min", rep.field.mu_min},
                          {"sigma_min", rep.field.sigma_min}};
  j["boundary_conditions"] = {{"ok", rep.boundary.admissible},
                              {"full_rank", rep.boundary.full_rank},
                              {"psd", rep.boundary.psd},
                              {"strict", rep.boundary.strict},
                              {"skew", rep.boundary.skew}};
  j["messages"] = rep.messages;
  return j.dump(2);
}

std::string summary_json(const Trajectory& tr, const Certificate& cert, double wp_ratio, double drift) {
  json j;
  j["records"] = tr.t.size();
  j["final_time"] = tr.t.empty() ? 0.0 : tr.t.back();
  j["final_energy"] = tr.energy.empty() ? 0.0 : tr.energy.back();
  j["peak_energy"] = tr.peak_energy();
  j["energy_drift"] = number_or_null(drift);
  j["ledger"] = tr.partial ? "partial" : "complete";
  j["max_residual"] = tr.partial ? json(nullptr) : json(tr.max_abs_residual());
  const double peak = tr.peak_energy();
  j["max_relative_residual"] = (tr.partial || peak == 0.0) ? json(nullptr) : json(tr.max_abs_residual() / peak);
  if (cert.wellposed) {
    j["wellposedness"] = {{"c_t", cert.c_t}, {"ratio", wp_ratio}, {"satisfied", wp_ratio <= 1.0}};
  } else {
    j["wellposedness"] = nullptr;
  }
  return j.dump(2);
}

}  // namespace fieldcable::io
