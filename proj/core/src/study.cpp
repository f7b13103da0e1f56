#include "fieldcable/study.hpp"

#include <cmath>

namespace fieldcable {

namespace {

void fill_orders(StudyRow& row) {
  row.order.clear();
  for (std::size_t i = 1; i < row.error.size(); ++i) {
    const double num = row.error[i - 1], den = row.error[i];
    row.order.push_back(num > 0.0 && den > 0.0 ? std::log(num / den) / std::log(row.h[i - 1] / row.h[i])
                                               : std::numeric_limits<double>::quiet_NaN());
  }
}

}  // namespace

StudyRow pmag_oracle_study(double radius, double length, int n0, int levels) {
  GeometrySpec spec;
  const double pad = 4.0 * radius;
  spec.box.lo = Vec3(-pad, -pad, -pad);
  spec.box.hi = Vec3(pad, pad, length + pad);
  spec.cables.push_back(CableCurve::segment(Vec3::Zero(), Vec3(0.0, 0.0, length), radius));
  const Geometry geo = Geometry::build(spec);
  auto g = [&](const Vec3& p) {
    return Vec3(0.2, -0.1, 1.0 + 0.5 * std::sin(2.0 * M_PI * p.z() / length) + 0.3 * p.x() / radius);
  };
  auto sample = [&](const std::vector<Vec3>& pts) {
    VecR v(3 * pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q) v.segment<3>(3 * q) = g(pts[q]);
    return v;
  };
  StudyRow row;
  row.name = "pmag_adjoint_vs_quadrature";
  for (int i = 0; i < levels; ++i) {
    const int n = n0 << i;
    const TubeChart chart = geo.chart(0, n, n);
    const LineGrid lg(n);
    const PmagOperator adj = assemble_P_mag(chart, lg, PmagMode::adjoint);
    const PmagOperator quad = assemble_P_mag(chart, lg, PmagMode::quadrature);
    const VecR a = adj.matrix * sample(adj.points);
    const VecR b = quad.matrix * sample(quad.points);
    row.h.push_back(1.0 / n);
    row.error.push_back((a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff());
  }
  fill_orders(row);
  return row;
}

StudyRow trace_constant_study(const Model& model) {
  StudyRow row;
  row.name = "trace_constant_field";
  const Vec3 c(0.3, -0.7, 1.1);
  const YeeGrid& grid = model.grid;
  VecR e(grid.edge_count()), h(grid.face_count());
  for (int i = 0; i < grid.edge_count(); ++i) e(i) = c(grid.edges()[i].axis);
  for (int i = 0; i < grid.face_count(); ++i) h(i) = c(grid.faces()[i].axis);
  double err = 0.0;
  for (const auto& cc : model.couplings) {
    const VecR te = cc.trace.R_tan * e;
    const VecR th = cc.trace.R_nu * h;
    for (int q = 0; q < cc.chart.size(); ++q) {
      const Vec3& nu = cc.chart.normals()[q];
      const Vec3 tan = c - nu * nu.dot(c);
      err = std::max(err, (te.segment<3>(3 * q) - tan).cwiseAbs().maxCoeff());
      err = std::max(err, (th.segment<3>(3 * q) - nu.cross(c)).cwiseAbs().maxCoeff());
    }
  }
  row.h.push_back(grid.h_max());
  row.error.push_back(err);
  return row;
}

StudyRow ledger_order_study(const SystemNode& node, const SimConfig& cfg, const VecC& x0, int levels) {
  StudyRow row;
  row.name = "ledger_residual";
  for (int i = 0; i < levels; ++i) {
    SimConfig c = cfg;
    c.dt = cfg.dt / static_cast<double>(1 << i);
    c.record_stride = 1;
    const Trajectory tr = run(node, c, x0);
    row.h.push_back(c.dt);
    const double peak = tr.peak_energy();
    row.error.push_back(peak > 0.0 ? tr.max_abs_residual() / peak : tr.max_abs_residual());
  }
  fill_orders(row);
  return row;
}

}  // namespace fieldcable
