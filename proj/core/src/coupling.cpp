#include "fieldcable/coupling.hpp"

#include <cmath>
#include <sstream>

namespace fieldcable {

namespace {

void check_grids(const TubeChart& chart, const LineGrid& line) {
  if (line.periodic()) throw CouplingError("coupling requires a bounded line grid");
  if (chart.n_eta() != line.cells()) {
    std::ostringstream os;
    os << "chart has " << chart.n_eta() << " eta rings but the line grid has " << line.cells() << " cells";
    throw CouplingError(os.str());
  }
}

}  // namespace

CouplingMatrices assemble_P_el(const TubeChart& chart, const LineGrid& line) {
  check_grids(chart, line);
  const int nt = chart.n_theta();
  const int np = chart.size();
  std::vector<TripR> t;
  t.reserve(3 * np);
  CouplingMatrices cm;
  cm.M_surf.resize(3 * np);
  for (int j = 0; j < chart.n_eta(); ++j) {
    for (int m = 0; m < nt; ++m) {
      const int q = chart.index(j, m);
      Eigen::Matrix<double, 3, 2> a;
      a.col(0) = chart.d_eta_phi()[q];
      a.col(1) = chart.d_theta_phi()[q];
      const Eigen::Matrix2d g = a.transpose() * a;
      if (!(g.determinant() > 1e-14 * g.squaredNorm())) throw CouplingError("rank-deficient surface Jacobian");
      const Vec3 v = a * g.inverse().col(0);
      for (int c = 0; c < 3; ++c) t.emplace_back(3 * q + c, j, v(c));
      cm.M_surf.segment<3>(3 * q).setConstant(chart.weights()[q]);
    }
  }
  cm.Pel.resize(3 * np, line.cells());
  cm.Pel.setFromTriplets(t.begin(), t.end());
  cm.M_line = line.cell_weights();
  return cm;
}

namespace {

SpMatR adjoint_of(const CouplingMatrices& cm) {
  SpMatR pt = cm.Pel.transpose();
  return cm.M_line.cwiseInverse().asDiagonal() * pt * cm.M_surf.asDiagonal();
}

}  // namespace

PmagOperator assemble_P_mag(const TubeChart& chart, const LineGrid& line, PmagMode mode) {
  check_grids(chart, line);
  PmagOperator op;
  if (mode == PmagMode::adjoint) {
    op.matrix = adjoint_of(assemble_P_el(chart, line));
    op.points = chart.points();
    op.normals = chart.normals();
    return op;
  }
  const int ne = chart.n_eta(), nt = chart.n_theta();
  const double de = chart.d_eta(), dth = chart.d_theta();
  const double g = 0.5 / std::sqrt(3.0);
  std::vector<TripR> t;
  for (int j = 0; j < ne; ++j) {
    for (int gp = 0; gp < 2; ++gp) {
      const double eta = (j + 0.5 + (gp == 0 ? -g : g)) * de;
      for (int m = 0; m < nt; ++m) {
        const double theta = -M_PI + (m + 0.5) * dth;
        const SurfacePoint sp = chart.surface(eta, theta);
        // Right-handed loop about the tangent runs along -d_theta.
        const Vec3 w = 0.5 * dth * sp.normal.cross(-sp.d_theta);
        const int col = static_cast<int>(op.points.size());
        for (int c = 0; c < 3; ++c) t.emplace_back(j, 3 * col + c, w(c));
        op.points.push_back(sp.p);
        op.normals.push_back(sp.normal);
      }
    }
  }
  op.matrix.resize(ne, 3 * static_cast<int>(op.points.size()));
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

CouplingMatrices assemble_coupling(const TubeChart& chart, const LineGrid& line) {
  CouplingMatrices cm = assemble_P_el(chart, line);
  cm.Pmag = adjoint_of(cm);
  return cm;
}

double collar_cutoff(double s, double eps) {
  const double a = std::abs(s);
  const double lo = eps / 3.0, hi = 2.0 * eps / 3.0;
  if (a <= lo) return 1.0;
  if (a >= hi) return 0.0;
  const double t = (a - lo) / (hi - lo);
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

VecC lift_voltage(const TubeChart& chart, const YeeGrid& grid, const LineGrid& line, const VecC& v_nodes) {
  if (v_nodes.size() != line.nodes()) throw CouplingError("lift_voltage: expected one value per line node");
  const double eps = chart.collar();
  const double r = chart.curve().radius();
  if (eps * r < 2.0 * grid.h_max()) {
    std::ostringstream os;
    os << "collar thickness " << eps * r << " is thinner than two cells of size " << grid.h_max();
    throw CouplingError(os.str());
  }
  VecC out = VecC::Zero(grid.edge_count());
  const double h = line.h();
  for (int e = 0; e < grid.edge_count(); ++e) {
    const GridEntity& ed = grid.edges()[e];
    const Vec3 p = grid.edge_midpoint(ed.axis, ed.idx);
    const auto cc = chart.collar_coords(p);
    if (!cc || std::abs(cc->s) >= eps) continue;
    const double chi = collar_cutoff(cc->s, eps);
    if (chi == 0.0 || cc->eta < 0.0 || cc->eta > 1.0) continue;
    const int c = std::min(static_cast<int>(cc->eta / h), line.cells() - 1);
    const cplx dv = (v_nodes(c + 1) - v_nodes(c)) / h;
    const Vec3 grad_eta = chart.inverse_jacobian(cc->eta, cc->theta, cc->s).row(0).transpose();
    out(e) = chi * dv * grad_eta(ed.axis);
  }
  return out;
}

}  // namespace fieldcable
