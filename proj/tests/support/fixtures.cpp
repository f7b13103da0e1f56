#include "fixtures.hpp"

namespace fctest {

Scenario tube_scenario(const TubeSetup& s) {
  Scenario sc;
  sc.geometry.box.lo = s.lo;
  sc.geometry.box.hi = s.hi;
  sc.geometry.collar_halfwidth = s.collar;
  sc.geometry.cables.push_back(CableCurve::segment(Vec3(s.center.x(), s.center.y(), s.z0),
                                                   Vec3(s.center.x(), s.center.y(), s.z1), s.radius));
  sc.cells = s.cells;
  sc.n_theta = s.n_theta;
  sc.line_cells = s.line_cells;
  const MatC c = spd(s.k, 1.0, 0.2), l = spd(s.k, 1.5, 0.3);
  const MatC r = s.lossy ? spd(s.k, 0.3, 0.05) : MatC::Zero(s.k, s.k);
  const MatC g = s.lossy ? spd(s.k, 0.2, 0.02) : MatC::Zero(s.k, s.k);
  sc.line = LineMaterials::uniform(c, l, r, g);
  sc.eps = Vec3::Constant(s.eps);
  sc.mu = Vec3::Constant(s.mu);
  sc.sigma = s.lossy ? Vec3::Constant(0.1) : Vec3::Zero();
  sc.boundary.k = s.k;
  sc.boundary.W_inp = MatC();
  sc.boundary.W_0 = current_zero(s.k);
  return sc;
}

MatC spd(int k, double diag, double off) {
  MatC m = MatC::Constant(k, k, off);
  m.diagonal().setConstant(diag);
  return m;
}

VecC random_vector(int n, std::mt19937_64& rng, bool complex_entries) {
  std::normal_distribution<double> nd;
  VecC v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_entries ? cplx(nd(rng), nd(rng)) : cplx(nd(rng), 0.0);
  return v;
}

MatC current_zero(int k) {
  MatC w = MatC::Zero(2 * k, 4 * k);
  w.leftCols(2 * k).setIdentity();
  return w;
}

MatC voltage_zero(int k) {
  MatC w = MatC::Zero(2 * k, 4 * k);
  w.rightCols(2 * k).setIdentity();
  return w;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace fctest
