#include "fieldcable/tline.hpp"

#include <algorithm>
#include <sstream>

#include "fieldcable/linalg.hpp"

namespace fieldcable {

MaterialProfile MaterialProfile::constant(const MatC& value) { return {{0.0}, {value}}; }

MatC MaterialProfile::at(double x) const {
  if (values.empty()) throw MaterialsError("empty material profile");
  if (values.size() == 1 || x <= eta.front()) return values.front();
  if (x >= eta.back()) return values.back();
  auto it = std::upper_bound(eta.begin(), eta.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - eta.begin());
  const double t = (x - eta[j - 1]) / (eta[j] - eta[j - 1]);
  return (1.0 - t) * values[j - 1] + t * values[j];
}

LineMaterials LineMaterials::uniform(const MatC& c, const MatC& l, const MatC& r, const MatC& g) {
  LineMaterials m;
  m.k = static_cast<int>(c.rows());
  m.C = MaterialProfile::constant(c);
  m.L = MaterialProfile::constant(l);
  m.R = MaterialProfile::constant(r);
  m.G = MaterialProfile::constant(g);
  return m;
}

namespace {

void check_profile(const MaterialProfile& p, int k, const char* name, LineMaterialsReport& rep) {
  if (p.values.empty() || p.eta.size() != p.values.size()) {
    rep.shapes = false;
    rep.messages.push_back(std::string(name) + ": sample count mismatch");
    return;
  }
  for (std::size_t j = 0; j < p.values.size(); ++j) {
    if (p.values[j].rows() != k || p.values[j].cols() != k) {
      rep.shapes = false;
      rep.messages.push_back(std::string(name) + ": expected " + std::to_string(k) + "x" +
                             std::to_string(k) + " samples");
      return;
    }
    if (j > 0 && !(p.eta[j] > p.eta[j - 1])) {
      rep.shapes = false;
      rep.messages.push_back(std::string(name) + ": sample positions must increase");
      return;
    }
  }
}

}  // namespace

LineMaterialsReport validate_line_materials(const LineMaterials& m, double matl_floor) {
  LineMaterialsReport rep;
  check_profile(m.C, m.k, "C", rep);
  check_profile(m.L, m.k, "L", rep);
  check_profile(m.R, m.k, "R", rep);
  check_profile(m.G, m.k, "G", rep);
  if (!rep.shapes) {
    rep.ok = false;
    return rep;
  }
  auto herm_err = [](const MatC& a) {
    const double s = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.adjoint()).cwiseAbs().maxCoeff() / s;
  };
  double cmin = std::numeric_limits<double>::infinity(), lmin = cmin, rmin = cmin, gmin = cmin;
  for (const MatC& c : m.C.values) {
    if (herm_err(c) > 1e-12) rep.hermitian = false;
    const double lo = linalg::min_eig_hermitian(c);
    cmin = std::min(cmin, lo);
    if (!(lo > matl_floor * std::max(1.0, linalg::max_eig_hermitian(c)))) rep.c_positive = false;
  }
  for (const MatC& l : m.L.values) {
    if (herm_err(l) > 1e-12) rep.hermitian = false;
    const double lo = linalg::min_eig_hermitian(l);
    lmin = std::min(lmin, lo);
    if (!(lo > matl_floor * std::max(1.0, linalg::max_eig_hermitian(l)))) rep.l_positive = false;
  }
  for (const MatC& r : m.R.values) rmin = std::min(rmin, linalg::min_eig_hermitian(r));
  for (const MatC& g : m.G.values) gmin = std::min(gmin, linalg::min_eig_hermitian(g));
  rep.c_min_eig = cmin;
  rep.l_min_eig = lmin;
  rep.r_min_eig = rmin;
  rep.g_min_eig = gmin;
  rep.r_accretive = rmin >= -1e-12;
  rep.g_accretive = gmin >= -1e-12;
  if (!rep.hermitian) rep.messages.push_back("line parameters: C and L must be Hermitian");
  if (!rep.c_positive) rep.messages.push_back("line parameters: C must be positive definite");
  if (!rep.l_positive) rep.messages.push_back("line parameters: L must be positive definite");
  if (!rep.r_accretive) rep.messages.push_back("line parameters: R + R^H must be positive semidefinite");
  if (!rep.g_accretive) rep.messages.push_back("line parameters: G + G^H must be positive semidefinite");
  rep.ok = rep.hermitian && rep.c_positive && rep.l_positive && rep.r_accretive && rep.g_accretive;
  return rep;
}

LineGrid::LineGrid(int n, bool periodic) : n_(n), h_(1.0 / n), periodic_(periodic) {
  if (n < 2) throw ConfigError("line grid needs at least two cells");
  const int nn = nodes();
  wc_ = VecR::Constant(n, h_);
  wn_ = VecR::Constant(nn, h_);
  std::vector<TripR> td, tt, tx;
  for (int c = 0; c < n; ++c) {
    const int right = periodic ? (c + 1) % n : c + 1;
    td.emplace_back(c, right, 1.0 / h_);
    td.emplace_back(c, c, -1.0 / h_);
  }
  if (periodic) {
    for (int j = 0; j < n; ++j) {
      const int left = (j + n - 1) % n;
      tt.emplace_back(j, j, 1.0 / h_);
      tt.emplace_back(j, left, -1.0 / h_);
    }
  } else {
    wn_(0) = wn_(n) = 0.5 * h_;
    // I^b_0 = (3 I_0 - I_1)/2, I^b_n = (3 I_{n-1} - I_{n-2})/2
    tx.emplace_back(0, 0, 1.5);
    tx.emplace_back(0, 1, -0.5);
    tx.emplace_back(1, n - 1, 1.5);
    tx.emplace_back(1, n - 2, -0.5);
    const double hb = 0.5 * h_;
    // Row 0: (I_0 - I^b_0)/(h/2)
    tt.emplace_back(0, 0, (1.0 - 1.5) / hb);
    tt.emplace_back(0, 1, 0.5 / hb);
    for (int j = 1; j < n; ++j) {
      tt.emplace_back(j, j, 1.0 / h_);
      tt.emplace_back(j, j - 1, -1.0 / h_);
    }
    // Row n: (I^b_n - I_{n-1})/(h/2)
    tt.emplace_back(n, n - 1, (1.5 - 1.0) / hb);
    tt.emplace_back(n, n - 2, -0.5 / hb);
  }
  d_.resize(n, nn);
  d_.setFromTriplets(td.begin(), td.end());
  dt_.resize(nn, n);
  dt_.setFromTriplets(tt.begin(), tt.end());
  x_.resize(periodic ? 0 : 2, n);
  x_.setFromTriplets(tx.begin(), tx.end());
}

SpMatC expand_lines(const SpMatR& a, int k) {
  std::vector<TripC> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()) * k);
  for (int col = 0; col < a.outerSize(); ++col)
    for (SpMatR::InnerIterator it(a, col); it; ++it)
      for (int i = 0; i < k; ++i) t.emplace_back(it.row() * k + i, it.col() * k + i, it.value());
  SpMatC out(a.rows() * k, a.cols() * k);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

namespace {

SpMatC block_diag(const std::vector<MatC>& blocks, int k) {
  std::vector<TripC> t;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (blocks[b](i, j) != cplx(0.0)) t.emplace_back(b * k + i, b * k + j, blocks[b](i, j));
  const int n = static_cast<int>(blocks.size()) * k;
  SpMatC out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace

LineBlocks assemble_line(const LineMaterials& m, const LineGrid& g) {
  const LineMaterialsReport rep = validate_line_materials(m);
  if (!rep.ok) {
    std::string msg = "invalid line materials:";
    for (const auto& s : rep.messages) msg += " " + s;
    throw MaterialsError(msg);
  }
  const int k = m.k;
  LineBlocks lb;
  lb.k = k;
  lb.grid = g;
  std::vector<MatC> hl, hc, r, gg;
  for (int c = 0; c < g.cells(); ++c) {
    const double x = g.cell_eta(c);
    Eigen::FullPivLU<MatC> lu(m.L.at(x));
    if (!lu.isInvertible()) throw MaterialsError("singular L sample");
    hl.push_back(linalg::hermitian_part(lu.inverse()));
    r.push_back(m.R.at(x));
  }
  for (int j = 0; j < g.nodes(); ++j) {
    const double x = g.node_eta(j);
    Eigen::FullPivLU<MatC> lu(m.C.at(x));
    if (!lu.isInvertible()) throw MaterialsError("singular C sample");
    hc.push_back(linalg::hermitian_part(lu.inverse()));
    gg.push_back(m.G.at(x));
  }
  lb.H_psi = block_diag(hl, k);
  lb.H_q = block_diag(hc, k);
  lb.R_psi = block_diag(r, k);
  lb.G_q = block_diag(gg, k);
  lb.Dk = expand_lines(g.D(), k);
  lb.Dtk = expand_lines(g.Dt(), k);
  if (!g.periodic()) {
    // Rows: I(0) for each line, then I(1) for each line.
    std::vector<TripC> t;
    const SpMatR& x = g.extrapolation();
    for (int col = 0; col < x.outerSize(); ++col)
      for (SpMatR::InnerIterator it(x, col); it; ++it)
        for (int i = 0; i < k; ++i) t.emplace_back(it.row() * k + i, it.col() * k + i, it.value());
    lb.Xk.resize(2 * k, g.cells() * k);
    lb.Xk.setFromTriplets(t.begin(), t.end());
  }
  lb.mass_psi.resize(lb.n_psi());
  lb.mass_q.resize(lb.n_q());
  for (int c = 0; c < g.cells(); ++c) lb.mass_psi.segment(c * k, k).setConstant(g.cell_weights()(c));
  for (int j = 0; j < g.nodes(); ++j) lb.mass_q.segment(j * k, k).setConstant(g.node_weights()(j));
  return lb;
}

VecC BoundaryValues::stacked() const {
  const Eigen::Index k = V0.size();
  VecC z(4 * k);
  z << V0, Itot0, V1, -Itot1;
  return z;
}

VecC BoundaryValues::ports() const {
  const Eigen::Index k = V0.size();
  VecC z(4 * k);
  z << Itot0, Itot1, V0, -V1;
  return z;
}

BoundaryValues extract_boundary(const LineBlocks& lb, const VecC& i_tot_cells, const VecC& v_nodes) {
  if (lb.grid.periodic()) throw ConfigError("periodic line grid has no boundary");
  const int k = lb.k;
  if (i_tot_cells.size() != lb.n_psi() || v_nodes.size() != lb.n_q())
    throw ConfigError("extract_boundary: size mismatch");
  const VecC ib = lb.Xk * i_tot_cells;
  BoundaryValues b;
  b.Itot0 = ib.head(k);
  b.Itot1 = ib.tail(k);
  b.V0 = v_nodes.head(k);
  b.V1 = v_nodes.tail(k);
  return b;
}

}  // namespace fieldcable
