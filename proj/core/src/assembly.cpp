#include "fieldcable/assembly.hpp"

#include <cmath>
#include <sstream>

#include "fieldcable/linalg.hpp"

namespace fieldcable {

std::string BlockLayout::label(int i) const {
  std::ostringstream os;
  if (i < off_B())
    os << "psi[" << i / k << "," << i % k << "]";
  else if (i < off_q())
    os << "B[" << i - off_B() << "]";
  else if (i < off_D())
    os << "q[" << (i - off_q()) / k << "," << (i - off_q()) % k << "]";
  else
    os << "D[" << i - off_D() << "]";
  return os.str();
}

CableCoupling build_cable_coupling(const Geometry& geometry, std::size_t cable, const YeeGrid& grid,
                                   const LineGrid& line_grid, int n_theta, int line) {
  CableCoupling cc;
  cc.line = line;
  cc.chart = geometry.chart(cable, line_grid.cells(), n_theta);
  cc.cm = assemble_coupling(cc.chart, line_grid);
  cc.trace = surface_trace(grid, cc.chart);
  return cc;
}

namespace {

void put(std::vector<TripC>& t, const SpMatC& a, int r0, int c0, cplx scale = 1.0) {
  for (int col = 0; col < a.outerSize(); ++col)
    for (SpMatC::InnerIterator it(a, col); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

void put(std::vector<TripC>& t, const SpMatR& a, int r0, int c0, double scale = 1.0) {
  for (int col = 0; col < a.outerSize(); ++col)
    for (SpMatR::InnerIterator it(a, col); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

void put_diag(std::vector<TripC>& t, const VecR& d, int off) {
  for (int i = 0; i < d.size(); ++i)
    if (d(i) != 0.0) t.emplace_back(off + i, off + i, d(i));
}

// Diagonal blocks of size `bs` of a sparse matrix starting at `off`.
MatC dense_block(const SpMatC& a, int off, int bs) {
  MatC b = MatC::Zero(bs, bs);
  for (int j = 0; j < bs; ++j)
    for (SpMatC::InnerIterator it(a, off + j); it; ++it)
      if (it.row() >= off && it.row() < off + bs) b(it.row() - off, j) = it.value();
  return b;
}

template <class F>
void for_each_block(const BlockLayout& l, F&& f) {
  const int k = l.k;
  for (int c = 0; c < l.n_psi / k; ++c) f(l.off_psi() + c * k, k);
  for (int i = 0; i < l.n_B; ++i) f(l.off_B() + i, 1);
  for (int j = 0; j < l.n_q / k; ++j) f(l.off_q() + j * k, k);
  for (int i = 0; i < l.n_D; ++i) f(l.off_D() + i, 1);
}

// S with S^H S = M H, block by block, and its inverse.
std::pair<SpMatC, SpMatC> energy_basis(const OperatorBundle& b) {
  std::vector<TripC> ts, ti;
  for_each_block(b.layout, [&](int off, int bs) {
    const MatC blk = b.mass(off) * dense_block(b.H, off, bs);
    const MatC s = linalg::sqrt_hpd(blk);
    const MatC si = linalg::inv_sqrt_hpd(blk);
    for (int j = 0; j < bs; ++j)
      for (int i = 0; i < bs; ++i) {
        if (s(i, j) != cplx(0.0)) ts.emplace_back(off + i, off + j, s(i, j));
        if (si(i, j) != cplx(0.0)) ti.emplace_back(off + i, off + j, si(i, j));
      }
  });
  const int n = b.size();
  SpMatC s(n, n), si(n, n);
  s.setFromTriplets(ts.begin(), ts.end());
  si.setFromTriplets(ti.begin(), ti.end());
  return {s, si};
}

}  // namespace

SpMatC OperatorBundle::generator() const { return SpMatC((J - R) * H); }

SpMatC OperatorBundle::ports_matrix() const {
  const int n = size(), kk = k();
  std::vector<TripC> t;
  put(t, B1, 0, 0);
  put(t, B2, 2 * kk, 0);
  SpMatC z(4 * kk, n);
  z.setFromTriplets(t.begin(), t.end());
  return z;
}

VecC OperatorBundle::ports(const VecC& e) const {
  VecC z(4 * k());
  z << B1 * e, B2 * e;
  return z;
}

cplx OperatorBundle::inner(const VecC& a, const VecC& b) const {
  return b.dot(mass.cast<cplx>().cwiseProduct(a));
}

double OperatorBundle::energy(const VecC& x) const { return 0.5 * inner(H * x, x).real(); }

double green_identity_residual(const OperatorBundle& b) {
  const SpMatC mj = b.mass.cast<cplx>().asDiagonal() * b.J;
  const SpMatC lhs = SpMatC(mj + SpMatC(mj.adjoint()));
  const SpMatC b1h = b.B1.adjoint(), b2h = b.B2.adjoint();
  const SpMatC rhs = SpMatC(b1h * b.B2) + SpMatC(b2h * b.B1);
  const SpMatC res = lhs - rhs;
  const double scale = std::max(mj.norm(), rhs.norm());
  return scale > 0.0 ? res.norm() / scale : res.norm();
}

OperatorBundle assemble_system(const LineBlocks& line, const MaxwellBlocks& mx,
                               const std::vector<CableCoupling>& couplings, double tol) {
  OperatorBundle b;
  BlockLayout& l = b.layout;
  l.k = line.k;
  l.n_psi = line.n_psi();
  l.n_q = line.n_q();
  l.n_B = static_cast<int>(mx.H_B.size());
  l.n_D = static_cast<int>(mx.H_D.size());
  const int n = l.size(), k = l.k;
  if (line.grid.periodic()) throw AssemblyError("the coupled system needs a bounded line grid");

  // Stack coupling over cables.
  int rows = 0;
  for (const auto& cc : couplings) {
    if (cc.line < 0 || cc.line >= k) throw AssemblyError("coupling refers to a missing line");
    if (cc.cm.Pel.cols() != line.grid.cells()) throw AssemblyError("coupling and line grid disagree");
    if (cc.trace.R_nu.cols() != l.n_B) throw AssemblyError("surface trace and Maxwell grid disagree");
    rows += static_cast<int>(cc.cm.Pel.rows());
  }
  SpMatR pel(rows, l.n_psi), rnu(rows, l.n_B);
  VecR ms(rows);
  {
    std::vector<TripR> tp, tr;
    int r0 = 0;
    for (const auto& cc : couplings) {
      for (int col = 0; col < cc.cm.Pel.outerSize(); ++col)
        for (SpMatR::InnerIterator it(cc.cm.Pel, col); it; ++it)
          tp.emplace_back(r0 + it.row(), it.col() * k + cc.line, it.value());
      for (int col = 0; col < cc.trace.R_nu.outerSize(); ++col)
        for (SpMatR::InnerIterator it(cc.trace.R_nu, col); it; ++it) tr.emplace_back(r0 + it.row(), it.col(), it.value());
      ms.segment(r0, cc.cm.Pel.rows()) = cc.cm.M_surf;
      r0 += static_cast<int>(cc.cm.Pel.rows());
    }
    pel.setFromTriplets(tp.begin(), tp.end());
    rnu.setFromTriplets(tr.begin(), tr.end());
  }
  const SpMatR dk = line.Dk.real(), dtk = line.Dtk.real();
  // Cell current carried by the surface field: M_line^-1 Pel^T M_surf (nu x H).
  const SpMatR pelt = pel.transpose();
  const SpMatR t_h = line.mass_psi.cwiseInverse().asDiagonal() * pelt * ms.asDiagonal() * rnu;
  const SpMatR rnut = rnu.transpose();
  const SpMatR j_bv = mx.mass_H.cwiseInverse().asDiagonal() * rnut * ms.asDiagonal() * pel * dk;
  const SpMatR j_qh = dtk * t_h;

  std::vector<TripC> tj;
  put(tj, dk, l.off_psi(), l.off_q(), -1.0);
  put(tj, dtk, l.off_q(), l.off_psi(), -1.0);
  put(tj, j_qh, l.off_q(), l.off_B(), 1.0);
  put(tj, mx.C_E, l.off_B(), l.off_D(), -1.0);
  put(tj, mx.C_H, l.off_D(), l.off_B(), 1.0);
  put(tj, j_bv, l.off_B(), l.off_q(), 1.0);
  b.J.resize(n, n);
  b.J.setFromTriplets(tj.begin(), tj.end());

  std::vector<TripC> tr;
  put(tr, line.R_psi, l.off_psi(), l.off_psi());
  put(tr, line.G_q, l.off_q(), l.off_q());
  put_diag(tr, mx.sigma_E, l.off_D());
  b.R.resize(n, n);
  b.R.setFromTriplets(tr.begin(), tr.end());

  std::vector<TripC> th;
  put(th, line.H_psi, l.off_psi(), l.off_psi());
  put_diag(th, mx.H_B, l.off_B());
  put(th, line.H_q, l.off_q(), l.off_q());
  put_diag(th, mx.H_D, l.off_D());
  b.H.resize(n, n);
  b.H.setFromTriplets(th.begin(), th.end());

  b.mass.resize(n);
  b.mass << line.mass_psi, mx.mass_H, line.mass_q, mx.mass_E;

  std::vector<TripC> t1, t2;
  put(t1, line.Xk, 0, l.off_psi());
  const SpMatR xt = line.Xk.real() * t_h;
  put(t1, xt, 0, l.off_B(), -1.0);
  b.B1.resize(2 * k, n);
  b.B1.setFromTriplets(t1.begin(), t1.end());
  const int last = l.off_q() + l.n_q - k;
  for (int i = 0; i < k; ++i) {
    t2.emplace_back(i, l.off_q() + i, 1.0);
    t2.emplace_back(k + i, last + i, -1.0);
  }
  b.B2.resize(2 * k, n);
  b.B2.setFromTriplets(t2.begin(), t2.end());

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for_each_block(l, [&](int off, int bs) {
    const MatC blk = dense_block(b.H, off, bs);
    if (bs == 1) {
      lo = std::min(lo, blk(0, 0).real());
      hi = std::max(hi, blk(0, 0).real());
    } else {
      lo = std::min(lo, linalg::min_eig_hermitian(blk));
      hi = std::max(hi, linalg::max_eig_hermitian(blk));
    }
  });
  b.hd_min = lo;
  b.hd_max = hi;
  if (!(lo > 0.0)) throw AssemblyError("Hamiltonian density is not positive definite");

  b.green_residual = green_identity_residual(b);
  if (!(b.green_residual <= tol)) {
    std::ostringstream os;
    os << "discrete Green identity residual " << b.green_residual << " exceeds " << tol;
    throw AssemblyError(os.str());
  }
  return b;
}

OperatorBundle lossless(const OperatorBundle& b) {
  OperatorBundle out = b;
  out.R = SpMatC(b.size(), b.size());
  return out;
}

SystemNode::SystemNode(const OperatorBundle& bundle, BoundaryConditionSpec spec, double bc_tol)
    : bundle_(&bundle), spec_(std::move(spec)), bc_tol_(bc_tol) {
  spec_.check_shapes();
  if (spec_.k != bundle.k()) throw ConfigError("boundary spec and operator bundle disagree on the line count");
}

VecC SystemNode::ports(const VecC& e, const VecC& lambda) const {
  VecC z = bundle_->ports(e);
  if (lambda.size() > 0) z.head(2 * spec_.k) += lambda;
  return z;
}

double SystemNode::constraint_residual(const VecC& e, const VecC& u, const VecC& lambda) const {
  if (u.size() != spec_.m()) throw ConfigError("input dimension does not match W_inp");
  const VecC z = ports(e, lambda);
  VecC rhs = VecC::Zero(2 * spec_.k);
  rhs.head(spec_.m()) = u;
  return (spec_.W_B() * z - rhs).norm() / std::max(1.0, z.norm());
}

VecC SystemNode::apply_FG(const VecC& e, const VecC& u, const VecC& lambda) const {
  const double r = constraint_residual(e, u, lambda);
  if (!(r <= bc_tol_)) {
    std::ostringstream os;
    os << "boundary constraint W_B z = (u, 0) violated: residual " << r << " > " << bc_tol_;
    throw DomainError(os.str());
  }
  VecC out = (bundle_->J - bundle_->R) * e;
  if (lambda.size() > 0) {
    const VecC src = bundle_->B2.adjoint() * lambda;
    out += bundle_->mass.cast<cplx>().cwiseInverse().cwiseProduct(src);
  }
  return out;
}

VecC SystemNode::apply_KL(const VecC& e, const VecC& lambda) const {
  if (spec_.p() == 0) return VecC();
  return spec_.W_out * ports(e, lambda);
}

ConstrainedGenerator::ConstrainedGenerator(const OperatorBundle& bundle, const MatC& W_B)
    : bundle_(&bundle), W_B_(W_B) {
  const int kk = bundle.k();
  if (W_B.rows() != 2 * kk || W_B.cols() != 4 * kk) throw CertificateError("W_B must be 2k x 4k");
  const AdmissibilityReport ar = check_admissible(W_B);
  if (!ar.full_rank) throw CertificateError("W_B does not have full row rank");
  if (!ar.admissible) throw CertificateError("W_B Sigma W_B^H is not positive semidefinite");
  const SpMatC zh = bundle.ports_matrix() * bundle.H;
  C_ = W_B * MatC(zh);
  const SpMatC b2h = bundle.B2.adjoint();
  Gamma_ = bundle.mass.cast<cplx>().cwiseInverse().asDiagonal() * MatC(b2h);
  const MatC w1 = W_B.leftCols(2 * kk);
  Eigen::JacobiSVD<MatC> svd(w1, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VecR& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(0) > 0.0 && s(i) > 1e-10 * s(0)) ++r;
  W1pinv_ = linalg::pinv(w1, 1e-10);
  U0_ = svd.matrixU().rightCols(2 * kk - r);
  V0_ = svd.matrixV().rightCols(2 * kk - r);
  kernel_rows_ = 2 * kk - r;
  if (kernel_rows_ > 0) {
    const MatC s0 = U0_.adjoint() * C_ * Gamma_ * V0_;
    Eigen::FullPivLU<MatC> lu(s0);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw CertificateError("constraint coupling U0^H C Gamma V0 is singular");
    S0inv_ = lu.inverse();
  }
}

VecC ConstrainedGenerator::apply(const VecC& x) const {
  const SpMatC a = bundle_->generator();
  VecC a1 = a * x - Gamma_ * (W1pinv_ * (C_ * x));
  if (kernel_rows_ > 0) a1 -= Gamma_ * (V0_ * (S0inv_ * (U0_.adjoint() * (C_ * a1))));
  return a1;
}

VecC ConstrainedGenerator::constraint(const VecC& x) const {
  if (kernel_rows_ == 0) return VecC();
  return U0_.adjoint() * (C_ * x);
}

MatC ConstrainedGenerator::dense() const {
  const auto [s, si] = energy_basis(*bundle_);
  const SpMatC a = bundle_->generator();
  MatC x = MatC(s * a);
  x = x * si;
  const MatC sg = s * Gamma_;
  const MatC csi = C_ * si;
  x.noalias() -= sg * (W1pinv_ * csi);
  if (kernel_rows_ == 0) return x;
  const MatC k = U0_.adjoint() * csi;
  const MatC kx = k * x;
  x.noalias() -= (sg * V0_) * (S0inv_ * kx);
  Eigen::HouseholderQR<MatC> qr(k.adjoint());
  const auto q = qr.householderQ();
  x.applyOnTheLeft(q.adjoint());
  x.applyOnTheRight(q);
  const int n = bundle_->size(), nc = kernel_rows_;
  return x.bottomRightCorner(n - nc, n - nc);
}

std::vector<cplx> ConstrainedGenerator::eigenvalues() const { return linalg::eigenvalues(dense()); }

double ConstrainedGenerator::range_margin() const {
  const MatC g = dense();
  const MatC m = MatC::Identity(g.rows(), g.cols()) - g;
  Eigen::BDCSVD<MatC> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace fieldcable
