#include "fieldcable/certify.hpp"

#include <cmath>
#include <sstream>

#include "fieldcable/linalg.hpp"

namespace fieldcable {

namespace {

constexpr double kTol = 1e-10;

MatC hadamard_U(int n) {
  const double s = 1.0 / std::sqrt(2.0);
  MatC u(2 * n, 2 * n);
  const MatC i = MatC::Identity(n, n);
  u << s * i, s * i, s * i, -s * i;
  return u;
}

double spectral_norm(const MatC& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatC> svd(a);
  return svd.singularValues()(0);
}

double normalized_scale(const MatC& a) { return std::max(1.0, a.cwiseAbs().maxCoeff()); }

}  // namespace

MatC sigma_form(int n) {
  MatC s = MatC::Zero(2 * n, 2 * n);
  s.topRightCorner(n, n).setIdentity();
  s.bottomLeftCorner(n, n).setIdentity();
  return s;
}

MatC BoundaryConditionSpec::W_B() const {
  MatC w(W_inp.rows() + W_0.rows(), 4 * k);
  if (W_inp.rows() > 0) w.topRows(W_inp.rows()) = W_inp;
  if (W_0.rows() > 0) w.bottomRows(W_0.rows()) = W_0;
  return w;
}

void BoundaryConditionSpec::check_shapes() const {
  std::ostringstream os;
  if (k < 1) os << "k must be positive; ";
  if (W_inp.rows() > 0 && W_inp.cols() != 4 * k) os << "W_inp needs " << 4 * k << " columns; ";
  if (W_0.rows() > 0 && W_0.cols() != 4 * k) os << "W_0 needs " << 4 * k << " columns; ";
  if (W_out.rows() > 0 && W_out.cols() != 4 * k) os << "W_out needs " << 4 * k << " columns; ";
  if (W_inp.rows() + W_0.rows() != 2 * k) os << "W_inp and W_0 must have 2k = " << 2 * k << " rows in total; ";
  const std::string msg = os.str();
  if (!msg.empty()) throw ConfigError("boundary spec: " + msg.substr(0, msg.size() - 2));
}

BoundaryConditionSpec BoundaryConditionSpec::from_W_B(const MatC& w_b, int m, const MatC& w_out) {
  BoundaryConditionSpec s;
  s.k = static_cast<int>(w_b.cols() / 4);
  s.W_inp = w_b.topRows(m);
  s.W_0 = w_b.bottomRows(w_b.rows() - m);
  s.W_out = w_out;
  s.check_shapes();
  return s;
}

AdmissibilityReport check_admissible(const MatC& W_B) {
  AdmissibilityReport r;
  if (W_B.cols() % 4 != 0 || W_B.rows() * 2 != W_B.cols()) return r;
  const int n = static_cast<int>(W_B.rows());
  Eigen::JacobiSVD<MatC> svd(W_B);
  const VecR& s = svd.singularValues();
  r.sigma_max = s(0);
  r.sigma_min = s(s.size() - 1);
  r.full_rank = r.sigma_max > 0.0 && r.sigma_min > kTol * r.sigma_max;
  if (r.sigma_max == 0.0) return r;
  const MatC w = W_B / r.sigma_max;
  const MatC form = w.leftCols(n) * w.rightCols(n).adjoint() + w.rightCols(n) * w.leftCols(n).adjoint();
  Eigen::SelfAdjointEigenSolver<MatC> es(form, Eigen::EigenvaluesOnly);
  r.form_min = es.eigenvalues().minCoeff() * r.sigma_max * r.sigma_max;
  r.form_max = es.eigenvalues().maxCoeff() * r.sigma_max * r.sigma_max;
  r.psd = es.eigenvalues().minCoeff() >= -kTol;
  r.admissible = r.full_rank && r.psd;
  r.strict = r.admissible && es.eigenvalues().minCoeff() > kTol;
  r.skew = r.admissible && es.eigenvalues().cwiseAbs().maxCoeff() <= kTol;
  return r;
}

bool check_max_dissipative(const MatC& W1, const MatC& W2) {
  if (W1.rows() != W1.cols() || W2.rows() != W2.cols() || W1.rows() != W2.rows()) return false;
  MatC w(W1.rows(), 2 * W1.cols());
  w << W1, W2;
  if (linalg::numerical_rank(w, kTol) != W1.rows()) return false;
  const double s = spectral_norm(w);
  const MatC form = (W1 * W2.adjoint() + W2 * W1.adjoint()) / (s * s);
  return linalg::min_eig_hermitian(form) >= -kTol;
}

KernelRelation kernel_relation(const MatC& W1, const MatC& W2) {
  const int l = static_cast<int>(W1.cols());
  MatC w(W1.rows(), 2 * l);
  w << W1, W2;
  const MatC n = linalg::null_space(w, kTol);
  KernelRelation kr;
  kr.dim = static_cast<int>(n.cols());
  if (kr.dim == 0) {
    kr.dissipative = true;
    return kr;
  }
  const MatC x = n.topRows(l), y = n.bottomRows(l);
  const MatC form = 0.5 * (x.adjoint() * y + y.adjoint() * x);
  kr.max_form = linalg::max_eig_hermitian(form);
  kr.dissipative = kr.max_form <= kTol;
  kr.maximal = kr.dissipative && kr.dim == l;
  return kr;
}

MatC colocation_form(const MatC& W_B, const MatC& W_C) {
  MatC t(W_B.rows() + W_C.rows(), W_B.cols());
  t << W_B, W_C;
  const int n = static_cast<int>(W_B.cols() / 2);
  const MatC s = sigma_form(n);
  return s - t.adjoint() * s * t;
}

ColocatedOutput build_colocated_output(const MatC& W_B, int m) {
  const AdmissibilityReport ar = check_admissible(W_B);
  if (!ar.admissible) throw CertificateError("co-located output needs an admissible W_B");
  const int n = static_cast<int>(W_B.rows());
  const MatC u = hadamard_U(n);
  const MatC bpm = W_B * u;
  const MatC bp = bpm.leftCols(n), bm = bpm.rightCols(n);
  Eigen::PartialPivLU<MatC> lu(bp);
  const MatC c = lu.solve(bm);
  Eigen::JacobiSVD<MatC> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatC phi = -svd.matrixV() * svd.matrixU().adjoint();
  MatC stacked(2 * n, n);
  stacked << MatC::Identity(n, n), phi;
  const MatC l = u * stacked;
  const MatC g = W_B * sigma_form(n) * l;
  Eigen::FullPivLU<MatC> glu(g);
  if (!glu.isInvertible()) throw CertificateError("co-location completion is singular");
  ColocatedOutput out;
  out.W_C = glu.inverse().adjoint() * l.adjoint();
  out.W_out = out.W_C.topRows(m);
  const MatC form = colocation_form(W_B, out.W_C);
  Eigen::SelfAdjointEigenSolver<MatC> es(linalg::hermitian_part(form), Eigen::EigenvaluesOnly);
  out.col2_max = es.eigenvalues().maxCoeff();
  out.col2_min = es.eigenvalues().minCoeff();
  MatC t(2 * n, 2 * n);
  t << W_B, out.W_C;
  Eigen::JacobiSVD<MatC> ts(t);
  out.cond = ts.singularValues()(0) / ts.singularValues()(2 * n - 1);
  out.equality = es.eigenvalues().cwiseAbs().maxCoeff() <= kTol * normalized_scale(t) * normalized_scale(t);
  if (out.col2_max > kTol * normalized_scale(t) * normalized_scale(t)) {
    std::ostringstream os;
    os << "co-location inequality violated, max eigenvalue " << out.col2_max;
    throw CertificateError(os.str());
  }
  return out;
}

Certificate wellposedness_constants(const BoundaryConditionSpec& spec, double hd_min, double hd_max) {
  spec.check_shapes();
  Certificate cert;
  const MatC wb = spec.W_B();
  cert.admissibility = check_admissible(wb);
  cert.max_dissipative = check_max_dissipative(spec.W1(), spec.W2());
  if (!cert.admissibility.strict)
    throw CertificateError("well-posedness constants need W1 W2^H + W2 W1^H positive definite");
  const int n = 2 * spec.k;
  const MatC w1 = spec.W1(), w2 = spec.W2();
  Eigen::JacobiSVD<MatC> s2(w2);
  if (!(s2.singularValues()(n - 1) > kTol * s2.singularValues()(0)))
    throw CertificateError("W2 is numerically singular");
  Eigen::PartialPivLU<MatC> lu2(w2);
  const MatC w2inv = lu2.inverse();
  const MatC form = w1 * w2.adjoint() + w2 * w1.adjoint();
  cert.delta = linalg::min_eig_hermitian(w2inv * form * w2inv.adjoint());

  MatC t(2 * n, 2 * n);
  t.topRows(n) = wb;
  t.bottomRows(n).setZero();
  t.bottomLeftCorner(n, n) = w2inv.adjoint();
  Eigen::FullPivLU<MatC> tlu(t);
  if (!tlu.isInvertible()) throw CertificateError("[W_B; W~_C] is singular");
  cert.gamma = spec.p() > 0 ? spectral_norm(spec.W_out * tlu.inverse()) : 0.0;

  if (!(hd_min > 0.0) || !(hd_max >= hd_min)) throw CertificateError("Hd bounds must satisfy 0 < min <= max");
  cert.hd_min = hd_min;
  cert.hd_max = hd_max;
  cert.c = std::sqrt(hd_max / hd_min);
  cert.c_t = std::max(1.0, cert.c) * std::max(1.0, cert.gamma) * (1.0 + cert.gamma);

  // Energy estimate: dE/dt <= Re<b1, b2> with b2 = W2^-1 (u,0) - P b1 and P + P^H >= delta I.
  const MatC p = w2inv * w1;
  double g1 = 0.0, g2 = 0.0;
  if (spec.p() > 0) {
    g1 = spectral_norm(spec.W_out.leftCols(n) - spec.W_out.rightCols(n) * p);
    g2 = spectral_norm(spec.W_out.rightCols(n));
  }
  const double w = spec.m() > 0 ? spectral_norm(w2inv.leftCols(spec.m())) : 0.0;
  const double a = hd_min, b = hd_max, d = cert.delta;
  cert.c_energy = std::max(std::sqrt(b / a) + g1 * std::sqrt(2.0 * b / d),
                           w * (std::sqrt(2.0 / (a * d)) + 2.0 * g1 / d + g2));
  cert.wellposed = true;
  return cert;
}

Certificate certify(const BoundaryConditionSpec& spec, double hd_min, double hd_max) {
  spec.check_shapes();
  Certificate cert;
  const MatC wb = spec.W_B();
  cert.admissibility = check_admissible(wb);
  cert.max_dissipative = check_max_dissipative(spec.W1(), spec.W2());
  const AdmissibilityReport& ar = cert.admissibility;
  if (!ar.full_rank) cert.messages.push_back("W_B does not have full row rank");
  if (!ar.psd) cert.messages.push_back("W_B Sigma W_B^H is not positive semidefinite");
  if (ar.admissible && spec.p() > 0) {
    const int n = 2 * spec.k;
    try {
      const ColocatedOutput co = build_colocated_output(wb, spec.m());
      if (spec.p() <= n) {
        MatC wc = co.W_C;
        wc.topRows(spec.p()) = spec.W_out;
        MatC t(2 * n, 2 * n);
        t << wb, wc;
        Eigen::JacobiSVD<MatC> ts(t);
        const double cond = ts.singularValues()(0) / ts.singularValues()(2 * n - 1);
        const MatC form = colocation_form(wb, wc);
        cert.col2_max = linalg::max_eig_hermitian(form);
        const double scale = normalized_scale(t);
        cert.colocated = cond < 1e12 && cert.col2_max <= kTol * scale * scale;
      }
    } catch (const CertificateError& e) {
      cert.messages.push_back(e.what());
    }
    if (!cert.colocated) cert.messages.push_back("W_out is not a co-located output for W_B");
  }
  if (ar.strict) {
    try {
      Certificate wp = wellposedness_constants(spec, hd_min, hd_max);
      wp.colocated = cert.colocated;
      wp.col2_max = cert.col2_max;
      wp.messages = cert.messages;
      return wp;
    } catch (const CertificateError& e) {
      cert.messages.push_back(e.what());
    }
  } else if (ar.admissible) {
    cert.messages.push_back("W_B is not strictly dissipative; well-posedness constants not computed");
  }
  cert.hd_min = hd_min;
  cert.hd_max = hd_max;
  if (hd_min > 0.0) cert.c = std::sqrt(hd_max / hd_min);
  return cert;
}

MatC random_admissible_W_B(int k, std::mt19937_64& rng, bool skew, bool complex_entries, double contraction) {
  const int n = 2 * k;
  std::normal_distribution<double> nd;
  auto rnd = [&](int r, int c) {
    MatC a(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) a(i, j) = complex_entries ? cplx(nd(rng), nd(rng)) : cplx(nd(rng), 0.0);
    return a;
  };
  MatC bp = rnd(n, n);
  // Keep B+ away from singular so rank checks stay meaningful.
  bp += 0.5 * std::sqrt(static_cast<double>(n)) * MatC::Identity(n, n);
  MatC c;
  if (skew) {
    Eigen::HouseholderQR<MatC> qr(rnd(n, n));
    c = qr.householderQ() * MatC::Identity(n, n);
  } else {
    c = rnd(n, n);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    c *= contraction * ud(rng) / spectral_norm(c);
  }
  MatC blocks(n, 2 * n);
  blocks << bp, bp * c;
  return blocks * hadamard_U(n).adjoint();
}

}  // namespace fieldcable
