#include "fieldcable/linalg.hpp"

#include <lapacke.h>

namespace fieldcable::linalg {

std::vector<cplx> eigenvalues(const MatR& a) {
  if (a.rows() != a.cols()) throw Error("eigenvalues: matrix not square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (n == 0) return {};
  MatR work = a;
  std::vector<double> wr(n), wi(n);
  lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(),
                                  wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw SolverError("dgeev failed, info=" + std::to_string(info));
  std::vector<cplx> out(n);
  for (lapack_int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
  return out;
}

std::vector<cplx> eigenvalues(const MatC& a) {
  if (a.rows() != a.cols()) throw Error("eigenvalues: matrix not square");
  if (is_real(a)) return eigenvalues(MatR(a.real()));
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (n == 0) return {};
  MatC work = a;
  std::vector<cplx> w(n);
  lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n,
                                  reinterpret_cast<lapack_complex_double*>(work.data()), n,
                                  reinterpret_cast<lapack_complex_double*>(w.data()), nullptr,
                                  1, nullptr, 1);
  if (info != 0) throw SolverError("zgeev failed, info=" + std::to_string(info));
  return w;
}

bool is_real(const MatC& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (a(i, j).imag() != 0.0) return false;
  return true;
}

int numerical_rank(const MatC& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<MatC> svd(a);
  const VecR& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

MatC null_space(const MatC& a, double rel_tol) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return MatC::Identity(n, n);
  Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeFullV);
  const VecR& s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(0) > 0.0 && s(i) > rel_tol * s(0)) ++r;
  return svd.matrixV().rightCols(n - r);
}

MatC pinv(const MatC& a, double rel_tol) {
  if (a.size() == 0) return MatC::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecR& s = svd.singularValues();
  VecR inv = VecR::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(0) > 0.0 && s(i) > rel_tol * s(0)) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

MatC hermitian_part(const MatC& a) { return 0.5 * (a + a.adjoint()); }

double min_eig_hermitian(const MatC& a) {
  Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig_hermitian(const MatC& a) {
  Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

MatC sqrt_hpd(const MatC& a) {
  Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(a));
  if (es.eigenvalues().minCoeff() <= 0.0) throw Error("sqrt_hpd: matrix not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

MatC inv_sqrt_hpd(const MatC& a) {
  Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(a));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw Error("inv_sqrt_hpd: matrix not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().adjoint();
}

SpMatC to_complex(const SpMatR& a) { return a.cast<cplx>(); }

SpMatC sparse_identity(Eigen::Index n) {
  SpMatC i(n, n);
  i.setIdentity();
  return i;
}

}  // namespace fieldcable::linalg
