#pragma once

#include <vector>

#include "fieldcable/certify.hpp"
#include "fieldcable/coupling.hpp"
#include "fieldcable/geometry.hpp"
#include "fieldcable/maxwell.hpp"
#include "fieldcable/tline.hpp"
#include "fieldcable/types.hpp"

namespace fieldcable {

// x = (psi, B, q, D), e = (I, H, V, E).
struct BlockLayout {
  int k = 1;
  int n_psi = 0, n_B = 0, n_q = 0, n_D = 0;

  int off_psi() const { return 0; }
  int off_B() const { return n_psi; }
  int off_q() const { return n_psi + n_B; }
  int off_D() const { return n_psi + n_B + n_q; }
  int size() const { return n_psi + n_B + n_q + n_D; }
  // Label of a flat index, e.g. "q[3]".
  std::string label(int i) const;
};

// Coupling data for one cable; the cable drives line `line`.
struct CableCoupling {
  int line = 0;
  TubeChart chart;
  CouplingMatrices cm;
  SurfaceTrace trace;
};

CableCoupling build_cable_coupling(const Geometry& geometry, std::size_t cable, const YeeGrid& grid,
                                   const LineGrid& line_grid, int n_theta, int line);

struct OperatorBundle {
  BlockLayout layout;
  SpMatC J;   // skew core plus coupling, acts on efforts
  SpMatC R;   // damping, acts on efforts
  SpMatC H;   // Hodge / material operator, e = H x
  VecR mass;  // diagonal weights of the state inner product
  SpMatC B1;  // 2k x N: (I_tot(0), I_tot(1)) of an effort
  SpMatC B2;  // 2k x N: (V(0), -V(1)) of an effort
  double hd_min = 0.0, hd_max = 0.0;  // spectrum bounds of H
  double green_residual = 0.0;

  int size() const { return layout.size(); }
  int k() const { return layout.k; }
  // (J - R) H
  SpMatC generator() const;
  // Port vector z = (B1 e; B2 e).
  VecC ports(const VecC& e) const;
  SpMatC ports_matrix() const;
  double energy(const VecC& x) const;
  cplx inner(const VecC& a, const VecC& b) const;  // <a, b>_M = b^H M a
};

// Relative residual of M J + J^H M - (B1^H B2 + B2^H B1).
double green_identity_residual(const OperatorBundle& b);

// Throws AssemblyError when the Green identity residual exceeds `tol`.
OperatorBundle assemble_system(const LineBlocks& line, const MaxwellBlocks& mx,
                               const std::vector<CableCoupling>& couplings, double tol = 1e-12);

// Copy with the damping block removed.
OperatorBundle lossless(const OperatorBundle& b);

class SystemNode {
 public:
  SystemNode(const OperatorBundle& bundle, BoundaryConditionSpec spec, double bc_tol = 1e-8);

  const BoundaryConditionSpec& spec() const { return spec_; }
  const OperatorBundle& bundle() const { return *bundle_; }
  double bc_tol() const { return bc_tol_; }

  // Effective ports: B1 is shifted by the boundary multiplier lambda (empty means 0).
  VecC ports(const VecC& e, const VecC& lambda = VecC()) const;
  // W_B z - (u, 0), scaled by max(1, |z|).
  double constraint_residual(const VecC& e, const VecC& u, const VecC& lambda = VecC()) const;
  // (J - R) e, plus the boundary source M^-1 B2^H lambda; throws DomainError if (e, u) violate the
  // boundary constraint beyond bc_tol.
  VecC apply_FG(const VecC& e, const VecC& u, const VecC& lambda = VecC()) const;
  // y = W_out z
  VecC apply_KL(const VecC& e, const VecC& lambda = VecC()) const;

 private:
  const OperatorBundle* bundle_;
  BoundaryConditionSpec spec_;
  double bc_tol_;
};

// (J - R) H on {x : W_B z(Hx) = 0}, realized with the boundary multiplier:
// x' = A x + Gamma lambda, W1 lambda + W_B z(Hx) = 0, Gamma = M^-1 B2^H.
class ConstrainedGenerator {
 public:
  ConstrainedGenerator(const OperatorBundle& bundle, const MatC& W_B);

  int dimension() const { return static_cast<int>(bundle_->size() - kernel_rows_); }
  int algebraic_constraints() const { return kernel_rows_; }
  // A x + Gamma lambda(x) with lambda eliminated.
  VecC apply(const VecC& x) const;
  // Residual of the algebraic part U0^H W_B z(Hx).
  VecC constraint(const VecC& x) const;
  // Dense matrix in an energy-orthonormal basis of the constraint subspace.
  MatC dense() const;
  std::vector<cplx> eigenvalues() const;
  // Smallest singular value of I - G (range condition).
  double range_margin() const;

 private:
  const OperatorBundle* bundle_;
  MatC W_B_;
  MatC C_;      // 2k x N: W_B z(H x)
  MatC Gamma_;  // N x 2k
  MatC W1pinv_, U0_, V0_, S0inv_;
  int kernel_rows_ = 0;
};

}  // namespace fieldcable
