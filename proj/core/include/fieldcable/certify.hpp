#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fieldcable/types.hpp"

namespace fieldcable {

// [[0, I_n], [I_n, 0]]
MatC sigma_form(int n);

// Boundary-condition matrices acting on the port vector z = (B1 e; B2 e) in C^{4k}
// with B1 = (I_tot(0), I_tot(1)) and B2 = (V(0), -V(1)).
struct BoundaryConditionSpec {
  int k = 1;
  MatC W_inp;  // m x 4k
  MatC W_0;    // (2k - m) x 4k
  MatC W_out;  // p x 4k, may be empty

  int m() const { return static_cast<int>(W_inp.rows()); }
  int p() const { return static_cast<int>(W_out.rows()); }
  MatC W_B() const;
  MatC W1() const { return W_B().leftCols(2 * k); }
  MatC W2() const { return W_B().rightCols(2 * k); }
  // Throws ConfigError on inconsistent shapes.
  void check_shapes() const;

  static BoundaryConditionSpec from_W_B(const MatC& w_b, int m, const MatC& w_out = MatC());
};

struct AdmissibilityReport {
  bool full_rank = false;
  bool psd = false;
  bool admissible = false;
  bool strict = false;  // W1 W2^H + W2 W1^H > 0
  bool skew = false;    // W_B Sigma W_B^H = 0
  double sigma_min = 0.0, sigma_max = 0.0;  // singular values of W_B
  double form_min = 0.0, form_max = 0.0;    // eigenvalue extremes of W1 W2^H + W2 W1^H
};

AdmissibilityReport check_admissible(const MatC& W_B);

// Sufficient criterion: [W1 W2] full row rank and W1 W2^H + W2 W1^H >= 0.
bool check_max_dissipative(const MatC& W1, const MatC& W2);

// Relation-level oracle on ker[W1 W2]: Re<x, y> <= 0 on the whole kernel and dim = l.
struct KernelRelation {
  int dim = 0;
  double max_form = 0.0;  // largest eigenvalue of the Hermitian form Re<x, y> on a kernel basis
  bool dissipative = false;
  bool maximal = false;  // dissipative and dim == l
};

KernelRelation kernel_relation(const MatC& W1, const MatC& W2);

struct ColocatedOutput {
  MatC W_C;            // 2k x 4k
  MatC W_out;          // first m rows
  double col2_max = 0.0;  // largest eigenvalue of Sigma - T^H Sigma T, T = [W_B; W_C]
  double col2_min = 0.0;
  double cond = 0.0;     // condition number of T
  bool equality = false;  // Sigma-unitary completion, |col2| <= tol
};

// Hyperbolic completion: with (B+, B-) = W_B U, U = [[I, I], [I, -I]]/sqrt(2), take
// Phi = -Y X^H from the SVD B+^-1 B- = X S Y^H and W_C = (W_B Sigma L)^-H L^H, L = U [I; Phi].
ColocatedOutput build_colocated_output(const MatC& W_B, int m);

// Sigma - T^H Sigma T for T = [W_B; W_C].
MatC colocation_form(const MatC& W_B, const MatC& W_C);

struct Certificate {
  AdmissibilityReport admissibility;
  bool max_dissipative = false;
  bool colocated = false;  // W_out equals the first rows of a completion satisfying col2
  bool wellposed = false;  // strict and constants computed
  double delta = 0.0;
  double gamma = 0.0;
  double c = 0.0;       // sqrt(lambda_max(Hd) / lambda_min(Hd))
  double c_t = 0.0;     // max{1,c} max{1,gamma} (1+gamma)
  double c_energy = 0.0;  // constant from the discrete energy estimate in the L2 state norm
  double hd_min = 0.0, hd_max = 0.0;
  double col2_max = 0.0;
  std::vector<std::string> messages;
};

// Requires strict positivity; throws CertificateError otherwise or if W2 is numerically singular.
Certificate wellposedness_constants(const BoundaryConditionSpec& spec, double hd_min, double hd_max);

// Flags for any spec; constants only when strict (messages record why not).
Certificate certify(const BoundaryConditionSpec& spec, double hd_min, double hd_max);

// Random admissible W_B = [B+, B+ C] U^H with ||C|| <= contraction (C unitary if skew).
MatC random_admissible_W_B(int k, std::mt19937_64& rng, bool skew = false, bool complex_entries = true,
                           double contraction = 1.0);

}  // namespace fieldcable
