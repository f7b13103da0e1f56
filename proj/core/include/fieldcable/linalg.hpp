#pragma once

#include <vector>

#include "fieldcable/types.hpp"

namespace fieldcable::linalg {

// Eigenvalues of a dense square matrix (LAPACK geev, no eigenvectors).
// A complex matrix with identically zero imaginary part takes the real path.
std::vector<cplx> eigenvalues(const MatR& a);
std::vector<cplx> eigenvalues(const MatC& a);

bool is_real(const MatC& a);

int numerical_rank(const MatC& a, double rel_tol = 1e-10);
// Orthonormal basis of ker(a); columns.
MatC null_space(const MatC& a, double rel_tol = 1e-10);
MatC pinv(const MatC& a, double rel_tol = 1e-12);

double min_eig_hermitian(const MatC& a);
double max_eig_hermitian(const MatC& a);
MatC hermitian_part(const MatC& a);
MatC sqrt_hpd(const MatC& a);
MatC inv_sqrt_hpd(const MatC& a);

SpMatC to_complex(const SpMatR& a);
SpMatC sparse_identity(Eigen::Index n);

}  // namespace fieldcable::linalg
