#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace fieldcable {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;
using SpMatR = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<cplx>;
using TripR = Eigen::Triplet<double>;
using TripC = Eigen::Triplet<cplx>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct MaterialsError : Error { using Error::Error; };
struct GridError : Error { using Error::Error; };
struct CouplingError : Error { using Error::Error; };
struct AssemblyError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct CertificateError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };

}  // namespace fieldcable
