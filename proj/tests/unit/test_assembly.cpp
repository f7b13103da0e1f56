#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "fieldcable/linalg.hpp"

using namespace fctest;

namespace {

// Small coupled model: 6^3 grid, tube radius 1/3.
TubeSetup small_setup(int k = 1, bool lossy = false) {
  TubeSetup s;
  s.cells = {6, 6, 6};
  s.radius = 1.0 / 3.0;
  s.z0 = 0.2;
  s.z1 = 0.8;
  s.k = k;
  s.line_cells = 8;
  s.n_theta = 12;
  s.lossy = lossy;
  return s;
}

double hermitian_part_max(const MatC& a) { return linalg::max_eig_hermitian(linalg::hermitian_part(a)); }

}  // namespace

TEST_CASE("Green identity holds for random efforts") {
  TubeSetup s;
  s.k = 2;
  s.line_cells = 16;
  s.lossy = true;
  const auto model = build_model(tube_scenario(s));
  const OperatorBundle& b = model->bundle;
  CHECK(b.green_residual <= 1e-12);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const VecC e1 = random_vector(b.size(), rng), e2 = random_vector(b.size(), rng);
    const cplx lhs = b.inner(b.J * e1, e2) + b.inner(e1, b.J * e2);
    const VecC z1 = b.ports(e1), z2 = b.ports(e2);
    const cplx rhs = z2.dot(sigma_form(2 * s.k) * z1);
    const double scale = std::max({1.0, std::abs(b.inner(b.J * e1, e2)), std::abs(rhs)});
    CHECK(std::abs(lhs - rhs) / scale <= 1e-12);
  }
}

TEST_CASE("uncoupled assembly splits into line and Maxwell identities") {
  TubeSetup s = small_setup(2);
  const auto model = build_model(tube_scenario(s));
  const OperatorBundle b = assemble_system(model->line, model->maxwell, {});
  CHECK(b.green_residual <= 1e-12);
  const BlockLayout& l = b.layout;
  const MatC mj = MatC(b.mass.cast<cplx>().asDiagonal()) * MatC(b.J);
  const MatC form = mj + mj.adjoint();
  // field rows and columns: B then (after q) D
  const int nb = l.n_B, nd = l.n_D;
  double worst = 0.0;
  worst = std::max(worst, form.block(l.off_B(), l.off_B(), nb, nb).cwiseAbs().maxCoeff());
  worst = std::max(worst, form.block(l.off_B(), l.off_D(), nb, nd).cwiseAbs().maxCoeff());
  worst = std::max(worst, form.block(l.off_D(), l.off_D(), nd, nd).cwiseAbs().maxCoeff());
  CHECK(worst == 0.0);
  // no line-field cross terms at all
  CHECK(MatC(b.J).block(l.off_q(), l.off_B(), l.n_q, nb).cwiseAbs().maxCoeff() == 0.0);
  CHECK(MatC(b.J).block(l.off_B(), l.off_q(), nb, l.n_q).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unit materials give an identity Hamiltonian") {
  TubeSetup s = small_setup(2);
  Scenario sc = tube_scenario(s);
  sc.line = LineMaterials::uniform(MatC::Identity(2, 2), MatC::Identity(2, 2), MatC::Zero(2, 2), MatC::Zero(2, 2));
  const auto model = build_model(sc);
  const OperatorBundle& b = model->bundle;
  const VecC e = b.H * VecC::Ones(b.size());
  CHECK((e - VecC::Ones(b.size())).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(b.hd_min == doctest::Approx(1.0));
  CHECK(b.hd_max == doctest::Approx(1.0));
}

TEST_CASE("block layout labels") {
  BlockLayout l;
  l.k = 2;
  l.n_psi = 4;
  l.n_B = 3;
  l.n_q = 6;
  l.n_D = 5;
  CHECK(l.size() == 18);
  CHECK(l.label(3) == "psi[1,1]");
  CHECK(l.label(4) == "B[0]");
  CHECK(l.label(8) == "q[0,1]");
  CHECK(l.label(17) == "D[4]");
}

TEST_CASE("more cables than lines is a configuration error") {
  TubeSetup s = small_setup(1);
  Scenario sc = tube_scenario(s);
  sc.geometry.box.hi = Vec3(2, 1, 1);
  sc.cells = {12, 6, 6};
  sc.geometry.cables.push_back(CableCurve::segment(Vec3(1.5, 0.5, 0.2), Vec3(1.5, 0.5, 0.8), 1.0 / 3.0));
  CHECK_THROWS_AS(build_model(sc), ConfigError);
}

TEST_CASE("system node domain and output maps") {
  TubeSetup s = small_setup(1);
  const auto model = build_model(tube_scenario(s));
  const OperatorBundle& b = model->bundle;
  std::mt19937_64 rng(4);
  // all boundary rows are inputs
  const MatC wb = random_admissible_W_B(1, rng, false, true, 0.5);
  MatC w_out = MatC::Zero(1, 4);
  w_out(0, 2) = 1.0;  // V(0)
  const SystemNode node(b, BoundaryConditionSpec::from_W_B(wb, 2, w_out), 1e-8);

  const VecC e = random_vector(b.size(), rng);
  const VecC u = wb * b.ports(e);
  const VecC f = node.apply_FG(e, u);
  CHECK((f - b.J * e + b.R * e).norm() <= 1e-12 * f.norm());
  CHECK(node.apply_FG(VecC::Zero(b.size()), VecC::Zero(2)).norm() == 0.0);
  VecC bad = u;
  bad(0) += 1.0;
  CHECK_THROWS_AS(node.apply_FG(e, bad), DomainError);

  CHECK(std::abs(node.apply_KL(e)(0) - e(b.layout.off_q())) < 1e-14);
  CHECK(node.apply_KL(VecC::Zero(b.size())).norm() == 0.0);
  const VecC e2 = random_vector(b.size(), rng);
  CHECK((node.apply_KL(e + e2) - node.apply_KL(e) - node.apply_KL(e2)).norm() < 1e-12);

  // the multiplier shifts the current ports and adds a boundary source
  const VecC lam = random_vector(2, rng);
  const VecC ul = wb * node.ports(e, lam);
  const VecC fl = node.apply_FG(e, ul, lam);
  const VecC src = b.mass.cast<cplx>().cwiseInverse().cwiseProduct(b.B2.adjoint() * lam);
  CHECK((fl - f - src).norm() <= 1e-12 * fl.norm());
}

TEST_CASE("constrained generator spectra") {
  SUBCASE("strict real W_B, lossy") {
    const auto model = build_model(tube_scenario(small_setup(1, true)));
    std::mt19937_64 rng(12);
    const MatC wb = random_admissible_W_B(1, rng, false, false, 0.7);
    const ConstrainedGenerator gen(model->bundle, wb);
    CHECK(gen.algebraic_constraints() == 0);
    double re = -1e300;
    for (const cplx& z : gen.eigenvalues()) re = std::max(re, z.real());
    CHECK(re <= 1e-10);
    CHECK(hermitian_part_max(gen.dense()) <= 1e-10);
    CHECK(gen.range_margin() > 0.0);
  }
  SUBCASE("skew W_B with algebraic constraints, lossless") {
    const auto model = build_model(tube_scenario(small_setup(1, false)));
    const ConstrainedGenerator gen(model->bundle, voltage_zero(1));
    CHECK(gen.algebraic_constraints() == 2);
    CHECK(gen.dimension() == model->bundle.size() - 2);
    double re = 0.0;
    for (const cplx& z : gen.eigenvalues()) re = std::max(re, std::abs(z.real()));
    CHECK(re <= 1e-10);
    const MatC d = gen.dense();
    CHECK((d + d.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(gen.range_margin() > 0.0);
  }
  SUBCASE("voltage-controlled complex skew W_B") {
    const auto model = build_model(tube_scenario(small_setup(1, false)));
    std::mt19937_64 rng(14);
    const MatC wb = random_admissible_W_B(1, rng, true, true);
    const ConstrainedGenerator gen(model->bundle, wb);
    double re = 0.0;
    for (const cplx& z : gen.eigenvalues()) re = std::max(re, std::abs(z.real()));
    CHECK(re <= 1e-10);
  }
  SUBCASE("rank-deficient W_B is rejected") {
    const auto model = build_model(tube_scenario(small_setup(1, false)));
    MatC wb = current_zero(1);
    wb.row(1) = wb.row(0);
    CHECK_THROWS_AS(ConstrainedGenerator(model->bundle, wb), CertificateError);
    MatC anti(2, 4);
    anti << MatC::Identity(2, 2), -MatC::Identity(2, 2);
    CHECK_THROWS_AS(ConstrainedGenerator(model->bundle, anti), CertificateError);
  }
}

TEST_CASE("constrained generator at the reference size") {
  TubeSetup s;
  s.line_cells = 16;
  s.lossy = true;
  const auto model = build_model(tube_scenario(s));
  std::mt19937_64 rng(21);
  const MatC wb = random_admissible_W_B(1, rng, false, false, 0.9);
  const ConstrainedGenerator gen(model->bundle, wb);
  double re = -1e300;
  for (const cplx& z : gen.eigenvalues()) re = std::max(re, z.real());
  MESSAGE("max Re lambda = " << re << " at N = " << gen.dimension());
  CHECK(re <= 1e-10);
}
