#include <cmath>

#include "doctest.h"
#include "fieldcable/linalg.hpp"
#include "fieldcable/tline.hpp"

using namespace fieldcable;

namespace {

MatC eye(int k) { return MatC::Identity(k, k); }

}  // namespace

TEST_CASE("line material validation") {
  CHECK(validate_line_materials(LineMaterials::uniform(eye(2), eye(2), MatC::Zero(2, 2), MatC::Zero(2, 2))).ok);
  MatC skew(2, 2);
  skew << 0, 1, -1, 0;
  CHECK(validate_line_materials(LineMaterials::uniform(eye(2), eye(2), skew, MatC::Zero(2, 2))).ok);
  MatC c = eye(2);
  c(1, 1) = 0.0;
  const LineMaterialsReport rep = validate_line_materials(LineMaterials::uniform(c, eye(2), MatC::Zero(2, 2), MatC::Zero(2, 2)));
  CHECK_FALSE(rep.ok);
  CHECK_FALSE(rep.c_positive);
  CHECK_FALSE(rep.messages.empty());
  CHECK_THROWS_AS(assemble_line(LineMaterials::uniform(c, eye(2), MatC::Zero(2, 2), MatC::Zero(2, 2)), LineGrid(4)),
                  MaterialsError);
}

TEST_CASE("Hodge blocks are inverse material samples") {
  const LineBlocks lb = assemble_line(LineMaterials::uniform(2.0 * eye(1), 4.0 * eye(1), MatC::Zero(1, 1), MatC::Zero(1, 1)),
                                      LineGrid(4));
  const MatC hq = MatC(lb.H_q), hp = MatC(lb.H_psi);
  CHECK((hq - 0.5 * eye(5)).norm() < 1e-15);
  CHECK((hp - 0.25 * eye(4)).norm() < 1e-15);
  // zero state, zero derivative
  const VecC zero = VecC::Zero(4);
  CHECK((lb.Dk * (lb.H_q * VecC::Zero(5))).norm() == 0.0);
  CHECK((lb.Dtk * (lb.H_psi * zero)).norm() == 0.0);
}

TEST_CASE("summation by parts is exact") {
  for (int n : {2, 3, 8, 24}) {
    const LineGrid g(n);
    // V^T (D^T Mc + Mn Dt) I = V(1) I(1) - V(0) I(0) with extrapolated I
    const MatR lhs = MatR(g.D()).transpose() * g.cell_weights().asDiagonal() +
                     g.node_weights().asDiagonal() * MatR(g.Dt());
    MatR rhs = MatR::Zero(n + 1, n);
    const MatR x = MatR(g.extrapolation());
    rhs.row(n) += x.row(1);
    rhs.row(0) -= x.row(0);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-13 * n);
  }
}

TEST_CASE("periodic lossless spectrum is imaginary, lossy spectrum is stable") {
  const int n = 32, k = 2;
  MatC c(2, 2), l(2, 2);
  c << 1.0, 0.2, 0.2, 1.5;
  l << 2.0, 0.3, 0.3, 1.0;
  for (bool lossy : {false, true}) {
    const MatC r = lossy ? MatC(0.3 * eye(k)) : MatC::Zero(k, k);
    const MatC gg = lossy ? MatC(0.1 * eye(k)) : MatC::Zero(k, k);
    const LineBlocks lb = assemble_line(LineMaterials::uniform(c, l, r, gg), LineGrid(n, true));
    const int np = lb.n_psi(), nq = lb.n_q();
    MatC a = MatC::Zero(np + nq, np + nq);
    a.topRightCorner(np, nq) = -MatC(lb.Dk) * MatC(lb.H_q);
    a.bottomLeftCorner(nq, np) = -MatC(lb.Dtk) * MatC(lb.H_psi);
    a.topLeftCorner(np, np) = -MatC(lb.R_psi) * MatC(lb.H_psi);
    a.bottomRightCorner(nq, nq) = -MatC(lb.G_q) * MatC(lb.H_q);
    double maxre = -1e300, maxabs = 0.0;
    for (const cplx& z : linalg::eigenvalues(a)) {
      maxre = std::max(maxre, z.real());
      maxabs = std::max(maxabs, std::abs(z.real()));
    }
    if (lossy)
      CHECK(maxre <= 1e-10);
    else
      CHECK(maxabs <= 1e-10);
  }
}

TEST_CASE("Dirichlet-voltage line spectrum is imaginary") {
  const int n = 24;
  const LineBlocks lb = assemble_line(LineMaterials::uniform(eye(1), 2.0 * eye(1), MatC::Zero(1, 1), MatC::Zero(1, 1)),
                                      LineGrid(n));
  const MatC d = MatC(lb.Dk).middleCols(1, n - 1);
  const MatC dt = MatC(lb.Dtk).middleRows(1, n - 1);
  const MatC hq = MatC(lb.H_q).block(1, 1, n - 1, n - 1);
  MatC a = MatC::Zero(2 * n - 1, 2 * n - 1);
  a.topRightCorner(n, n - 1) = -d * hq;
  a.bottomLeftCorner(n - 1, n) = -dt * MatC(lb.H_psi);
  double maxabs = 0.0;
  for (const cplx& z : linalg::eigenvalues(a)) maxabs = std::max(maxabs, std::abs(z.real()));
  CHECK(maxabs <= 1e-10);
}

TEST_CASE("boundary extraction") {
  const LineBlocks lb = assemble_line(LineMaterials::uniform(eye(1), eye(1), MatC::Zero(1, 1), MatC::Zero(1, 1)), LineGrid(8));
  SUBCASE("V = eta, I_tot = 0") {
    VecC v(9);
    for (int j = 0; j <= 8; ++j) v(j) = j / 8.0;
    const BoundaryValues b = extract_boundary(lb, VecC::Zero(8), v);
    VecC expect(4);
    expect << 0, 0, 1, 0;
    CHECK((b.stacked() - expect).norm() < 1e-15);
  }
  SUBCASE("constants") {
    const cplx c(2.0, 1.0), d(-0.5, 0.25);
    const BoundaryValues b = extract_boundary(lb, VecC::Constant(8, d), VecC::Constant(9, c));
    VecC expect(4);
    expect << c, d, c, -d;
    CHECK((b.stacked() - expect).norm() < 1e-14);
    VecC ports(4);
    ports << d, d, c, -c;
    CHECK((b.ports() - ports).norm() < 1e-14);
  }
}

TEST_CASE("endpoint extrapolation is second order") {
  std::vector<double> err;
  for (int n : {8, 16, 32, 64}) {
    const LineBlocks lb = assemble_line(LineMaterials::uniform(eye(1), eye(1), MatC::Zero(1, 1), MatC::Zero(1, 1)), LineGrid(n));
    VecC i(n);
    for (int c = 0; c < n; ++c) i(c) = std::sin(lb.grid.cell_eta(c));
    const BoundaryValues b = extract_boundary(lb, i, VecC::Zero(n + 1));
    err.push_back(std::max(std::abs(b.Itot0(0)), std::abs(b.Itot1(0) - std::sin(1.0))));
  }
  for (std::size_t j = 1; j < err.size(); ++j) CHECK(std::log2(err[j - 1] / err[j]) >= 1.9);
}

TEST_CASE("piecewise linear material profile") {
  MaterialProfile p;
  p.eta = {0.0, 1.0};
  p.values = {eye(1), 3.0 * eye(1)};
  CHECK(std::abs(p.at(0.25)(0, 0) - 1.5) < 1e-15);
  CHECK(std::abs(p.at(2.0)(0, 0) - 3.0) < 1e-15);
}
