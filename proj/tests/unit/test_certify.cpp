#include <cmath>
#include <random>

#include "doctest.h"
#include "fieldcable/certify.hpp"
#include "fieldcable/linalg.hpp"

using namespace fieldcable;

namespace {

MatC I2() { return MatC::Identity(2, 2); }

MatC hcat(const MatC& a, const MatC& b) {
  MatC out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

MatC vcat(const MatC& a, const MatC& b) {
  MatC out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

}  // namespace

TEST_CASE("admissibility examples") {
  const AdmissibilityReport a = check_admissible(hcat(I2(), I2()));
  CHECK(a.admissible);
  CHECK(a.strict);
  CHECK_FALSE(a.skew);
  CHECK(std::abs(a.form_min - 2.0) < 1e-12);
  CHECK(std::abs(a.form_max - 2.0) < 1e-12);

  const AdmissibilityReport b = check_admissible(hcat(I2(), MatC::Zero(2, 2)));
  CHECK(b.admissible);
  CHECK(b.skew);
  CHECK_FALSE(b.strict);

  MatC dup = hcat(I2(), I2());
  dup.row(1) = dup.row(0);
  const AdmissibilityReport c = check_admissible(dup);
  CHECK_FALSE(c.full_rank);
  CHECK_FALSE(c.admissible);

  CHECK_FALSE(check_admissible(hcat(I2(), -I2())).admissible);
}

TEST_CASE("max dissipative criterion and kernel oracle") {
  CHECK(check_max_dissipative(I2(), I2()));
  CHECK(kernel_relation(I2(), I2()).maximal);
  CHECK_FALSE(check_max_dissipative(I2(), -I2()));
  CHECK_FALSE(kernel_relation(I2(), -I2()).dissipative);

  std::mt19937_64 rng(2024);
  int agree = 0;
  for (int draw = 0; draw < 100; ++draw) {
    const MatC wb = random_admissible_W_B(1 + draw % 3, rng, draw % 4 == 0);
    const int n = static_cast<int>(wb.rows());
    const bool crit = check_max_dissipative(wb.leftCols(n), wb.rightCols(n));
    const KernelRelation kr = kernel_relation(wb.leftCols(n), wb.rightCols(n));
    if (crit == kr.maximal) ++agree;
  }
  CHECK(agree == 100);
}

TEST_CASE("flags are invariant under row operations") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  for (int draw = 0; draw < 20; ++draw) {
    const MatC wb = random_admissible_W_B(2, rng, draw % 2 == 0);
    MatC t(4, 4);
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) t(i, j) = cplx(nd(rng), nd(rng));
    t += 3.0 * MatC::Identity(4, 4);
    const AdmissibilityReport a = check_admissible(wb), b = check_admissible(t * wb);
    CHECK(a.admissible == b.admissible);
    CHECK(a.skew == b.skew);
    CHECK(a.strict == b.strict);
    CHECK(check_max_dissipative(wb.leftCols(4), wb.rightCols(4)) ==
          check_max_dissipative((t * wb).leftCols(4), (t * wb).rightCols(4)));
  }
}

TEST_CASE("co-located completion") {
  SUBCASE("skew W_B gets a Sigma-unitary completion") {
    const MatC wb = hcat(I2(), MatC::Zero(2, 2));
    const ColocatedOutput co = build_colocated_output(wb, 1);
    CHECK(co.equality);
    const MatC t = vcat(wb, co.W_C);
    CHECK((t.adjoint() * sigma_form(2) * t - sigma_form(2)).cwiseAbs().maxCoeff() < 1e-12);
    // block swap: [I, 0] is completed by [0, I]
    CHECK((colocation_form(wb, hcat(MatC::Zero(2, 2), I2()))).cwiseAbs().maxCoeff() < 1e-14);
    // any Sigma-unitary completion has the identity as its voltage block
    CHECK((co.W_C.rightCols(2) - I2()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(co.W_out.rows() == 1);
  }
  SUBCASE("strictly dissipative W_B only admits the strict inequality") {
    const MatC wb = hcat(I2(), I2()) / std::sqrt(2.0);
    const ColocatedOutput co = build_colocated_output(wb, 2);
    CHECK(co.col2_max <= 1e-10);
    CHECK_FALSE(co.equality);
    CHECK(std::isfinite(co.cond));
    // The candidate (1/sqrt2)[I, -I] is not Sigma-unitary either: T^H Sigma T = diag(I, -I).
    const MatC wc = hcat(I2(), -I2()) / std::sqrt(2.0);
    const MatC t = vcat(wb, wc);
    MatC expect = MatC::Identity(4, 4);
    expect.bottomRightCorner(2, 2) *= -1.0;
    CHECK((t.adjoint() * sigma_form(2) * t - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("random admissible inputs always satisfy the inequality") {
    std::mt19937_64 rng(31);
    for (int draw = 0; draw < 40; ++draw) {
      const int k = 1 + draw % 3;
      const MatC wb = random_admissible_W_B(k, rng, draw % 3 == 0, draw % 2 == 0);
      const ColocatedOutput co = build_colocated_output(wb, k);
      const MatC form = colocation_form(wb, co.W_C);
      CHECK(linalg::max_eig_hermitian(linalg::hermitian_part(form)) <= 1e-10 * std::max(1.0, co.cond));
      CHECK(co.cond < 1e10);
      if (draw % 3 == 0) CHECK(co.equality);
    }
  }
  SUBCASE("inadmissible input is rejected") {
    CHECK_THROWS_AS(build_colocated_output(hcat(I2(), -I2()), 1), CertificateError);
  }
}

TEST_CASE("well-posedness constants") {
  SUBCASE("W_B = [I, I]") {
    const MatC wb = hcat(I2(), I2());
    BoundaryConditionSpec spec = BoundaryConditionSpec::from_W_B(wb, 2, hcat(I2(), MatC::Zero(2, 2)));
    const Certificate c = wellposedness_constants(spec, 0.5, 2.0);
    CHECK(std::abs(c.delta - 2.0) < 1e-12);
    // [W_B; W2^-H, 0]^-1 = [[0, I], [I, -I]], so [I, 0] T^-1 = [0, I]
    CHECK(std::abs(c.gamma - 1.0) < 1e-12);
    CHECK(std::abs(c.c - 2.0) < 1e-12);
    CHECK(std::abs(c.c_t - 2.0 * 1.0 * 2.0) < 1e-12);
    CHECK(c.c_energy > 0.0);
    CHECK(c.wellposed);
  }
  SUBCASE("delta is positive exactly for strict inputs") {
    std::mt19937_64 rng(5);
    for (int draw = 0; draw < 20; ++draw) {
      const MatC wb = random_admissible_W_B(2, rng, false, true, 0.9);
      const BoundaryConditionSpec spec = BoundaryConditionSpec::from_W_B(wb, 2);
      const Certificate c = wellposedness_constants(spec, 1.0, 1.0);
      CHECK(c.delta > 0.0);
      CHECK(c.gamma == 0.0);
      CHECK(c.c_t == 1.0);
    }
  }
  SUBCASE("skew input fails the precondition") {
    const BoundaryConditionSpec spec = BoundaryConditionSpec::from_W_B(hcat(I2(), MatC::Zero(2, 2)), 1);
    CHECK_THROWS_AS(wellposedness_constants(spec, 1.0, 1.0), CertificateError);
    const Certificate c = certify(spec, 1.0, 1.0);
    CHECK_FALSE(c.wellposed);
    CHECK(c.admissibility.skew);
    CHECK_FALSE(c.messages.empty());
  }
  SUBCASE("shape errors") {
    BoundaryConditionSpec spec;
    spec.k = 1;
    spec.W_inp = MatC::Identity(1, 3);
    CHECK_THROWS_AS(spec.check_shapes(), ConfigError);
  }
}

TEST_CASE("certify reports co-location") {
  std::mt19937_64 rng(8);
  const MatC wb = random_admissible_W_B(1, rng, false, true, 0.8);
  const ColocatedOutput co = build_colocated_output(wb, 1);
  const Certificate good = certify(BoundaryConditionSpec::from_W_B(wb, 1, co.W_out), 1.0, 3.0);
  CHECK(good.colocated);
  CHECK(good.wellposed);
  CHECK(good.col2_max <= 1e-10);
  const Certificate bad = certify(BoundaryConditionSpec::from_W_B(wb, 1, MatC::Zero(1, 4)), 1.0, 3.0);
  CHECK_FALSE(bad.colocated);
}
