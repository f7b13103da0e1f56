#include <cmath>

#include "doctest.h"
#include "fieldcable/geometry.hpp"

using namespace fieldcable;

namespace {

GeometrySpec unit_box() {
  GeometrySpec s;
  s.box.lo = Vec3(-2, -2, -2);
  s.box.hi = Vec3(2, 2, 2);
  return s;
}

}  // namespace

TEST_CASE("straight segment keeps a constant frame") {
  const CableCurve c = CableCurve::segment(Vec3::Zero(), Vec3(0, 0, 1.0), 0.1);
  const AdaptedFrame f = build_frame(c, 64);
  for (std::size_t j = 0; j < f.size(); ++j) {
    const Frame fr = f.sample(j);
    CHECK((fr.k1 - Vec3(1, 0, 0)).norm() < 1e-14);
    CHECK((fr.k2 - Vec3(0, 1, 0)).norm() < 1e-14);
  }
  CHECK(f.max_orthonormality_residual() < 1e-12);
}

TEST_CASE("planar arc frame matches closed-form parallel transport") {
  const double sweep = 0.75 * M_PI;
  const CableCurve c = CableCurve::arc(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), 1.0, 0.0, sweep, 0.1);
  const AdaptedFrame f = build_frame(c, 512);
  const Frame f0 = f.sample(0);
  double err = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double ang = sweep * f.eta()[j];
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(ang, Vec3::UnitZ()).toRotationMatrix();
    const Frame fj = f.sample(j);
    err = std::max(err, (fj.k1 - rot * f0.k1).norm());
    err = std::max(err, (fj.k2 - rot * f0.k2).norm());
  }
  CHECK(err <= 1e-6);
}

TEST_CASE("frame orthonormality on helix and spline") {
  const CableCurve h = CableCurve::helix(Vec3::Zero(), Vec3::UnitZ(), 0.5, 2.0, 1.0, 0.05);
  CHECK(build_frame(h, 256).max_orthonormality_residual() <= 1e-10);
  const CableCurve s = CableCurve::spline({Vec3(0, 0, 0), Vec3(0.3, 0.1, 0.4), Vec3(0.2, 0.5, 0.8), Vec3(0.6, 0.6, 1.0)}, 0.02);
  CHECK(build_frame(s, 256).max_orthonormality_residual() <= 1e-10);
}

TEST_CASE("degenerate tangent is rejected") {
  CHECK_THROWS_AS(build_frame(CableCurve::segment(Vec3::Zero(), Vec3::Zero(), 0.1), 8), Error);
}

TEST_CASE("validate_geometry: admissible and rejected configurations") {
  SUBCASE("two parallel cables far apart") {
    GeometrySpec s = unit_box();
    const double r = 0.05;
    s.cables.push_back(CableCurve::segment(Vec3(0, 0, -1), Vec3(0, 0, 1), r));
    s.cables.push_back(CableCurve::segment(Vec3(4 * (r + r), 0, -1), Vec3(4 * (r + r), 0, 1), r));
    const GeometryReport rep = validate_geometry(s);
    CHECK(rep.ok());
    CHECK(rep.cables[0].disjoint_margin > 0.0);
  }
  SUBCASE("circle with curve radius equal to tube radius fails curvature") {
    GeometrySpec s = unit_box();
    s.cables.push_back(CableCurve::arc(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), 0.3, 0.0, M_PI, 0.3));
    const GeometryReport rep = validate_geometry(s);
    CHECK_FALSE(rep.cables[0].curvature);
    CHECK_FALSE(rep.ok());
  }
  SUBCASE("coaxial overlapping tubes fail disjointness") {
    GeometrySpec s = unit_box();
    s.cables.push_back(CableCurve::segment(Vec3(0, 0, -1), Vec3(0, 0, 0.2), 0.1));
    s.cables.push_back(CableCurve::segment(Vec3(0, 0, -0.2), Vec3(0, 0, 1), 0.1));
    const GeometryReport rep = validate_geometry(s);
    CHECK_FALSE(rep.cables[0].disjoint);
    CHECK_FALSE(rep.ok());
  }
  SUBCASE("tube leaving the box fails containment") {
    GeometrySpec s = unit_box();
    s.cables.push_back(CableCurve::segment(Vec3(1.9, 0, -1), Vec3(1.9, 0, 1), 0.1));
    CHECK_FALSE(validate_geometry(s).cables[0].containment);
    // The inflated tube is a cylinder, so an axial end may come close to a face.
    GeometrySpec t = unit_box();
    t.cables.push_back(CableCurve::segment(Vec3(0, 0, -1.95), Vec3(0, 0, 1), 0.1));
    CHECK(validate_geometry(t).cables[0].containment);
  }
}

TEST_CASE("curvature check is monotone in the radius") {
  for (double r : {0.5, 0.4, 0.3, 0.2, 0.1, 0.05}) {
    GeometrySpec s = unit_box();
    s.cables.push_back(CableCurve::arc(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), 0.35, 0.0, M_PI, r));
    const bool pass = validate_geometry(s).cables[0].curvature;
    if (r < 0.35) CHECK(pass);
    if (r >= 0.35) CHECK_FALSE(pass);
  }
}

TEST_CASE("straight cylinder chart") {
  const double r = 0.1, l = 1.0;
  const CableCurve c = CableCurve::segment(Vec3::Zero(), Vec3(0, 0, l), r);
  const AdaptedFrame f = build_frame(c, 64);
  const TubeChart ch = build_chart(c, f, 64, 64);
  CHECK(std::abs(ch.area() - 2 * M_PI * r * l) / (2 * M_PI * r * l) <= 1e-3);
  for (int j = 0; j < ch.n_eta(); j += 7)
    for (int m = 0; m < ch.n_theta(); m += 5) {
      const int q = ch.index(j, m);
      const double th = ch.theta(m);
      CHECK((ch.normals()[q] - Vec3(std::sin(th), std::cos(th), 0)).norm() < 1e-12);
      CHECK(std::abs(ch.d_eta_phi()[q].dot(ch.d_theta_phi()[q])) < 1e-12);
      CHECK(std::abs(ch.d_eta_phi()[q].norm() - l) < 1e-12);
      CHECK(std::abs(ch.d_theta_phi()[q].norm() - r) < 1e-12);
      CHECK(ch.weights()[q] > 0.0);
    }
}

TEST_CASE("normals are unit and orthogonal to the Jacobian on a helix") {
  const CableCurve c = CableCurve::helix(Vec3::Zero(), Vec3::UnitZ(), 0.5, 1.5, 1.0, 0.05);
  const TubeChart ch = build_chart(c, build_frame(c, 512), 32, 24);
  for (int q = 0; q < ch.size(); ++q) {
    CHECK(std::abs(ch.normals()[q].norm() - 1.0) < 1e-12);
    CHECK(std::abs(ch.normals()[q].dot(ch.d_eta_phi()[q])) < 1e-10);
    CHECK(std::abs(ch.normals()[q].dot(ch.d_theta_phi()[q])) < 1e-10);
  }
}

TEST_CASE("surface quadrature converges with order at least two") {
  const double r = 0.1, l = 1.0;
  const CableCurve c = CableCurve::segment(Vec3::Zero(), Vec3(0, 0, l), r);
  const AdaptedFrame f = build_frame(c, 256);
  // int (1 + z^2 + x) dA = 2 pi r l (1 + l^2 / 3)
  const double exact = 2 * M_PI * r * l * (1.0 + l * l / 3.0);
  std::vector<double> err;
  for (int n : {8, 16, 32}) {
    const TubeChart ch = build_chart(c, f, n, n);
    double s = 0.0;
    for (int q = 0; q < ch.size(); ++q) {
      const Vec3& p = ch.points()[q];
      s += ch.weights()[q] * (1.0 + p.z() * p.z() + p.x());
    }
    err.push_back(std::abs(s - exact));
  }
  CHECK(std::log2(err[0] / err[1]) >= 1.9);
  CHECK(std::log2(err[1] / err[2]) >= 1.9);
}

TEST_CASE("collar chart round trip") {
  GeometrySpec s = unit_box();
  s.cables.push_back(CableCurve::arc(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), 1.0, 0.2, 1.2, 0.1));
  const Geometry g = Geometry::build(s);
  const TubeChart ch = g.chart(0, 8, 8);
  double err = 0.0;
  for (double eta : {0.1, 0.35, 0.6, 0.9})
    for (double th : {-2.5, -1.0, 0.3, 1.7, 3.0})
      for (double sv : {-0.2, -0.05, 0.0, 0.1, 0.2}) {
        const auto cc = ch.collar_coords(ch.collar_point(eta, th, sv));
        REQUIRE(cc.has_value());
        err = std::max({err, std::abs(cc->eta - eta), std::abs(cc->theta - th), std::abs(cc->s - sv)});
      }
  CHECK(err <= 1e-8);
}

TEST_CASE("classify_point") {
  GeometrySpec s = unit_box();
  s.cables.push_back(CableCurve::segment(Vec3(0, 0, -1), Vec3(0, 0, 1), 0.2));
  const Geometry g = Geometry::build(s);
  CHECK(classify_point(g, Vec3(0, 0, 0.3)).kind == Region::Kind::inside_tube);
  CHECK(classify_point(g, Vec3(5, 0, 0)).kind == Region::Kind::exterior);
  CHECK(classify_point(g, Vec3(1.5, 1.5, 0)).kind == Region::Kind::field);
  const TubeChart ch = g.chart(0, 8, 8);
  const SurfacePoint sp = ch.surface(0.4, 0.7);
  const Region reg = classify_point(g, sp.p);
  CHECK(reg.kind == Region::Kind::collar);
  CHECK(reg.cable == 0);
  CHECK(std::abs(reg.coords.s) < 1e-12);
  CHECK(std::abs(reg.coords.eta - 0.4) < 1e-10);
  CHECK(std::abs(reg.coords.theta - 0.7) < 1e-10);
}
