#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fieldcable/types.hpp"

namespace fieldcable {

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  Vec3 extent() const { return hi - lo; }
  double volume() const { return extent().prod(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  // Distance from p to the nearest face, negative outside.
  double inner_margin(const Vec3& p) const {
    return std::min((p - lo).minCoeff(), (hi - p).minCoeff());
  }
};

// Position and first two derivatives of alpha at eta.
struct CurvePoint {
  Vec3 p;
  Vec3 d1;
  Vec3 d2;
};

class CurvePath {
 public:
  virtual ~CurvePath() = default;
  // Defined on a neighbourhood of [0,1] so the collar map can extend past the ends.
  virtual CurvePoint eval(double eta) const = 0;
  virtual double length() const = 0;
  virtual std::string kind() const = 0;
};

class CableCurve {
 public:
  CableCurve() = default;
  CableCurve(std::shared_ptr<const CurvePath> path, double radius);

  static CableCurve segment(const Vec3& a, const Vec3& b, double radius);
  // Circle arc c + rho*(cos(phi) u + sin(phi) v), phi from phi0 to phi0 + sweep.
  static CableCurve arc(const Vec3& center, const Vec3& u, const Vec3& v, double rho, double phi0,
                        double sweep, double radius);
  // Helix around axis through `base` with direction `axis`.
  static CableCurve helix(const Vec3& base, const Vec3& axis, double coil_radius, double turns,
                          double height, double radius);
  // C2 clamped cubic spline through control points, reparameterized by arclength.
  static CableCurve spline(const std::vector<Vec3>& points, double radius);

  CurvePoint eval(double eta) const { return path_->eval(eta); }
  Vec3 position(double eta) const { return path_->eval(eta).p; }
  double length() const { return path_->length(); }
  double radius() const { return radius_; }
  std::string kind() const { return path_ ? path_->kind() : "none"; }
  bool valid() const { return static_cast<bool>(path_); }

 private:
  std::shared_ptr<const CurvePath> path_;
  double radius_ = 0.0;
};

struct GeometrySpec {
  Box box;
  std::vector<CableCurve> cables;
  double collar_halfwidth = 0.25;
};

struct CableChecks {
  bool arclength = true;
  bool curvature = true;
  bool containment = true;
  bool disjoint = true;
  bool open = true;
  double arclength_dev = 0.0;       // max |‖α'‖ - l| / l
  double curvature_margin = 0.0;    // min (bound - ‖α''‖) / bound
  double containment_margin = 0.0;  // min distance of inflated tube to box faces
  double disjoint_margin = 0.0;     // min gap to other inflated tubes
  bool ok() const { return arclength && curvature && containment && disjoint && open; }
};

struct GeometryReport {
  bool box_ok = true;
  bool collar_ok = true;
  std::vector<CableChecks> cables;
  std::vector<std::string> messages;
  bool ok() const;
};

GeometryReport validate_geometry(const GeometrySpec& spec, int samples = 513);

struct Frame {
  Vec3 t;
  Vec3 k1;
  Vec3 k2;
};

class AdaptedFrame {
 public:
  AdaptedFrame() = default;
  AdaptedFrame(CableCurve curve, std::vector<double> eta, std::vector<Vec3> k1);

  // Frame at any eta: transported from the nearest lower sample by one double reflection.
  Frame eval(double eta) const;
  Frame sample(std::size_t j) const;
  std::size_t size() const { return eta_.size(); }
  const std::vector<double>& eta() const { return eta_; }
  double max_orthonormality_residual() const;
  const CableCurve& curve() const { return curve_; }

 private:
  CableCurve curve_;
  std::vector<double> eta_;
  std::vector<Vec3> k1_;
};

// Rotation-minimizing frame by double reflection on a uniform eta grid over
// [-pad, 1 + pad] so that the collar extension is covered.
AdaptedFrame build_frame(const CableCurve& curve, int n_eta, double pad = 0.0);

struct CollarCoords {
  double eta = 0.0;
  double theta = 0.0;
  double s = 0.0;
};

struct SurfacePoint {
  Vec3 p;
  Vec3 d_eta;
  Vec3 d_theta;
  Vec3 normal;
};

class TubeChart {
 public:
  TubeChart() = default;
  TubeChart(CableCurve curve, AdaptedFrame frame, int n_eta, int n_theta, double collar);

  int n_eta() const { return n_eta_; }
  int n_theta() const { return n_theta_; }
  int size() const { return n_eta_ * n_theta_; }
  int index(int j, int m) const { return j * n_theta_ + m; }
  double eta(int j) const { return (j + 0.5) / n_eta_; }
  double theta(int m) const;
  double d_eta() const { return 1.0 / n_eta_; }
  double d_theta() const;

  const std::vector<Vec3>& points() const { return point_; }
  const std::vector<Vec3>& d_eta_phi() const { return deta_; }
  const std::vector<Vec3>& d_theta_phi() const { return dtheta_; }
  const std::vector<Vec3>& normals() const { return normal_; }
  const std::vector<double>& weights() const { return weight_; }
  double area() const;

  // Phi, its Jacobian columns and the outward normal at any (eta, theta).
  SurfacePoint surface(double eta, double theta) const;

  // Collar map and its inverse, s in (-collar, collar), s = 0 on the surface.
  Vec3 collar_point(double eta, double theta, double s) const;
  // Foot-point inversion; nullopt if p is not within (1+collar) radii of the axis
  // extension. Throws GeometryError if the Newton iteration does not converge.
  std::optional<CollarCoords> collar_coords(const Vec3& p) const;
  // Inverse Jacobian rows; row 0 is grad(eta) at collar_point(eta, theta, s).
  Eigen::Matrix3d inverse_jacobian(double eta, double theta, double s) const;

  const CableCurve& curve() const { return curve_; }
  const AdaptedFrame& frame() const { return frame_; }
  double collar() const { return collar_; }

 private:
  CableCurve curve_;
  AdaptedFrame frame_;
  int n_eta_ = 0;
  int n_theta_ = 0;
  double collar_ = 0.25;
  std::vector<Vec3> point_, deta_, dtheta_, normal_;
  std::vector<double> weight_;
};

TubeChart build_chart(const CableCurve& curve, const AdaptedFrame& frame, int n_eta, int n_theta,
                      double collar = 0.25);

struct Region {
  enum class Kind { exterior, inside_tube, collar, field };
  Kind kind = Kind::field;
  int cable = -1;
  CollarCoords coords;
};

// Validated geometry with frames attached; immutable.
class Geometry {
 public:
  static Geometry build(const GeometrySpec& spec, int frame_samples = 1024);

  const GeometrySpec& spec() const { return spec_; }
  const Box& box() const { return spec_.box; }
  std::size_t cable_count() const { return spec_.cables.size(); }
  const CableCurve& cable(std::size_t i) const { return spec_.cables[i]; }
  const AdaptedFrame& frame(std::size_t i) const { return frames_[i]; }
  // Chart with the given resolution; uses the stored frame.
  TubeChart chart(std::size_t i, int n_eta, int n_theta) const;

  Region classify(const Vec3& p) const;
  // Foot-point coordinates relative to cable i for points within (1+reach) radii.
  std::optional<CollarCoords> tube_coords(std::size_t i, const Vec3& p, double reach) const;

 private:
  GeometrySpec spec_;
  std::vector<AdaptedFrame> frames_;
  std::vector<Box> bounds_;
};

Region classify_point(const Geometry& geometry, const Vec3& p);

}  // namespace fieldcable
