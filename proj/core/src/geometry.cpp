#include "fieldcable/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fieldcable {

namespace {

constexpr double kPi = std::numbers::pi;

class Segment final : public CurvePath {
 public:
  Segment(Vec3 a, Vec3 b) : a_(std::move(a)), d_(b - a_) {}
  CurvePoint eval(double eta) const override { return {a_ + eta * d_, d_, Vec3::Zero()}; }
  double length() const override { return d_.norm(); }
  std::string kind() const override { return "segment"; }

 private:
  Vec3 a_, d_;
};

class Arc final : public CurvePath {
 public:
  Arc(Vec3 c, Vec3 u, Vec3 v, double rho, double phi0, double sweep)
      : c_(std::move(c)), u_(std::move(u)), v_(std::move(v)), rho_(rho), phi0_(phi0), sweep_(sweep) {}
  CurvePoint eval(double eta) const override {
    const double phi = phi0_ + sweep_ * eta;
    const Vec3 radial = std::cos(phi) * u_ + std::sin(phi) * v_;
    const Vec3 tang = -std::sin(phi) * u_ + std::cos(phi) * v_;
    return {c_ + rho_ * radial, rho_ * sweep_ * tang, -rho_ * sweep_ * sweep_ * radial};
  }
  double length() const override { return rho_ * std::abs(sweep_); }
  std::string kind() const override { return "arc"; }

 private:
  Vec3 c_, u_, v_;
  double rho_, phi0_, sweep_;
};

class Helix final : public CurvePath {
 public:
  Helix(Vec3 base, Vec3 axis, Vec3 e1, Vec3 e2, double a, double turns, double height)
      : base_(std::move(base)), axis_(std::move(axis)), e1_(std::move(e1)), e2_(std::move(e2)),
        a_(a), w_(2.0 * kPi * turns), height_(height) {}
  CurvePoint eval(double eta) const override {
    const double phi = w_ * eta;
    const Vec3 radial = std::cos(phi) * e1_ + std::sin(phi) * e2_;
    const Vec3 tang = -std::sin(phi) * e1_ + std::cos(phi) * e2_;
    return {base_ + a_ * radial + height_ * eta * axis_, a_ * w_ * tang + height_ * axis_,
            -a_ * w_ * w_ * radial};
  }
  double length() const override { return std::hypot(a_ * w_, height_); }
  std::string kind() const override { return "helix"; }

 private:
  Vec3 base_, axis_, e1_, e2_;
  double a_, w_, height_;
};

// Gauss-Legendre 8 nodes on [-1,1].
constexpr std::array<double, 8> kGx = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                       -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                       0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGw = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                       0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                       0.2223810344533745, 0.1012285362903763};

class ArclengthSpline final : public CurvePath {
 public:
  explicit ArclengthSpline(const std::vector<Vec3>& pts) : pts_(pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 2) throw ConfigError("spline needs at least two control points");
    knots_.assign(n, 0.0);
    for (int i = 1; i < n; ++i) {
      const double d = (pts[i] - pts[i - 1]).norm();
      if (d <= 0.0) throw ConfigError("spline control points must be distinct");
      knots_[i] = knots_[i - 1] + d;
    }
    // Clamped end slopes from one-sided differences.
    const Vec3 s0 = (pts[1] - pts[0]) / (knots_[1] - knots_[0]);
    const Vec3 s1 = (pts[n - 1] - pts[n - 2]) / (knots_[n - 1] - knots_[n - 2]);
    // Tridiagonal system for second derivatives.
    MatR a = MatR::Zero(n, n);
    MatR rhs = MatR::Zero(n, 3);
    for (int i = 0; i < n; ++i) {
      if (i == 0) {
        const double h = knots_[1] - knots_[0];
        a(0, 0) = h / 3.0;
        a(0, 1) = h / 6.0;
        rhs.row(0) = ((pts[1] - pts[0]) / h - s0).transpose();
      } else if (i == n - 1) {
        const double h = knots_[n - 1] - knots_[n - 2];
        a(i, i - 1) = h / 6.0;
        a(i, i) = h / 3.0;
        rhs.row(i) = (s1 - (pts[n - 1] - pts[n - 2]) / h).transpose();
      } else {
        const double hl = knots_[i] - knots_[i - 1];
        const double hr = knots_[i + 1] - knots_[i];
        a(i, i - 1) = hl / 6.0;
        a(i, i) = (hl + hr) / 3.0;
        a(i, i + 1) = hr / 6.0;
        rhs.row(i) = ((pts[i + 1] - pts[i]) / hr - (pts[i] - pts[i - 1]) / hl).transpose();
      }
    }
    MatR m = a.partialPivLu().solve(rhs);
    m2_.resize(n);
    for (int i = 0; i < n; ++i) m2_[i] = m.row(i).transpose();
    cum_.assign(n, 0.0);
    for (int i = 1; i < n; ++i) cum_[i] = cum_[i - 1] + speed_integral(i - 1, knots_[i - 1], knots_[i]);
    total_ = cum_.back();
    end0_ = eval_inside(0.0);
    end1_ = eval_inside(1.0);
  }

  CurvePoint eval(double eta) const override {
    if (eta < 0.0) return extend(end0_, eta);
    if (eta > 1.0) return extend(end1_, eta - 1.0);
    return eval_inside(eta);
  }
  double length() const override { return total_; }
  std::string kind() const override { return "spline"; }

 private:
  static CurvePoint extend(const CurvePoint& e, double d) {
    return {e.p + d * e.d1 + 0.5 * d * d * e.d2, e.d1 + d * e.d2, e.d2};
  }

  // Spline value and derivatives in the chord parameter.
  void raw(int i, double s, Vec3& p, Vec3& d1, Vec3& d2) const {
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - s) / h;
    const double b = (s - knots_[i]) / h;
    p = a * pts_[i] + b * pts_[i + 1] +
        ((a * a * a - a) * m2_[i] + (b * b * b - b) * m2_[i + 1]) * (h * h / 6.0);
    d1 = (pts_[i + 1] - pts_[i]) / h - (3.0 * a * a - 1.0) * h / 6.0 * m2_[i] +
         (3.0 * b * b - 1.0) * h / 6.0 * m2_[i + 1];
    d2 = a * m2_[i] + b * m2_[i + 1];
  }

  double speed_integral(int i, double s0, double s1) const {
    double acc = 0.0;
    constexpr int sub = 4;
    const double hs = (s1 - s0) / sub;
    for (int k = 0; k < sub; ++k) {
      const double lo = s0 + k * hs;
      for (std::size_t g = 0; g < kGx.size(); ++g) {
        Vec3 p, d1, d2;
        raw(i, lo + 0.5 * hs * (kGx[g] + 1.0), p, d1, d2);
        acc += 0.5 * hs * kGw[g] * d1.norm();
      }
    }
    return acc;
  }

  CurvePoint eval_inside(double eta) const {
    const double target = eta * total_;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    int i = std::clamp(static_cast<int>(it - cum_.begin()) - 1, 0, static_cast<int>(cum_.size()) - 2);
    const double seg = cum_[i + 1] - cum_[i];
    double s = knots_[i] + (target - cum_[i]) / seg * (knots_[i + 1] - knots_[i]);
    Vec3 p, d1, d2;
    for (int it2 = 0; it2 < 60; ++it2) {
      raw(i, s, p, d1, d2);
      const double f = cum_[i] + speed_integral(i, knots_[i], s) - target;
      const double step = f / d1.norm();
      s = std::clamp(s - step, knots_[i], knots_[i + 1]);
      if (std::abs(step) < 1e-14 * total_) break;
    }
    raw(i, s, p, d1, d2);
    const double sp = d1.norm();
    const double l = total_;
    // Unit-speed reparameterization scaled to [0,1].
    const Vec3 t = d1 / sp;
    const Vec3 dt_ds = (d2 - t * t.dot(d2)) / sp;
    return {p, l * t, l * l * dt_ds / sp};
  }

  std::vector<Vec3> pts_;
  std::vector<double> knots_;
  std::vector<Vec3> m2_;
  std::vector<double> cum_;
  double total_ = 0.0;
  CurvePoint end0_, end1_;
};

Vec3 any_perpendicular(const Vec3& t) {
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(t(i)) < std::abs(t(best))) best = i;
  Vec3 e = Vec3::Unit(best);
  Vec3 k = e - t * t.dot(e);
  return k.normalized();
}

// Double-reflection transport of r from (x0, t0) to (x1, t1).
Vec3 transport(const Vec3& x0, const Vec3& t0, const Vec3& r0, const Vec3& x1, const Vec3& t1) {
  const Vec3 v1 = x1 - x0;
  const double c1 = v1.squaredNorm();
  Vec3 rl = r0, tl = t0;
  if (c1 > 0.0) {
    rl = r0 - (2.0 / c1) * v1.dot(r0) * v1;
    tl = t0 - (2.0 / c1) * v1.dot(t0) * v1;
  }
  const Vec3 v2 = t1 - tl;
  const double c2 = v2.squaredNorm();
  Vec3 r1 = rl;
  if (c2 > 1e-300) r1 = rl - (2.0 / c2) * v2.dot(rl) * v2;
  // Remove drift against the new tangent.
  r1 -= t1 * t1.dot(r1);
  return r1.normalized();
}

double seg_seg_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-300 && e <= 1e-300) return r.norm();
  if (a <= 1e-300) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-300) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double den = a * e - b * b;
      s = den > 1e-300 ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

}  // namespace

CableCurve::CableCurve(std::shared_ptr<const CurvePath> path, double radius)
    : path_(std::move(path)), radius_(radius) {
  if (!path_) throw ConfigError("cable without curve");
  if (!(radius_ > 0.0)) throw ConfigError("cable radius must be positive");
  if (!(path_->length() > 0.0)) throw ConfigError("cable length must be positive");
}

CableCurve CableCurve::segment(const Vec3& a, const Vec3& b, double radius) {
  return CableCurve(std::make_shared<Segment>(a, b), radius);
}

CableCurve CableCurve::arc(const Vec3& center, const Vec3& u, const Vec3& v, double rho, double phi0,
                           double sweep, double radius) {
  if (u.norm() == 0.0) throw ConfigError("arc: zero in-plane axis");
  const Vec3 uu = u.normalized();
  Vec3 vv = v - uu * uu.dot(v);
  if (vv.norm() < 1e-12) throw ConfigError("arc: in-plane axes are parallel");
  vv.normalize();
  if (!(rho > 0.0)) throw ConfigError("arc: curve radius must be positive");
  return CableCurve(std::make_shared<Arc>(center, uu, vv, rho, phi0, sweep), radius);
}

CableCurve CableCurve::helix(const Vec3& base, const Vec3& axis, double coil_radius, double turns,
                             double height, double radius) {
  if (axis.norm() == 0.0) throw ConfigError("helix: zero axis");
  const Vec3 a = axis.normalized();
  const Vec3 e1 = any_perpendicular(a);
  const Vec3 e2 = a.cross(e1);
  return CableCurve(std::make_shared<Helix>(base, a, e1, e2, coil_radius, turns, height), radius);
}

CableCurve CableCurve::spline(const std::vector<Vec3>& points, double radius) {
  return CableCurve(std::make_shared<ArclengthSpline>(points), radius);
}

bool GeometryReport::ok() const {
  if (!box_ok || !collar_ok) return false;
  return std::all_of(cables.begin(), cables.end(), [](const CableChecks& c) { return c.ok(); });
}

GeometryReport validate_geometry(const GeometrySpec& spec, int samples) {
  GeometryReport rep;
  const Box& box = spec.box;
  if (!((box.hi - box.lo).array() > 0.0).all()) {
    rep.box_ok = false;
    rep.messages.push_back("box is empty");
  }
  const double eps = spec.collar_halfwidth;
  if (!(eps > 0.0 && eps < 1.0)) {
    rep.collar_ok = false;
    rep.messages.push_back("collar_halfwidth must lie in (0,1)");
  }
  if (samples < 3) samples = 3;
  const std::size_t nc = spec.cables.size();
  std::vector<std::vector<Vec3>> axis(nc);
  rep.cables.resize(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    const CableCurve& c = spec.cables[i];
    if (!c.valid()) throw ConfigError("cable " + std::to_string(i) + " has no curve");
    CableChecks& ck = rep.cables[i];
    const double l = c.length();
    const double r = c.radius();
    const double bound = (1.0 - 1e-6) * l * l / r;
    double dev = 0.0, curv = std::numeric_limits<double>::infinity();
    double cont = std::numeric_limits<double>::infinity();
    axis[i].resize(samples);
    for (int j = 0; j < samples; ++j) {
      const double eta = static_cast<double>(j) / (samples - 1);
      const CurvePoint cp = c.eval(eta);
      axis[i][j] = cp.p;
      dev = std::max(dev, std::abs(cp.d1.norm() - l) / l);
      curv = std::min(curv, (bound - cp.d2.norm()) / bound);
      // Cross-section disk of radius r(1+eps) normal to the tangent; its half-extent along axis d
      // is r(1+eps) sqrt(1 - t_d^2).
      const Vec3 t = cp.d1.normalized();
      for (int a = 0; a < 3; ++a) {
        const double ext = r * (1.0 + eps) * std::sqrt(std::max(0.0, 1.0 - t(a) * t(a)));
        cont = std::min({cont, cp.p(a) - box.lo(a) - ext, box.hi(a) - cp.p(a) - ext});
      }
    }
    ck.arclength_dev = dev;
    ck.arclength = dev <= 1e-8;
    ck.curvature_margin = curv;
    ck.curvature = curv >= 0.0;
    ck.containment_margin = cont;
    ck.containment = cont > 0.0;
    ck.open = (c.position(0.0) - c.position(1.0)).norm() > 1e-9 * l;
    std::ostringstream os;
    if (!ck.arclength) os << "cable " << i << ": arclength not constant (dev " << dev << "); ";
    if (!ck.curvature) os << "cable " << i << ": curvature bound violated (margin " << curv << "); ";
    if (!ck.containment) os << "cable " << i << ": tube with collar leaves box (margin " << cont << "); ";
    if (!ck.open) os << "cable " << i << ": closed curves are not supported; ";
    if (!os.str().empty()) rep.messages.push_back(os.str());
  }
  for (std::size_t i = 0; i < nc; ++i) rep.cables[i].disjoint_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = i + 1; j < nc; ++j) {
      const double need = spec.cables[i].radius() * (1.0 + eps) + spec.cables[j].radius() * (1.0 + eps);
      double dmin = std::numeric_limits<double>::infinity();
      for (int a = 0; a + 1 < samples; ++a)
        for (int b = 0; b + 1 < samples; ++b)
          dmin = std::min(dmin, seg_seg_distance(axis[i][a], axis[i][a + 1], axis[j][b], axis[j][b + 1]));
      const double margin = dmin - need;
      for (std::size_t q : {i, j}) {
        rep.cables[q].disjoint_margin = std::min(rep.cables[q].disjoint_margin, margin);
        if (margin <= 0.0) rep.cables[q].disjoint = false;
      }
      if (margin <= 0.0)
        rep.messages.push_back("cables " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    }
  }
  return rep;
}

AdaptedFrame::AdaptedFrame(CableCurve curve, std::vector<double> eta, std::vector<Vec3> k1)
    : curve_(std::move(curve)), eta_(std::move(eta)), k1_(std::move(k1)) {}

Frame AdaptedFrame::sample(std::size_t j) const {
  const CurvePoint cp = curve_.eval(eta_[j]);
  const Vec3 t = cp.d1.normalized();
  return {t, k1_[j], t.cross(k1_[j])};
}

Frame AdaptedFrame::eval(double eta) const {
  const std::size_t n = eta_.size();
  const double d = eta_[1] - eta_[0];
  long j = static_cast<long>(std::floor((eta - eta_[0]) / d));
  j = std::clamp<long>(j, 0, static_cast<long>(n) - 2);
  if (eta < eta_[0]) j = 0;
  const CurvePoint c0 = curve_.eval(eta_[j]);
  const CurvePoint c1 = curve_.eval(eta);
  const Vec3 t0 = c0.d1.normalized();
  const Vec3 t1 = c1.d1.normalized();
  Vec3 k1;
  if (eta == eta_[j])
    k1 = k1_[j];
  else
    k1 = transport(c0.p, t0, k1_[j], c1.p, t1);
  return {t1, k1, t1.cross(k1)};
}

double AdaptedFrame::max_orthonormality_residual() const {
  double res = 0.0;
  for (std::size_t j = 0; j < eta_.size(); ++j) {
    const Frame f = sample(j);
    Eigen::Matrix3d q;
    q << f.t, f.k1, f.k2;
    res = std::max(res, (q.transpose() * q - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    res = std::max(res, std::abs(q.determinant() - 1.0));
  }
  return res;
}

AdaptedFrame build_frame(const CableCurve& curve, int n_eta, double pad) {
  if (n_eta < 2) throw GeometryError("build_frame: need at least two intervals");
  const double d = 1.0 / n_eta;
  const int extra = pad > 0.0 ? static_cast<int>(std::ceil(pad / d)) : 0;
  const int total = n_eta + 1 + 2 * extra;
  std::vector<double> eta(total);
  std::vector<CurvePoint> cps(total);
  std::vector<Vec3> t(total), k1(total);
  const double l = curve.length();
  for (int j = 0; j < total; ++j) {
    eta[j] = (j - extra) * d;
    cps[j] = curve.eval(eta[j]);
    const double sp = cps[j].d1.norm();
    if (!(sp > 1e-12 * std::max(1.0, l)))
      throw GeometryError("build_frame: degenerate tangent at eta=" + std::to_string(eta[j]));
    t[j] = cps[j].d1 / sp;
  }
  k1[extra] = any_perpendicular(t[extra]);
  for (int j = extra + 1; j < total; ++j) k1[j] = transport(cps[j - 1].p, t[j - 1], k1[j - 1], cps[j].p, t[j]);
  for (int j = extra - 1; j >= 0; --j) k1[j] = transport(cps[j + 1].p, t[j + 1], k1[j + 1], cps[j].p, t[j]);
  return AdaptedFrame(curve, std::move(eta), std::move(k1));
}

TubeChart::TubeChart(CableCurve curve, AdaptedFrame frame, int n_eta, int n_theta, double collar)
    : curve_(std::move(curve)), frame_(std::move(frame)), n_eta_(n_eta), n_theta_(n_theta), collar_(collar) {
  if (n_eta < 1 || n_theta < 3) throw GeometryError("build_chart: resolution too small");
  const int np = n_eta * n_theta;
  point_.resize(np);
  deta_.resize(np);
  dtheta_.resize(np);
  normal_.resize(np);
  weight_.resize(np);
  for (int j = 0; j < n_eta; ++j) {
    for (int m = 0; m < n_theta; ++m) {
      const int q = index(j, m);
      const SurfacePoint sp = surface(eta(j), theta(m));
      point_[q] = sp.p;
      deta_[q] = sp.d_eta;
      dtheta_[q] = sp.d_theta;
      normal_[q] = sp.normal;
      weight_[q] = sp.d_eta.cross(sp.d_theta).norm() * d_eta() * d_theta();
    }
  }
}

SurfacePoint TubeChart::surface(double eta, double theta) const {
  const double r = curve_.radius();
  const double l = curve_.length();
  const CurvePoint cp = curve_.eval(eta);
  const Frame f = frame_.eval(eta);
  // Rotation-minimizing: k' = -(k . t') t.
  const double a1 = f.k1.dot(cp.d2) / l;
  const double a2 = f.k2.dot(cp.d2) / l;
  const double s = std::sin(theta), c = std::cos(theta);
  SurfacePoint sp;
  sp.normal = s * f.k1 + c * f.k2;
  sp.p = cp.p + r * sp.normal;
  sp.d_eta = cp.d1 - r * (a1 * s + a2 * c) * f.t;
  sp.d_theta = r * (c * f.k1 - s * f.k2);
  return sp;
}

double TubeChart::theta(int m) const { return -kPi + (m + 1) * d_theta(); }
double TubeChart::d_theta() const { return 2.0 * kPi / n_theta_; }

double TubeChart::area() const {
  double a = 0.0;
  for (double w : weight_) a += w;
  return a;
}

Vec3 TubeChart::collar_point(double eta, double theta, double s) const {
  const Frame f = frame_.eval(eta);
  const Vec3 nu = std::sin(theta) * f.k1 + std::cos(theta) * f.k2;
  return curve_.position(eta) + (1.0 + s) * curve_.radius() * nu;
}

Eigen::Matrix3d TubeChart::inverse_jacobian(double eta, double theta, double s) const {
  const CurvePoint cp = curve_.eval(eta);
  const Frame f = frame_.eval(eta);
  const double r = curve_.radius();
  const double l = curve_.length();
  const double sn = std::sin(theta), cs = std::cos(theta);
  const double a1 = f.k1.dot(cp.d2) / l;
  const double a2 = f.k2.dot(cp.d2) / l;
  Eigen::Matrix3d jac;
  jac.col(0) = cp.d1 - (1.0 + s) * r * (a1 * sn + a2 * cs) * f.t;
  jac.col(1) = (1.0 + s) * r * (cs * f.k1 - sn * f.k2);
  jac.col(2) = r * (sn * f.k1 + cs * f.k2);
  return jac.inverse();
}

std::optional<CollarCoords> TubeChart::collar_coords(const Vec3& p) const {
  const double r = curve_.radius();
  const double reach = r * (1.0 + collar_);
  const double lo = -collar_, hi = 1.0 + collar_;
  // Seed: nearest sample on the extended axis.
  const int ns = 64;
  double best = std::numeric_limits<double>::infinity();
  double eta = 0.5;
  for (int j = 0; j <= ns; ++j) {
    const double e = lo + (hi - lo) * j / ns;
    const double d = (curve_.position(e) - p).squaredNorm();
    if (d < best) {
      best = d;
      eta = e;
    }
  }
  const double step_scale = (hi - lo) / ns;
  if (std::sqrt(best) > reach + curve_.length() * step_scale) return std::nullopt;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const CurvePoint cp = curve_.eval(eta);
    const Vec3 d = p - cp.p;
    const double g = d.dot(cp.d1);
    const double dg = -cp.d1.squaredNorm() + d.dot(cp.d2);
    if (dg >= 0.0) break;
    double step = g / dg;
    step = std::clamp(step, -step_scale, step_scale);
    eta -= step;
    if (std::abs(step) < 1e-10) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "collar inversion did not converge at point (" << p.transpose() << ")";
    throw GeometryError(os.str());
  }
  if (eta < lo || eta > hi) return std::nullopt;
  const CurvePoint cp = curve_.eval(eta);
  const Frame f = frame_.eval(eta);
  const Vec3 d = p - cp.p;
  const double rho = (d - f.t * f.t.dot(d)).norm();
  CollarCoords cc;
  cc.eta = eta;
  cc.theta = std::atan2(d.dot(f.k1), d.dot(f.k2));
  cc.s = rho / r - 1.0;
  if (std::abs(cc.s) >= collar_ && !(cc.s < 0.0)) return std::nullopt;
  return cc;
}

TubeChart build_chart(const CableCurve& curve, const AdaptedFrame& frame, int n_eta, int n_theta,
                      double collar) {
  return TubeChart(curve, frame, n_eta, n_theta, collar);
}

Geometry Geometry::build(const GeometrySpec& spec, int frame_samples) {
  const GeometryReport rep = validate_geometry(spec);
  if (!rep.ok()) {
    std::string msg = "geometry rejected:";
    for (const auto& m : rep.messages) msg += " " + m;
    throw GeometryError(msg);
  }
  Geometry g;
  g.spec_ = spec;
  const double eps = spec.collar_halfwidth;
  for (const CableCurve& c : spec.cables) {
    g.frames_.push_back(build_frame(c, frame_samples, eps));
    Box b{Vec3::Constant(std::numeric_limits<double>::infinity()),
          Vec3::Constant(-std::numeric_limits<double>::infinity())};
    const int ns = 256;
    for (int j = 0; j <= ns; ++j) {
      const Vec3 p = c.position(-eps + (1.0 + 2.0 * eps) * j / ns);
      b.lo = b.lo.cwiseMin(p);
      b.hi = b.hi.cwiseMax(p);
    }
    const double pad = c.radius() * (1.0 + eps) + c.length() * (1.0 + 2.0 * eps) / ns;
    b.lo.array() -= pad;
    b.hi.array() += pad;
    g.bounds_.push_back(b);
  }
  return g;
}

TubeChart Geometry::chart(std::size_t i, int n_eta, int n_theta) const {
  return build_chart(spec_.cables.at(i), frames_.at(i), n_eta, n_theta, spec_.collar_halfwidth);
}

Region Geometry::classify(const Vec3& p) const {
  Region out;
  if (!spec_.box.contains(p)) {
    out.kind = Region::Kind::exterior;
    return out;
  }
  for (std::size_t i = 0; i < spec_.cables.size(); ++i) {
    if (!bounds_[i].contains(p)) continue;
    const TubeChart probe(spec_.cables[i], frames_[i], 1, 3, spec_.collar_halfwidth);
    const auto cc = probe.collar_coords(p);
    if (!cc) continue;
    out.cable = static_cast<int>(i);
    out.coords = *cc;
    const bool on_axis_range = cc->eta >= 0.0 && cc->eta <= 1.0;
    if (cc->s < 0.0 && on_axis_range) {
      out.kind = Region::Kind::inside_tube;
      return out;
    }
    if (std::abs(cc->s) < spec_.collar_halfwidth) {
      out.kind = Region::Kind::collar;
      return out;
    }
    out.cable = -1;
  }
  out.kind = Region::Kind::field;
  return out;
}

std::optional<CollarCoords> Geometry::tube_coords(std::size_t i, const Vec3& p, double reach) const {
  const TubeChart probe(spec_.cables.at(i), frames_.at(i), 1, 3, reach);
  return probe.collar_coords(p);
}

Region classify_point(const Geometry& geometry, const Vec3& p) { return geometry.classify(p); }

}  // namespace fieldcable
