#include "fieldcable/sim.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/UmfPackSupport>

#include "fieldcable/linalg.hpp"

namespace fieldcable {

struct MidpointStepper::Factor {
  Eigen::UmfPackLU<SpMatC> lu;
};

VecC InputSignal::eval(double t, int m) const {
  VecC amp = amplitude.size() == m ? amplitude : VecC::Zero(m);
  switch (kind) {
    case Kind::zero:
      return VecC::Zero(m);
    case Kind::step: {
      if (t <= t0) return VecC::Zero(m);
      if (rise <= 0.0) return amp;
      const double s = std::min(1.0, (t - t0) / rise);
      return amp * (s * s * s * (10.0 - 15.0 * s + 6.0 * s * s));
    }
    case Kind::sine:
      return amp * std::sin(omega * t + phase);
    case Kind::table: {
      if (times.empty()) return VecC::Zero(m);
      if (values.size() != times.size()) throw ConfigError("input table: times and values differ in length");
      auto check = [m](const VecC& v) -> const VecC& {
        if (v.size() != m) throw ConfigError("input table: wrong number of ports");
        return v;
      };
      if (t <= times.front()) return check(values.front());
      if (t >= times.back()) return check(values.back());
      std::size_t j = 1;
      while (times[j] < t) ++j;
      const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
      return (1.0 - w) * check(values[j - 1]) + w * check(values[j]);
    }
  }
  return VecC::Zero(m);
}

double Trajectory::max_abs_residual() const {
  double r = 0.0;
  for (double v : residual) r = std::max(r, std::abs(v));
  return r;
}

double Trajectory::peak_energy() const {
  double e = 0.0;
  for (double v : energy) e = std::max(e, v);
  return e;
}

MidpointStepper::MidpointStepper(const SystemNode& node, double dt, double solver_tol)
    : node_(&node), dt_(dt), tol_(solver_tol) {
  if (!(std::abs(dt) > 0.0)) throw ConfigError("time step must be nonzero");
  const OperatorBundle& b = node.bundle();
  const BoundaryConditionSpec& spec = node.spec();
  n_ = b.size();
  nb_ = 2 * spec.k;
  A_ = b.generator();
  const MatC wb = spec.W_B();
  const SpMatC zh = b.ports_matrix() * b.H;
  const MatC cd = wb * MatC(zh);
  C_ = cd.sparseView();
  const SpMatC b2h = b.B2.adjoint();
  const SpMatC gamma = b.mass.cast<cplx>().cwiseInverse().asDiagonal() * b2h;
  const MatC w1 = wb.leftCols(nb_);
  W1pinv_ = linalg::pinv(w1, 1e-10);
  Eigen::JacobiSVD<MatC> svd(w1, Eigen::ComputeFullU | Eigen::ComputeFullV);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10 * svd.singularValues()(0)) ++r;
  U0_ = svd.matrixU().rightCols(nb_ - r);
  V0_ = svd.matrixV().rightCols(nb_ - r);

  std::vector<TripC> t;
  t.reserve(A_.nonZeros() + n_ + gamma.nonZeros() + C_.nonZeros() + nb_ * nb_);
  for (int i = 0; i < n_; ++i) t.emplace_back(i, i, 1.0);
  for (int col = 0; col < A_.outerSize(); ++col)
    for (SpMatC::InnerIterator it(A_, col); it; ++it) t.emplace_back(it.row(), it.col(), -0.5 * dt * it.value());
  for (int col = 0; col < gamma.outerSize(); ++col)
    for (SpMatC::InnerIterator it(gamma, col); it; ++it) t.emplace_back(it.row(), n_ + it.col(), -dt * it.value());
  for (int col = 0; col < C_.outerSize(); ++col)
    for (SpMatC::InnerIterator it(C_, col); it; ++it) t.emplace_back(n_ + it.row(), it.col(), 0.5 * it.value());
  for (int j = 0; j < nb_; ++j)
    for (int i = 0; i < nb_; ++i)
      if (w1(i, j) != cplx(0.0)) t.emplace_back(n_ + i, n_ + j, w1(i, j));
  K_.resize(n_ + nb_, n_ + nb_);
  K_.setFromTriplets(t.begin(), t.end());
  K_.makeCompressed();
  auto f = std::make_shared<Factor>();
  f->lu.compute(K_);
  if (f->lu.info() != Eigen::Success) throw SolverError("midpoint step matrix is singular");
  lu_ = std::move(f);
}

VecC MidpointStepper::step(const VecC& x, const VecC& u_half, VecC& x_next) const {
  const int m = node_->spec().m();
  if (u_half.size() != m) throw ConfigError("input dimension does not match W_inp");
  VecC rhs(n_ + nb_);
  rhs.head(n_) = x + 0.5 * dt_ * (A_ * x);
  VecC g = VecC::Zero(nb_);
  g.head(m) = u_half;
  rhs.tail(nb_) = g - 0.5 * (C_ * x);
  const double rn = rhs.norm();
  if (rn == 0.0) {
    x_next = VecC::Zero(n_);
    return VecC::Zero(nb_);
  }
  VecC sol = lu_->lu.solve(rhs);
  VecC res = rhs - K_ * sol;
  if (res.norm() > tol_ * rn) {
    sol += lu_->lu.solve(res);
    res = rhs - K_ * sol;
  }
  if (!(res.norm() <= tol_ * rn)) {
    std::ostringstream os;
    os << "midpoint solve residual " << res.norm() / rn << " exceeds tolerance " << tol_;
    throw SolverError(os.str());
  }
  x_next = sol.head(n_);
  return sol.tail(nb_);
}

VecC MidpointStepper::algebraic_residual(const VecC& x, const VecC& u) const {
  if (U0_.cols() == 0) return VecC();
  VecC g = VecC::Zero(nb_);
  g.head(u.size()) = u;
  return U0_.adjoint() * (g - C_ * x);
}

VecC MidpointStepper::level_multiplier(const VecC& x, const VecC& u, const VecC& kernel_part) const {
  VecC g = VecC::Zero(nb_);
  g.head(u.size()) = u;
  VecC lam = W1pinv_ * (g - C_ * x);
  if (V0_.cols() > 0) lam += V0_ * (V0_.adjoint() * kernel_part);
  return lam;
}

Trajectory run(const SystemNode& node, const SimConfig& cfg, const VecC& x0) {
  MidpointStepper stepper(node, cfg.dt, cfg.solver_tol);
  return run(node, stepper, cfg, x0);
}

Trajectory run(const SystemNode& node, const MidpointStepper& stepper, const SimConfig& cfg, const VecC& x0) {
  if (!(cfg.dt > 0.0) || !(cfg.T >= cfg.dt)) throw ConfigError("simulation needs dt > 0 and T >= dt");
  if (std::abs(stepper.dt() - cfg.dt) > 1e-15 * cfg.dt) throw ConfigError("stepper time step differs from config");
  if (cfg.record_stride < 1) throw ConfigError("record stride must be positive");
  const OperatorBundle& b = node.bundle();
  const BoundaryConditionSpec& spec = node.spec();
  const int n = b.size(), m = spec.m(), p = spec.p(), nb = 2 * spec.k;
  if (x0.size() != n) throw ConfigError("initial state has the wrong size");

  Trajectory tr;
  const Certificate cert = certify(spec, b.hd_min, b.hd_max);
  MatC form;
  if (cert.colocated && p == m) {
    const ColocatedOutput co = build_colocated_output(spec.W_B(), m);
    MatC wc = co.W_C;
    wc.topRows(p) = spec.W_out;
    form = colocation_form(spec.W_B(), wc);
    tr.partial = false;
  }

  const VecC u0 = cfg.input.eval(0.0, m);
  const VecC alg = stepper.algebraic_residual(x0, u0);
  if (alg.size() > 0) {
    const SpMatC zh = b.ports_matrix() * b.H;
    const double scale = std::max(1.0, (zh * x0).norm() + u0.norm());
    if (alg.norm() > node.bc_tol() * scale) {
      std::ostringstream os;
      os << "initial data incompatible with the boundary input: (x(0), u(0)) must satisfy W_B z = (u(0), 0) "
            "on the directions not controlled by W1 (residual "
         << alg.norm() / scale << ")";
      throw DomainError(os.str());
    }
  }

  const long steps = std::lround(cfg.T / cfg.dt);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  struct Level {
    double e, p, d, bf;
    VecC u, y;
  };
  auto level = [&](const VecC& x, const VecC& u, const VecC& lam) {
    Level lv;
    const VecC e = b.H * x;
    lv.e = 0.5 * b.inner(e, x).real();
    lv.d = b.inner(b.R * e, e).real();
    const VecC z = node.ports(e, lam);
    lv.u = u;
    lv.y = p > 0 ? VecC(spec.W_out * z) : VecC();
    lv.p = (p == m && m > 0) ? lv.y.dot(u).real() : 0.0;
    lv.bf = form.size() > 0 ? z.dot(form * z).real() : 0.0;
    return lv;
  };

  double sup = 0.0, dis = 0.0, bnd = 0.0, yl2 = 0.0, ul2 = 0.0, e0 = 0.0;
  Level prev{};
  auto record = [&](long i, const VecC& x, const Level& lv) {
    tr.t.push_back(i * cfg.dt);
    tr.u.push_back(lv.u);
    tr.y.push_back(lv.y);
    tr.energy.push_back(lv.e);
    tr.supplied.push_back(sup);
    tr.dissipated.push_back(dis);
    tr.boundary.push_back(tr.partial ? nan : bnd);
    tr.residual.push_back(tr.partial ? nan : (lv.e - e0) - (sup - dis + 0.5 * bnd));
    tr.state_norm.push_back(std::sqrt(std::max(0.0, b.inner(x, x).real())));
    tr.u_l2.push_back(std::sqrt(ul2));
    tr.y_l2.push_back(std::sqrt(yl2));
    if (cfg.keep_states) tr.states.push_back(x);
  };
  auto accumulate = [&](const Level& a, const Level& c) {
    sup += 0.5 * cfg.dt * (a.p + c.p);
    dis += 0.5 * cfg.dt * (a.d + c.d);
    bnd += 0.5 * cfg.dt * (a.bf + c.bf);
  };

  VecC x = x0, xn;
  VecC lam_prev;  // multiplier at the previous half step
  for (long i = 0; i < steps; ++i) {
    const double t = i * cfg.dt;
    const VecC uh = cfg.input.eval(t + 0.5 * cfg.dt, m);
    const VecC lam_half = stepper.step(x, uh, xn);
    // Level i is complete once both neighbouring half-step multipliers are known.
    const VecC ker = lam_prev.size() > 0 ? VecC(0.5 * (lam_prev + lam_half)) : lam_half;
    const Level lv = level(x, cfg.input.eval(t, m), stepper.level_multiplier(x, cfg.input.eval(t, m), ker));
    if (i == 0) {
      e0 = lv.e;
    } else {
      accumulate(prev, lv);
    }
    if (i % cfg.record_stride == 0) record(i, x, lv);
    prev = lv;
    const VecC xm = 0.5 * (x + xn);
    if (p > 0) {
      const VecC ym = spec.W_out * node.ports(b.H * xm, lam_half);
      yl2 += cfg.dt * ym.squaredNorm();
    }
    ul2 += cfg.dt * uh.squaredNorm();
    lam_prev = lam_half;
    x.swap(xn);
  }
  const double tf = steps * cfg.dt;
  const VecC uf = cfg.input.eval(tf, m);
  const Level lv = level(x, uf, stepper.level_multiplier(x, uf, lam_prev.size() > 0 ? lam_prev : VecC::Zero(nb)));
  if (steps == 0) e0 = lv.e;
  else accumulate(prev, lv);
  record(steps, x, lv);
  tr.final_state = x;
  return tr;
}

double wellposedness_ratio(const Trajectory& tr, double c_t) {
  double worst = 0.0;
  if (tr.state_norm.empty()) return worst;
  const double x0 = tr.state_norm.front();
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const double lhs = tr.state_norm[i] + tr.y_l2[i];
    const double rhs = c_t * (x0 + tr.u_l2[i]);
    if (rhs > 0.0)
      worst = std::max(worst, lhs / rhs);
    else if (lhs > 0.0)
      worst = std::numeric_limits<double>::infinity();
  }
  return worst;
}

}  // namespace fieldcable
