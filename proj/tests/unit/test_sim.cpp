#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "fieldcable/study.hpp"

using namespace fctest;

namespace {

TubeSetup small_setup(bool lossy) {
  TubeSetup s;
  s.cells = {6, 6, 6};
  s.radius = 1.0 / 3.0;
  s.z0 = 0.2;
  s.z1 = 0.8;
  s.line_cells = 8;
  s.n_theta = 12;
  s.lossy = lossy;
  return s;
}

struct Fixture {
  std::unique_ptr<Model> model;
  std::unique_ptr<SystemNode> node;
};

Fixture make(bool lossy, const MatC& wb, int m, bool colocated) {
  Fixture f;
  f.model = build_model(tube_scenario(small_setup(lossy)));
  MatC w_out;
  if (colocated) w_out = build_colocated_output(wb, m).W_out;
  f.node = std::make_unique<SystemNode>(f.model->bundle, BoundaryConditionSpec::from_W_B(wb, m, w_out));
  return f;
}

MatC strict_W_B(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_admissible_W_B(1, rng, false, false, 0.6);
}

MatC skew_W_B(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_admissible_W_B(1, rng, true, false);
}

InputSignal step_input(int m) {
  InputSignal in;
  in.kind = InputSignal::Kind::step;
  in.amplitude = VecC::Constant(m, 1.0);
  in.t0 = 0.05;
  in.rise = 0.3;
  return in;
}

}  // namespace

TEST_CASE("input signals") {
  InputSignal s = step_input(2);
  CHECK(s.eval(0.0, 2).norm() == 0.0);
  CHECK(std::abs(s.eval(0.2, 2)(0) - 0.5) < 1e-12);
  CHECK(std::abs(s.eval(1.0, 2)(1) - 1.0) < 1e-15);
  InputSignal w;
  w.kind = InputSignal::Kind::sine;
  w.amplitude = VecC::Constant(1, 2.0);
  w.omega = 3.0;
  CHECK(std::abs(w.eval(0.5, 1)(0) - 2.0 * std::sin(1.5)) < 1e-15);
  InputSignal t;
  t.kind = InputSignal::Kind::table;
  t.times = {0.0, 1.0};
  t.values = {VecC::Constant(1, 0.0), VecC::Constant(1, 4.0)};
  CHECK(std::abs(t.eval(0.25, 1)(0) - 1.0) < 1e-15);
  CHECK(std::abs(t.eval(2.0, 1)(0) - 4.0) < 1e-15);
  CHECK_THROWS_AS(t.eval(0.5, 2), ConfigError);
}

TEST_CASE("zero data give the zero trajectory") {
  Fixture f = make(true, strict_W_B(1), 2, true);
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.2;
  const Trajectory tr = run(*f.node, cfg, VecC::Zero(f.model->bundle.size()));
  CHECK_FALSE(tr.partial);
  CHECK(tr.final_state.norm() == 0.0);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    CHECK(tr.energy[i] == 0.0);
    CHECK(tr.supplied[i] == 0.0);
    CHECK(tr.dissipated[i] == 0.0);
    CHECK(tr.boundary[i] == 0.0);
    CHECK(tr.residual[i] == 0.0);
  }
  VecC next;
  const MidpointStepper st(*f.node, 0.01);
  st.step(VecC::Zero(f.model->bundle.size()), VecC::Zero(2), next);
  CHECK(next.norm() == 0.0);
}

TEST_CASE("lossless skew flow conserves energy") {
  Fixture f = make(false, skew_W_B(2), 1, false);
  std::mt19937_64 rng(3);
  const VecC x0 = make_compatible(*f.node, random_vector(f.model->bundle.size(), rng, false), VecC::Zero(1));
  SimConfig cfg;
  cfg.dt = 0.005;
  cfg.T = 1000 * cfg.dt;
  cfg.record_stride = 10;
  const Trajectory tr = run(*f.node, cfg, x0);
  double drift = 0.0;
  for (double e : tr.energy) drift = std::max(drift, std::abs(e - tr.energy[0]) / tr.energy[0]);
  CHECK(drift <= 1e-10);
}

TEST_CASE("lossy flow without input is contractive") {
  for (const MatC& wb : {strict_W_B(4), skew_W_B(5), voltage_zero(1)}) {
    Fixture f = make(true, wb, 1, false);
    std::mt19937_64 rng(6);
    const VecC x0 = make_compatible(*f.node, random_vector(f.model->bundle.size(), rng, false), VecC::Zero(1));
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 1.0;
    const Trajectory tr = run(*f.node, cfg, x0);
    for (std::size_t i = 1; i < tr.energy.size(); ++i) CHECK(tr.energy[i] < tr.energy[i - 1]);
  }
}

TEST_CASE("lossless skew flow is reversible") {
  Fixture f = make(false, skew_W_B(7), 2, false);
  std::mt19937_64 rng(8);
  const VecC x0 = make_compatible(*f.node, random_vector(f.model->bundle.size(), rng), VecC::Zero(2));
  const MidpointStepper fwd(*f.node, 0.01), bwd(*f.node, -0.01);
  VecC x = x0, next;
  for (int i = 0; i < 200; ++i) {
    fwd.step(x, VecC::Zero(2), next);
    x = next;
  }
  for (int i = 0; i < 200; ++i) {
    bwd.step(x, VecC::Zero(2), next);
    x = next;
  }
  CHECK((x - x0).norm() / x0.norm() <= 1e-8);
}

TEST_CASE("flow map is linear in initial state and input") {
  Fixture f = make(true, strict_W_B(9), 2, true);
  std::mt19937_64 rng(10);
  const int n = f.model->bundle.size();
  const VecC xa = random_vector(n, rng), xb = random_vector(n, rng);
  SimConfig ca;
  ca.dt = 0.02;
  ca.T = 0.4;
  ca.input.kind = InputSignal::Kind::sine;
  ca.input.omega = 5.0;
  ca.input.amplitude = random_vector(2, rng);
  SimConfig cb = ca;
  cb.input.amplitude = random_vector(2, rng);
  SimConfig cs = ca;
  cs.input.amplitude = ca.input.amplitude + cb.input.amplitude;
  const MidpointStepper st(*f.node, ca.dt);
  const Trajectory a = run(*f.node, st, ca, xa), b = run(*f.node, st, cb, xb), s = run(*f.node, st, cs, xa + xb);
  CHECK((s.final_state - a.final_state - b.final_state).norm() <= 1e-10 * s.final_state.norm());
  CHECK((s.y.back() - a.y.back() - b.y.back()).norm() <= 1e-10 * std::max(1.0, s.y.back().norm()));
}

TEST_CASE("energy ledger with a co-located output") {
  Fixture f = make(true, strict_W_B(11), 2, true);
  SimConfig cfg;
  cfg.dt = 4e-5;
  cfg.T = 0.5;
  cfg.record_stride = 20;
  cfg.input = step_input(2);
  const Trajectory tr = run(*f.node, cfg, VecC::Zero(f.model->bundle.size()));
  CHECK_FALSE(tr.partial);
  MESSAGE("max residual / peak energy = " << tr.max_abs_residual() / tr.peak_energy());
  CHECK(tr.max_abs_residual() <= 1e-8 * tr.peak_energy());
  CHECK(tr.dissipated.back() > 0.0);
  CHECK(tr.supplied.back() > 0.0);
}

TEST_CASE("ledger residual is second order in the time step") {
  Fixture f = make(true, strict_W_B(12), 2, true);
  SimConfig cfg;
  cfg.dt = 0.02;
  cfg.T = 0.8;
  cfg.input.kind = InputSignal::Kind::sine;
  cfg.input.amplitude = VecC::Constant(2, 1.0);
  cfg.input.omega = 6.0;
  const StudyRow row = ledger_order_study(*f.node, cfg, VecC::Zero(f.model->bundle.size()), 3);
  for (std::size_t i = 0; i < row.order.size(); ++i) {
    const double ratio = row.error[i] / row.error[i + 1];
    MESSAGE("dt ratio 2 -> residual ratio " << ratio);
    CHECK(ratio >= 4.0 / 1.5);
    CHECK(ratio <= 4.0 * 1.5);
  }
}

TEST_CASE("output ledger is partial without co-location") {
  Fixture f = make(true, strict_W_B(13), 2, false);
  SimConfig cfg;
  cfg.dt = 0.05;
  cfg.T = 0.2;
  cfg.input = step_input(2);
  const Trajectory tr = run(*f.node, cfg, VecC::Zero(f.model->bundle.size()));
  CHECK(tr.partial);
  CHECK(std::isnan(tr.residual.back()));
  CHECK(std::isfinite(tr.dissipated.back()));
}

TEST_CASE("well-posedness bound on sampled runs") {
  Fixture f = make(true, strict_W_B(14), 2, true);
  const OperatorBundle& b = f.model->bundle;
  const Certificate cert = certify(f.node->spec(), b.hd_min, b.hd_max);
  REQUIRE(cert.wellposed);
  std::mt19937_64 rng(15);
  const MidpointStepper st(*f.node, 0.01);
  for (int r = 0; r < 5; ++r) {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 0.5;
    cfg.input.kind = InputSignal::Kind::sine;
    cfg.input.amplitude = random_vector(2, rng, false);
    cfg.input.omega = 4.0;
    const Trajectory tr = run(*f.node, st, cfg, random_vector(b.size(), rng, false));
    CHECK(wellposedness_ratio(tr, cert.c_t) <= 1.0);
  }
}

TEST_CASE("incompatible initial data are rejected") {
  Fixture f = make(false, voltage_zero(1), 0, false);
  std::mt19937_64 rng(16);
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.1;
  VecC x0 = VecC::Zero(f.model->bundle.size());
  x0(f.model->bundle.layout.off_q()) = 1.0;  // charge at eta = 0 gives V(0) != 0
  CHECK_THROWS_AS(run(*f.node, cfg, x0), DomainError);
  const VecC fixed = make_compatible(*f.node, x0, VecC());
  CHECK_NOTHROW(run(*f.node, cfg, fixed));
}
