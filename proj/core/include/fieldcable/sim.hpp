#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "fieldcable/assembly.hpp"
#include "fieldcable/certify.hpp"
#include "fieldcable/types.hpp"

namespace fieldcable {

struct InputSignal {
  enum class Kind { zero, step, sine, table };
  Kind kind = Kind::zero;
  VecC amplitude;     // one entry per input port
  double t0 = 0.0;    // step: C2 quintic ramp from t0 to t0 + rise
  double rise = 0.0;
  double omega = 0.0;  // sine: amplitude * sin(omega t + phase)
  double phase = 0.0;
  std::vector<double> times;  // table: piecewise linear per port
  std::vector<VecC> values;

  VecC eval(double t, int m) const;
};

struct SimConfig {
  double dt = 1e-3;
  double T = 1.0;
  InputSignal input;
  double solver_tol = 1e-10;
  int record_stride = 1;
  bool keep_states = false;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<VecC> u, y;
  std::vector<VecC> states;  // only when keep_states
  std::vector<double> energy;
  std::vector<double> supplied;    // int Re<u, y>
  std::vector<double> dissipated;  // int Re<e, R e>_M
  std::vector<double> boundary;    // int z^H (Sigma - T^H Sigma T) z
  std::vector<double> residual;    // E - E0 - (supplied - dissipated + boundary / 2)
  std::vector<double> state_norm;  // ||x||_M
  std::vector<double> u_l2, y_l2;  // L2(0, t) norms with midpoint sums
  bool partial = true;
  VecC final_state;

  double max_abs_residual() const;
  double peak_energy() const;
};

class MidpointStepper {
 public:
  MidpointStepper(const SystemNode& node, double dt, double solver_tol = 1e-10);

  double dt() const { return dt_; }
  // One step with the input at the half step; returns the boundary multiplier at the half step.
  VecC step(const VecC& x, const VecC& u_half, VecC& x_next) const;
  // Algebraic part of the constraint at a time level (empty if W1 is invertible).
  VecC algebraic_residual(const VecC& x, const VecC& u) const;
  // Time-level multiplier; `kernel_part` supplies the component not fixed by W1.
  VecC level_multiplier(const VecC& x, const VecC& u, const VecC& kernel_part) const;
  const MatC& V0() const { return V0_; }

 private:
  const SystemNode* node_;
  double dt_, tol_;
  int n_, nb_;
  SpMatC A_, K_;
  SpMatC C_;  // W_B Z H
  MatC W1pinv_, U0_, V0_;
  struct Factor;
  std::shared_ptr<const Factor> lu_;  // sparse LU of K, shared between copies
};

// Integrates from x0 on [0, T]. The ledger is complete when W_out is co-located; otherwise
// `partial` is set and the boundary/residual columns are NaN.
// Throws DomainError if (x0, u(0)) violates the algebraic boundary constraint.
Trajectory run(const SystemNode& node, const SimConfig& cfg, const VecC& x0);

// Same, reusing a stepper (dt must match).
Trajectory run(const SystemNode& node, const MidpointStepper& stepper, const SimConfig& cfg, const VecC& x0);

// Largest violation of ||x(t)|| + ||y||_L2 <= c_t (||x(0)|| + ||u||_L2) over the records, as the
// ratio lhs / rhs (<= 1 means satisfied).
double wellposedness_ratio(const Trajectory& tr, double c_t);

}  // namespace fieldcable
