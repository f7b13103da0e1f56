#pragma once

#include <vector>

#include "fieldcable/scenario.hpp"
#include "fieldcable/sim.hpp"

namespace fieldcable {

struct StudyRow {
  std::string name;
  std::vector<double> h;      // refinement parameter per level
  std::vector<double> error;  // error per level
  std::vector<double> order;  // observed order between consecutive levels
};

// Adjoint vs loop-quadrature P_mag on a straight cylinder applied to a smooth axial field;
// eta and theta refined together starting from n0.
StudyRow pmag_oracle_study(double radius, double length, int n0, int levels);

// Constant fields through surface_trace: max error over all chart points.
StudyRow trace_constant_study(const Model& model);

// Max |ledger residual| / peak energy when halving dt.
StudyRow ledger_order_study(const SystemNode& node, const SimConfig& cfg, const VecC& x0, int levels);

}  // namespace fieldcable
