#pragma once

#include <vector>

#include "fieldcable/geometry.hpp"
#include "fieldcable/maxwell.hpp"
#include "fieldcable/tline.hpp"
#include "fieldcable/types.hpp"

namespace fieldcable {

// Surface samples are stored point-major: row 3*q + c is component c at chart point q.
struct CouplingMatrices {
  SpMatR Pel;   // 3*points x cells
  SpMatR Pmag;  // cells x 3*points, M_line^-1 Pel^T M_surf
  VecR M_line;  // cell weights
  VecR M_surf;  // surface weights, repeated per component
};

// Pel only (with both masses).
CouplingMatrices assemble_P_el(const TubeChart& chart, const LineGrid& line);

enum class PmagMode { adjoint, quadrature };

struct PmagOperator {
  SpMatR matrix;  // cells x 3*samples
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
};

// adjoint: exact mass-weighted adjoint of Pel on the chart points.
// quadrature: cell averages of the loop integral of g x nu, evaluated with an
// independent point set (two Gauss points per cell, half-shifted theta nodes).
PmagOperator assemble_P_mag(const TubeChart& chart, const LineGrid& line, PmagMode mode);

// Pel plus the adjoint Pmag.
CouplingMatrices assemble_coupling(const TubeChart& chart, const LineGrid& line);

// C2 cut-off in s: 1 for |s| <= eps/3, 0 for |s| >= 2 eps/3.
double collar_cutoff(double s, double eps);

// chi * grad(V o Psi_hat) sampled along active edges; V given on line nodes.
VecC lift_voltage(const TubeChart& chart, const YeeGrid& grid, const LineGrid& line, const VecC& v_nodes);

}  // namespace fieldcable
