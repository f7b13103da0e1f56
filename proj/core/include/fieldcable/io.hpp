#pragma once

#include <string>

#include "fieldcable/certify.hpp"
#include "fieldcable/maxwell.hpp"
#include "fieldcable/scenario.hpp"
#include "fieldcable/sim.hpp"

namespace fieldcable::io {

void write_matrix_market(const std::string& path, const SpMatC& a);
void write_matrix_market(const std::string& path, const SpMatR& a);

// Legacy VTK structured points; cell-averaged E and B plus the cell tag.
void write_vtk_fields(const std::string& path, const Model& model, const VecC& x);

// Columns t, energy, supplied, dissipated, boundary_term, residual, u_i, y_i, then the
// imaginary parts u_i_im, y_i_im when any input or output is complex.
void write_trajectory_csv(const std::string& path, const Trajectory& tr);

std::string certificate_json(const Certificate& cert, const BoundaryConditionSpec& spec);
std::string validation_json(const ValidationReport& rep);
std::string summary_json(const Trajectory& tr, const Certificate& cert, double wp_ratio, double drift);

}  // namespace fieldcable::io
