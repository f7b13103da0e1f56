#pragma once

#include <string>
#include <vector>

#include "fieldcable/types.hpp"

namespace fieldcable {

// k x k matrix-valued function of eta, piecewise linear between samples.
struct MaterialProfile {
  std::vector<double> eta;
  std::vector<MatC> values;

  static MaterialProfile constant(const MatC& value);
  MatC at(double x) const;
  int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().rows()); }
};

struct LineMaterials {
  int k = 1;
  MaterialProfile C, L, R, G;

  static LineMaterials uniform(const MatC& c, const MatC& l, const MatC& r, const MatC& g);
};

struct LineMaterialsReport {
  bool ok = true;
  bool shapes = true;
  bool c_positive = true, l_positive = true, r_accretive = true, g_accretive = true;
  bool hermitian = true;
  double c_min_eig = 0.0, l_min_eig = 0.0, r_min_eig = 0.0, g_min_eig = 0.0;
  std::vector<std::string> messages;
};

LineMaterialsReport validate_line_materials(const LineMaterials& m, double matl_floor = 1e-12);

// Staggered grid on [0,1]: V,q on nodes, I,psi on cells.
class LineGrid {
 public:
  LineGrid() = default;
  explicit LineGrid(int n, bool periodic = false);

  int cells() const { return n_; }
  int nodes() const { return periodic_ ? n_ : n_ + 1; }
  double h() const { return h_; }
  bool periodic() const { return periodic_; }
  double node_eta(int j) const { return j * h_; }
  double cell_eta(int c) const { return (c + 0.5) * h_; }

  const VecR& node_weights() const { return wn_; }
  const VecR& cell_weights() const { return wc_; }
  // Nodes -> cells difference.
  const SpMatR& D() const { return d_; }
  // Cells -> nodes difference with extrapolated boundary rows.
  const SpMatR& Dt() const { return dt_; }
  // 2 x cells: second-order extrapolation of a cell function to eta = 0 and eta = 1.
  const SpMatR& extrapolation() const { return x_; }

 private:
  int n_ = 0;
  double h_ = 0.0;
  bool periodic_ = false;
  VecR wn_, wc_;
  SpMatR d_, dt_, x_;
};

// Line blocks for k lines; unknown (cell c, line i) sits at c*k + i.
struct LineBlocks {
  int k = 1;
  LineGrid grid;
  SpMatC H_psi, H_q;   // L^-1 on cells, C^-1 on nodes
  SpMatC R_psi, G_q;   // R on cells, G on nodes
  SpMatC Dk, Dtk;      // D and Dt expanded over lines
  SpMatC Xk;           // 2k x kn: rows I(0) for each line, then I(1)
  VecR mass_psi, mass_q;

  int n_psi() const { return k * grid.cells(); }
  int n_q() const { return k * grid.nodes(); }
};

LineBlocks assemble_line(const LineMaterials& m, const LineGrid& g);

// Endpoint values for k lines.
struct BoundaryValues {
  VecC V0, Itot0, V1, Itot1;
  // (V(0), I_tot(0), V(1), -I_tot(1)).
  VecC stacked() const;
  // (I_tot(0), I_tot(1), V(0), -V(1)): the (B1; B2) pair.
  VecC ports() const;
};

BoundaryValues extract_boundary(const LineBlocks& lb, const VecC& i_tot_cells, const VecC& v_nodes);

// Sparse kron(a, I_k).
SpMatC expand_lines(const SpMatR& a, int k);

}  // namespace fieldcable
