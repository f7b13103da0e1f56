#pragma once

#include <array>
#include <vector>

#include "fieldcable/geometry.hpp"
#include "fieldcable/types.hpp"

namespace fieldcable {

// Axis-aligned diagonal tensors per cell (x, y, z components).
struct FieldMaterials {
  std::vector<Vec3> eps, mu, sigma;

  static FieldMaterials uniform(std::size_t cells, const Vec3& eps, const Vec3& mu, const Vec3& sigma);
};

struct FieldMaterialsReport {
  bool ok = true;
  double eps_min = 0.0, mu_min = 0.0, sigma_min = 0.0;
  std::vector<std::string> messages;
};

FieldMaterialsReport validate_field_materials(const FieldMaterials& m, double floor = 1e-12);

// Unknown on the staggered grid: axis and integer position.
struct GridEntity {
  int axis = 0;
  std::array<int, 3> idx{};
};

class YeeGrid {
 public:
  static constexpr int kField = -1;

  // Box minus staircase tubes; tube cells are those whose centers lie inside a tube.
  static YeeGrid build(const Geometry& geometry, const std::array<int, 3>& n);
  // Fully periodic grid without tubes or walls; used for dispersion checks.
  static YeeGrid periodic(const std::array<int, 3>& n, const Vec3& h);

  const std::array<int, 3>& dims() const { return n_; }
  const Vec3& spacing() const { return h_; }
  const Vec3& origin() const { return lo_; }
  bool is_periodic() const { return periodic_; }
  double h_max() const { return h_.maxCoeff(); }
  double cell_volume() const { return h_.prod(); }

  int cell_count() const { return n_[0] * n_[1] * n_[2]; }
  int cell_index(int i, int j, int k) const { return i + n_[0] * (j + n_[1] * k); }
  // kField for field cells, cable index for tube cells.
  int cell_tag(int i, int j, int k) const { return cell_tag_[cell_index(i, j, k)]; }
  Vec3 cell_center(int i, int j, int k) const;
  double excluded_volume_fraction() const;

  // Raw (unreduced) numbering; -1 if out of range.
  int edge_raw(int axis, std::array<int, 3> idx) const;
  int face_raw(int axis, std::array<int, 3> idx) const;
  Vec3 edge_midpoint(int axis, const std::array<int, 3>& idx) const;
  Vec3 face_center(int axis, const std::array<int, 3>& idx) const;
  // Stagger offsets (in cells) of edge/face positions along each axis.
  static Vec3 edge_stagger(int axis);
  static Vec3 face_stagger(int axis);

  int edge_count() const { return static_cast<int>(edges_.size()); }
  int face_count() const { return static_cast<int>(faces_.size()); }
  const std::vector<GridEntity>& edges() const { return edges_; }
  const std::vector<GridEntity>& faces() const { return faces_; }
  // Active index of a raw edge/face, -1 if eliminated.
  int edge_dof(int axis, const std::array<int, 3>& idx) const;
  int face_dof(int axis, const std::array<int, 3>& idx) const;

  // Staircase tube-wall edges (eliminated, tangential E = 0) split into lateral band and caps.
  const std::vector<GridEntity>& lateral_edges() const { return lateral_; }
  const std::vector<int>& lateral_cable() const { return lateral_cable_; }
  const std::vector<GridEntity>& cap_edges() const { return caps_; }
  std::size_t raw_edge_total() const { return edge_offset_[3]; }
  std::size_t raw_face_total() const { return face_offset_[3]; }

 private:
  void index_entities(const Geometry* geometry);

  std::array<int, 3> n_{};
  Vec3 h_ = Vec3::Ones();
  Vec3 lo_ = Vec3::Zero();
  bool periodic_ = false;
  std::vector<int> cell_tag_;
  std::array<std::size_t, 4> edge_offset_{}, face_offset_{};
  std::vector<int> edge_map_, face_map_;
  std::vector<GridEntity> edges_, faces_, lateral_, caps_;
  std::vector<int> lateral_cable_;
};

YeeGrid build_grid(const Geometry& geometry, const std::array<int, 3>& n);

struct MaxwellBlocks {
  SpMatR C_E;      // active edges -> active faces
  SpMatR C_H;      // active faces -> active edges, M_E^-1 C_E^T M_H
  SpMatR C_E_lat;  // lateral wall edges -> active faces
  VecR mass_E, mass_H;
  VecR H_B;        // 1/mu on faces
  VecR H_D;        // 1/eps on edges
  VecR sigma_E;    // conductivity on edges
};

MaxwellBlocks assemble_curls(const YeeGrid& grid, const FieldMaterials& m);

// Cell divergence of a face field (eliminated faces count as zero).
SpMatR face_divergence(const YeeGrid& grid);

struct SurfaceTrace {
  SpMatR R_tan;  // 3*points x edges: (I - nu nu^T) E
  SpMatR R_nu;   // 3*points x faces: nu x H
};

// Moving-least-squares affine interpolation from active unknowns near each chart point.
SurfaceTrace surface_trace(const YeeGrid& grid, const TubeChart& chart);

// Interpolation rows for one component field (edges or faces of `axis`) at p.
std::vector<std::pair<int, double>> interpolation_stencil(const YeeGrid& grid, bool on_faces, int axis,
                                                          const Vec3& p);

}  // namespace fieldcable
