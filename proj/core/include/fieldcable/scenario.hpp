#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fieldcable/assembly.hpp"
#include "fieldcable/certify.hpp"
#include "fieldcable/geometry.hpp"
#include "fieldcable/maxwell.hpp"
#include "fieldcable/sim.hpp"
#include "fieldcable/tline.hpp"

namespace fieldcable {

struct InitialCondition {
  enum class Kind { zero, lifted_voltage, random };
  Kind kind = Kind::zero;
  VecC voltage;  // lifted_voltage: per-line amplitude of V(eta) = a sin^2(pi eta)
  double amplitude = 1.0;  // random: standard deviation
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  GeometrySpec geometry;
  std::array<int, 3> cells{8, 8, 8};
  int n_theta = 16;
  int line_cells = 16;
  LineMaterials line;
  Vec3 eps = Vec3::Ones(), mu = Vec3::Ones(), sigma = Vec3::Zero();
  BoundaryConditionSpec boundary;
  bool colocated_output = false;  // build W_out from the co-location completion
  SimConfig sim;
  InitialCondition initial;
  double bc_tol = 1e-8;
};

// JSON text to Scenario. Throws ConfigError with the offending field path.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

// Fully assembled model; cable i drives line i, lines beyond the cable count are uncoupled.
struct Model {
  Scenario scenario;
  Geometry geometry;
  YeeGrid grid;
  LineGrid line_grid;
  LineBlocks line;
  FieldMaterials field;
  MaxwellBlocks maxwell;
  std::vector<CableCoupling> couplings;
  OperatorBundle bundle;
};

// Throws GeometryError / MaterialsError / GridError / CouplingError / AssemblyError.
std::unique_ptr<Model> build_model(const Scenario& sc);

// Resolves the co-located output if requested.
BoundaryConditionSpec resolved_boundary(const Scenario& sc);

VecC initial_state(const Model& model, const InitialCondition& ic, std::uint64_t seed);

// Smallest change of x making (x, u0) satisfy the algebraic boundary constraint.
VecC make_compatible(const SystemNode& node, const VecC& x, const VecC& u0);

struct ValidationReport {
  GeometryReport geometry;
  LineMaterialsReport line;
  FieldMaterialsReport field;
  AdmissibilityReport boundary;
  std::vector<std::string> messages;
  bool ok() const;
};

ValidationReport validate_scenario(const Scenario& sc);

}  // namespace fieldcable
