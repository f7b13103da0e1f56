#pragma once

#include <random>

#include "fieldcable/assembly.hpp"
#include "fieldcable/scenario.hpp"

namespace fctest {

using namespace fieldcable;

// One straight tube along z in an axis-aligned box.
struct TubeSetup {
  Vec3 lo = Vec3::Zero(), hi = Vec3::Ones();
  std::array<int, 3> cells{8, 8, 8};
  Vec3 center = Vec3(0.5, 0.5, 0.0);
  double z0 = 0.25, z1 = 0.75, radius = 0.25;
  double collar = 0.25;
  int k = 1, line_cells = 16, n_theta = 16;
  bool lossy = false;
  double eps = 1.0, mu = 1.0;
};

Scenario tube_scenario(const TubeSetup& s);

// Mildly coupled symmetric positive definite k x k matrix.
MatC spd(int k, double diag, double off);

// Random complex vector with unit-variance entries.
VecC random_vector(int n, std::mt19937_64& rng, bool complex_entries = true);

// W_B = [I, 0] (currents vanish), W_B = [0, I] (voltages vanish) as 2k x 4k.
MatC current_zero(int k);
MatC voltage_zero(int k);

double rel_diff(double a, double b);

}  // namespace fctest
