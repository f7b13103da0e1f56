#include "fieldcable/maxwell.hpp"

#include <cmath>
#include <sstream>

namespace fieldcable {

FieldMaterials FieldMaterials::uniform(std::size_t cells, const Vec3& eps, const Vec3& mu, const Vec3& sigma) {
  FieldMaterials m;
  m.eps.assign(cells, eps);
  m.mu.assign(cells, mu);
  m.sigma.assign(cells, sigma);
  return m;
}

FieldMaterialsReport validate_field_materials(const FieldMaterials& m, double floor) {
  FieldMaterialsReport rep;
  if (m.eps.size() != m.mu.size() || m.eps.size() != m.sigma.size()) {
    rep.ok = false;
    rep.messages.push_back("field materials: per-cell arrays differ in length");
    return rep;
  }
  double emin = std::numeric_limits<double>::infinity(), mmin = emin, smin = emin;
  for (std::size_t c = 0; c < m.eps.size(); ++c) {
    emin = std::min(emin, m.eps[c].minCoeff());
    mmin = std::min(mmin, m.mu[c].minCoeff());
    smin = std::min(smin, m.sigma[c].minCoeff());
  }
  rep.eps_min = emin;
  rep.mu_min = mmin;
  rep.sigma_min = smin;
  if (!(emin > floor)) rep.messages.push_back("field materials: eps must be positive definite");
  if (!(mmin > floor)) rep.messages.push_back("field materials: mu must be positive definite");
  if (!(smin >= -1e-12)) rep.messages.push_back("field materials: sigma must be positive semidefinite");
  rep.ok = rep.messages.empty();
  return rep;
}

namespace {

int wrap(int i, int n) { return ((i % n) + n) % n; }

std::array<int, 3> shifted(std::array<int, 3> idx, int axis, int d) {
  idx[axis] += d;
  return idx;
}

}  // namespace

Vec3 YeeGrid::edge_stagger(int axis) {
  Vec3 s = Vec3::Zero();
  s(axis) = 0.5;
  return s;
}

Vec3 YeeGrid::face_stagger(int axis) {
  Vec3 s = Vec3::Constant(0.5);
  s(axis) = 0.0;
  return s;
}

Vec3 YeeGrid::cell_center(int i, int j, int k) const {
  return lo_ + Vec3((i + 0.5) * h_(0), (j + 0.5) * h_(1), (k + 0.5) * h_(2));
}

Vec3 YeeGrid::edge_midpoint(int axis, const std::array<int, 3>& idx) const {
  const Vec3 s = edge_stagger(axis);
  Vec3 p;
  for (int d = 0; d < 3; ++d) p(d) = lo_(d) + (idx[d] + s(d)) * h_(d);
  return p;
}

Vec3 YeeGrid::face_center(int axis, const std::array<int, 3>& idx) const {
  const Vec3 s = face_stagger(axis);
  Vec3 p;
  for (int d = 0; d < 3; ++d) p(d) = lo_(d) + (idx[d] + s(d)) * h_(d);
  return p;
}

int YeeGrid::edge_raw(int axis, std::array<int, 3> idx) const {
  std::size_t lin = 0, stride = 1;
  for (int d = 0; d < 3; ++d) {
    const int dim = periodic_ ? n_[d] : n_[d] + (d != axis ? 1 : 0);
    if (periodic_) idx[d] = wrap(idx[d], n_[d]);
    if (idx[d] < 0 || idx[d] >= dim) return -1;
    lin += stride * idx[d];
    stride *= dim;
  }
  return static_cast<int>(edge_offset_[axis] + lin);
}

int YeeGrid::face_raw(int axis, std::array<int, 3> idx) const {
  std::size_t lin = 0, stride = 1;
  for (int d = 0; d < 3; ++d) {
    const int dim = periodic_ ? n_[d] : n_[d] + (d == axis ? 1 : 0);
    if (periodic_) idx[d] = wrap(idx[d], n_[d]);
    if (idx[d] < 0 || idx[d] >= dim) return -1;
    lin += stride * idx[d];
    stride *= dim;
  }
  return static_cast<int>(face_offset_[axis] + lin);
}

int YeeGrid::edge_dof(int axis, const std::array<int, 3>& idx) const {
  const int r = edge_raw(axis, idx);
  return r < 0 ? -1 : edge_map_[r];
}

int YeeGrid::face_dof(int axis, const std::array<int, 3>& idx) const {
  const int r = face_raw(axis, idx);
  return r < 0 ? -1 : face_map_[r];
}

double YeeGrid::excluded_volume_fraction() const {
  int excluded = 0;
  for (int t : cell_tag_)
    if (t != kField) ++excluded;
  return static_cast<double>(excluded) / cell_tag_.size();
}

void YeeGrid::index_entities(const Geometry* geometry) {
  edge_offset_[0] = face_offset_[0] = 0;
  for (int a = 0; a < 3; ++a) {
    std::size_t ne = 1, nf = 1;
    for (int d = 0; d < 3; ++d) {
      ne *= periodic_ ? n_[d] : n_[d] + (d != a ? 1 : 0);
      nf *= periodic_ ? n_[d] : n_[d] + (d == a ? 1 : 0);
    }
    edge_offset_[a + 1] = edge_offset_[a] + ne;
    face_offset_[a + 1] = face_offset_[a] + nf;
  }
  edge_map_.assign(edge_offset_[3], -1);
  face_map_.assign(face_offset_[3], -1);

  // -2 marks out-of-box neighbours.
  auto tag = [&](std::array<int, 3> c) {
    for (int d = 0; d < 3; ++d) {
      if (periodic_) c[d] = wrap(c[d], n_[d]);
      if (c[d] < 0 || c[d] >= n_[d]) return -2;
    }
    return cell_tag(c[0], c[1], c[2]);
  };

  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    std::array<int, 3> dim{};
    for (int d = 0; d < 3; ++d) dim[d] = periodic_ ? n_[d] : n_[d] + (d != a ? 1 : 0);
    std::array<int, 3> idx{};
    for (idx[2] = 0; idx[2] < dim[2]; ++idx[2])
      for (idx[1] = 0; idx[1] < dim[1]; ++idx[1])
        for (idx[0] = 0; idx[0] < dim[0]; ++idx[0]) {
          int n_field = 0, n_tube = 0, n_out = 0, tube_id = -1;
          for (int db = -1; db <= 0; ++db)
            for (int dc = -1; dc <= 0; ++dc) {
              std::array<int, 3> cell = idx;
              cell[b] += db;
              cell[c] += dc;
              const int t = tag(cell);
              if (t == -2)
                ++n_out;
              else if (t == kField)
                ++n_field;
              else {
                ++n_tube;
                tube_id = t;
              }
            }
          const int raw = edge_raw(a, idx);
          if (n_out == 0 && n_tube == 0) {
            edge_map_[raw] = static_cast<int>(edges_.size());
            edges_.push_back({a, idx});
          } else if (n_tube > 0 && n_field > 0 && geometry) {
            // Wall edge: cap if nearer to an end disk than to the lateral surface.
            const Vec3 p = edge_midpoint(a, idx);
            const CableCurve& cab = geometry->cable(tube_id);
            const double reach = 1.0 + 4.0 * h_max() / cab.radius();
            const auto cc = geometry->tube_coords(tube_id, p, reach);
            bool cap = true;
            if (cc) {
              const double l = cab.length();
              const double d_end = std::min(std::abs(cc->eta) * l, std::abs(1.0 - cc->eta) * l);
              const double d_lat = std::abs(cc->s) * cab.radius();
              cap = cc->eta <= 0.0 || cc->eta >= 1.0 || d_end < d_lat;
            }
            if (cap) {
              caps_.push_back({a, idx});
            } else {
              lateral_.push_back({a, idx});
              lateral_cable_.push_back(tube_id);
            }
          }
        }
  }

  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> dim{};
    for (int d = 0; d < 3; ++d) dim[d] = periodic_ ? n_[d] : n_[d] + (d == a ? 1 : 0);
    std::array<int, 3> idx{};
    for (idx[2] = 0; idx[2] < dim[2]; ++idx[2])
      for (idx[1] = 0; idx[1] < dim[1]; ++idx[1])
        for (idx[0] = 0; idx[0] < dim[0]; ++idx[0]) {
          const int t0 = tag(shifted(idx, a, -1));
          const int t1 = tag(idx);
          if (t0 == kField && t1 == kField) {
            face_map_[face_raw(a, idx)] = static_cast<int>(faces_.size());
            faces_.push_back({a, idx});
          }
        }
  }
}

YeeGrid YeeGrid::build(const Geometry& geometry, const std::array<int, 3>& n) {
  for (int d = 0; d < 3; ++d)
    if (n[d] < 2) throw GridError("grid needs at least two cells per axis");
  YeeGrid g;
  g.n_ = n;
  g.lo_ = geometry.box().lo;
  const Vec3 ext = geometry.box().extent();
  for (int d = 0; d < 3; ++d) g.h_(d) = ext(d) / n[d];
  for (std::size_t i = 0; i < geometry.cable_count(); ++i) {
    if (2.0 * geometry.cable(i).radius() < 4.0 * g.h_max()) {
      std::ostringstream os;
      os << "grid too coarse: cable " << i << " diameter " << 2.0 * geometry.cable(i).radius()
         << " spans fewer than 4 cells of size " << g.h_max();
      throw GridError(os.str());
    }
  }
  g.cell_tag_.assign(g.cell_count(), kField);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        const Region r = geometry.classify(g.cell_center(i, j, k));
        if (r.kind == Region::Kind::inside_tube) g.cell_tag_[g.cell_index(i, j, k)] = r.cable;
      }
  g.index_entities(&geometry);
  return g;
}

YeeGrid YeeGrid::periodic(const std::array<int, 3>& n, const Vec3& h) {
  YeeGrid g;
  g.n_ = n;
  g.h_ = h;
  g.periodic_ = true;
  g.cell_tag_.assign(g.cell_count(), kField);
  g.index_entities(nullptr);
  return g;
}

YeeGrid build_grid(const Geometry& geometry, const std::array<int, 3>& n) {
  return YeeGrid::build(geometry, n);
}

MaxwellBlocks assemble_curls(const YeeGrid& grid, const FieldMaterials& m) {
  if (m.eps.size() != static_cast<std::size_t>(grid.cell_count()))
    throw MaterialsError("field materials do not match the grid cell count");
  const FieldMaterialsReport rep = validate_field_materials(m);
  if (!rep.ok) {
    std::string msg = "invalid field materials:";
    for (const auto& s : rep.messages) msg += " " + s;
    throw MaterialsError(msg);
  }
  const auto& n = grid.dims();
  const Vec3& h = grid.spacing();
  const int ne = grid.edge_count(), nf = grid.face_count();
  const int nl = static_cast<int>(grid.lateral_edges().size());

  std::vector<int> lat_index(grid.raw_edge_total(), -1);
  for (int q = 0; q < nl; ++q) {
    const GridEntity& e = grid.lateral_edges()[q];
    lat_index[grid.edge_raw(e.axis, e.idx)] = q;
  }

  std::vector<TripR> tc, tl;
  for (int f = 0; f < nf; ++f) {
    const GridEntity& face = grid.faces()[f];
    const int a = face.axis, b = (a + 1) % 3, c = (a + 2) % 3;
    auto add = [&](int axis, const std::array<int, 3>& idx, double v) {
      const int raw = grid.edge_raw(axis, idx);
      if (raw < 0) return;
      const int dof = grid.edge_dof(axis, idx);
      if (dof >= 0)
        tc.emplace_back(f, dof, v);
      else if (lat_index[raw] >= 0)
        tl.emplace_back(f, lat_index[raw], v);
    };
    add(c, shifted(face.idx, b, 1), 1.0 / h(b));
    add(c, face.idx, -1.0 / h(b));
    add(b, shifted(face.idx, c, 1), -1.0 / h(c));
    add(b, face.idx, 1.0 / h(c));
  }
  MaxwellBlocks mb;
  mb.C_E.resize(nf, ne);
  mb.C_E.setFromTriplets(tc.begin(), tc.end());
  mb.C_E_lat.resize(nf, nl);
  mb.C_E_lat.setFromTriplets(tl.begin(), tl.end());
  const double vol = grid.cell_volume();
  mb.mass_E = VecR::Constant(ne, vol);
  mb.mass_H = VecR::Constant(nf, vol);
  SpMatR cet = mb.C_E.transpose();
  mb.C_H = mb.mass_E.cwiseInverse().asDiagonal() * cet * mb.mass_H.asDiagonal();

  auto cell_of = [&](std::array<int, 3> c) {
    for (int d = 0; d < 3; ++d) c[d] = grid.is_periodic() ? wrap(c[d], n[d]) : c[d];
    return grid.cell_index(c[0], c[1], c[2]);
  };
  mb.H_D.resize(ne);
  mb.sigma_E.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const GridEntity& ed = grid.edges()[e];
    const int a = ed.axis, b = (a + 1) % 3, c = (a + 2) % 3;
    double inv_eps = 0.0, sig = 0.0;
    for (int db = -1; db <= 0; ++db)
      for (int dc = -1; dc <= 0; ++dc) {
        std::array<int, 3> cell = ed.idx;
        cell[b] += db;
        cell[c] += dc;
        const int ci = cell_of(cell);
        inv_eps += 0.25 / m.eps[ci](a);
        sig += 0.25 * m.sigma[ci](a);
      }
    mb.H_D(e) = inv_eps;
    mb.sigma_E(e) = sig;
  }
  mb.H_B.resize(nf);
  for (int f = 0; f < nf; ++f) {
    const GridEntity& fa = grid.faces()[f];
    const int a = fa.axis;
    const double mu = 0.5 * (m.mu[cell_of(shifted(fa.idx, a, -1))](a) + m.mu[cell_of(fa.idx)](a));
    mb.H_B(f) = 1.0 / mu;
  }
  return mb;
}

SpMatR face_divergence(const YeeGrid& grid) {
  const auto& n = grid.dims();
  const Vec3& h = grid.spacing();
  std::vector<TripR> t;
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        const int row = grid.cell_index(i, j, k);
        const std::array<int, 3> idx{i, j, k};
        for (int a = 0; a < 3; ++a) {
          const int lo = grid.face_dof(a, idx);
          const int hi = grid.face_dof(a, shifted(idx, a, 1));
          if (hi >= 0) t.emplace_back(row, hi, 1.0 / h(a));
          if (lo >= 0) t.emplace_back(row, lo, -1.0 / h(a));
        }
      }
  SpMatR d(grid.cell_count(), grid.face_count());
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

std::vector<std::pair<int, double>> interpolation_stencil(const YeeGrid& grid, bool on_faces, int axis,
                                                          const Vec3& p) {
  const Vec3 s = on_faces ? YeeGrid::face_stagger(axis) : YeeGrid::edge_stagger(axis);
  const Vec3& h = grid.spacing();
  const Vec3 rel = ((p - grid.origin()).array() / h.array()).matrix() - s;
  std::array<int, 3> base{};
  for (int d = 0; d < 3; ++d) base[d] = static_cast<int>(std::floor(rel(d)));
  std::vector<int> dof;
  std::vector<Vec3> off;
  std::array<int, 3> idx{};
  for (int dk = -2; dk <= 3; ++dk)
    for (int dj = -2; dj <= 3; ++dj)
      for (int di = -2; di <= 3; ++di) {
        idx = {base[0] + di, base[1] + dj, base[2] + dk};
        const int q = on_faces ? grid.face_dof(axis, idx) : grid.edge_dof(axis, idx);
        if (q < 0) continue;
        Vec3 x;
        for (int d = 0; d < 3; ++d) x(d) = idx[d] - rel(d);
        dof.push_back(q);
        off.push_back(x);
      }
  const int m = static_cast<int>(dof.size());
  if (m < 4) {
    std::ostringstream os;
    os << "unresolved surface trace near (" << p.transpose() << "): only " << m << " unknowns nearby";
    throw GridError(os.str());
  }
  VecR w(m);
  for (int r = 0; r < m; ++r) w(r) = std::exp(-off[r].squaredNorm() / 2.25);
  // Axes without weighted spread (all neighbours in one grid plane, e.g. next to a wall)
  // are dropped from the affine basis; the fit then stays exact for constants.
  std::vector<int> axes;
  const double wsum = w.sum();
  for (int d = 0; d < 3; ++d) {
    double mean = 0.0, var = 0.0;
    for (int r = 0; r < m; ++r) mean += w(r) * off[r](d);
    mean /= wsum;
    for (int r = 0; r < m; ++r) var += w(r) * (off[r](d) - mean) * (off[r](d) - mean);
    if (var / wsum > 1e-8) axes.push_back(d);
  }
  const int nb = 1 + static_cast<int>(axes.size());
  MatR a(m, nb);
  for (int r = 0; r < m; ++r) {
    a(r, 0) = 1.0;
    for (int b = 1; b < nb; ++b) a(r, b) = off[r](axes[b - 1]);
  }
  const MatR n = a.transpose() * w.asDiagonal() * a;
  Eigen::SelfAdjointEigenSolver<MatR> es(n, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues()(0) > 1e-10 * es.eigenvalues()(nb - 1))) {
    std::ostringstream os;
    os << "unresolved surface trace near (" << p.transpose() << "): affine fit is rank deficient";
    throw GridError(os.str());
  }
  const VecR c = n.ldlt().solve(VecR::Unit(nb, 0));
  std::vector<std::pair<int, double>> out;
  out.reserve(m);
  for (int r = 0; r < m; ++r) out.emplace_back(dof[r], w(r) * a.row(r).dot(c));
  return out;
}

SurfaceTrace surface_trace(const YeeGrid& grid, const TubeChart& chart) {
  const double r = chart.curve().radius();
  if (r < 2.0 * grid.h_max()) {
    std::ostringstream os;
    os << "unresolved collar: radius " << r << " below two cells of size " << grid.h_max();
    throw GridError(os.str());
  }
  const int np = chart.size();
  std::vector<TripR> tn, tt;
  for (int q = 0; q < np; ++q) {
    const Vec3& p = chart.points()[q];
    const Vec3& nu = chart.normals()[q];
    const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - nu * nu.transpose();
    // cross(nu, .) as a matrix
    Eigen::Matrix3d cross;
    cross << 0.0, -nu(2), nu(1), nu(2), 0.0, -nu(0), -nu(1), nu(0), 0.0;
    for (int c = 0; c < 3; ++c) {
      for (const auto& [dof, w] : interpolation_stencil(grid, true, c, p))
        for (int row = 0; row < 3; ++row)
          if (cross(row, c) != 0.0) tn.emplace_back(3 * q + row, dof, cross(row, c) * w);
      for (const auto& [dof, w] : interpolation_stencil(grid, false, c, p))
        for (int row = 0; row < 3; ++row)
          if (proj(row, c) != 0.0) tt.emplace_back(3 * q + row, dof, proj(row, c) * w);
    }
  }
  SurfaceTrace st;
  st.R_nu.resize(3 * np, grid.face_count());
  st.R_nu.setFromTriplets(tn.begin(), tn.end());
  st.R_tan.resize(3 * np, grid.edge_count());
  st.R_tan.setFromTriplets(tt.begin(), tt.end());
  return st;
}

}  // namespace fieldcable
