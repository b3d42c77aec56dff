#include "homog/grid.hpp"

#include <stdexcept>

namespace homog {

using Trip = Eigen::Triplet<double>;

StaggeredGrid::StaggeredGrid(int dim, int n, Boundary bc) : dim_(dim), n_(n), bc_(bc) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("grid dim must be 2 or 3");
  if (n < 1) throw std::invalid_argument("grid n must be positive");
  h_ = 1.0 / n;
  vol_ = 1.0;
  ncell_ = 1;
  for (int a = 0; a < dim; ++a) {
    vol_ *= h_;
    ncell_ *= n;
  }
  total_faces_ = 0;
  for (int a = 0; a < dim; ++a) {
    auto s = face_sizes(a);
    nface_[a] = s[0] * s[1] * s[2];
    face_off_[a] = total_faces_;
    total_faces_ += nface_[a];
  }
  for (int a = 0; a < dim; ++a) comp_.emplace_back(a, a);
  if (dim == 2) {
    comp_.emplace_back(0, 1);
  } else {
    comp_.emplace_back(1, 2);
    comp_.emplace_back(0, 2);
    comp_.emplace_back(0, 1);
  }
}

int StaggeredGrid::component_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  for (int k = 0; k < strain_components(); ++k)
    if (comp_[k] == std::make_pair(a, b)) return k;
  throw std::out_of_range("strain component");
}

Index3 StaggeredGrid::face_sizes(int a) const {
  Index3 s{1, 1, 1};
  for (int b = 0; b < dim_; ++b) s[b] = n_ + ((b == a && !periodic()) ? 1 : 0);
  return s;
}

Index3 StaggeredGrid::edge_sizes(int k) const {
  Index3 s{1, 1, 1};
  for (int b = 0; b < dim_; ++b) s[b] = n_;
  if (!periodic() && is_shear(k)) {
    s[comp_[k].first] += 1;
    s[comp_[k].second] += 1;
  }
  return s;
}

int StaggeredGrid::points(int k) const {
  if (!is_shear(k)) return ncell_;
  auto s = edge_sizes(k);
  return s[0] * s[1] * s[2];
}

int StaggeredGrid::lin(const Index3& sizes, Index3 ijk, bool wrap) const {
  int idx = 0;
  for (int a = dim_ - 1; a >= 0; --a) {
    int i = ijk[a];
    if (wrap) {
      i = ((i % sizes[a]) + sizes[a]) % sizes[a];
    } else if (i < 0 || i >= sizes[a]) {
      return -1;
    }
    idx = idx * sizes[a] + i;
  }
  return idx;
}

Index3 StaggeredGrid::unlin(const Index3& sizes, int idx) const {
  Index3 ijk{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    ijk[a] = idx % sizes[a];
    idx /= sizes[a];
  }
  return ijk;
}

int StaggeredGrid::cell_index(Index3 ijk) const { return lin({n_, n_, n_}, ijk, periodic()); }

Index3 StaggeredGrid::cell_coords(int c) const { return unlin({n_, n_, n_}, c); }

int StaggeredGrid::face_index(int a, Index3 ijk) const {
  int l = lin(face_sizes(a), ijk, periodic());
  return l < 0 ? -1 : face_off_[a] + l;
}

Index3 StaggeredGrid::face_coords(int f, int* axis) const {
  int a = 0;
  while (a + 1 < dim_ && f >= face_off_[a + 1]) ++a;
  if (axis) *axis = a;
  return unlin(face_sizes(a), f - face_off_[a]);
}

int StaggeredGrid::edge_index(int k, Index3 ijk) const {
  if (!is_shear(k)) return cell_index(ijk);
  return lin(edge_sizes(k), ijk, periodic());
}

Index3 StaggeredGrid::edge_coords(int k, int e) const {
  if (!is_shear(k)) return cell_coords(e);
  return unlin(edge_sizes(k), e);
}

bool StaggeredGrid::boundary_face(int f) const {
  if (periodic()) return false;
  int a = 0;
  auto ijk = face_coords(f, &a);
  return ijk[a] == 0 || ijk[a] == n_;
}

std::vector<int> StaggeredGrid::boundary_faces() const {
  std::vector<int> out;
  for (int f = 0; f < total_faces_; ++f)
    if (boundary_face(f)) out.push_back(f);
  return out;
}

std::array<double, 3> StaggeredGrid::face_position(int f) const {
  int a = 0;
  auto ijk = face_coords(f, &a);
  std::array<double, 3> x{0, 0, 0};
  for (int b = 0; b < dim_; ++b) x[b] = (ijk[b] + (b == a ? 0.0 : 0.5)) * h_;
  return x;
}

std::array<double, 3> StaggeredGrid::cell_position(int c) const {
  auto ijk = cell_coords(c);
  std::array<double, 3> x{0, 0, 0};
  for (int b = 0; b < dim_; ++b) x[b] = (ijk[b] + 0.5) * h_;
  return x;
}

std::pair<int, double> StaggeredGrid::face_ref(int a, Index3 ijk) const {
  if (periodic()) return {face_index(a, ijk), 1.0};
  double sign = 1.0;
  for (int b = 0; b < dim_; ++b) {
    if (b == a) {
      if (ijk[b] < 0 || ijk[b] > n_) return {-1, 0.0};
      continue;
    }
    if (ijk[b] == -1) {
      ijk[b] = 0;
      sign = -sign;
    } else if (ijk[b] == n_) {
      ijk[b] = n_ - 1;
      sign = -sign;
    } else if (ijk[b] < -1 || ijk[b] > n_) {
      return {-1, 0.0};
    }
  }
  return {face_index(a, ijk), sign};
}

SpMat StaggeredGrid::divergence() const {
  std::vector<Trip> t;
  t.reserve(static_cast<std::size_t>(2 * dim_ * ncell_));
  for (int c = 0; c < ncell_; ++c) {
    auto ijk = cell_coords(c);
    for (int a = 0; a < dim_; ++a) {
      auto up = ijk;
      up[a] += 1;
      t.emplace_back(c, face_index(a, up), 1.0 / h_);
      t.emplace_back(c, face_index(a, ijk), -1.0 / h_);
    }
  }
  SpMat D(ncell_, total_faces_);
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

SpMat StaggeredGrid::gradient() const {
  SpMat G = -SpMat(divergence().transpose());
  return G;
}

SpMat StaggeredGrid::velocity_gradient(int a, int b) const {
  std::vector<Trip> t;
  if (a == b) {
    for (int c = 0; c < ncell_; ++c) {
      auto ijk = cell_coords(c);
      auto up = ijk;
      up[a] += 1;
      t.emplace_back(c, face_index(a, up), 1.0 / h_);
      t.emplace_back(c, face_index(a, ijk), -1.0 / h_);
    }
    SpMat M(ncell_, total_faces_);
    M.setFromTriplets(t.begin(), t.end());
    return M;
  }
  const int k = component_index(a, b);
  const int np = points(k);
  for (int e = 0; e < np; ++e) {
    auto ijk = edge_coords(k, e);
    auto lo = ijk;
    lo[b] -= 1;
    auto [f1, s1] = face_ref(a, ijk);
    auto [f0, s0] = face_ref(a, lo);
    if (f1 >= 0) t.emplace_back(e, f1, s1 / h_);
    if (f0 >= 0) t.emplace_back(e, f0, -s0 / h_);
  }
  SpMat M(np, total_faces_);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SpMat StaggeredGrid::strain(int k) const {
  auto [a, b] = comp_[k];
  if (a == b) return velocity_gradient(a, a);
  SpMat S = 0.5 * (velocity_gradient(a, b) + velocity_gradient(b, a));
  return S;
}

SpMat StaggeredGrid::edge_to_cell(int k) const {
  if (!is_shear(k)) throw std::invalid_argument("edge_to_cell needs a shear component");
  auto [a, b] = comp_[k];
  std::vector<Trip> t;
  for (int c = 0; c < ncell_; ++c) {
    auto ijk = cell_coords(c);
    for (int da = 0; da <= 1; ++da)
      for (int db = 0; db <= 1; ++db) {
        auto e = ijk;
        e[a] += da;
        e[b] += db;
        t.emplace_back(c, edge_index(k, e), 0.25);
      }
  }
  SpMat M(ncell_, points(k));
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SpMat StaggeredGrid::face_interp(int b, int a) const {
  std::vector<Trip> t;
  for (int fl = 0; fl < nface_[a]; ++fl) {
    auto ijk = unlin(face_sizes(a), fl);
    std::vector<int> nb;
    for (int da = -1; da <= 0; ++da)
      for (int db = 0; db <= 1; ++db) {
        auto j = ijk;
        j[a] += da;
        j[b] += db;
        int g = face_index(b, j);
        if (g >= 0) nb.push_back(g - face_off_[b]);
      }
    for (int g : nb) t.emplace_back(fl, g, 1.0 / static_cast<double>(nb.size()));
  }
  SpMat M(nface_[a], nface_[b]);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SpMat StaggeredGrid::face_to_cell(int a) const {
  std::vector<Trip> t;
  for (int c = 0; c < ncell_; ++c) {
    auto ijk = cell_coords(c);
    auto up = ijk;
    up[a] += 1;
    t.emplace_back(c, face_index(a, ijk), 0.5);
    t.emplace_back(c, face_index(a, up), 0.5);
  }
  SpMat M(ncell_, total_faces_);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

Vec StaggeredGrid::point_weights(int k, const Vec& w) const {
  if (!is_shear(k)) return w;
  auto [a, b] = comp_[k];
  Vec out = Vec::Zero(points(k));
  for (int e = 0; e < points(k); ++e) {
    auto ijk = edge_coords(k, e);
    double s = 0.0;
    for (int da = -1; da <= 0; ++da)
      for (int db = -1; db <= 0; ++db) {
        auto c = ijk;
        c[a] += da;
        c[b] += db;
        int ci = periodic() ? cell_index(c) : lin({n_, n_, n_}, c, false);
        if (ci >= 0) s += w[ci];
      }
    out[e] = 0.25 * s;
  }
  return out;
}

Vec StaggeredGrid::face_average(const Vec& cv) const {
  Vec out = Vec::Zero(total_faces_);
  for (int f = 0; f < total_faces_; ++f) {
    int a = 0;
    auto ijk = face_coords(f, &a);
    auto lo = ijk;
    lo[a] -= 1;
    int c1 = periodic() ? cell_index(ijk) : lin({n_, n_, n_}, ijk, false);
    int c0 = periodic() ? cell_index(lo) : lin({n_, n_, n_}, lo, false);
    double s = 0.0;
    int cnt = 0;
    if (c1 >= 0) s += cv[c1], ++cnt;
    if (c0 >= 0) s += cv[c0], ++cnt;
    out[f] = s / cnt;
  }
  return out;
}

SpMat strain_energy(const StaggeredGrid& g, const Vec& w) {
  SpMat K(g.total_faces(), g.total_faces());
  for (int k = 0; k < g.strain_components(); ++k) {
    SpMat S = g.strain(k);
    Vec pw = g.point_weights(k, w) * (g.cell_volume() * (g.is_shear(k) ? 2.0 : 1.0));
    K += SpMat(S.transpose() * pw.asDiagonal() * S);
  }
  return K;
}

SpMat gradient_energy(const StaggeredGrid& g, const Vec& w) {
  SpMat K(g.total_faces(), g.total_faces());
  for (int a = 0; a < g.dim(); ++a)
    for (int b = 0; b < g.dim(); ++b) {
      SpMat G = g.velocity_gradient(a, b);
      Vec pw = (a == b ? w : g.point_weights(g.component_index(a, b), w)) * g.cell_volume();
      K += SpMat(G.transpose() * pw.asDiagonal() * G);
    }
  return K;
}

SpMat selector(int total, const std::vector<int>& keep) {
  std::vector<Trip> t;
  t.reserve(keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) t.emplace_back(keep[j], static_cast<int>(j), 1.0);
  SpMat P(total, static_cast<int>(keep.size()));
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

}  // namespace homog
