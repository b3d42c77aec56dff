#pragma once

#include <Eigen/Sparse>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace homog {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Index3 = std::array<int, 3>;

enum class Boundary { Periodic, Wall };

// MAC layout on (0,1)^dim with n cells per side. Velocity component a lives on
// faces normal to a (face index i_a sits on the lower side of cell i_a),
// scalars at cell centers, shear strains on edges (lower corner in both axes).
// Wall grids carry the extra upper boundary face/edge layer; tangential
// components use odd reflection (no-slip) across walls.
class StaggeredGrid {
public:
  StaggeredGrid(int dim, int n, Boundary bc);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double h() const { return h_; }
  double cell_volume() const { return vol_; }
  bool periodic() const { return bc_ == Boundary::Periodic; }

  int cells() const { return ncell_; }
  int faces(int a) const { return nface_[a]; }
  int face_offset(int a) const { return face_off_[a]; }
  int total_faces() const { return total_faces_; }

  // Mandel component list: diagonals first, then shear pairs (1,2),(0,2),(0,1) in 3D, (0,1) in 2D.
  int strain_components() const { return static_cast<int>(comp_.size()); }
  std::pair<int, int> component(int k) const { return comp_[k]; }
  int component_index(int a, int b) const;
  bool is_shear(int k) const { return comp_[k].first != comp_[k].second; }
  // Number of sample points of component k (cells for diagonals, edges for shears).
  int points(int k) const;

  int cell_index(Index3 ijk) const;  // wraps when periodic
  Index3 cell_coords(int c) const;
  int face_index(int a, Index3 ijk) const;  // global index, -1 if outside (wall)
  Index3 face_coords(int f, int* axis = nullptr) const;
  int edge_index(int k, Index3 ijk) const;  // -1 if outside (wall)
  Index3 edge_coords(int k, int e) const;
  // True for wall-normal faces on the boundary.
  bool boundary_face(int f) const;
  std::vector<int> boundary_faces() const;

  // Face/cell/edge positions in (0,1)^dim.
  std::array<double, 3> face_position(int f) const;
  std::array<double, 3> cell_position(int c) const;

  // cells x faces, (u_a(i+e_a) - u_a(i))/h.
  SpMat divergence() const;
  // faces x cells, exactly -divergence()^T.
  SpMat gradient() const;
  // Strain component k (no Mandel factor): points(k) x faces.
  SpMat strain(int k) const;
  // d u_a / d x_b: cells x faces if a == b else edges(pair) x faces.
  SpMat velocity_gradient(int a, int b) const;
  // Average of the four edges of pair component k around each cell: cells x points(k).
  SpMat edge_to_cell(int k) const;
  // Average of the b-faces around each a-face: faces(a) x faces(b), local indices.
  SpMat face_interp(int b, int a) const;
  // Average of the two faces of component a around each cell: cells x total_faces.
  SpMat face_to_cell(int a) const;

  // Quadrature weight of each strain point for cell weights w (sum of the
  // adjacent existing cells' weights / 4 for edges, w itself for cells).
  Vec point_weights(int k, const Vec& cell_weight) const;
  // Mean of adjacent existing cell values on each face.
  Vec face_average(const Vec& cell_values) const;

private:
  int lin(const Index3& sizes, Index3 ijk, bool wrap) const;
  Index3 unlin(const Index3& sizes, int idx) const;
  Index3 face_sizes(int a) const;
  Index3 edge_sizes(int k) const;
  // Face value of component a at coords ijk along with the wall reflection sign.
  // Returns {-1, 0} when it contributes nothing.
  std::pair<int, double> face_ref(int a, Index3 ijk) const;

  int dim_;
  int n_;
  Boundary bc_;
  double h_;
  double vol_;
  int ncell_;
  std::array<int, 3> nface_{};
  std::array<int, 3> face_off_{};
  int total_faces_;
  std::vector<std::pair<int, int>> comp_;
};

// Quadratic-form operator sum_k c_k w_k (S_k u)^2 with Mandel doubling of
// shear terms: S^T W S scaled by the cell volume. weights: per-cell weights.
SpMat strain_energy(const StaggeredGrid& g, const Vec& cell_weight);
// sum_{a,b} (d_b u_a)^2 weighted per cell (edges: average of adjacent cells).
SpMat gradient_energy(const StaggeredGrid& g, const Vec& cell_weight);
// Selection matrix picking the listed columns: size total x list.size().
SpMat selector(int total, const std::vector<int>& keep);

}  // namespace homog
