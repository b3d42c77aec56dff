#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homog/extended_param.hpp"
#include "homog/geometry.hpp"
#include "homog/grid.hpp"
#include "homog/linsolve.hpp"

namespace homog {

struct CellSolverOptions {
  double tol = 1e-10;
  // Tikhonov shift (times cell volume) on velocity unknowns. Removes rigid
  // motions of the traction-free pore and unconstrained stencil halo values.
  double regularization = 1e-10;
  SolverOptions linear;
};

// Time-sampled d x d matrix kernel on t_k = k dt, k = 1..K.
struct KernelSample {
  std::string problem;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> values;
  std::map<std::string, double> meta;

  int steps() const { return static_cast<int>(values.size()); }
  // Value at t_k; k = 0 returns the first sample (the kernel is not resolved at t = 0).
  const Eigen::MatrixXd& at_step(int k) const;
  bool empty() const { return values.empty(); }
  static KernelSample zeros(const std::string& problem, int rows, int cols, double dt, int steps);
};

// Masks shared by the cell solvers.
Vec chi_vector(const CellGeometry& g);
std::vector<int> phase_cells(const CellGeometry& g, bool fluid);
// Faces whose two adjacent cells both lie in the phase.
std::vector<int> interior_faces(const StaggeredGrid& grid, const CellGeometry& g, bool fluid);
// <D(V)> weighted by per-cell weights (full symmetric d x d matrix).
Eigen::MatrixXd mean_strain(const StaggeredGrid& grid, const Vec& cell_weight, const Vec& V);
// Mean of each face component over the listed faces (sum times cell volume).
Eigen::VectorXd mean_faces(const StaggeredGrid& grid, const Vec& V, const std::vector<int>& faces);
// Mean of each face component over all faces.
Eigen::VectorXd mean_faces(const StaggeredGrid& grid, const Vec& V);

enum class StokesForcing { IJ, PI, DIV };

struct StokesRhs {
  StokesForcing kind = StokesForcing::IJ;
  int i = 0;
  int j = 0;
  static StokesRhs IJ(int i, int j) { return {StokesForcing::IJ, std::min(i, j), std::max(i, j)}; }
  static StokesRhs PI() { return {StokesForcing::PI, 0, 0}; }
  static StokesRhs DIV() { return {StokesForcing::DIV, 0, 0}; }
  std::string name() const;
};

struct StokesCellSolution {
  StokesRhs rhs;
  Vec V;  // faces
  Vec Q;  // cells, zero in the solid; the pressure inside the problem's own PDE
  double residual_momentum = 0.0;
  double residual_mass = 0.0;
  double normalization_check = 0.0;
};

// Steady traction-free Stokes-type cell problems in the fluid part. One
// factorization serves every right-hand side.
class StokesCellSolver {
public:
  StokesCellSolver(const CellGeometry& cell, double mu0, ExtendedParam nu0, ExtendedParam p_star,
                   const CellSolverOptions& opt = {});
  StokesCellSolution solve(const StokesRhs& rhs) const;

  const StaggeredGrid& grid() const { return grid_; }
  const Vec& chi() const { return chi_; }
  // Physical bilinear form a(V1, V2) + sgn(1/p*) nu0/mu0 <chi div V1 div V2>.
  double energy(const Vec& V1, const Vec& V2) const;

private:
  Vec load(const StokesRhs& rhs) const;
  void normalize(Vec& V) const;

  const CellGeometry& cell_;
  StaggeredGrid grid_;
  double mu0_;
  ExtendedParam nu0_;
  ExtendedParam p_star_;
  CellSolverOptions opt_;
  Vec chi_;
  std::vector<int> fluid_cells_;
  SpMat D_;
  SpMat K_;  // physical operator without the Tikhonov shift
  SpMat B_;  // fluid-cell rows of the weighted divergence (incompressible case)
  std::vector<char> participating_;
  std::vector<std::vector<int>> gauges_;
  std::optional<LinearSolver> solver_;
};

StokesCellSolution solve_stokes_cell(const CellGeometry& cell, const StokesRhs& rhs, double mu0, ExtendedParam nu0,
                                     ExtendedParam p_star, const CellSolverOptions& opt = {});

struct MemoryCellSolution {
  bool zero = false;          // exact zero object (p* = inf)
  std::vector<double> times;  // t_0 = 0 .. t_K
  std::vector<Vec> V, Q, P;   // per time; empty when zero
  KernelSample mean_strain;   // <D(V2)>_{Yf}(t_k), k >= 1
  KernelSample mean_div;      // 1 x 1, <div V2>(t_k)
};

// Quasi-static memory problem, backward Euler in time from P(0) = p*.
MemoryCellSolution solve_stokes_memory_cell(const CellGeometry& cell, double mu0, ExtendedParam nu0,
                                            ExtendedParam p_star, double dt, int steps,
                                            const CellSolverOptions& opt = {}, bool keep_fields = true);

struct NeumannSolution {
  bool fluid_phase = true;
  std::vector<Vec> R;             // per i, cell values (zero mean on the phase)
  std::vector<Vec> grad_R;        // per i, face values on interior phase faces
  Eigen::MatrixXd mean_grad;      // column i: <grad R_i> over the phase
  Eigen::MatrixXd gram;           // <(e_i - grad R_i).(e_j - grad R_j)>
  Eigen::VectorXd face_fraction;  // <e_i> over interior phase faces
  double compatibility = 0.0;     // max_i |sum of boundary data|
  double residual = 0.0;
};

NeumannSolution solve_neumann_laplace(const CellGeometry& cell, bool fluid_phase, const CellSolverOptions& opt = {});

}  // namespace homog
