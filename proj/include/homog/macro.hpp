#pragma once

#include <array>
#include <functional>
#include <memory>

#include "homog/linsolve.hpp"
#include "homog/tensors.hpp"

namespace homog {

using Point = std::array<double, 3>;
using ForceFn = std::function<Point(const Point& x, double t)>;
using ScalarFn = std::function<double(const Point& x, double t)>;

// Viscous tensor used by the T2 steppers: the assembled A_f0, or
// A_f0 - (1-m) I, which keeps only the fluid-phase dissipation.
enum class ViscousTensor { Assembled, FluidOnly };

struct MacroConfig {
  int N = 16;          // macro cells per side of (0,1)^d
  double dt = 0.01;
  int steps = 10;
  ForceFn force;       // F(x, t); empty means F = 0
  ScalarFn mass_source;  // optional right-hand side of the volume balance (manufactured tests)
  double tol = 1e-10;
  SolverOptions linear;
  ViscousTensor viscous = ViscousTensor::Assembled;

  double T() const { return dt * steps; }
};

// Homogenized fields on the macro wall grid (vectors on faces, scalars at cells).
// T2: v is the fluid velocity, w = int v, w_f = int v, w_s the solid displacement.
// T3: v = dw/dt (total), w the total displacement, w_f / w_s the phase displacements.
struct MacroState {
  double t = 0.0;
  int step = 0;
  Vec v, w, w_s, w_f;
  Vec p, q, pi;
  double pressure_residual = 0.0;    // state relation q = p + nu0/p* dp/dt (and q/m = pi/(1-m) in T3)
  double continuity_residual = 0.0;  // volume balance
};

// Discrete macroscopic operators on the wall grid.
class MacroOperators {
public:
  MacroOperators(int dim, int N);

  const StaggeredGrid& grid() const { return grid_; }
  const SpMat& div() const { return D_; }
  const SpMat& grad() const { return G_; }
  // Gradient with wall-normal boundary rows removed.
  const SpMat& grad_interior() const { return Gi_; }
  const std::vector<int>& boundary() const { return boundary_; }
  const Vec& interior_mask() const { return interior_; }
  // Strain component k evaluated at cell centers (cells x faces).
  const SpMat& strain_at_cells(int k) const { return Sc_[k]; }

  // Weak form of div(A : D(v)) as a symmetric positive semidefinite matrix.
  SpMat viscous(const SymRank4Tensor& A) const;
  // Weak form of div(B s) for a symmetric matrix B and cell scalar s (faces x cells).
  SpMat stress_coupling(const Eigen::MatrixXd& B) const;
  // C : D(v) at cells (cells x faces).
  SpMat strain_contraction(const Eigen::MatrixXd& C) const;
  // Matrix acting on face vectors: (B z)_a = sum_b B_ab (z_b interpolated to a-faces).
  SpMat face_matrix(const Eigen::MatrixXd& B) const;
  // Samples F at faces (component a on a-faces).
  Vec sample(const ForceFn& f, double t) const;
  Vec sample(const ScalarFn& f, double t) const;
  // Discrete L2 norms.
  double face_norm(const Vec& u) const;
  double cell_norm(const Vec& s) const;

private:
  StaggeredGrid grid_;
  SpMat D_, G_, Gi_;
  std::vector<SpMat> Sc_;
  std::vector<int> boundary_;
  Vec interior_;
};

// One stepper per regime; the constructor factorizes the constant step matrix.
class MacroSolver {
public:
  MacroSolver(const EffectiveCoefficients& coeffs, const MacroConfig& cfg);
  ~MacroSolver();
  MacroSolver(MacroSolver&&) noexcept;
  MacroSolver& operator=(MacroSolver&&) noexcept;

  RegimeTag regime() const;
  const MacroOperators& ops() const;
  const MacroState& state() const;
  void step();
  // max |v| (T2) or |w.n| (T3) over wall-normal faces, and |w_s.n| for T2_II.
  double boundary_max() const;

  class Impl;

private:
  std::unique_ptr<Impl> impl_;
};

// Stepper entry points by regime family (T2, T3); each checks the regime of `coeffs`.
void step_T2_I(MacroSolver& solver);
void step_T2_II(MacroSolver& solver);
void step_T3(MacroSolver& solver);

}  // namespace homog
