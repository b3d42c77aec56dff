#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "homog/cell_problems.hpp"
#include "homog/kernel_problems.hpp"
#include "homog/params.hpp"

namespace homog {

// Symmetric-pair index packing (Mandel): diagonal pairs first, then the shear
// pairs in the order of StaggeredGrid::component, shear rows scaled by sqrt(2)
// so the packed matrix represents the tensor as an operator on symmetric matrices.
int packed_size(int dim);
std::pair<int, int> packed_pair(int dim, int k);
int packed_index(int dim, int i, int j);
double mandel_factor(int dim, int k);
Eigen::VectorXd pack(const Eigen::MatrixXd& sym);
Eigen::MatrixXd unpack(int dim, const Eigen::VectorXd& packed);

class SymRank4Tensor {
public:
  SymRank4Tensor() = default;
  SymRank4Tensor(int dim, Eigen::MatrixXd packed);
  static SymRank4Tensor identity(int dim);

  int dim() const { return dim_; }
  const Eigen::MatrixXd& packed() const { return packed_; }
  double operator()(int i, int j, int k, int l) const;
  // (A : D)_ij = sum_kl A_ijkl D_kl
  Eigen::MatrixXd contract(const Eigen::MatrixXd& D) const;
  double asymmetry() const;  // ||A - A^T||_inf / ||A||_inf
  SymRank4Tensor symmetrized() const;

private:
  int dim_ = 0;
  Eigen::MatrixXd packed_;
};

struct SpdReport {
  std::string name;
  Eigen::VectorXd eigenvalues;  // of the symmetric part, ascending
  double asymmetry = 0.0;       // ||X - X^T||_inf / ||X||_inf
  double symmetry_tol = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  bool symmetric = false;
  bool positive = false;
  bool ok() const { return symmetric && positive; }
};

// Relative definiteness threshold: min eig > kSpdRelTol * max(|max eig|, 1).
inline constexpr double kSpdRelTol = 1e-8;
SpdReport validate_spd(const std::string& name, const Eigen::MatrixXd& X, double symmetry_tol);

// Macroscopic pressure closure <Q>_Y = strain : D(v) + pi_coeff pi + div_coeff div v.
struct PressureClosure {
  Eigen::MatrixXd strain;  // mu0 <Q^(ij)>_Y, symmetric
  double pi_coeff = 0.0;   // <Q^(0)>_Y
  double div_coeff = 0.0;  // <Q^(1)>_Y
};

struct EffectiveCoefficients {
  int dim = 2;
  double m = 0.0;
  double rho_hat = 0.0;
  ScalingParams params;
  RegimeTag regime = RegimeTag::T2_I;
  std::string geometry_hash;

  std::optional<SymRank4Tensor> A_f0;  // symmetrized
  double A_f0_asymmetry = 0.0;         // of the raw assembled tensor
  std::optional<Eigen::MatrixXd> C_f0, B_f0, B_f1_const, B_s2, B_f2_matrix;
  std::optional<double> a_f0, a_f1;
  std::optional<KernelSample> B_f2_kernel, a_f2_kernel, B_s1_kernel, K_f_kernel, B_pi_kernel, F_kernel;
  std::optional<PressureClosure> q_closure;
  std::vector<SpdReport> validation;
  // Face-average variants of the Neumann-derived matrices, reported alongside.
  std::optional<Eigen::MatrixXd> B_s2_face_average, B_f2_face_average;

  bool valid() const;
};

// A^f0 = sum J(x)J + sum <D(V^(ij))>_Yf (x) J^{ij}; solutions indexed by packed component.
SymRank4Tensor assemble_A_f0(const StaggeredGrid& grid, const Vec& chi, const std::vector<StokesCellSolution>& ij);

struct PressureCoeffs {
  Eigen::MatrixXd B_f0, B_f1_const, C_f0;
  double a_f0 = 0.0, a_f1 = 0.0;
  KernelSample B_f2_kernel, a_f2_kernel;
  PressureClosure closure;
};

// pi and div may be absent only when the caller accepts missing coefficients;
// a missing required solution throws MissingSolution.
PressureCoeffs assemble_pressure_coeffs(const StaggeredGrid& grid, const Vec& chi, double mu0,
                                        const std::vector<StokesCellSolution>& ij, const StokesCellSolution* pi,
                                        const StokesCellSolution* div, const MemoryCellSolution* memory);

KernelSample assemble_B_s1(const KernelRun* solid);
// (1-m) I - <(e_i - grad R_i).(e_j - grad R_j)>_Ys
Eigen::MatrixXd assemble_B_s2(const NeumannSolution* solid, double m);
struct FluidMatrices {
  KernelSample K_f;
  Eigen::MatrixXd B_f2;
};
FluidMatrices assemble_fluid_matrices(const KernelRun* fluid, const NeumannSolution* neumann, double m);
struct TwoPhaseKernels {
  KernelSample B_pi;
  KernelSample F_kernel;  // <dW^F_i/dt>_Y (x) e_i; f = F_kernel * F in time
};
TwoPhaseKernels assemble_B_pi_and_forcing(const KernelRun* pi, const KernelRun* f);

// Fills the SPD/symmetry reports for every populated structural quantity.
void validate_coefficients(EffectiveCoefficients& c);

}  // namespace homog
