#include "homog/tensors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "homog/errors.hpp"

namespace homog {

namespace {

const std::vector<std::pair<int, int>>& pairs(int dim) {
  static const std::vector<std::pair<int, int>> p2{{0, 0}, {1, 1}, {0, 1}};
  static const std::vector<std::pair<int, int>> p3{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  if (dim == 2) return p2;
  if (dim == 3) return p3;
  throw ConstraintViolation("dimension must be 2 or 3");
}

double rel_asymmetry(const Eigen::MatrixXd& X) {
  const double nrm = X.cwiseAbs().rowwise().sum().maxCoeff();
  const double asym = (X - X.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
  return nrm > 0.0 ? asym / nrm : asym;
}

double phase_integral(const StaggeredGrid& grid, const Vec& w, const Vec& values) {
  return w.dot(values) * grid.cell_volume();
}

}  // namespace

int packed_size(int dim) { return static_cast<int>(pairs(dim).size()); }
std::pair<int, int> packed_pair(int dim, int k) { return pairs(dim).at(k); }
int packed_index(int dim, int i, int j) {
  if (i > j) std::swap(i, j);
  const auto& p = pairs(dim);
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k].first == i && p[k].second == j) return static_cast<int>(k);
  throw ConstraintViolation("index pair out of range");
}
double mandel_factor(int dim, int k) {
  auto [i, j] = packed_pair(dim, k);
  return i == j ? 1.0 : std::sqrt(2.0);
}

Eigen::VectorXd pack(const Eigen::MatrixXd& sym) {
  const int d = static_cast<int>(sym.rows());
  Eigen::VectorXd v(packed_size(d));
  for (int k = 0; k < packed_size(d); ++k) {
    auto [i, j] = packed_pair(d, k);
    v[k] = mandel_factor(d, k) * 0.5 * (sym(i, j) + sym(j, i));
  }
  return v;
}

Eigen::MatrixXd unpack(int dim, const Eigen::VectorXd& packed) {
  Eigen::MatrixXd S(dim, dim);
  for (int k = 0; k < packed_size(dim); ++k) {
    auto [i, j] = packed_pair(dim, k);
    S(i, j) = S(j, i) = packed[k] / mandel_factor(dim, k);
  }
  return S;
}

SymRank4Tensor::SymRank4Tensor(int dim, Eigen::MatrixXd packed) : dim_(dim), packed_(std::move(packed)) {
  if (packed_.rows() != packed_size(dim) || packed_.cols() != packed_size(dim))
    throw SchemaError("packed tensor has the wrong size for dimension " + std::to_string(dim));
}

SymRank4Tensor SymRank4Tensor::identity(int dim) {
  return SymRank4Tensor(dim, Eigen::MatrixXd::Identity(packed_size(dim), packed_size(dim)));
}

double SymRank4Tensor::operator()(int i, int j, int k, int l) const {
  const int M = packed_index(dim_, i, j);
  const int N = packed_index(dim_, k, l);
  return packed_(M, N) / (mandel_factor(dim_, M) * mandel_factor(dim_, N));
}

Eigen::MatrixXd SymRank4Tensor::contract(const Eigen::MatrixXd& D) const { return unpack(dim_, packed_ * pack(D)); }

double SymRank4Tensor::asymmetry() const { return rel_asymmetry(packed_); }

SymRank4Tensor SymRank4Tensor::symmetrized() const {
  return SymRank4Tensor(dim_, 0.5 * (packed_ + packed_.transpose()));
}

SpdReport validate_spd(const std::string& name, const Eigen::MatrixXd& X, double symmetry_tol) {
  SpdReport r;
  r.name = name;
  r.symmetry_tol = symmetry_tol;
  r.asymmetry = rel_asymmetry(X);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (X + X.transpose()));
  r.eigenvalues = es.eigenvalues();
  r.min_eig = r.eigenvalues.minCoeff();
  r.max_eig = r.eigenvalues.maxCoeff();
  r.symmetric = r.asymmetry <= symmetry_tol;
  r.positive = r.min_eig > kSpdRelTol * std::max(std::abs(r.max_eig), 1.0);
  return r;
}

bool EffectiveCoefficients::valid() const {
  for (const auto& r : validation)
    if (!r.ok()) return false;
  return true;
}

SymRank4Tensor assemble_A_f0(const StaggeredGrid& grid, const Vec& chi, const std::vector<StokesCellSolution>& ij) {
  const int d = grid.dim();
  const int P = packed_size(d);
  std::vector<const StokesCellSolution*> by_index(P, nullptr);
  for (const auto& s : ij)
    if (s.rhs.kind == StokesForcing::IJ) by_index[packed_index(d, s.rhs.i, s.rhs.j)] = &s;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(P, P);
  for (int N = 0; N < P; ++N) {
    if (!by_index[N]) {
      auto [i, j] = packed_pair(d, N);
      throw MissingSolution("IJ(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") solution missing");
    }
    A.col(N) += mandel_factor(d, N) * pack(mean_strain(grid, chi, by_index[N]->V));
  }
  return SymRank4Tensor(d, A);
}

PressureCoeffs assemble_pressure_coeffs(const StaggeredGrid& grid, const Vec& chi, double mu0,
                                        const std::vector<StokesCellSolution>& ij, const StokesCellSolution* pi,
                                        const StokesCellSolution* div, const MemoryCellSolution* memory) {
  if (!pi) throw MissingSolution("PI solution missing");
  if (!div) throw MissingSolution("DIV solution missing");
  if (!memory) throw MissingSolution("MEMORY solution missing");
  const int d = grid.dim();
  const SpMat D = grid.divergence();
  const Vec ones = Vec::Ones(grid.cells());
  PressureCoeffs c;
  c.B_f0 = mu0 * mean_strain(grid, chi, pi->V);
  c.B_f1_const = mu0 * mean_strain(grid, chi, div->V);
  c.a_f0 = phase_integral(grid, chi, D * pi->V);
  c.a_f1 = phase_integral(grid, chi, D * div->V);
  c.C_f0 = Eigen::MatrixXd::Zero(d, d);
  c.closure.strain = Eigen::MatrixXd::Zero(d, d);
  std::vector<bool> seen(packed_size(d), false);
  for (const auto& s : ij) {
    if (s.rhs.kind != StokesForcing::IJ) continue;
    seen[packed_index(d, s.rhs.i, s.rhs.j)] = true;
    const double cdiv = phase_integral(grid, chi, D * s.V);
    c.C_f0(s.rhs.i, s.rhs.j) = c.C_f0(s.rhs.j, s.rhs.i) = cdiv;
    const double q = mu0 * phase_integral(grid, ones, s.Q);
    c.closure.strain(s.rhs.i, s.rhs.j) = c.closure.strain(s.rhs.j, s.rhs.i) = q;
  }
  for (bool b : seen)
    if (!b) throw MissingSolution("IJ solution missing for pressure coefficients");
  c.closure.pi_coeff = phase_integral(grid, ones, pi->Q);
  c.closure.div_coeff = phase_integral(grid, ones, div->Q);
  c.B_f2_kernel = memory->mean_strain;
  for (auto& v : c.B_f2_kernel.values) v *= mu0;
  c.B_f2_kernel.problem = "B_f2";
  c.a_f2_kernel = memory->mean_div;
  c.a_f2_kernel.problem = "a_f2";
  return c;
}

KernelSample assemble_B_s1(const KernelRun* solid) {
  if (!solid || solid->sample.empty()) throw MissingSolution("solid kernel history missing");
  KernelSample k = solid->sample;
  k.problem = "B_s1";
  return k;
}

Eigen::MatrixXd assemble_B_s2(const NeumannSolution* solid, double m) {
  if (!solid || solid->fluid_phase) throw MissingSolution("solid Neumann solution missing");
  const int d = static_cast<int>(solid->gram.rows());
  return (1.0 - m) * Eigen::MatrixXd::Identity(d, d) - solid->gram;
}

FluidMatrices assemble_fluid_matrices(const KernelRun* fluid, const NeumannSolution* neumann, double m) {
  if (!fluid || fluid->sample.empty()) throw MissingSolution("fluid kernel history missing");
  if (!neumann || !neumann->fluid_phase) throw MissingSolution("fluid Neumann solution missing");
  FluidMatrices f;
  f.K_f = fluid->sample;
  f.K_f.problem = "K_f";
  const int d = static_cast<int>(neumann->gram.rows());
  f.B_f2 = m * Eigen::MatrixXd::Identity(d, d) - neumann->gram;
  return f;
}

TwoPhaseKernels assemble_B_pi_and_forcing(const KernelRun* pi, const KernelRun* f) {
  if (!pi || pi->sample.empty()) throw MissingSolution("two-phase PI history missing");
  if (!f || f->sample.empty()) throw MissingSolution("two-phase F history missing");
  TwoPhaseKernels k{pi->sample, f->sample};
  k.B_pi.problem = "B_pi";
  k.F_kernel.problem = "F_kernel";
  return k;
}

void validate_coefficients(EffectiveCoefficients& c) {
  c.validation.clear();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(c.dim, c.dim);
  if (c.A_f0) {
    auto r = validate_spd("A_f0", c.A_f0->packed(), 1e-8);
    r.asymmetry = c.A_f0_asymmetry;
    r.symmetric = r.asymmetry <= r.symmetry_tol;
    c.validation.push_back(r);
  }
  if (c.B_s2) c.validation.push_back(validate_spd("(1-m)I-B_s2", (1.0 - c.m) * I - *c.B_s2, 1e-10));
  if (c.B_f2_matrix) c.validation.push_back(validate_spd("mI-B_f2", c.m * I - *c.B_f2_matrix, 1e-10));
}

}  // namespace homog
