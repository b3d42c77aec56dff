#include "homog/macro.hpp"

#include <cmath>

#include "homog/errors.hpp"
#include "macro_impl.hpp"

namespace homog {

using Trip = Eigen::Triplet<double>;

MacroOperators::MacroOperators(int dim, int N) : grid_(dim, N, Boundary::Wall) {
  D_ = grid_.divergence();
  G_ = grid_.gradient();
  boundary_ = grid_.boundary_faces();
  interior_ = Vec::Ones(grid_.total_faces());
  for (int f : boundary_) interior_[f] = 0.0;
  Gi_ = SpMat(interior_.asDiagonal() * G_);
  for (int k = 0; k < grid_.strain_components(); ++k)
    Sc_.push_back(grid_.is_shear(k) ? SpMat(grid_.edge_to_cell(k) * grid_.strain(k)) : grid_.strain(k));
}

SpMat MacroOperators::viscous(const SymRank4Tensor& A) const {
  const int d = grid_.dim();
  const int P = packed_size(d);
  const double vol = grid_.cell_volume();
  SpMat K(grid_.total_faces(), grid_.total_faces());
  const Vec ones = Vec::Ones(grid_.cells());
  for (int M = 0; M < P; ++M) {
    auto [a, b] = packed_pair(d, M);
    const int kM = grid_.component_index(a, b);
    for (int N = 0; N < P; ++N) {
      const double coef = A.packed()(M, N) * mandel_factor(d, M) * mandel_factor(d, N);
      if (coef == 0.0) continue;
      auto [c, e] = packed_pair(d, N);
      const int kN = grid_.component_index(c, e);
      if (M == N) {
        SpMat S = grid_.strain(kM);
        Vec pw = grid_.point_weights(kM, ones) * (vol * coef);
        K += SpMat(S.transpose() * pw.asDiagonal() * S);
      } else {
        K += SpMat(Sc_[kM].transpose() * Sc_[kN]) * (vol * coef);
      }
    }
  }
  return K;
}

SpMat MacroOperators::stress_coupling(const Eigen::MatrixXd& B) const {
  const double vol = grid_.cell_volume();
  SpMat T(grid_.total_faces(), grid_.cells());
  for (int k = 0; k < grid_.strain_components(); ++k) {
    auto [a, b] = grid_.component(k);
    const double coef = B(a, b) * (grid_.is_shear(k) ? 2.0 : 1.0) * vol;
    if (coef != 0.0) T += SpMat(Sc_[k].transpose()) * coef;
  }
  return T;
}

SpMat MacroOperators::strain_contraction(const Eigen::MatrixXd& C) const {
  SpMat T(grid_.cells(), grid_.total_faces());
  for (int k = 0; k < grid_.strain_components(); ++k) {
    auto [a, b] = grid_.component(k);
    const double coef = grid_.is_shear(k) ? C(a, b) + C(b, a) : C(a, a);
    if (coef != 0.0) T += Sc_[k] * coef;
  }
  return T;
}

SpMat MacroOperators::face_matrix(const Eigen::MatrixXd& B) const {
  const int d = grid_.dim();
  std::vector<Trip> t;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (B(a, b) == 0.0) continue;
      const int oa = grid_.face_offset(a), ob = grid_.face_offset(b);
      if (a == b) {
        for (int f = 0; f < grid_.faces(a); ++f) t.emplace_back(oa + f, oa + f, B(a, a));
        continue;
      }
      SpMat I = grid_.face_interp(b, a);
      for (int k = 0; k < I.outerSize(); ++k)
        for (SpMat::InnerIterator it(I, k); it; ++it)
          t.emplace_back(oa + static_cast<int>(it.row()), ob + static_cast<int>(it.col()), B(a, b) * it.value());
    }
  SpMat M(grid_.total_faces(), grid_.total_faces());
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

Vec MacroOperators::sample(const ForceFn& f, double t) const {
  Vec out = Vec::Zero(grid_.total_faces());
  if (!f) return out;
  for (int k = 0; k < grid_.total_faces(); ++k) {
    int a = 0;
    grid_.face_coords(k, &a);
    out[k] = f(grid_.face_position(k), t)[a];
  }
  return out;
}

Vec MacroOperators::sample(const ScalarFn& f, double t) const {
  Vec out = Vec::Zero(grid_.cells());
  if (!f) return out;
  for (int c = 0; c < grid_.cells(); ++c) out[c] = f(grid_.cell_position(c), t);
  return out;
}

double MacroOperators::face_norm(const Vec& u) const { return std::sqrt(u.squaredNorm() * grid_.cell_volume()); }
double MacroOperators::cell_norm(const Vec& s) const { return std::sqrt(s.squaredNorm() * grid_.cell_volume()); }

MacroSolver::MacroSolver(const EffectiveCoefficients& coeffs, const MacroConfig& cfg) {
  if (!(cfg.dt > 0.0) || cfg.steps < 1 || cfg.N < 2) throw ConfigError("macro run needs dt > 0, steps >= 1, N >= 2");
  if (is_t2_family(coeffs.regime))
    impl_ = make_t2_impl(coeffs, cfg);
  else
    impl_ = make_t3_impl(coeffs, cfg);
}
MacroSolver::~MacroSolver() = default;
MacroSolver::MacroSolver(MacroSolver&&) noexcept = default;
MacroSolver& MacroSolver::operator=(MacroSolver&&) noexcept = default;

RegimeTag MacroSolver::regime() const { return impl_->regime; }
const MacroOperators& MacroSolver::ops() const { return impl_->ops; }
const MacroState& MacroSolver::state() const { return impl_->state; }
void MacroSolver::step() {
  if (impl_->state.step >= impl_->cfg.steps)
    throw KernelGridMismatch("macro run already reached its final time " + std::to_string(impl_->cfg.T()));
  impl_->advance();
}
double MacroSolver::boundary_max() const { return impl_->boundary_max(); }

void step_T2_I(MacroSolver& s) {
  if (s.regime() != RegimeTag::T2_I) throw ConfigError("step_T2_I called for regime " + to_string(s.regime()));
  s.step();
}
void step_T2_II(MacroSolver& s) {
  if (s.regime() != RegimeTag::T2_II_LAM_POS && s.regime() != RegimeTag::T2_II_LAM_ZERO)
    throw ConfigError("step_T2_II called for regime " + to_string(s.regime()));
  s.step();
}
void step_T3(MacroSolver& s) {
  if (is_t2_family(s.regime())) throw ConfigError("step_T3 called for regime " + to_string(s.regime()));
  s.step();
}

}  // namespace homog

namespace homog {

namespace {

bool all_zero(const std::vector<double>& s) {
  for (double x : s)
    if (x != 0.0) return false;
  return true;
}

}  // namespace

FaceKernel::FaceKernel(const KernelSample& k, const MacroOperators& ops, double dt, int steps)
    : ops_(&ops), dt_(dt), dim_(ops.grid().dim()) {
  check_kernel_grid(k, dt, steps);
  Eigen::MatrixXd K0(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) {
      series_.push_back(kernel_series(k, a, b, steps));
      K0(a, b) = series_.back()[0];
    }
  endpoint_ = ops.face_matrix(0.5 * dt * K0);
}

Vec FaceKernel::explicit_part(const std::vector<Vec>& hist, int n) const {
  const auto& g = ops_->grid();
  Vec out = Vec::Zero(g.total_faces());
  if (n <= 0) return out;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) {
      const auto& s = series_[a * dim_ + b];
      if (all_zero(s)) continue;
      Vec c = convolve_explicit(hist, s, n, dt_);
      auto cb = c.segment(g.face_offset(b), g.faces(b));
      if (a == b)
        out.segment(g.face_offset(a), g.faces(a)) += cb;
      else
        out.segment(g.face_offset(a), g.faces(a)) += g.face_interp(b, a) * cb;
    }
  return out;
}

Vec FaceKernel::full(const std::vector<Vec>& hist) const {
  const int n = static_cast<int>(hist.size()) - 1;
  if (n <= 0) return Vec::Zero(ops_->grid().total_faces());
  return explicit_part(hist, n) + endpoint_ * hist[n];
}

StressKernel::StressKernel(const KernelSample& k, const MacroOperators& ops, double dt, int steps)
    : ops_(&ops), dt_(dt) {
  check_kernel_grid(k, dt, steps);
  const auto& g = ops.grid();
  Eigen::MatrixXd K0 = Eigen::MatrixXd::Zero(g.dim(), g.dim());
  for (int c = 0; c < g.strain_components(); ++c) {
    auto [a, b] = g.component(c);
    series_.push_back(kernel_series(k, a, b, steps));
    K0(a, b) = K0(b, a) = series_.back()[0];
  }
  endpoint_ = ops.stress_coupling(0.5 * dt * K0);
}

Vec StressKernel::explicit_load(const std::vector<Vec>& hist, int n) const {
  const auto& g = ops_->grid();
  Vec out = Vec::Zero(g.total_faces());
  if (n <= 0) return out;
  for (int c = 0; c < g.strain_components(); ++c) {
    if (all_zero(series_[c])) continue;
    Vec sigma = convolve_explicit(hist, series_[c], n, dt_);
    out += ops_->strain_at_cells(c).transpose() * sigma * ((g.is_shear(c) ? 2.0 : 1.0) * g.cell_volume());
  }
  return out;
}

}  // namespace homog
