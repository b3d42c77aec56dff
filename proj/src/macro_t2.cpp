#include <cmath>

#include "homog/errors.hpp"
#include "macro_impl.hpp"

namespace homog {

namespace {

using Trip = Eigen::Triplet<double>;

void add_block(std::vector<Trip>& t, const SpMat& B, int r0, int c0, double scale = 1.0) {
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it)
      t.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()), scale * it.value());
}

SpMat identity(int n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

template <class T>
const T& require(const std::optional<T>& x, const char* name) {
  if (!x) throw MissingSolution(std::string("coefficient ") + name + " missing");
  return *x;
}

// Backward Euler for the fluid-dominated systems (mu0 > 0). The memory
// endpoint enters the constant step matrix, so one factorization serves the run.
class T2Impl final : public MacroSolver::Impl {
public:
  T2Impl(const EffectiveCoefficients& c, const MacroConfig& config) : Impl(c, config) {
    const auto& P = c.params;
    two_ = regime != RegimeTag::T2_I;
    pos_ = regime == RegimeTag::T2_II_LAM_POS;
    finite_p_ = P.p_star.is_finite();
    inv_p_ = P.p_star.reciprocal();
    inv_eta_ = P.eta0.reciprocal();
    nu0_ = P.nu0.value();
    mu0_ = P.mu0.value();
    m_ = c.m;
    rho_hat_ = P.rho_hat(m_);
    if (two_ && m_ >= 1.0) throw ConstraintViolation("T2_II needs a solid phase (m < 1)");
    build();
  }

  void advance() override {
    const auto& g = ops.grid();
    const int nf = g.total_faces(), nc = g.cells();
    const double vol = g.cell_volume(), dt = cfg.dt;
    const int n = state.step + 1;
    const double t = n * dt;
    const SpMat& D = ops.div();
    Vec F = ops.sample(cfg.force, t);
    Vec src = ops.sample(cfg.mass_source, t);
    Vec b = Vec::Zero(size_);
    auto bv = b.segment(0, nf);
    bv = (two_ ? rho_f_m() : rho_hat_) * vol / dt * state.v + vol * rho_hat_ * F;
    if (two_) bv += c_rho_s() * vol / dt * u_;
    if (B2_) bv -= B2_->explicit_load(divv_hist_, n);
    if (finite_p_) {
      bv -= vol * (D.transpose() * (kappa() * state.p));
      Vec pr = vol * inv_p_ / dt * state.p;
      if (a2_.size() > 0) pr -= vol * convolve_explicit(divv_hist_, a2_, n, dt);
      b.segment(op_, nc) = pr;
    }
    Vec cb = inv_eta_ / dt * state.pi + src;
    if (finite_p_) cb += inv_p_ / dt * state.p;
    b.segment(opi_, nc) = vol * cb;
    if (two_) {
      const Vec& mask = ops.interior_mask();
      if (pos_) {
        Vec zk = mask.cwiseProduct(c_rho_s() * F + c_rho_s() / dt * state.v);
        b.segment(ou_, nf) = Bs1_->explicit_part(z_hist_, n) + Bs1_->endpoint() * zk;
      } else {
        b.segment(ou_, nf) = c_rho_s() / dt * (u_ - B2s_ * state.v) + As_ * mask.cwiseProduct(c_rho_s() * F);
      }
    }
    Vec x = solver_->solve(b);

    Vec v_old = state.v, p_old = state.p, pi_old = state.pi;
    state.v = x.segment(0, nf);
    state.pi = x.segment(opi_, nc);
    Vec divv = D * state.v;
    if (finite_p_) {
      state.p = x.segment(op_, nc);
      state.q = (1.0 + kappa()) * state.p - kappa() * p_old;
    } else {
      state.q = Qc_ * state.v + closure_.pi_coeff * state.pi + closure_.div_coeff * divv;
      state.p = state.q;
    }
    Vec theta = divv;
    if (two_) {
      Vec u_new = x.segment(ou_, nf);
      theta = m_ * divv + D * u_new;
      if (pos_) {
        Vec z = ops.interior_mask().cwiseProduct(-(ops.grad() * state.pi) / (1.0 - m_) + c_rho_s() * F -
                                                 c_rho_s() / dt * (state.v - v_old));
        z_hist_.push_back(std::move(z));
      }
      u_ = std::move(u_new);
    }
    divv_hist_.push_back(divv);
    state.w_f += dt * state.v;
    if (two_) {
      state.w_s += dt * u_;
      state.w = m_ * state.w_f + state.w_s;
    } else {
      state.w = state.w_f;
      state.w_s = (1.0 - m_) * state.w;
    }
    state.pressure_residual =
        finite_p_ ? (state.q - state.p - nu0_ * inv_p_ * (state.p - p_old) / dt).lpNorm<Eigen::Infinity>() : 0.0;
    Vec cont = theta + inv_eta_ / dt * (state.pi - pi_old) - src;
    if (finite_p_) cont += inv_p_ / dt * (state.p - p_old);
    state.continuity_residual = cont.lpNorm<Eigen::Infinity>();
    state.t = t;
    state.step = n;
  }

  double boundary_max() const override {
    double mx = 0.0;
    for (int f : ops.boundary()) {
      mx = std::max(mx, std::abs(state.v[f]));
      if (two_) mx = std::max(mx, std::abs(state.w_s[f]));
    }
    return mx;
  }

private:
  double kappa() const { return nu0_ * inv_p_ / cfg.dt; }
  double rho_f_m() const { return coeffs.params.rho_f * m_; }
  double c_rho_s() const { return coeffs.params.rho_s; }

  void build() {
    const auto& g = ops.grid();
    const int nf = g.total_faces(), nc = g.cells();
    const double vol = g.cell_volume(), dt = cfg.dt;
    const SpMat& D = ops.div();
    const SpMat Dt = D.transpose();
    int next = nf;
    if (two_) ou_ = next, next += nf;
    if (finite_p_) op_ = next, next += nc;
    opi_ = next, next += nc;
    size_ = next;

    SymRank4Tensor A = require(coeffs.A_f0, "A_f0");
    if (cfg.viscous == ViscousTensor::FluidOnly) {
      const int P = static_cast<int>(A.packed().rows());
      A = SymRank4Tensor(A.dim(), A.packed() - (1.0 - m_) * Eigen::MatrixXd::Identity(P, P));
    }
    const auto& B0 = require(coeffs.B_f0, "B_f0");
    const auto& B1 = require(coeffs.B_f1_const, "B_f1_const");
    std::vector<Trip> t;
    // momentum
    SpMat mom = ops.viscous(A) * mu0_ + SpMat(ops.stress_coupling(B1) * D);
    if (finite_p_) {
      if (coeffs.B_f2_kernel) {
        B2_.emplace(*coeffs.B_f2_kernel, ops, dt, cfg.steps);
        mom += SpMat(B2_->endpoint() * D);
      } else {
        throw MissingSolution("coefficient B_f2_kernel missing");
      }
      const auto& a2 = require(coeffs.a_f2_kernel, "a_f2_kernel");
      check_kernel_grid(a2, dt, cfg.steps);
      a2_ = kernel_series(a2, 0, 0, cfg.steps);
    } else {
      closure_ = require(coeffs.q_closure, "q_closure");
      Qc_ = ops.strain_contraction(closure_.strain);
      mom -= SpMat(Dt * (Qc_ + SpMat(D * closure_.div_coeff))) * vol;
    }
    add_block(t, identity(nf), 0, 0, (two_ ? rho_f_m() : rho_hat_) * vol / dt);
    add_block(t, mom, 0, 0);
    if (two_) add_block(t, identity(nf), 0, ou_, c_rho_s() * vol / dt);
    add_block(t, ops.stress_coupling(B0), 0, opi_);
    add_block(t, Dt, 0, opi_, -vol * (finite_p_ ? 1.0 : 1.0 + closure_.pi_coeff));
    if (finite_p_) {
      add_block(t, Dt, 0, op_, -vol * (1.0 + kappa()));
      // p row: dp/dt / p* + C0 : D(v) + a0 pi + (a1 + m) div v + memory
      const auto& C0 = require(coeffs.C_f0, "C_f0");
      const double a0 = require(coeffs.a_f0, "a_f0");
      const double a1 = require(coeffs.a_f1, "a_f1");
      add_block(t, identity(nc), op_, op_, vol * inv_p_ / dt);
      add_block(t, ops.strain_contraction(C0), op_, 0, vol);
      add_block(t, identity(nc), op_, opi_, vol * a0);
      add_block(t, D, op_, 0, vol * (a1 + m_ + (a2_.empty() ? 0.0 : 0.5 * dt * a2_[0])));
      add_block(t, identity(nc), opi_, op_, vol * inv_p_ / dt);
    }
    // volume balance
    if (inv_eta_ > 0.0) add_block(t, identity(nc), opi_, opi_, vol * inv_eta_ / dt);
    add_block(t, D, opi_, 0, vol * (two_ ? m_ : 1.0));
    if (two_) add_block(t, D, opi_, ou_, vol);
    std::vector<int> fixed = ops.boundary();
    if (two_) {
      const SpMat mask = SpMat(ops.interior_mask().asDiagonal() * identity(nf));
      for (int f : ops.boundary()) fixed.push_back(ou_ + f);
      if (pos_) {
        Bs1_.emplace(require(coeffs.B_s1_kernel, "B_s1_kernel"), ops, dt, cfg.steps);
        const SpMat& E = Bs1_->endpoint();
        add_block(t, identity(nf), ou_, ou_);
        add_block(t, identity(nf), ou_, 0, -(1.0 - m_));
        add_block(t, SpMat(E * mask), ou_, 0, c_rho_s() / dt);
        add_block(t, SpMat(E * ops.grad_interior()), ou_, opi_, 1.0 / (1.0 - m_));
        z_hist_.push_back(Vec::Zero(nf));
      } else {
        const auto& Bs2 = require(coeffs.B_s2, "B_s2");
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(g.dim(), g.dim());
        B2s_ = ops.face_matrix(Bs2);
        As_ = ops.face_matrix((1.0 - m_) * I - Bs2);
        add_block(t, identity(nf), ou_, ou_, c_rho_s() / dt);
        add_block(t, B2s_, ou_, 0, -c_rho_s() / dt);
        add_block(t, SpMat(As_ * ops.grad_interior()), ou_, opi_, 1.0 / (1.0 - m_));
      }
      u_ = Vec::Zero(nf);
    }
    SpMat M(size_, size_);
    M.setFromTriplets(t.begin(), t.end());
    std::vector<std::vector<int>> gauges;
    if (!finite_p_ && inv_eta_ == 0.0) {
      std::vector<int> grp(nc);
      for (int k = 0; k < nc; ++k) grp[k] = opi_ + k;
      gauges.push_back(grp);
    }
    SolverOptions lin = cfg.linear;
    lin.tol = cfg.tol;
    solver_.emplace(M, fixed, gauges, lin);

    state.v = state.w = state.w_s = state.w_f = Vec::Zero(nf);
    state.p = state.q = state.pi = Vec::Zero(nc);
    divv_hist_.push_back(Vec::Zero(nc));
  }

  bool two_ = false, pos_ = false, finite_p_ = true;
  double inv_p_ = 0.0, inv_eta_ = 0.0, nu0_ = 0.0, mu0_ = 1.0, m_ = 0.0, rho_hat_ = 1.0;
  int ou_ = -1, op_ = -1, opi_ = -1, size_ = 0;
  std::optional<StressKernel> B2_;
  std::vector<double> a2_;
  std::optional<FaceKernel> Bs1_;
  SpMat B2s_, As_, Qc_;
  PressureClosure closure_;
  std::optional<LinearSolver> solver_;
  std::vector<Vec> divv_hist_, z_hist_;
  Vec u_;
};

}  // namespace

std::unique_ptr<MacroSolver::Impl> make_t2_impl(const EffectiveCoefficients& c, const MacroConfig& cfg) {
  return std::make_unique<T2Impl>(c, cfg);
}

}  // namespace homog
