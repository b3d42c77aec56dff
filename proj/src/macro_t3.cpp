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

SpMat diag(const Vec& d) {
  SpMat M(d.size(), d.size());
  std::vector<Trip> t;
  for (int i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) t.emplace_back(i, i, d[i]);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

template <class T>
const T& require(const std::optional<T>& x, const char* name) {
  if (!x) throw MissingSolution(std::string("coefficient ") + name + " missing");
  return *x;
}

enum class Layout { Single, Pair, Memory };

// Displacement formulations of the solid-dominated systems (mu0 = 0). Both
// pressures are eliminated per cell, leaving pi = alpha theta + beta p^n.
class T3Impl final : public MacroSolver::Impl {
public:
  T3Impl(const EffectiveCoefficients& c, const MacroConfig& config) : Impl(c, config) {
    const auto& P = c.params;
    m_ = c.m;
    if (!(m_ > 0.0 && m_ < 1.0)) throw ConstraintViolation("T3 systems need 0 < m < 1");
    if (!P.eta0.is_finite()) throw ConstraintViolation("T3 systems need finite eta0");
    const double eta = P.eta0.value();
    const double inv_p = P.p_star.reciprocal();
    r_ = m_ / (1.0 - m_);
    kappa_ = P.nu0.value() * inv_p / cfg.dt;
    const double cc = kappa_ + 1.0 + r_ * eta * inv_p;
    c_ = cc;
    eta_ = eta;
    inv_p_ = inv_p;
    nu0_ = P.nu0.value();
    alpha_ = -eta + r_ * eta * eta * inv_p / cc;
    beta_ = -eta * kappa_ * inv_p / cc;
    rho_hat_ = P.rho_hat(m_);
    switch (regime) {
      case RegimeTag::T3_I: layout_ = Layout::Single; break;
      case RegimeTag::T3_IV: layout_ = Layout::Memory; break;
      default: layout_ = Layout::Pair; break;
    }
    build();
  }

  void advance() override {
    const auto& g = ops.grid();
    const int nf = g.total_faces();
    const double vol = g.cell_volume(), dt = cfg.dt;
    const int n = state.step + 1;
    const double t = n * dt;
    const SpMat& D = ops.div();
    const SpMat& G = ops.grad();
    const SpMat& Gi = ops.grad_interior();
    const Vec& mask = ops.interior_mask();
    Vec F = ops.sample(cfg.force, t);
    const Vec& pn = state.p;
    Vec b = Vec::Zero(size_);
    Vec pi_known = beta_ * pn;

    if (layout_ == Layout::Single) {
      b.head(nf) = rho_hat_ * vol / (dt * dt) * (x_ + dt * ux_) + vol * rho_hat_ * F -
                   vol / (1.0 - m_) * (G * pi_known);
    } else if (layout_ == Layout::Pair) {
      Vec mom = cx_ * vol / (dt * dt) * (x_ + dt * ux_) + cy_ * vol / (dt * dt) * (y_ + dt * uy_) +
                vol * rho_hat_ * F - vol / (1.0 - m_) * (G * pi_known);
      b.head(nf) = mask.cwiseProduct(mom);
      Vec xpred = x_ + dt * ux_;
      if (K_) {
        Vec zk = -(Gi * pi_known) / (1.0 - m_) + rho_r_ * F + rho_r_ / (dt * dt) * xpred;
        b.tail(nf) = (y_ - phi_ * x_) / dt + K_->explicit_part(z_hist_, n) + K_->endpoint() * zk;
      } else {
        b.tail(nf) = rho_r_ / (dt * dt) * (y_ + dt * uy_) - rho_r_ / (dt * dt) * (B2m_ * xpred) +
                     Am_ * (rho_r_ * F - (Gi * pi_known) / (1.0 - m_));
      }
    } else {
      F_hist_.push_back(F);
      b.head(nf) = x_ / dt + Bpi_->explicit_part(gradpi_hist_, n) + Bpi_->endpoint() * (Gi * pi_known) +
                   Fk_->full(F_hist_);
    }
    Vec sol = solver_->solve(b);

    Vec x_new = sol.head(nf);
    Vec y_new = layout_ == Layout::Pair ? Vec(sol.tail(nf)) : Vec();
    Vec theta = layout_ == Layout::Pair ? Vec(sx_ * (D * x_new) + D * y_new) : Vec(D * x_new);
    Vec p_old = state.p, pi_old = state.pi;
    state.p = (kappa_ * p_old - r_ * eta_ * theta) / c_;
    state.pi = alpha_ * theta + beta_ * p_old;
    state.q = r_ * state.pi;

    Vec ax = (x_new - x_ - dt * ux_) / (dt * dt);
    Vec ux_new = (x_new - x_) / dt;
    if (layout_ == Layout::Pair) {
      Vec uy_new = (y_new - y_) / dt;
      if (K_) z_hist_.push_back(-(Gi * state.pi) / (1.0 - m_) + rho_r_ * F - rho_r_ * ax);
      y_ = std::move(y_new);
      uy_ = std::move(uy_new);
    }
    if (layout_ == Layout::Memory) gradpi_hist_.push_back(Gi * state.pi);
    x_ = std::move(x_new);
    ux_ = std::move(ux_new);

    Vec w_old = state.w;
    if (regime == RegimeTag::T3_II_LAM_POS || regime == RegimeTag::T3_II_LAM_ZERO) {
      state.w_f = x_;
      state.w_s = y_;
      state.w = m_ * x_ + y_;
    } else if (layout_ == Layout::Pair) {
      state.w_s = x_;
      state.w_f = y_;
      state.w = (1.0 - m_) * x_ + y_;
    } else {
      state.w = state.w_s = state.w_f = x_;
    }
    state.v = (state.w - w_old) / dt;
    state.pressure_residual =
        std::max((state.q - state.p - nu0_ * inv_p_ * (state.p - p_old) / dt).lpNorm<Eigen::Infinity>(),
                 (state.q / m_ - state.pi / (1.0 - m_)).lpNorm<Eigen::Infinity>());
    state.continuity_residual = (inv_p_ * state.p + state.pi / eta_ + theta).lpNorm<Eigen::Infinity>();
    state.t = t;
    state.step = n;
  }

  double boundary_max() const override {
    double mx = 0.0;
    for (int f : ops.boundary()) mx = std::max(mx, std::abs(state.w[f]));
    return mx;
  }

private:
  void build() {
    const auto& g = ops.grid();
    const int nf = g.total_faces(), nc = g.cells();
    const double vol = g.cell_volume(), dt = cfg.dt;
    const SpMat& D = ops.div();
    const SpMat& G = ops.grad();
    const SpMat& Gi = ops.grad_interior();
    const Vec& mask = ops.interior_mask();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(g.dim(), g.dim());
    const auto& P = coeffs.params;
    std::vector<Trip> t;
    std::vector<int> fixed;
    if (layout_ == Layout::Single) {
      size_ = nf;
      add_block(t, identity(nf), 0, 0, rho_hat_ * vol / (dt * dt));
      add_block(t, SpMat(G * D), 0, 0, vol * alpha_ / (1.0 - m_));
      fixed = ops.boundary();
    } else if (layout_ == Layout::Memory) {
      size_ = nf;
      Bpi_.emplace(require(coeffs.B_pi_kernel, "B_pi_kernel"), ops, dt, cfg.steps);
      Fk_.emplace(require(coeffs.F_kernel, "F_kernel"), ops, dt, cfg.steps);
      add_block(t, identity(nf), 0, 0, 1.0 / dt);
      add_block(t, SpMat(Bpi_->endpoint() * Gi * D), 0, 0, -alpha_);
      fixed = ops.boundary();
      gradpi_hist_.push_back(Vec::Zero(nf));
      F_hist_.push_back(ops.sample(cfg.force, 0.0));
    } else {
      size_ = 2 * nf;
      const bool solid_secondary = regime == RegimeTag::T3_II_LAM_POS || regime == RegimeTag::T3_II_LAM_ZERO;
      if (solid_secondary) {
        cx_ = P.rho_f * m_, cy_ = P.rho_s, sx_ = m_, phi_ = 1.0 - m_, rho_r_ = P.rho_s;
        if (regime == RegimeTag::T3_II_LAM_POS) {
          K_.emplace(require(coeffs.B_s1_kernel, "B_s1_kernel"), ops, dt, cfg.steps);
        } else {
          const auto& B2 = require(coeffs.B_s2, "B_s2");
          B2m_ = ops.face_matrix(B2);
          Am_ = ops.face_matrix((1.0 - m_) * I - B2);
        }
      } else {
        cx_ = P.rho_s * (1.0 - m_), cy_ = P.rho_f, sx_ = 1.0 - m_, phi_ = m_, rho_r_ = P.rho_f;
        if (regime == RegimeTag::T3_III_KERNEL) {
          K_.emplace(require(coeffs.K_f_kernel, "K_f_kernel"), ops, dt, cfg.steps);
        } else {
          const auto& B2 = require(coeffs.B_f2_matrix, "B_f2_matrix");
          B2m_ = ops.face_matrix(B2);
          Am_ = ops.face_matrix(m_ * I - B2);
        }
      }
      const SpMat Mi = diag(mask);
      const SpMat Mb = diag(Vec::Ones(nf) - mask);
      const SpMat GD = G * D;
      // momentum on interior faces, normal total flux on the boundary
      add_block(t, Mi, 0, 0, cx_ * vol / (dt * dt));
      add_block(t, Mi, 0, nf, cy_ * vol / (dt * dt));
      add_block(t, SpMat(Mi * GD), 0, 0, vol * alpha_ * sx_ / (1.0 - m_));
      add_block(t, SpMat(Mi * GD), 0, nf, vol * alpha_ / (1.0 - m_));
      add_block(t, Mb, 0, 0, sx_);
      add_block(t, Mb, 0, nf);
      const SpMat GiD = Gi * D;
      if (K_) {
        const SpMat& E = K_->endpoint();
        add_block(t, identity(nf), nf, nf, 1.0 / dt);
        add_block(t, identity(nf), nf, 0, -phi_ / dt);
        add_block(t, SpMat(E * GiD), nf, 0, alpha_ * sx_ / (1.0 - m_));
        add_block(t, SpMat(E * GiD), nf, nf, alpha_ / (1.0 - m_));
        add_block(t, E, nf, 0, rho_r_ / (dt * dt));
        z_hist_.push_back(Vec::Zero(nf));
      } else {
        add_block(t, identity(nf), nf, nf, rho_r_ / (dt * dt));
        add_block(t, B2m_, nf, 0, -rho_r_ / (dt * dt));
        add_block(t, SpMat(Am_ * GiD), nf, 0, alpha_ * sx_ / (1.0 - m_));
        add_block(t, SpMat(Am_ * GiD), nf, nf, alpha_ / (1.0 - m_));
      }
      y_ = uy_ = Vec::Zero(nf);
    }
    SpMat M(size_, size_);
    M.setFromTriplets(t.begin(), t.end());
    SolverOptions lin = cfg.linear;
    lin.tol = cfg.tol;
    solver_.emplace(M, fixed, std::vector<std::vector<int>>{}, lin);
    x_ = ux_ = Vec::Zero(nf);
    state.v = state.w = state.w_s = state.w_f = Vec::Zero(nf);
    state.p = state.q = state.pi = Vec::Zero(nc);
  }

  Layout layout_ = Layout::Single;
  double m_ = 0.0, r_ = 0.0, kappa_ = 0.0, c_ = 1.0, eta_ = 1.0, inv_p_ = 0.0, nu0_ = 0.0;
  double alpha_ = 0.0, beta_ = 0.0, rho_hat_ = 1.0;
  double cx_ = 0.0, cy_ = 0.0, sx_ = 0.0, phi_ = 0.0, rho_r_ = 0.0;
  int size_ = 0;
  std::optional<FaceKernel> K_, Bpi_, Fk_;
  SpMat B2m_, Am_;
  std::optional<LinearSolver> solver_;
  Vec x_, ux_, y_, uy_;
  std::vector<Vec> z_hist_, gradpi_hist_, F_hist_;
};

}  // namespace

std::unique_ptr<MacroSolver::Impl> make_t3_impl(const EffectiveCoefficients& c, const MacroConfig& cfg) {
  return std::make_unique<T3Impl>(c, cfg);
}

}  // namespace homog
