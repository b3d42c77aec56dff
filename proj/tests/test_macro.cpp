#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>

#include "homog/errors.hpp"
#include "homog/grid.hpp"
#include "homog/macro.hpp"
#include "homog/pipeline.hpp"
#include "manufactured.hpp"

using namespace homog;
using namespace homog::mms;

namespace {

const ExtendedParam kInf = ExtendedParam::infinity();
const RegimeTag kAllRegimes[] = {RegimeTag::T2_I,           RegimeTag::T2_II_LAM_POS, RegimeTag::T2_II_LAM_ZERO,
                                 RegimeTag::T3_I,           RegimeTag::T3_II_LAM_POS, RegimeTag::T3_II_LAM_ZERO,
                                 RegimeTag::T3_III_KERNEL, RegimeTag::T3_III_ZERO,   RegimeTag::T3_IV};

// Limit parameters selecting each regime.
ScalingParams regime_params(RegimeTag tag) {
  ScalingParams p;
  p.nu0 = ExtendedParam(0.5);
  p.rho_f = 1.0;
  p.rho_s = 2.0;
  p.p_star = ExtendedParam(2.0);
  switch (tag) {
    case RegimeTag::T2_I: p.mu0 = ExtendedParam(1.0); p.lambda1 = kInf; return p;
    case RegimeTag::T2_II_LAM_POS: p.mu0 = ExtendedParam(1.0); p.lambda1 = ExtendedParam(1.0); return p;
    case RegimeTag::T2_II_LAM_ZERO: p.mu0 = ExtendedParam(1.0); p.lambda1 = ExtendedParam(0.0); return p;
    default: break;
  }
  p.mu0 = ExtendedParam(0.0);
  p.eta0 = ExtendedParam(1.5);
  const bool rigid = tag == RegimeTag::T3_I || tag == RegimeTag::T3_II_LAM_POS || tag == RegimeTag::T3_II_LAM_ZERO;
  p.mu1 = rigid ? kInf : (tag == RegimeTag::T3_III_ZERO ? ExtendedParam(0.0) : ExtendedParam(1.0));
  const bool stiff = tag == RegimeTag::T3_I || tag == RegimeTag::T3_III_KERNEL || tag == RegimeTag::T3_III_ZERO;
  p.lambda1 = stiff ? kInf : (tag == RegimeTag::T3_II_LAM_ZERO ? ExtendedParam(0.0) : ExtendedParam(1.0));
  return p;
}

const CellGeometry& cross8() {
  static const CellGeometry g = [] {
    GeometryDescriptor d;
    d.kind = GeometryKind::Cross;
    d.n = 8;
    return build_cell(d);
  }();
  return g;
}

EffectiveCoefficients regime_coeffs(RegimeTag tag, double dt, int steps) {
  CoefficientOptions o;
  o.kernel_dt = dt;
  o.kernel_steps = steps;
  return compute_coefficients(cross8(), regime_params(tag), o);
}

ForceFn smooth_force() {
  return [](const Point& x, double t) { return Point{t * std::sin(3 * x[1]), t * x[0] * (1 - x[1]), 0.0}; };
}

}  // namespace

TEST(MacroZeroData, EveryRegimeStaysExactlyZero) {
  const double dt = 0.05;
  const int steps = 5;
  for (RegimeTag tag : kAllRegimes) {
    const auto c = regime_coeffs(tag, dt, steps);
    ASSERT_EQ(c.regime, tag);
    MacroConfig cfg;
    cfg.N = 8;
    cfg.dt = dt;
    cfg.steps = steps;
    MacroSolver s(c, cfg);
    for (int n = 0; n < steps; ++n) {
      s.step();
      const auto& st = s.state();
      ASSERT_EQ(st.v.lpNorm<Eigen::Infinity>(), 0.0) << to_string(tag);
      ASSERT_EQ(st.w.lpNorm<Eigen::Infinity>(), 0.0) << to_string(tag);
      ASSERT_EQ(st.p.lpNorm<Eigen::Infinity>(), 0.0) << to_string(tag);
      ASSERT_EQ(st.pi.lpNorm<Eigen::Infinity>(), 0.0) << to_string(tag);
    }
  }
}

TEST(MacroInvariants, BoundaryAndPressureRelationsEveryStep) {
  const double dt = 0.05;
  const int steps = 6;
  for (RegimeTag tag : kAllRegimes) {
    const auto c = regime_coeffs(tag, dt, steps);
    MacroConfig cfg;
    cfg.N = 8;
    cfg.dt = dt;
    cfg.steps = steps;
    cfg.force = smooth_force();
    MacroSolver s(c, cfg);
    EXPECT_EQ(s.regime(), tag);
    for (int n = 0; n < steps; ++n) {
      s.step();
      EXPECT_LE(s.boundary_max(), 1e-12) << to_string(tag);
      EXPECT_LE(s.state().pressure_residual, 1e-10) << to_string(tag);
      EXPECT_LE(s.state().continuity_residual, 1e-8) << to_string(tag);
    }
    EXPECT_GT(s.state().w.norm(), 0.0) << to_string(tag);
    EXPECT_EQ(s.state().step, steps);
    EXPECT_NEAR(s.state().t, steps * dt, 1e-14);
  }
}

TEST(MacroT2I, ManufacturedSolutionSecondOrderInSpace) {
  // g(t) = t makes backward Euler exact in time, isolating the spatial error.
  std::vector<double> err;
  for (int N : {8, 16, 32}) err.push_back(mms_relative_error(N, 0.1, 0.5));
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    const double ratio = err[k] / err[k + 1];
    EXPECT_GE(ratio, 3.0);
    EXPECT_LE(ratio, 5.0);
  }
}

TEST(MacroT2I, ManufacturedSolutionFirstOrderInTime) {
  // Time error measured against a fine-step run on the same mesh.
  const int N = 16;
  const double T = 0.8;
  const auto force = mms_force(TimeProfile{false});
  const Vec ref = run_stokes(N, T / 256, T, force).state().v;
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025}) err.push_back((run_stokes(N, dt, T, force).state().v - ref).norm());
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    const double ratio = err[k] / err[k + 1];
    EXPECT_GE(ratio, 1.5);
    EXPECT_LE(ratio, 2.5);
  }
}

TEST(MacroT2I, MatchesIndependentStokesStepper) {
  // Backward-Euler Stokes saddle system assembled directly from the grid operators.
  const int N = 8, steps = 5;
  const double dt = 0.05;
  const MacroSolver s = run_stokes(N, dt, steps * dt, smooth_force());
  const auto& ops = s.ops();
  const auto& g = ops.grid();
  const int nf = g.total_faces(), nc = g.cells();
  const double vol = g.cell_volume();
  const SpMat K = strain_energy(g, Vec::Ones(nc));
  EXPECT_LT(SpMat(K - ops.viscous(SymRank4Tensor::identity(2))).norm(), 1e-10 * K.norm());
  const SpMat D = g.divergence();
  std::vector<bool> wall(nf, false);
  for (int f : ops.boundary()) wall[f] = true;

  std::vector<Eigen::Triplet<double>> t;
  const int n = nf + nc + 1;
  for (int f = 0; f < nf; ++f)
    if (wall[f]) t.emplace_back(f, f, 1.0);
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it)
      if (!wall[it.row()] && !wall[it.col()]) t.emplace_back(it.row(), it.col(), it.value());
  for (int f = 0; f < nf; ++f)
    if (!wall[f]) t.emplace_back(f, f, vol / dt);
  for (int k = 0; k < D.outerSize(); ++k)
    for (SpMat::InnerIterator it(D, k); it; ++it) {
      if (wall[it.col()]) continue;
      t.emplace_back(it.col(), nf + it.row(), -vol * it.value());  // grad pi in weak form
      t.emplace_back(nf + it.row(), it.col(), -vol * it.value());
    }
  for (int c = 0; c < nc; ++c) {
    t.emplace_back(nf + c, n - 1, vol);
    t.emplace_back(n - 1, nf + c, vol);
  }
  SpMat M(n, n);
  M.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<SpMat> lu(M);
  ASSERT_EQ(lu.info(), Eigen::Success);
  Vec v = Vec::Zero(nf), x;
  const ForceFn F = smooth_force();
  for (int step = 1; step <= steps; ++step) {
    Vec rhs = Vec::Zero(n);
    const Vec Fs = ops.sample(F, step * dt);
    for (int f = 0; f < nf; ++f)
      if (!wall[f]) rhs[f] = vol / dt * v[f] + vol * Fs[f];
    x = lu.solve(rhs);
    v = x.head(nf);
  }
  EXPECT_LT((s.state().v - v).norm(), 1e-9 * v.norm());
  const Vec pi_ref = x.segment(nf, nc);
  const Vec pi = s.state().pi;
  const Vec diff = (pi.array() - pi.mean()) - (pi_ref.array() - pi_ref.mean());
  EXPECT_LT(diff.norm(), 1e-8 * pi_ref.norm());
}

TEST(MacroT2I, FluidOnlyTensorIsNeutralForPureFluid) {
  // With m = 1 the fluid-only variant subtracts nothing.
  MacroConfig cfg;
  cfg.N = 8;
  cfg.dt = 0.05;
  cfg.steps = 3;
  cfg.force = smooth_force();
  MacroSolver a(stokes_coeffs(), cfg);
  cfg.viscous = ViscousTensor::FluidOnly;
  MacroSolver b(stokes_coeffs(), cfg);
  for (int n = 0; n < cfg.steps; ++n) {
    a.step();
    b.step();
  }
  EXPECT_EQ((a.state().v - b.state().v).norm(), 0.0);
}

TEST(MacroT2I, FluidOnlyTensorChangesCrossTrajectory) {
  const auto c = regime_coeffs(RegimeTag::T2_I, 0.05, 3);
  MacroConfig cfg;
  cfg.N = 8;
  cfg.dt = 0.05;
  cfg.steps = 3;
  cfg.force = smooth_force();
  MacroSolver a(c, cfg);
  cfg.viscous = ViscousTensor::FluidOnly;
  MacroSolver b(c, cfg);
  for (int n = 0; n < cfg.steps; ++n) {
    a.step();
    b.step();
  }
  EXPECT_GT((a.state().v - b.state().v).norm(), 1e-6 * a.state().v.norm());
  EXPECT_LE(b.state().continuity_residual, 1e-8);
}

TEST(MacroT3I, MatchesOneDimensionalMonolithicOracle) {
  // An x-only force depending on x keeps w = (w1(x), 0); the 1D oracle keeps p, q, pi as
  // separate unknowns with the unreduced pressure relations.
  const double m = 0.4, nu0 = 0.5, p_star = 2.0, eta = 1.5, rho_f = 1.0, rho_s = 2.0;
  EffectiveCoefficients c;
  c.dim = 2;
  c.m = m;
  c.regime = RegimeTag::T3_I;
  c.params.mu0 = ExtendedParam(0.0);
  c.params.mu1 = kInf;
  c.params.lambda1 = kInf;
  c.params.nu0 = ExtendedParam(nu0);
  c.params.p_star = ExtendedParam(p_star);
  c.params.eta0 = ExtendedParam(eta);
  c.params.rho_f = rho_f;
  c.params.rho_s = rho_s;
  const double rho_hat = m * rho_f + (1 - m) * rho_s;
  c.rho_hat = rho_hat;
  const int N = 16, steps = 12;
  const double dt = 0.02, h = 1.0 / N;
  auto profile = [](double x) { return std::exp(x) * std::sin(kPi * x); };
  MacroConfig cfg;
  cfg.N = N;
  cfg.dt = dt;
  cfg.steps = steps;
  cfg.force = [profile](const Point& x, double t) { return Point{profile(x[0]) * (1 + t), 0.0, 0.0}; };
  MacroSolver s(c, cfg);

  // Unknowns: w_1..w_{N-1} on interior x-faces, then p, q, pi per cell.
  const int nw = N - 1, n = nw + 3 * N;
  auto W = [](int i) { return i - 1; };
  auto P = [nw](int k) { return nw + k; };
  auto Q = [nw, N](int k) { return nw + N + k; };
  auto PI = [nw, N](int k) { return nw + 2 * N + k; };
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < N; ++i) {
    M(W(i), W(i)) = rho_hat / (dt * dt);
    M(W(i), PI(i)) += 1.0 / (h * (1 - m));
    M(W(i), PI(i - 1)) -= 1.0 / (h * (1 - m));
  }
  for (int k = 0; k < N; ++k) {
    M(P(k), Q(k)) = 1.0;
    M(P(k), P(k)) = -1.0 - nu0 / (p_star * dt);
    M(Q(k), Q(k)) = 1.0 / m;
    M(Q(k), PI(k)) = -1.0 / (1 - m);
    M(PI(k), P(k)) = 1.0 / p_star;
    M(PI(k), PI(k)) = 1.0 / eta;
    if (k + 1 < N) M(PI(k), W(k + 1)) += 1.0 / h;
    if (k > 0) M(PI(k), W(k)) -= 1.0 / h;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Vec w = Vec::Zero(nw), w_prev = Vec::Zero(nw), p = Vec::Zero(N), pi;
  for (int step = 1; step <= steps; ++step) {
    const double t = step * dt;
    Vec rhs = Vec::Zero(n);
    for (int i = 1; i < N; ++i) rhs[W(i)] = rho_hat / (dt * dt) * (2 * w[W(i)] - w_prev[W(i)]) + rho_hat * profile(i * h) * (1 + t);
    for (int k = 0; k < N; ++k) rhs[P(k)] = -nu0 / (p_star * dt) * p[k];
    const Vec x = lu.solve(rhs);
    w_prev = w;
    w = x.head(nw);
    p = x.segment(nw, N);
    pi = x.segment(nw + 2 * N, N);
    s.step();
  }

  const auto& g = s.ops().grid();
  double worst = 0.0;
  for (int f = 0; f < g.total_faces(); ++f) {
    int axis = 0;
    g.face_coords(f, &axis);
    const auto x = g.face_position(f);
    const int i = static_cast<int>(std::lround(x[0] * N));
    const double expected = (axis == 0 && i > 0 && i < N) ? w[W(i)] : 0.0;
    worst = std::max(worst, std::abs(s.state().w[f] - expected));
  }
  EXPECT_LT(worst, 1e-10 * w.lpNorm<Eigen::Infinity>());
  EXPECT_GT(w.lpNorm<Eigen::Infinity>(), 0.0);
  for (int cidx = 0; cidx < g.cells(); ++cidx) {
    const auto x = g.cell_position(cidx);
    const int k = static_cast<int>(std::floor(x[0] * N));
    ASSERT_NEAR(s.state().pi[cidx], pi[k], 1e-10 * pi.lpNorm<Eigen::Infinity>());
    ASSERT_NEAR(s.state().p[cidx], p[k], 1e-10 * p.lpNorm<Eigen::Infinity>());
  }
}

TEST(MacroT3IV, ZeroPressureKernelIntegratesForcing) {
  // B_pi = 0 and a unit forcing kernel: f(t) = t F(x) for constant F, and
  // w_n = dt sum_k f(t_k) = dt^2 n (n + 1) / 2 F on interior faces.
  const double dt = 0.1;
  const int steps = 6;
  EffectiveCoefficients c;
  c.dim = 2;
  c.m = 0.3;
  c.regime = RegimeTag::T3_IV;
  c.params.mu0 = ExtendedParam(0.0);
  c.params.mu1 = ExtendedParam(1.0);
  c.params.lambda1 = ExtendedParam(1.0);
  c.params.p_star = ExtendedParam(1.0);
  c.params.eta0 = ExtendedParam(1.0);
  c.rho_hat = c.params.rho_hat(c.m);
  KernelSample zero, unit;
  zero.problem = "B_pi";
  unit.problem = "F_kernel";
  zero.dt = unit.dt = dt;
  for (int k = 1; k <= steps; ++k) {
    zero.times.push_back(k * dt);
    unit.times.push_back(k * dt);
    zero.values.push_back(Eigen::Matrix2d::Zero());
    unit.values.push_back(Eigen::Matrix2d::Identity());
  }
  c.B_pi_kernel = zero;
  c.F_kernel = unit;
  MacroConfig cfg;
  cfg.N = 8;
  cfg.dt = dt;
  cfg.steps = steps;
  const ForceFn F = [](const Point& x, double) { return Point{std::cos(x[0]) * x[1], x[0] * x[0], 0.0}; };
  cfg.force = F;
  MacroSolver s(c, cfg);
  const Vec Fs = s.ops().sample(F, 0.0);
  const Vec& mask = s.ops().interior_mask();
  for (int n = 1; n <= steps; ++n) {
    s.step();
    const Vec expected = mask.cwiseProduct(Fs) * (dt * dt * n * (n + 1) / 2.0);
    EXPECT_LT((s.state().w - expected).lpNorm<Eigen::Infinity>(), 1e-12) << "step " << n;
    EXPECT_LE(s.state().continuity_residual, 1e-10);
  }
}

TEST(MacroErrors, KernelGridMismatchAndOverrun) {
  const auto c = regime_coeffs(RegimeTag::T3_II_LAM_POS, 0.05, 4);
  MacroConfig cfg;
  cfg.N = 8;
  cfg.dt = 0.1;
  cfg.steps = 4;
  EXPECT_THROW(MacroSolver(c, cfg), KernelGridMismatch);
  cfg.dt = 0.05;
  cfg.steps = 5;
  EXPECT_THROW(MacroSolver(c, cfg), KernelGridMismatch);
  cfg.steps = 2;
  MacroSolver s(c, cfg);
  s.step();
  s.step();
  EXPECT_THROW(s.step(), KernelGridMismatch);
}

TEST(MacroErrors, MissingCoefficientAndBadPorosity) {
  EffectiveCoefficients c = stokes_coeffs();
  c.A_f0.reset();
  MacroConfig cfg;
  cfg.N = 4;
  cfg.dt = 0.1;
  cfg.steps = 1;
  EXPECT_THROW(MacroSolver(c, cfg), MissingSolution);
  EffectiveCoefficients t3;
  t3.m = 1.0;
  t3.regime = RegimeTag::T3_I;
  t3.params.mu0 = ExtendedParam(0.0);
  t3.params.p_star = ExtendedParam(1.0);
  t3.params.eta0 = ExtendedParam(1.0);
  EXPECT_THROW(MacroSolver(t3, cfg), ConstraintViolation);
}
