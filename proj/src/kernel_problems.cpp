#include "homog/kernel_problems.hpp"

#include <cmath>
#include <string>

#include "homog/errors.hpp"
#include "homog/params.hpp"

namespace homog {

namespace {

void check_grid(const KernelOptions& opt) {
  if (!(opt.dt > 0.0) || opt.steps < 1) throw KernelGridMismatch("kernel problems need dt > 0 and at least one step");
}

SpMat identity(int n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

// Offsets gauge groups of B (rows) past the velocity block.
std::vector<std::vector<int>> pressure_gauges(const SpMat& B, int offset) {
  auto groups = constant_null_groups(B);
  for (auto& g : groups)
    for (int& r : g) r += offset;
  return groups;
}

// Mean of each component over the listed faces; values indexed like faces.
Eigen::VectorXd phase_mean(const StaggeredGrid& grid, const Vec& U, const std::vector<int>& faces) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(grid.dim());
  for (std::size_t j = 0; j < faces.size(); ++j) {
    int a = 0;
    grid.face_coords(faces[j], &a);
    m[a] += U[static_cast<Eigen::Index>(j)];
  }
  return m * grid.cell_volume();
}

// Velocity-displacement system on a subset of faces with a pressure
// constraint B U = 0.
struct ConstrainedSystem {
  std::vector<int> faces;  // unknown faces (global indices)
  SpMat M;                 // lumped mass
  SpMat B;                 // constraint rows (weighted divergence)
  std::vector<std::vector<int>> gauges;

  int nu() const { return static_cast<int>(M.rows()); }
  int np() const { return static_cast<int>(B.rows()); }

  Vec stack(const Vec& top) const {
    Vec b = Vec::Zero(nu() + np());
    b.head(nu()) = top;
    return b;
  }

  // M-orthogonal projection of U onto ker B.
  Vec project(const Vec& U, const SolverOptions& lin) const {
    LinearSolver s(saddle_matrix(M, B), {}, gauges, lin);
    return s.solve(stack(M * U)).head(nu());
  }
};

ConstrainedSystem phase_system(const StaggeredGrid& grid, const CellGeometry& cell, bool fluid, double rho) {
  ConstrainedSystem sys;
  sys.faces = interior_faces(grid, cell, fluid);
  auto cells = phase_cells(cell, fluid);
  const double vol = grid.cell_volume();
  SpMat Sf = selector(grid.total_faces(), sys.faces);
  SpMat Sc = selector(grid.cells(), cells);
  sys.M = identity(static_cast<int>(sys.faces.size())) * (rho * vol);
  sys.B = SpMat(SpMat(Sc.transpose()) * grid.divergence() * Sf) * vol;
  sys.gauges = pressure_gauges(sys.B, sys.nu());
  return sys;
}

KernelRun make_run(const std::string& problem, int d, const KernelOptions& opt) {
  KernelRun run;
  run.sample = KernelSample::zeros(problem, d, d, opt.dt, opt.steps);
  run.energy.assign(d, {});
  run.dissipation.assign(d, {});
  return run;
}

// Crank-Nicolson for M U_t + lam K W + mu C U + B^T R = 0, W_t = U, B U = 0.
void run_newmark(const StaggeredGrid& grid, const ConstrainedSystem& sys, const SpMat& K, double lam, const SpMat& C,
                 double mu, const std::vector<Vec>& U0, const KernelOptions& opt, KernelRun& run) {
  const double dt = opt.dt;
  SpMat A = sys.M / dt;
  if (lam > 0.0) A += K * (lam * dt / 4.0);
  if (mu > 0.0) A += C * (mu / 2.0);
  LinearSolver solver(saddle_matrix(A, sys.B), {}, sys.gauges, opt.cell.linear);
  for (std::size_t i = 0; i < U0.size(); ++i) {
    Vec U = U0[i];
    Vec W = Vec::Zero(sys.nu());
    double diss = 0.0;
    auto energy = [&] {
      double e = 0.5 * U.dot(sys.M * U);
      if (lam > 0.0) e += 0.5 * lam * W.dot(K * W);
      return e;
    };
    run.energy[i].push_back(energy());
    run.dissipation[i].push_back(0.0);
    for (int k = 1; k <= opt.steps; ++k) {
      Vec rhs = sys.M * U / dt;
      if (lam > 0.0) rhs -= K * (W + U * (dt / 4.0)) * lam;
      if (mu > 0.0) rhs -= C * U * (mu / 2.0);
      Vec Un = solver.solve(sys.stack(rhs)).head(sys.nu());
      Vec Uavg = 0.5 * (U + Un);
      if (mu > 0.0) diss += dt * mu * Uavg.dot(C * Uavg);
      W += dt * Uavg;
      U = std::move(Un);
      run.max_divergence = std::max(run.max_divergence, (sys.B * U).lpNorm<Eigen::Infinity>() / grid.cell_volume());
      run.sample.values[k - 1].col(static_cast<Eigen::Index>(i)) = phase_mean(grid, U, sys.faces);
      run.energy[i].push_back(energy());
      run.dissipation[i].push_back(diss);
    }
    run.final_displacement.push_back(W);
  }
}

Vec unit_on_faces(const StaggeredGrid& grid, const std::vector<int>& faces, int i, double value) {
  Vec u = Vec::Zero(static_cast<Eigen::Index>(faces.size()));
  for (std::size_t j = 0; j < faces.size(); ++j) {
    int a = 0;
    grid.face_coords(faces[j], &a);
    if (a == i) u[static_cast<Eigen::Index>(j)] = value;
  }
  return u;
}

std::vector<int> all_faces(const StaggeredGrid& grid) {
  std::vector<int> f(grid.total_faces());
  for (int k = 0; k < grid.total_faces(); ++k) f[k] = k;
  return f;
}

}  // namespace

KernelRun solve_solid_kernel(const CellGeometry& cell, double lambda1, double rho_s, const KernelOptions& opt) {
  check_grid(opt);
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) throw ConstraintViolation("solid kernel needs 0 < lambda1 < inf");
  if (!(rho_s > 0.0)) throw ConstraintViolation("solid kernel needs rho_s > 0");
  if (!cell.has_solid()) throw SingularSystem("solid phase is empty");
  StaggeredGrid grid(cell.dim(), cell.n(), Boundary::Periodic);
  auto sys = phase_system(grid, cell, false, rho_s);
  if (sys.faces.empty()) throw SingularSystem("solid phase has no interior faces");
  SpMat Sf = selector(grid.total_faces(), sys.faces);
  Vec solid = Vec::Ones(grid.cells()) - chi_vector(cell);
  SpMat K = SpMat(Sf.transpose()) * gradient_energy(grid, solid) * Sf;
  KernelRun run = make_run(kCellSolidKernel, cell.dim(), opt);
  std::vector<Vec> U0;
  for (int i = 0; i < cell.dim(); ++i) U0.push_back(sys.project(unit_on_faces(grid, sys.faces, i, 1.0 / rho_s), opt.cell.linear));
  run.initial_velocity = U0;
  run_newmark(grid, sys, K, lambda1, SpMat(), 0.0, U0, opt, run);
  run.sample.meta["lambda1"] = lambda1;
  run.sample.meta["rho_s"] = rho_s;
  return run;
}

KernelRun solve_fluid_kernel(const CellGeometry& cell, double mu1, double rho_f, const KernelOptions& opt) {
  check_grid(opt);
  if (!(mu1 > 0.0) || !std::isfinite(mu1)) throw ConstraintViolation("fluid kernel needs 0 < mu1 < inf");
  if (!(rho_f > 0.0)) throw ConstraintViolation("fluid kernel needs rho_f > 0");
  if (!cell.has_fluid()) throw SingularSystem("fluid phase is empty");
  StaggeredGrid grid(cell.dim(), cell.n(), Boundary::Periodic);
  auto sys = phase_system(grid, cell, true, rho_f);
  if (sys.faces.empty()) throw SingularSystem("fluid phase has no interior faces");
  SpMat Sf = selector(grid.total_faces(), sys.faces);
  SpMat K = SpMat(Sf.transpose()) * gradient_energy(grid, chi_vector(cell)) * Sf;
  const double dt = opt.dt;
  LinearSolver solver(saddle_matrix(SpMat(sys.M / dt + K * mu1), sys.B), {}, sys.gauges, opt.cell.linear);
  KernelRun run = make_run(kCellFluidKernel, cell.dim(), opt);
  for (int i = 0; i < cell.dim(); ++i) {
    Vec V = unit_on_faces(grid, sys.faces, i, 1.0 / rho_f);
    run.initial_velocity.push_back(V);
    double diss = 0.0;
    run.energy[i].push_back(0.5 * V.dot(sys.M * V));
    run.dissipation[i].push_back(0.0);
    for (int k = 1; k <= opt.steps; ++k) {
      V = solver.solve(sys.stack(sys.M * V / dt)).head(sys.nu());
      diss += dt * mu1 * V.dot(K * V);
      run.max_divergence = std::max(run.max_divergence, (sys.B * V).lpNorm<Eigen::Infinity>() / grid.cell_volume());
      run.sample.values[k - 1].col(i) = phase_mean(grid, V, sys.faces);
      run.energy[i].push_back(0.5 * V.dot(sys.M * V));
      run.dissipation[i].push_back(diss);
    }
  }
  run.sample.meta["mu1"] = mu1;
  run.sample.meta["rho_f"] = rho_f;
  return run;
}

KernelRun solve_two_phase_kernel(const CellGeometry& cell, double mu1, double lambda1, double rho_f, double rho_s,
                                 TwoPhaseForcing forcing, const KernelOptions& opt) {
  check_grid(opt);
  if (!(mu1 >= 0.0) || !std::isfinite(mu1)) throw ConstraintViolation("two-phase kernel needs 0 <= mu1 < inf");
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1))
    throw ConstraintViolation("two-phase kernel needs 0 <= lambda1 < inf");
  if (!(rho_f > 0.0) || !(rho_s > 0.0)) throw ConstraintViolation("two-phase kernel needs positive densities");
  const double m = cell.m();
  if (forcing == TwoPhaseForcing::PI && m >= 1.0)
    throw SingularSystem("pressure-forced two-phase kernel is undefined without solid (1 - m = 0)");
  StaggeredGrid grid(cell.dim(), cell.n(), Boundary::Periodic);
  const double vol = grid.cell_volume();
  Vec chi = chi_vector(cell);
  Vec rho = chi * rho_f + (Vec::Ones(grid.cells()) - chi) * rho_s;
  Vec rho_face = grid.face_average(rho);
  ConstrainedSystem sys;
  sys.faces = all_faces(grid);
  sys.M = SpMat(rho_face.asDiagonal() * identity(grid.total_faces())) * vol;
  sys.B = grid.divergence() * vol;
  sys.gauges = pressure_gauges(sys.B, sys.nu());
  SpMat Ks = strain_energy(grid, Vec::Ones(grid.cells()) - chi);
  SpMat Kf = strain_energy(grid, chi);
  KernelRun run = make_run(forcing == TwoPhaseForcing::PI ? kCellTwoPhasePI : kCellTwoPhaseF, cell.dim(), opt);
  std::vector<Vec> U0;
  for (int i = 0; i < cell.dim(); ++i) {
    Vec raw = Vec::Zero(grid.total_faces());
    auto seg = raw.segment(grid.face_offset(i), grid.faces(i));
    if (forcing == TwoPhaseForcing::PI)
      seg = -rho_face.segment(grid.face_offset(i), grid.faces(i)).cwiseInverse() / (1.0 - m);
    else
      seg.setOnes();
    U0.push_back(sys.project(raw, opt.cell.linear));
  }
  run.initial_velocity = U0;
  run_newmark(grid, sys, Ks, lambda1, Kf, mu1, U0, opt, run);
  run.sample.meta["mu1"] = mu1;
  run.sample.meta["lambda1"] = lambda1;
  run.sample.meta["rho_f"] = rho_f;
  run.sample.meta["rho_s"] = rho_s;
  return run;
}

}  // namespace homog
