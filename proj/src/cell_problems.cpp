#include "homog/cell_problems.hpp"

#include <cmath>

#include "homog/errors.hpp"

namespace homog {

const Eigen::MatrixXd& KernelSample::at_step(int k) const {
  if (values.empty()) throw MissingSolution("kernel '" + problem + "' has no samples");
  if (k < 0 || k > steps()) throw KernelGridMismatch("kernel '" + problem + "' has no sample at step " + std::to_string(k));
  return values[k == 0 ? 0 : k - 1];
}

KernelSample KernelSample::zeros(const std::string& problem, int rows, int cols, double dt, int steps) {
  KernelSample k;
  k.problem = problem;
  k.dt = dt;
  for (int s = 1; s <= steps; ++s) {
    k.times.push_back(s * dt);
    k.values.push_back(Eigen::MatrixXd::Zero(rows, cols));
  }
  return k;
}

std::string StokesRhs::name() const {
  switch (kind) {
    case StokesForcing::IJ: return "IJ(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
    case StokesForcing::PI: return "PI";
    case StokesForcing::DIV: return "DIV";
  }
  return "?";
}

Vec chi_vector(const CellGeometry& g) {
  Vec chi(g.cells());
  for (int c = 0; c < g.cells(); ++c) chi[c] = g.fluid(c) ? 1.0 : 0.0;
  return chi;
}

std::vector<int> phase_cells(const CellGeometry& g, bool fluid) {
  std::vector<int> out;
  for (int c = 0; c < g.cells(); ++c)
    if (g.fluid(c) == fluid) out.push_back(c);
  return out;
}

std::vector<int> interior_faces(const StaggeredGrid& grid, const CellGeometry& g, bool fluid) {
  std::vector<int> out;
  for (int f = 0; f < grid.total_faces(); ++f) {
    int a = 0;
    auto ijk = grid.face_coords(f, &a);
    auto lo = ijk;
    lo[a] -= 1;
    if (g.fluid(grid.cell_index(ijk)) == fluid && g.fluid(grid.cell_index(lo)) == fluid) out.push_back(f);
  }
  return out;
}

Eigen::MatrixXd mean_strain(const StaggeredGrid& grid, const Vec& w, const Vec& V) {
  const int d = grid.dim();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < grid.strain_components(); ++k) {
    auto [a, b] = grid.component(k);
    double s = grid.point_weights(k, w).dot(grid.strain(k) * V) * grid.cell_volume();
    M(a, b) = s;
    M(b, a) = s;
  }
  return M;
}

Eigen::VectorXd mean_faces(const StaggeredGrid& grid, const Vec& V, const std::vector<int>& faces) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(grid.dim());
  for (int f : faces) {
    int a = 0;
    grid.face_coords(f, &a);
    m[a] += V[f];
  }
  return m * grid.cell_volume();
}

Eigen::VectorXd mean_faces(const StaggeredGrid& grid, const Vec& V) {
  Eigen::VectorXd m(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) m[a] = V.segment(grid.face_offset(a), grid.faces(a)).sum() * grid.cell_volume();
  return m;
}

namespace {

SpMat row_select(const SpMat& M, const std::vector<int>& rows) {
  return SpMat(selector(static_cast<int>(M.rows()), rows).transpose() * M);
}

// Participating faces: touched by a chi-weighted strain term.
std::vector<char> participating_faces(const SpMat& K) {
  std::vector<char> p(K.rows(), 0);
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it)
      if (it.value() != 0.0) p[it.row()] = 1;
  return p;
}

// Shift each component to zero mean over fluid-weighted faces, then clear
// faces outside the stencil support.
void normalize_fluid(const StaggeredGrid& grid, const Vec& face_chi, const std::vector<char>& part, Vec& V) {
  for (int a = 0; a < grid.dim(); ++a) {
    auto seg = V.segment(grid.face_offset(a), grid.faces(a));
    auto w = face_chi.segment(grid.face_offset(a), grid.faces(a));
    const double ws = w.sum();
    if (ws > 0) seg.array() -= w.dot(seg) / ws;
  }
  for (int f = 0; f < grid.total_faces(); ++f)
    if (!part[f]) V[f] = 0.0;
}

double fluid_mean_check(const StaggeredGrid& grid, const Vec& face_chi, const Vec& V) {
  double worst = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    double s = face_chi.segment(grid.face_offset(a), grid.faces(a)).dot(V.segment(grid.face_offset(a), grid.faces(a)));
    worst = std::max(worst, std::abs(s * grid.cell_volume()));
  }
  return worst;
}

}  // namespace

StokesCellSolver::StokesCellSolver(const CellGeometry& cell, double mu0, ExtendedParam nu0, ExtendedParam p_star,
                                   const CellSolverOptions& opt)
    : cell_(cell), grid_(cell.dim(), cell.n(), Boundary::Periodic), mu0_(mu0), nu0_(nu0), p_star_(p_star), opt_(opt) {
  if (!(mu0 > 0.0)) throw ConstraintViolation("cell Stokes problems need mu0 > 0");
  if (!cell.has_fluid()) throw SingularSystem("fluid phase is empty");
  if (cell.fluid_connectivity().components != 1) throw SingularSystem("fluid phase is disconnected");
  chi_ = chi_vector(cell);
  fluid_cells_ = phase_cells(cell, true);
  D_ = grid_.divergence();
  const double vol = grid_.cell_volume();
  SpMat Kchi = strain_energy(grid_, chi_);
  const bool incompressible = p_star_.is_inf();
  K_ = Kchi;
  if (!incompressible && nu0_.value() > 0.0) {
    SpMat DtD = SpMat(D_.transpose() * chi_.asDiagonal() * D_) * (vol * nu0_.value() / mu0_);
    K_ += DtD;
  }
  participating_ = participating_faces(Kchi);
  SpMat I(grid_.total_faces(), grid_.total_faces());
  I.setIdentity();
  SpMat A = K_ + I * (opt_.regularization * vol);
  if (incompressible) {
    B_ = row_select(D_, fluid_cells_) * vol;
    auto groups = constant_null_groups(B_);
    for (auto& g : groups) {
      for (int& r : g) r += grid_.total_faces();
      gauges_.push_back(g);
    }
    SpMat M = saddle_matrix(A, SpMat(-B_));
    solver_.emplace(M, std::vector<int>{}, gauges_, opt_.linear);
  } else {
    solver_.emplace(A, std::vector<int>{}, std::vector<std::vector<int>>{}, opt_.linear);
  }
}

Vec StokesCellSolver::load(const StokesRhs& rhs) const {
  const double vol = grid_.cell_volume();
  const int nf = grid_.total_faces();
  Vec l = Vec::Zero(nf);
  switch (rhs.kind) {
    case StokesForcing::IJ:
      for (int k = 0; k < grid_.strain_components(); ++k) {
        auto [a, b] = grid_.component(k);
        // J^{ij}_{ab} = (d_ia d_jb + d_ib d_ja) / 2
        double J = 0.5 * (double(rhs.i == a && rhs.j == b) + double(rhs.i == b && rhs.j == a));
        if (J == 0.0) continue;
        const double c = grid_.is_shear(k) ? 2.0 : 1.0;
        l -= SpMat(grid_.strain(k).transpose()) * grid_.point_weights(k, chi_) * (c * J * vol);
      }
      break;
    case StokesForcing::PI: {
      if (cell_.m() < 1.0) {
        Vec s = (Vec::Ones(chi_.size()) - chi_) / (1.0 - cell_.m());
        l = SpMat(D_.transpose()) * s * (vol / mu0_);
      }
      break;
    }
    case StokesForcing::DIV:
      if (!p_star_.is_inf() && nu0_.value() > 0.0)
        l = SpMat(D_.transpose()) * chi_ * (-nu0_.value() / mu0_ * vol);
      break;
  }
  return l;
}

void StokesCellSolver::normalize(Vec& V) const {
  normalize_fluid(grid_, grid_.face_average(chi_), participating_, V);
}

StokesCellSolution StokesCellSolver::solve(const StokesRhs& rhs) const {
  const int nf = grid_.total_faces();
  const int nfl = static_cast<int>(fluid_cells_.size());
  const double vol = grid_.cell_volume();
  StokesCellSolution out;
  out.rhs = rhs;
  Vec l = load(rhs);
  Vec divV;
  if (p_star_.is_inf()) {
    const double g = rhs.kind == StokesForcing::DIV ? -1.0 : 0.0;
    Vec b(nf + nfl);
    b.head(nf) = l;
    b.tail(nfl).setConstant(-vol * g);
    for (const auto& grp : gauges_) {
      double s = 0.0;
      for (int r : grp) s += b[r];
      if (std::abs(s) > 1e-12)
        throw SingularSystem("incompatible " + rhs.name() +
                             " constraint: the prescribed fluid divergence has no periodic solution without solid");
    }
    Vec x = solver_->solve(b);
    out.V = x.head(nf);
    Vec qh = x.tail(nfl);
    Vec r = K_ * out.V - SpMat(B_.transpose()) * qh - l;
    out.residual_momentum = r.lpNorm<Eigen::Infinity>() / std::max(l.lpNorm<Eigen::Infinity>(), vol);
    divV = D_ * out.V;
    double mass = 0.0;
    for (int c : fluid_cells_) mass = std::max(mass, std::abs(divV[c] - g));
    out.residual_mass = mass;
    const double scale = rhs.kind == StokesForcing::IJ ? 1.0 : mu0_;
    out.Q = Vec::Zero(grid_.cells());
    for (int j = 0; j < nfl; ++j) out.Q[fluid_cells_[j]] = scale * qh[j];
  } else {
    out.V = solver_->solve(l);
    Vec r = K_ * out.V - l;
    out.residual_momentum = r.lpNorm<Eigen::Infinity>() / std::max(l.lpNorm<Eigen::Infinity>(), vol);
    divV = D_ * out.V;
    const double nu = nu0_.value();
    out.Q = Vec::Zero(grid_.cells());
    for (int c : fluid_cells_) {
      switch (rhs.kind) {
        case StokesForcing::IJ: out.Q[c] = -(nu / mu0_) * divV[c]; break;
        case StokesForcing::PI: out.Q[c] = -nu * divV[c]; break;
        case StokesForcing::DIV: out.Q[c] = -nu * (divV[c] + 1.0); break;
      }
    }
    out.residual_mass = 0.0;
  }
  normalize(out.V);
  out.normalization_check = fluid_mean_check(grid_, grid_.face_average(chi_), out.V);
  if (out.residual_momentum > std::max(opt_.tol, 1e-12) * 1e4)
    throw NoConvergence(rhs.name() + " momentum residual " + std::to_string(out.residual_momentum));
  return out;
}

double StokesCellSolver::energy(const Vec& V1, const Vec& V2) const { return V1.dot(K_ * V2); }

StokesCellSolution solve_stokes_cell(const CellGeometry& cell, const StokesRhs& rhs, double mu0, ExtendedParam nu0,
                                     ExtendedParam p_star, const CellSolverOptions& opt) {
  StokesCellSolver s(cell, mu0, nu0, p_star, opt);
  return s.solve(rhs);
}

MemoryCellSolution solve_stokes_memory_cell(const CellGeometry& cell, double mu0, ExtendedParam nu0,
                                            ExtendedParam p_star, double dt, int steps, const CellSolverOptions& opt,
                                            bool keep_fields) {
  MemoryCellSolution out;
  const int d = cell.dim();
  if (!(dt > 0.0) || steps < 1) throw KernelGridMismatch("memory problem needs dt > 0 and at least one step");
  out.mean_strain = KernelSample::zeros("MEMORY", d, d, dt, steps);
  out.mean_div = KernelSample::zeros("MEMORY", 1, 1, dt, steps);
  for (int k = 0; k <= steps; ++k) out.times.push_back(k * dt);
  if (p_star.is_inf()) {
    out.zero = true;
    return out;
  }
  if (!(mu0 > 0.0)) throw ConstraintViolation("memory problem needs mu0 > 0");
  if (!cell.has_fluid()) throw SingularSystem("fluid phase is empty");
  const double ps = p_star.value();
  const double nu = nu0.value();
  StaggeredGrid grid(cell.dim(), cell.n(), Boundary::Periodic);
  const double vol = grid.cell_volume();
  Vec chi = chi_vector(cell);
  Vec face_chi = grid.face_average(chi);
  SpMat D = grid.divergence();
  SpMat Dt = D.transpose();
  SpMat Kchi = strain_energy(grid, chi) * mu0;
  SpMat DtD = SpMat(Dt * chi.asDiagonal() * D) * vol;
  auto part = participating_faces(Kchi);
  SpMat I(grid.total_faces(), grid.total_faces());
  I.setIdentity();
  SpMat reg = I * (opt.regularization * vol * mu0);
  LinearSolver initial(SpMat(Kchi + DtD * nu + reg), {}, {}, opt.linear);
  LinearSolver stepper(SpMat(Kchi + DtD * (nu + dt * ps) + reg), {}, {}, opt.linear);

  Vec P = chi * ps;
  auto record = [&](const Vec& V, const Vec& Pn, int k) {
    Vec divV = D * V;
    if (keep_fields) {
      out.V.push_back(V);
      out.P.push_back(Pn);
      out.Q.push_back(Pn - nu * chi.cwiseProduct(divV));
    }
    if (k > 0) {
      out.mean_strain.values[k - 1] = mean_strain(grid, chi, V);
      out.mean_div.values[k - 1](0, 0) = chi.dot(divV) * vol;
    }
  };
  Vec V = initial.solve(Dt * chi.cwiseProduct(P) * vol);
  normalize_fluid(grid, face_chi, part, V);
  record(V, P, 0);
  for (int k = 1; k <= steps; ++k) {
    V = stepper.solve(Dt * chi.cwiseProduct(P) * vol);
    Vec divV = D * V;
    P -= (dt * ps) * chi.cwiseProduct(divV);
    normalize_fluid(grid, face_chi, part, V);
    record(V, P, k);
  }
  out.mean_strain.meta["mu0"] = mu0;
  out.mean_strain.meta["p_star"] = ps;
  out.mean_div.meta = out.mean_strain.meta;
  return out;
}

NeumannSolution solve_neumann_laplace(const CellGeometry& cell, bool fluid_phase, const CellSolverOptions& opt) {
  NeumannSolution out;
  out.fluid_phase = fluid_phase;
  if (fluid_phase ? !cell.has_fluid() : !cell.has_solid())
    throw SingularSystem(std::string(fluid_phase ? "fluid" : "solid") + " phase is empty");
  StaggeredGrid grid(cell.dim(), cell.n(), Boundary::Periodic);
  const int d = cell.dim();
  const double vol = grid.cell_volume();
  auto pc = phase_cells(cell, fluid_phase);
  auto pf = interior_faces(grid, cell, fluid_phase);
  SpMat Dp = SpMat(selector(grid.cells(), pc).transpose() * grid.divergence() * selector(grid.total_faces(), pf));
  SpMat L = Dp * SpMat(Dp.transpose());
  auto gauges = constant_null_groups(Dp);
  LinearSolver solver(L, {}, gauges, opt.linear);
  out.mean_grad = Eigen::MatrixXd::Zero(d, d);
  out.gram = Eigen::MatrixXd::Zero(d, d);
  out.face_fraction = Eigen::VectorXd::Zero(d);
  std::vector<int> axis(pf.size());
  for (std::size_t j = 0; j < pf.size(); ++j) grid.face_coords(pf[j], &axis[j]);
  std::vector<Vec> proj(d);
  for (int i = 0; i < d; ++i) {
    Vec g = Vec::Zero(static_cast<Eigen::Index>(pf.size()));
    for (std::size_t j = 0; j < pf.size(); ++j)
      if (axis[j] == i) g[j] = 1.0;
    out.face_fraction[i] = g.sum() * vol;
    Vec rhs = -(Dp * g);
    double compat = 0.0;
    for (const auto& grp : gauges) {
      double s = 0.0;
      for (int r : grp) s += rhs[r];
      compat = std::max(compat, std::abs(s));
    }
    out.compatibility = std::max(out.compatibility, compat * vol);
    Vec R = solver.solve(rhs);
    out.residual = std::max(out.residual, (L * R - rhs).lpNorm<Eigen::Infinity>());
    Vec grad = -(SpMat(Dp.transpose()) * R);
    for (std::size_t j = 0; j < pf.size(); ++j) out.mean_grad(axis[j], i) += grad[j] * vol;
    proj[i] = g - grad;
    Vec Rfull = Vec::Zero(grid.cells());
    for (std::size_t j = 0; j < pc.size(); ++j) Rfull[pc[j]] = R[j];
    Vec Gfull = Vec::Zero(grid.total_faces());
    for (std::size_t j = 0; j < pf.size(); ++j) Gfull[pf[j]] = grad[j];
    out.R.push_back(std::move(Rfull));
    out.grad_R.push_back(std::move(Gfull));
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.gram(i, j) = proj[i].dot(proj[j]) * vol;
  return out;
}

}  // namespace homog
