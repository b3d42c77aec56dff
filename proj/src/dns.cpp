#include "homog/dns.hpp"

#include <algorithm>
#include <cmath>

#include "homog/errors.hpp"

namespace homog {

DnsScalings DnsScalings::from_laws(const ScalingLaws& laws, double eps, double rho_f, double rho_s) {
  DnsScalings s;
  auto set = [&](const char* key, double& out) {
    if (auto it = laws.find(key); it != laws.end()) out = it->second.at(eps);
  };
  set("tau", s.tau);
  set("nu", s.nu);
  set("mu", s.mu);
  set("p", s.p);
  set("eta", s.eta);
  set("lambda", s.lambda);
  s.rho_f = rho_f;
  s.rho_s = rho_s;
  return s;
}

namespace {

Vec chi_of(const PorousDomain& d) {
  Vec chi(static_cast<int>(d.chi().size()));
  for (int c = 0; c < chi.size(); ++c) chi[c] = d.chi()[c] ? 1.0 : 0.0;
  return chi;
}

void check_scalings(const DnsScalings& a) {
  const double vals[] = {a.tau, a.mu, a.p, a.eta, a.lambda, a.rho_f, a.rho_s};
  for (double v : vals)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConstraintViolation("eps-problem coefficients must be finite and positive");
  if (!(a.nu >= 0.0) || !std::isfinite(a.nu)) throw ConstraintViolation("alpha_nu must be finite and nonnegative");
}

}  // namespace

DnsRun solve_eps_problem(const PorousDomain& domain, const DnsScalings& alpha, const DnsConfig& cfg) {
  if (domain.dim() != 2) throw ResolutionMismatch("the eps-problem solver is 2D only");
  if (domain.N() > kDnsMaxN) throw ResolutionMismatch("the eps-problem grid is capped at 64 per side");
  if (!(cfg.dt > 0.0) || cfg.steps < 0) throw ConfigError("eps-problem needs dt > 0 and steps >= 0");
  check_scalings(alpha);

  const StaggeredGrid g(2, domain.N(), Boundary::Wall);
  const double vol = g.cell_volume(), dt = cfg.dt;
  const int nf = g.total_faces();
  const Vec chi = chi_of(domain);
  const Vec solid = Vec::Ones(chi.size()) - chi;
  const SpMat D = g.divergence();
  const SpMat Dt = D.transpose();

  const Vec rho_face = g.face_average(alpha.rho_f * chi + alpha.rho_s * solid);
  const Vec mass = alpha.tau * vol * rho_face;
  const SpMat C = alpha.mu * strain_energy(g, chi) + SpMat(Dt * (vol * alpha.nu * chi).asDiagonal() * D);
  const Vec bulk = alpha.p * chi + alpha.eta * solid;
  const SpMat K = alpha.lambda * strain_energy(g, solid) + SpMat(Dt * (vol * bulk).asDiagonal() * D);

  SpMat lhs = SpMat(0.5 * C) + SpMat(0.25 * dt * K);
  SpMat Mdt(nf, nf);
  Mdt.reserve(Eigen::VectorXi::Constant(nf, 1));
  for (int f = 0; f < nf; ++f) Mdt.insert(f, f) = mass[f] / dt;
  lhs += Mdt;
  const std::vector<int> fixed = g.boundary_faces();
  SolverOptions lin = cfg.linear;
  const LinearSolver solver(lhs, fixed, {}, lin);

  auto load = [&](double t) -> Vec {
    Vec f = Vec::Zero(nf);
    if (!cfg.force) return f;
    for (int k = 0; k < nf; ++k) {
      int a = 0;
      g.face_coords(k, &a);
      auto x = g.face_position(k);
      f[k] = vol * rho_face[k] * cfg.force(Point{x[0], x[1], x[2]}, t)[a];
    }
    for (int k : fixed) f[k] = 0.0;
    return f;
  };
  auto energy = [&](const Vec& w, const Vec& u) { return 0.5 * u.dot(mass.cwiseProduct(u)) + 0.5 * w.dot(K * w); };
  auto pressures = [&](DnsState& s) {
    const Vec dw = D * s.w, du = D * s.w_t;
    s.p = -alpha.p * chi.cwiseProduct(dw);
    s.q = s.p - alpha.nu * chi.cwiseProduct(du);
    s.pi = -alpha.eta * solid.cwiseProduct(dw);
  };

  DnsRun run;
  run.domain = domain;
  run.alpha = alpha;
  run.config = cfg;
  DnsState s;
  s.w = s.w_t = s.w_tt = Vec::Zero(nf);
  pressures(s);
  run.states.push_back(s);
  run.energy.push_back(0.0);
  Vec f_old = load(0.0);
  for (int n = 1; n <= cfg.steps; ++n) {
    const double t = n * dt;
    const Vec f_new = load(t);
    const Vec fbar = 0.5 * (f_old + f_new);
    const Vec& w = run.states.back().w;
    const Vec& u = run.states.back().w_t;
    Vec rhs = mass.cwiseProduct(u) / dt - 0.5 * (C * u) - K * (w + 0.25 * dt * u) + fbar;
    Vec u_new = solver.solve(rhs);
    DnsState next;
    next.t = t;
    next.w_t = u_new;
    next.w = w + 0.5 * dt * (u + u_new);
    next.w_tt = (u_new - u) / dt;
    pressures(next);
    const Vec ubar = 0.5 * (u + u_new);
    const double work = dt * fbar.dot(ubar);
    const double diss = dt * ubar.dot(C * ubar);
    const double e_new = energy(next.w, next.w_t);
    const double scale = std::max({std::abs(e_new), std::abs(run.energy.back()), std::abs(work), 1e-300});
    const double err = std::abs(e_new - run.energy.back() - work + diss) / scale;
    run.max_balance_error = std::max(run.max_balance_error, err);
    run.energy.push_back(e_new);
    run.work.push_back(work);
    run.dissipation.push_back(diss);
    run.states.push_back(std::move(next));
    f_old = f_new;
  }
  return run;
}

RenormalizedPressures renormalize_pressures(const PorousDomain& domain, const DnsState& s) {
  const StaggeredGrid g(domain.dim(), domain.N(), Boundary::Wall);
  const Vec chi = chi_of(domain);
  const Vec solid = Vec::Ones(chi.size()) - chi;
  const double m = domain.porosity();
  if (!(m > 0.0 && m < 1.0)) throw ConstraintViolation("renormalization needs both phases");
  const Vec dw = g.divergence() * s.w;
  RenormalizedPressures r;
  r.beta = g.cell_volume() * chi.dot(dw);
  r.p_scaled = -chi.cwiseProduct(dw) + (r.beta / m) * chi;
  r.pi_scaled = -solid.cwiseProduct(dw) - (r.beta / (1.0 - m)) * solid;
  return r;
}

}  // namespace homog
