#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "homog/dns.hpp"
#include "homog/errors.hpp"

namespace homog {

namespace {

using Trip = Eigen::Triplet<double>;

// Adjacent cell pairs of the (non-periodic) domain grid.
std::vector<std::pair<int, int>> cell_links(const StaggeredGrid& g) {
  std::vector<std::pair<int, int>> links;
  for (int c = 0; c < g.cells(); ++c) {
    auto ijk = g.cell_coords(c);
    for (int a = 0; a < g.dim(); ++a) {
      if (ijk[a] + 1 >= g.n()) continue;
      auto up = ijk;
      up[a] += 1;
      links.emplace_back(c, g.cell_index(up));
    }
  }
  return links;
}

bool in_phase(const PorousDomain& d, int c, Phase ph) { return (d.chi()[c] != 0) == (ph == Phase::Fluid); }

double safe_ratio(double num, double den) {
  constexpr double tiny = 1e-28;
  if (den <= tiny) return num <= tiny ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

struct ExtensionNorms {
  double sigma2 = 0.0, psi2 = 0.0, gsigma2 = 0.0, gpsi2 = 0.0;
};

Vec harmonic_extension(const PorousDomain& d, const StaggeredGrid& g, const Vec& f, Phase source,
                       ExtensionNorms& norms) {
  const int nc = g.cells();
  const double vol = g.cell_volume(), h = g.h();
  std::vector<int> free_id(nc, -1);
  int nfree = 0, nsrc = 0;
  for (int c = 0; c < nc; ++c) {
    if (in_phase(d, c, source)) {
      ++nsrc;
    } else {
      free_id[c] = nfree++;
    }
  }
  const auto links = cell_links(g);
  Vec out = Vec::Zero(nc);
  if (nsrc > 0) {
    for (int c = 0; c < nc; ++c)
      if (free_id[c] < 0) out[c] = f[c];
    if (nfree > 0) {
      std::vector<Trip> t;
      Vec rhs = Vec::Zero(nfree);
      for (auto [i, j] : links) {
        const int fi = free_id[i], fj = free_id[j];
        if (fi >= 0) t.emplace_back(fi, fi, 1.0);
        if (fj >= 0) t.emplace_back(fj, fj, 1.0);
        if (fi >= 0 && fj >= 0) {
          t.emplace_back(fi, fj, -1.0);
          t.emplace_back(fj, fi, -1.0);
        } else if (fi >= 0) {
          rhs[fi] += f[j];
        } else if (fj >= 0) {
          rhs[fj] += f[i];
        }
      }
      SpMat L(nfree, nfree);
      L.setFromTriplets(t.begin(), t.end());
      Eigen::SimplicialLDLT<SpMat> ldlt(L);
      if (ldlt.info() != Eigen::Success) throw SingularSystem("extension: a free region does not touch the source phase");
      Vec x = ldlt.solve(rhs);
      for (int c = 0; c < nc; ++c)
        if (free_id[c] >= 0) out[c] = x[free_id[c]];
    }
  }
  for (int c = 0; c < nc; ++c) {
    norms.sigma2 += vol * out[c] * out[c];
    if (free_id[c] < 0) norms.psi2 += vol * f[c] * f[c];
  }
  for (auto [i, j] : links) {
    const double ds = (out[i] - out[j]) / h;
    norms.gsigma2 += vol * ds * ds;
    if (free_id[i] < 0 && free_id[j] < 0) {
      const double dp = (f[i] - f[j]) / h;
      norms.gpsi2 += vol * dp * dp;
    }
  }
  return out;
}

}  // namespace

ExtensionResult extend_phase(const PorousDomain& domain, const Vec& cell_field, Phase source) {
  const StaggeredGrid g(domain.dim(), domain.N(), Boundary::Wall);
  if (cell_field.size() != g.cells()) throw ConfigError("extension: field size does not match the domain");
  ExtensionNorms nrm;
  ExtensionResult r;
  r.field = harmonic_extension(domain, g, cell_field, source, nrm);
  r.l2_ratio = std::sqrt(safe_ratio(nrm.sigma2, nrm.psi2));
  r.grad_ratio = std::sqrt(safe_ratio(nrm.gsigma2, nrm.gpsi2));
  return r;
}

ExtensionResult extend_vector(const PorousDomain& domain, const Vec& face_field, Phase source) {
  const StaggeredGrid g(domain.dim(), domain.N(), Boundary::Wall);
  if (face_field.size() != g.total_faces()) throw ConfigError("extension: field size does not match the domain");
  ExtensionNorms nrm;
  ExtensionResult r;
  r.field = Vec::Zero(static_cast<Eigen::Index>(g.cells()) * g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    const Vec cf = g.face_to_cell(a) * face_field;
    r.field.segment(static_cast<Eigen::Index>(a) * g.cells(), g.cells()) = harmonic_extension(domain, g, cf, source, nrm);
  }
  r.l2_ratio = std::sqrt(safe_ratio(nrm.sigma2, nrm.psi2));
  r.grad_ratio = std::sqrt(safe_ratio(nrm.gsigma2, nrm.gpsi2));
  return r;
}

double check_fp_inequality(const PorousDomain& domain, const Vec& phi) {
  const StaggeredGrid g(domain.dim(), domain.N(), Boundary::Wall);
  if (phi.size() != g.cells()) throw ConfigError("Friedrichs-Poincare check: field size does not match the domain");
  for (int c = 0; c < g.cells(); ++c)
    if (!domain.chi()[c] && phi[c] != 0.0) throw ConstraintViolation("field must vanish on solid cells");
  const double vol = g.cell_volume(), h = g.h();
  double l2 = 0.0, grad = 0.0;
  for (int c = 0; c < g.cells(); ++c) {
    l2 += vol * phi[c] * phi[c];
    auto ijk = g.cell_coords(c);
    for (int a = 0; a < g.dim(); ++a) {
      // ghost value -phi across the outer wall
      if (ijk[a] == 0) grad += vol * std::pow(2.0 * phi[c] / h, 2);
      if (ijk[a] == g.n() - 1) grad += vol * std::pow(2.0 * phi[c] / h, 2);
    }
  }
  for (auto [i, j] : cell_links(g)) grad += vol * std::pow((phi[i] - phi[j]) / h, 2);
  if (l2 == 0.0) return 0.0;
  if (grad == 0.0) throw ZeroGradient("nonzero field with vanishing gradient");
  return l2 / (domain.eps() * domain.eps() * grad);
}

bool EstimateReport::bounded(double factor) const {
  if (entries.empty()) return true;
  return max_total <= factor * entries.front().total + 1e-14;
}

EstimateEntry estimate_entry(const DnsRun& run, unsigned seed) {
  const auto& d = run.domain;
  const StaggeredGrid g(d.dim(), d.N(), Boundary::Wall);
  const double vol = g.cell_volume(), dt = run.config.dt;
  Vec chi(g.cells());
  for (int c = 0; c < g.cells(); ++c) chi[c] = d.chi()[c] ? 1.0 : 0.0;
  const Vec solid = Vec::Ones(g.cells()) - chi;
  const SpMat D = g.divergence();
  const SpMat Gs = gradient_energy(g, solid);
  const SpMat Gf = gradient_energy(g, chi);
  const auto& a = run.alpha;

  EstimateEntry e;
  e.eps = d.eps();
  double int_grad = 0.0, int_div = 0.0;
  for (std::size_t n = 0; n < run.states.size(); ++n) {
    const auto& s = run.states[n];
    const Vec du = D * s.w_t;
    e.div_vel_solid = std::max(e.div_vel_solid, std::sqrt(vol * solid.dot(du.cwiseAbs2())));
    e.grad_vel_solid = std::max(e.grad_vel_solid, std::sqrt(std::max(0.0, s.w_t.dot(Gs * s.w_t))));
    e.accel = std::max(e.accel, std::sqrt(vol * s.w_tt.squaredNorm()));
    e.div_vel_fluid = std::max(e.div_vel_fluid, std::sqrt(vol * chi.dot(du.cwiseAbs2())));
    if (n > 0) {
      const Vec da = D * s.w_tt;
      int_grad += dt * std::max(0.0, s.w_tt.dot(Gf * s.w_tt));
      int_div += dt * vol * chi.dot(da.cwiseAbs2());
    }
  }
  e.div_vel_solid *= std::sqrt(a.eta);
  e.grad_vel_solid *= std::sqrt(a.lambda);
  e.accel *= std::sqrt(a.tau);
  e.div_vel_fluid *= std::sqrt(a.p);
  e.grad_accel_fluid = std::sqrt(a.mu * int_grad);
  e.div_accel_fluid = std::sqrt(a.nu * int_div);
  e.total = std::sqrt(a.tau) * (e.div_vel_solid + e.grad_vel_solid + e.accel + e.div_vel_fluid +
                                e.grad_accel_fluid + e.div_accel_fluid);

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vec phi = Vec::Zero(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    const double r = uni(rng);
    if (d.chi()[c]) phi[c] = r;
  }
  e.fp_ratio = check_fp_inequality(d, phi);

  const DnsState& last = run.states.back();
  const auto ext = extend_vector(d, last.w, Phase::Solid);
  e.ext_l2_ratio = ext.l2_ratio;
  e.ext_grad_ratio = ext.grad_ratio;
  const auto fext = extend_vector(d, last.w_t, Phase::Fluid);
  e.fluid_ext_l2_ratio = fext.l2_ratio;
  e.fluid_ext_grad_ratio = fext.grad_ratio;
  e.energy_balance_error = run.max_balance_error;
  return e;
}

EstimateReport make_estimate_report(std::span<const DnsRun> runs) {
  EstimateReport r;
  for (const auto& run : runs) {
    r.entries.push_back(estimate_entry(run));
    const auto& e = r.entries.back();
    r.max_total = std::max(r.max_total, e.total);
    r.max_fp_ratio = std::max(r.max_fp_ratio, e.fp_ratio);
    r.max_ext_ratio = std::max({r.max_ext_ratio, e.ext_l2_ratio, e.ext_grad_ratio});
  }
  return r;
}

Trajectory dns_trajectory(const DnsRun& run) {
  Trajectory tr;
  tr.dim = run.domain.dim();
  tr.N = run.domain.N();
  tr.force_id = run.config.force_id;
  tr.T = run.config.T();
  for (const auto& s : run.states) {
    tr.t.push_back(s.t);
    tr.velocity.push_back(s.w_t);
  }
  return tr;
}

Trajectory macro_trajectory(int dim, int N, const std::vector<MacroState>& states, const std::string& force_id,
                            double T) {
  Trajectory tr;
  tr.dim = dim;
  tr.N = N;
  tr.force_id = force_id;
  tr.T = T;
  for (const auto& s : states) {
    tr.t.push_back(s.t);
    tr.velocity.push_back(s.v);
  }
  return tr;
}

double weak_pairing(const StaggeredGrid& g, const Vec& u, int a, const TestFn& phi) {
  double s = 0.0;
  const int off = g.face_offset(a);
  for (int f = off; f < off + g.faces(a); ++f) {
    const auto x = g.face_position(f);
    s += u[f] * phi(Point{x[0], x[1], x[2]});
  }
  return s * g.cell_volume();
}

double two_scale_pairing(const StaggeredGrid& g, const Vec& u, int a, const TestFn& sigma1, const TestFn& sigma2,
                         double eps) {
  return weak_pairing(g, u, a, [&](const Point& x) {
    Point y{};
    for (int k = 0; k < 3; ++k) {
      const double s = x[k] / eps;
      y[k] = s - std::floor(s);
    }
    return sigma1(x) * sigma2(y);
  });
}

std::vector<TestFn> default_test_functions() {
  std::vector<TestFn> out;
  for (int k1 = 1; k1 <= 2; ++k1)
    for (int k2 = 1; k2 <= 2; ++k2)
      out.emplace_back([k1, k2](const Point& x) {
        return std::sin(k1 * std::numbers::pi * x[0]) * std::sin(k2 * std::numbers::pi * x[1]);
      });
  return out;
}

PairingSeries pairing_series(const Trajectory& tr) {
  const StaggeredGrid g(tr.dim, tr.N, Boundary::Wall);
  const auto tests = default_test_functions();
  PairingSeries out;
  out.t = tr.t;
  out.force_id = tr.force_id;
  out.T = tr.T;
  for (const auto& u : tr.velocity) {
    Vec p(static_cast<Eigen::Index>(tests.size()) * tr.dim);
    int k = 0;
    for (int a = 0; a < tr.dim; ++a)
      for (const auto& phi : tests) p[k++] = weak_pairing(g, u, a, phi);
    out.values.push_back(std::move(p));
  }
  return out;
}

namespace {

Vec interpolate(const std::vector<double>& t, const std::vector<Vec>& v, double s) {
  if (t.size() == 1 || s <= t.front()) return v.front();
  if (s >= t.back()) return v.back();
  auto it = std::upper_bound(t.begin(), t.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - t.begin());
  const double th = (s - t[j - 1]) / (t[j] - t[j - 1]);
  return (1.0 - th) * v[j - 1] + th * v[j];
}

}  // namespace

double pairing_discrepancy(const PairingSeries& fine, const PairingSeries& reference) {
  if (fine.t.empty() || reference.t.empty()) throw IncompatibleRuns("empty pairing series");
  if (fine.values.front().size() != reference.values.front().size())
    throw IncompatibleRuns("pairing series of different dimension");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < fine.t.size(); ++i) {
    const Vec r = interpolate(reference.t, reference.values, fine.t[i]);
    num += (fine.values[i] - r).squaredNorm();
    den += r.squaredNorm();
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

DiscrepancyReport compare_to_homogenized(std::span<const PairingSeries> sweep, std::span<const double> eps,
                                         const PairingSeries& macro) {
  if (sweep.size() != eps.size()) throw IncompatibleRuns("sweep and eps list differ in length");
  DiscrepancyReport r;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& tr = sweep[i];
    if (tr.force_id != macro.force_id) throw IncompatibleRuns("different forcing: " + tr.force_id + " vs " + macro.force_id);
    if (std::abs(tr.T - macro.T) > 1e-12 * std::max(1.0, macro.T))
      throw IncompatibleRuns("different horizons T = " + std::to_string(tr.T) + " vs " + std::to_string(macro.T));
    r.eps.push_back(eps[i]);
    r.discrepancy.push_back(pairing_discrepancy(tr, macro));
  }
  r.monotone_decreasing = true;
  for (std::size_t i = 1; i < r.discrepancy.size(); ++i)
    if (!(r.discrepancy[i] < r.discrepancy[i - 1])) r.monotone_decreasing = false;
  return r;
}

}  // namespace homog
