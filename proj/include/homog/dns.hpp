#pragma once

#include <span>
#include <string>
#include <vector>

#include "homog/geometry.hpp"
#include "homog/macro.hpp"
#include "homog/params.hpp"

namespace homog {

// Actual coefficient values at one eps.
struct DnsScalings {
  double tau = 1.0;
  double nu = 0.0;
  double mu = 1.0;
  double p = 1.0;
  double eta = 1.0;
  double lambda = 1.0;
  double rho_f = 1.0;
  double rho_s = 1.0;
  static DnsScalings from_laws(const ScalingLaws& laws, double eps, double rho_f = 1.0, double rho_s = 1.0);
};

struct DnsConfig {
  double dt = 0.05;
  int steps = 10;
  ForceFn force;          // empty means F = 0
  std::string force_id;   // identifies F when comparing runs
  SolverOptions linear;
  double T() const { return dt * steps; }
};

// Fields on the fine wall grid over Omega: vectors on faces, pressures at cells.
struct DnsState {
  double t = 0.0;
  Vec w, w_t, w_tt;
  Vec p, q, pi;
};

struct DnsRun {
  PorousDomain domain;
  DnsScalings alpha;
  DnsConfig config;
  std::vector<DnsState> states;        // t_0 = 0 .. t_steps
  std::vector<double> energy;          // kinetic + stored, per state
  std::vector<double> work;            // work of F over each step
  std::vector<double> dissipation;     // viscous dissipation over each step
  double max_balance_error = 0.0;      // relative, over all steps
};

inline constexpr int kDnsMaxN = 64;

// Implicit average-acceleration scheme for the displacement-only weak form;
// pressures follow from the state equations. 2D only, N <= 64.
DnsRun solve_eps_problem(const PorousDomain& domain, const DnsScalings& alpha, const DnsConfig& cfg);

// Renormalized scaled pressures p/alpha_p and pi/alpha_eta (each mean-free)
// and beta = <chi div w>.
struct RenormalizedPressures {
  Vec p_scaled, pi_scaled;
  double beta = 0.0;
};
RenormalizedPressures renormalize_pressures(const PorousDomain& domain, const DnsState& s);

// Phase-restricted cell fields.
enum class Phase { Fluid, Solid };

struct ExtensionResult {
  Vec field;               // on all cells, equal to the source on source cells
  double l2_ratio = 0.0;   // ||sigma||_Omega / ||psi||_source, 0 when both vanish
  double grad_ratio = 0.0; // ||grad sigma||_Omega / ||grad psi||_source, 0 when both vanish
};

// Discrete harmonic extension of a cell field from `source` cells into the
// other phase (natural condition on the outer boundary).
ExtensionResult extend_phase(const PorousDomain& domain, const Vec& cell_field, Phase source);
inline ExtensionResult extend_solid(const PorousDomain& domain, const Vec& cell_field) {
  return extend_phase(domain, cell_field, Phase::Solid);
}
// Componentwise extension of a face vector (components averaged to cells);
// ratios combine the components.
ExtensionResult extend_vector(const PorousDomain& domain, const Vec& face_field, Phase source);

// int phi^2 / (eps^2 int |grad phi|^2) for a fluid-supported cell field that
// vanishes on the outer boundary (ghost reflection). 0 for phi = 0.
double check_fp_inequality(const PorousDomain& domain, const Vec& phi);

// Per-eps estimate quantities (sup-in-time and time-integrated norms).
struct EstimateEntry {
  double eps = 0.0;
  double div_vel_solid = 0.0;   // sqrt(a_eta) max_t ||div w_t||_s
  double grad_vel_solid = 0.0;  // sqrt(a_lambda) max_t ||grad w_t||_s
  double accel = 0.0;           // sqrt(a_tau) max_t ||w_tt||
  double div_vel_fluid = 0.0;   // sqrt(a_p) max_t ||div w_t||_f
  double grad_accel_fluid = 0.0;  // sqrt(a_mu) ||chi grad w_tt||_{Omega_T}
  double div_accel_fluid = 0.0;   // sqrt(a_nu) ||chi div w_tt||_{Omega_T}
  double total = 0.0;           // sum of the above times sqrt(a_tau)
  double fp_ratio = 0.0;
  double ext_l2_ratio = 0.0;
  double ext_grad_ratio = 0.0;
  double fluid_ext_l2_ratio = 0.0;
  double fluid_ext_grad_ratio = 0.0;
  double energy_balance_error = 0.0;
};

struct EstimateReport {
  std::vector<EstimateEntry> entries;
  double max_total = 0.0;
  double max_fp_ratio = 0.0;
  double max_ext_ratio = 0.0;
  // max over the sweep <= factor x first entry, for the total norm.
  bool bounded(double factor = 2.0) const;
};

EstimateEntry estimate_entry(const DnsRun& run, unsigned seed = 7);
EstimateReport make_estimate_report(std::span<const DnsRun> runs);

// Velocity trajectory on a 2D or 3D wall grid.
struct Trajectory {
  int dim = 2;
  int N = 0;
  std::vector<double> t;
  std::vector<Vec> velocity;  // face vectors
  std::string force_id;
  double T = 0.0;
};
Trajectory dns_trajectory(const DnsRun& run);
Trajectory macro_trajectory(int dim, int N, const std::vector<MacroState>& states, const std::string& force_id,
                            double T);

// Weak pairing of a face field with phi(x) e_a.
using TestFn = std::function<double(const Point& x)>;
double weak_pairing(const StaggeredGrid& g, const Vec& u, int a, const TestFn& phi);
// Pairing with sigma1(x) sigma2(x/eps) e_a.
double two_scale_pairing(const StaggeredGrid& g, const Vec& u, int a, const TestFn& sigma1, const TestFn& sigma2,
                         double eps);
// sin(k1 pi x) sin(k2 pi y) for k1, k2 in {1, 2}.
std::vector<TestFn> default_test_functions();

// Weak pairings of the velocity with the default test functions, per time
// (component-major: all tests for e_0, then e_1, ...).
struct PairingSeries {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> values;
  std::string force_id;
  double T = 0.0;
};
PairingSeries pairing_series(const Trajectory& tr);

struct DiscrepancyReport {
  std::vector<double> eps;
  std::vector<double> discrepancy;  // relative, per eps
  bool monotone_decreasing = false;
};

// Relative L2-in-time discrepancy of `fine` against `reference`, the
// reference interpolated linearly in time.
double pairing_discrepancy(const PairingSeries& fine, const PairingSeries& reference);
// Throws IncompatibleRuns for a different F or T.
DiscrepancyReport compare_to_homogenized(std::span<const PairingSeries> sweep, std::span<const double> eps,
                                         const PairingSeries& macro);

}  // namespace homog
