#include "homog/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "homog/coeffs_io.hpp"
#include "homog/errors.hpp"

namespace homog {

using nlohmann::json;
namespace fs = std::filesystem;

void run_jobs(const std::vector<std::function<void()>>& jobs, int workers) {
  const std::size_t n = jobs.size();
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

[[noreturn]] void rethrow_with_stage(const std::string& stage, const Error& e) {
  throw Error(e.kind(), "stage '" + stage + "': " + e.what(), e.error_class());
}

template <class F>
auto in_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    rethrow_with_stage(stage, e);
  }
}

bool has_phase_split(RegimeTag r) {
  switch (r) {
    case RegimeTag::T2_II_LAM_POS:
    case RegimeTag::T2_II_LAM_ZERO:
    case RegimeTag::T3_II_LAM_POS:
    case RegimeTag::T3_II_LAM_ZERO:
    case RegimeTag::T3_III_KERNEL:
    case RegimeTag::T3_III_ZERO: return true;
    default: return false;
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << text;
}

std::string fmt(double x, const char* format = "%.10e") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x == 0.0 ? 0.0 : x);  // no negative zero
  return buf;
}

CellGeometry cell_from(const RunConfig& cfg) {
  if (cfg.geometry.kind == GeometryKind::Mask) {
    CellGeometry g(cfg.geometry.dim, cfg.geometry.n, cfg.geometry.mask);
    validate_connectivity(g);
    return g;
  }
  return build_cell(cfg.geometry);
}

CoefficientOptions coefficient_options(const RunConfig& cfg, int workers) {
  CoefficientOptions o;
  o.kernel_dt = cfg.numerics.effective_kernel_dt();
  o.kernel_steps = std::max(cfg.numerics.kernel_steps(), 1);
  o.cell.tol = cfg.numerics.tol;
  o.cell.linear.tol = cfg.numerics.tol;
  o.workers = workers;
  return o;
}

}  // namespace

EffectiveCoefficients compute_coefficients(const CellGeometry& cell, const ScalingParams& params,
                                           const CoefficientOptions& opt) {
  const Regime regime = classify_regime(params);
  EffectiveCoefficients c;
  c.dim = cell.dim();
  c.m = cell.m();
  c.rho_hat = params.rho_hat(c.m);
  c.params = params;
  c.regime = regime.tag;
  c.geometry_hash = cell.hash();
  const int d = cell.dim();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  KernelOptions ko;
  ko.dt = opt.kernel_dt;
  ko.steps = opt.kernel_steps;
  ko.cell = opt.cell;
  auto needs = [&](const char* p) {
    const auto& l = regime.required_cell_problems;
    return std::find(l.begin(), l.end(), p) != l.end();
  };

  std::vector<StokesCellSolution> ij;
  std::optional<StokesCellSolution> pi, div;
  std::optional<MemoryCellSolution> memory;
  std::optional<KernelRun> solid_kernel, fluid_kernel, tp_pi, tp_f;
  std::optional<NeumannSolution> solid_neumann, fluid_neumann;
  std::optional<StaggeredGrid> grid;
  std::vector<std::function<void()>> jobs;

  if (is_t2_family(regime.tag)) {
    const double mu0 = params.mu0.value();
    jobs.emplace_back([&] {
      StokesCellSolver solver(cell, mu0, params.nu0, params.p_star, opt.cell);
      grid.emplace(solver.grid());
      for (int k = 0; k < solver.grid().strain_components(); ++k) {
        auto [a, b] = solver.grid().component(k);
        ij.push_back(solver.solve(StokesRhs::IJ(a, b)));
      }
      pi = solver.solve(StokesRhs::PI());
      div = solver.solve(StokesRhs::DIV());
    });
    jobs.emplace_back([&] {
      memory = solve_stokes_memory_cell(cell, mu0, params.nu0, params.p_star, opt.kernel_dt, opt.kernel_steps,
                                        opt.cell, false);
    });
  }
  if (needs(kCellSolidKernel))
    jobs.emplace_back([&] { solid_kernel = solve_solid_kernel(cell, params.lambda1.value(), params.rho_s, ko); });
  if (needs(kCellSolidNeumann)) jobs.emplace_back([&] { solid_neumann = solve_neumann_laplace(cell, false, opt.cell); });
  if (needs(kCellFluidKernel))
    jobs.emplace_back([&] { fluid_kernel = solve_fluid_kernel(cell, params.mu1.value(), params.rho_f, ko); });
  if (needs(kCellFluidKernel) || needs(kCellFluidNeumann))
    jobs.emplace_back([&] { fluid_neumann = solve_neumann_laplace(cell, true, opt.cell); });
  if (needs(kCellTwoPhasePI) || needs(kCellTwoPhaseF)) {
    const double mu1 = params.mu1.value(), lam1 = params.lambda1.value();
    jobs.emplace_back([&, mu1, lam1] {
      tp_pi = solve_two_phase_kernel(cell, mu1, lam1, params.rho_f, params.rho_s, TwoPhaseForcing::PI, ko);
    });
    jobs.emplace_back([&, mu1, lam1] {
      tp_f = solve_two_phase_kernel(cell, mu1, lam1, params.rho_f, params.rho_s, TwoPhaseForcing::F, ko);
    });
  }
  run_jobs(jobs, opt.workers);

  if (is_t2_family(regime.tag)) {
    const Vec chi = chi_vector(cell);
    SymRank4Tensor A = assemble_A_f0(*grid, chi, ij);
    c.A_f0_asymmetry = A.asymmetry();
    c.A_f0 = A.symmetrized();
    auto pc = assemble_pressure_coeffs(*grid, chi, params.mu0.value(), ij, pi ? &*pi : nullptr,
                                       div ? &*div : nullptr, memory ? &*memory : nullptr);
    c.B_f0 = pc.B_f0;
    c.B_f1_const = pc.B_f1_const;
    c.C_f0 = pc.C_f0;
    c.a_f0 = pc.a_f0;
    c.a_f1 = pc.a_f1;
    c.B_f2_kernel = pc.B_f2_kernel;
    c.a_f2_kernel = pc.a_f2_kernel;
    if (params.p_star.is_inf()) c.q_closure = pc.closure;
  }
  if (solid_kernel) c.B_s1_kernel = assemble_B_s1(&*solid_kernel);
  if (solid_neumann) {
    c.B_s2 = assemble_B_s2(&*solid_neumann, c.m);
    c.B_s2_face_average =
        (1.0 - c.m) * I - (Eigen::MatrixXd(solid_neumann->face_fraction.asDiagonal()) - solid_neumann->mean_grad);
  }
  if (fluid_neumann) {
    if (fluid_kernel) {
      auto fm = assemble_fluid_matrices(&*fluid_kernel, &*fluid_neumann, c.m);
      c.K_f_kernel = fm.K_f;
      c.B_f2_matrix = fm.B_f2;
    } else {
      c.B_f2_matrix = c.m * I - fluid_neumann->gram;
    }
    c.B_f2_face_average =
        c.m * I - (Eigen::MatrixXd(fluid_neumann->face_fraction.asDiagonal()) - fluid_neumann->mean_grad);
  }
  if (tp_pi || tp_f) {
    auto k = assemble_B_pi_and_forcing(tp_pi ? &*tp_pi : nullptr, tp_f ? &*tp_f : nullptr);
    c.B_pi_kernel = k.B_pi;
    c.F_kernel = k.F_kernel;
  }
  validate_coefficients(c);
  return c;
}

std::vector<MacroState> run_macro(const EffectiveCoefficients& coeffs, const RunConfig& cfg) {
  MacroConfig mc;
  mc.N = cfg.numerics.N;
  mc.dt = cfg.numerics.dt;
  mc.steps = cfg.numerics.steps();
  mc.force = cfg.force.make();
  mc.tol = cfg.numerics.tol;
  mc.viscous = cfg.numerics.viscous;
  MacroSolver solver(coeffs, mc);
  std::vector<MacroState> states{solver.state()};
  for (int n = 0; n < mc.steps; ++n) {
    solver.step();
    states.push_back(solver.state());
  }
  return states;
}

fs::path output_dir(const RunConfig& cfg, const CliOptions& cli) { return cli.out ? *cli.out : cfg.output_dir; }

RunConfig apply_overrides(RunConfig cfg, const CliOptions& cli) {
  if (cli.tol) {
    if (!(*cli.tol > 0.0)) throw ConfigError("--tol must be positive");
    cfg.numerics.tol = *cli.tol;
  }
  if (cli.out) cfg.output_dir = *cli.out;
  return cfg;
}

int cmd_regime(const RunConfig& cfg, std::ostream& out) {
  const Regime r = classify_regime(cfg.params);
  out << to_string(r.tag) << "\n";
  out << "cell problems:";
  for (const auto& p : r.required_cell_problems) out << " " << p;
  out << "\ncoefficients:";
  for (const auto& c : r.required_coefficients) out << " " << c;
  out << "\n";
  return 0;
}

int cmd_cell(const RunConfig& cfg, const CliOptions& cli, std::ostream& out) {
  const fs::path dir = output_dir(cfg, cli);
  fs::create_directories(dir);
  const CellGeometry cell = in_stage("geometry", [&] { return cell_from(cfg); });
  const auto coeffs = in_stage("cell", [&] {
    return compute_coefficients(cell, cfg.params, coefficient_options(cfg, cli.workers));
  });
  save_coefficients(coeffs, dir / "coefficients.json");
  out << "regime " << to_string(coeffs.regime) << ", m = " << coeffs.m << "\n";
  for (const auto& r : coeffs.validation) {
    out << "  " << r.name << ": min eig " << r.min_eig << ", asymmetry " << r.asymmetry << " -> "
        << (r.ok() ? "ok" : "FAILED") << "\n";
  }
  out << "wrote " << (dir / "coefficients.json").string() << "\n";
  return coeffs.valid() ? 0 : 1;
}

int cmd_run(const RunConfig& cfg, const CliOptions& cli, std::ostream& out) {
  using clock = std::chrono::steady_clock;
  const fs::path dir = output_dir(cfg, cli);
  fs::create_directories(dir);
  json timings = json::object();
  auto t0 = clock::now();
  const CellGeometry cell = in_stage("geometry", [&] { return cell_from(cfg); });
  const fs::path coeff_path = dir / "coefficients.json";
  if (!fs::exists(coeff_path)) {
    if (!cfg.has_stage("cell")) throw ConfigError("coefficients file not found: " + coeff_path.string());
    if (int rc = cmd_cell(cfg, cli, out); rc != 0) return rc;
  }
  timings["cell"] = std::chrono::duration<double>(clock::now() - t0).count();
  const EffectiveCoefficients coeffs = load_coefficients(coeff_path);
  if (coeffs.geometry_hash != cell.hash())
    throw HashMismatch("coefficients were built from geometry " + coeffs.geometry_hash + ", config describes " +
                       cell.hash());
  const Regime regime = classify_regime(cfg.params);
  if (regime.tag != coeffs.regime)
    throw ConfigError("coefficients belong to regime " + to_string(coeffs.regime) + ", config selects " +
                      to_string(regime.tag));

  t0 = clock::now();
  const auto states = in_stage("macro", [&] { return run_macro(coeffs, cfg); });
  timings["macro"] = std::chrono::duration<double>(clock::now() - t0).count();

  const MacroOperators ops(coeffs.dim, cfg.numerics.N);
  const bool split = has_phase_split(coeffs.regime);
  std::ostringstream ts;
  ts << "# schema=" << kTimeseriesSchema << " regime=" << to_string(coeffs.regime) << "\n";
  ts << "t,step,v_norm,w_norm";
  if (split) ts << ",w_s_norm,w_f_norm";
  ts << ",p_norm,q_norm,pi_norm,boundary_max,pressure_residual,continuity_residual\n";
  for (const auto& s : states) {
    double bmax = 0.0;
    for (int f : ops.boundary()) {
      bmax = std::max(bmax, std::abs(is_t2_family(coeffs.regime) ? s.v[f] : s.w[f]));
      if (split && is_t2_family(coeffs.regime)) bmax = std::max(bmax, std::abs(s.w_s[f]));
    }
    ts << fmt(s.t, "%.6f") << "," << s.step << "," << fmt(ops.face_norm(s.v)) << "," << fmt(ops.face_norm(s.w));
    if (split) ts << "," << fmt(ops.face_norm(s.w_s)) << "," << fmt(ops.face_norm(s.w_f));
    ts << "," << fmt(ops.cell_norm(s.p)) << "," << fmt(ops.cell_norm(s.q)) << "," << fmt(ops.cell_norm(s.pi)) << ","
       << fmt(bmax) << "," << fmt(s.pressure_residual) << "," << fmt(s.continuity_residual) << "\n";
  }
  write_file(dir / "timeseries.csv", ts.str());

  const Trajectory traj = macro_trajectory(coeffs.dim, cfg.numerics.N, states, cfg.force.id(), cfg.numerics.T);
  const PairingSeries ps = pairing_series(traj);
  std::ostringstream pc;
  pc << "# schema=" << kPairingsSchema << " force=" << ps.force_id << " T=" << fmt(ps.T, "%.17g") << "\n";
  pc << "t";
  const int ntest = static_cast<int>(default_test_functions().size());
  for (int a = 0; a < coeffs.dim; ++a)
    for (int k = 0; k < ntest; ++k) pc << ",e" << a << "_phi" << k;
  pc << "\n";
  for (std::size_t i = 0; i < ps.t.size(); ++i) {
    pc << fmt(ps.t[i], "%.17g");
    for (Eigen::Index k = 0; k < ps.values[i].size(); ++k) pc << "," << fmt(ps.values[i][k], "%.17g");
    pc << "\n";
  }
  write_file(dir / "pairings.csv", pc.str());

  fs::create_directories(dir / "fields");
  const auto& last = states.back();
  std::vector<std::pair<std::string, const Vec*>> fields{{"v", &last.v}, {"w", &last.w}, {"p", &last.p},
                                                         {"q", &last.q}, {"pi", &last.pi}};
  if (split) {
    fields.emplace_back("w_s", &last.w_s);
    fields.emplace_back("w_f", &last.w_f);
  }
  std::vector<std::string> files{"coefficients.json", "timeseries.csv", "pairings.csv"};
  for (const auto& [name, v] : fields) {
    std::ostringstream fo;
    fo << "# schema=" << kFieldSchema << " name=" << name << " N=" << cfg.numerics.N << " size=" << v->size()
       << " t=" << fmt(last.t, "%.17g") << "\n";
    for (Eigen::Index i = 0; i < v->size(); ++i) fo << fmt((*v)[i], "%.17g") << "\n";
    write_file(dir / "fields" / (name + ".txt"), fo.str());
    files.push_back("fields/" + name + ".txt");
  }

  json run;
  run["schema"] = kRunSchema;
  run["regime"] = to_string(coeffs.regime);
  run["N"] = cfg.numerics.N;
  run["dt"] = cfg.numerics.dt;
  run["steps"] = cfg.numerics.steps();
  run["T"] = cfg.numerics.T;
  run["force_id"] = cfg.force.id();
  run["geometry_hash"] = cell.hash();
  run["config_hash"] = cfg.hash();
  run["final"] = {{"v_norm", ops.face_norm(last.v)},
                  {"w_norm", ops.face_norm(last.w)},
                  {"pressure_residual", last.pressure_residual},
                  {"continuity_residual", last.continuity_residual}};
  write_file(dir / "run.json", run.dump(1) + "\n");
  files.push_back("run.json");

  // manifest last
  json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["config_hash"] = cfg.hash();
  manifest["geometry_hash"] = cell.hash();
  manifest["regime"] = to_string(coeffs.regime);
  manifest["schemas"] = {{"coefficients", kCoeffsSchema}, {"run", kRunSchema},
                         {"timeseries", kTimeseriesSchema}, {"pairings", kPairingsSchema},
                         {"field", kFieldSchema}};
  json list = json::array();
  for (const auto& f : files) list.push_back({{"path", f}, {"sha256", sha256_hex(read_file(dir / f))}});
  manifest["files"] = list;
  manifest["content_hash"] = sha256_hex(manifest.dump());
  manifest["timings"] = timings;
  write_file(dir / "manifest.json", manifest.dump(1) + "\n");

  out << "regime " << to_string(coeffs.regime) << ": " << cfg.numerics.steps() << " steps to T = " << cfg.numerics.T
      << ", final |v| = " << ops.face_norm(last.v) << "\n";
  out << "wrote " << dir.string() << "\n";
  return 0;
}

PairingSeries read_pairings(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("# schema=", 0) != 0) throw SchemaError("pairings file without schema line");
  std::istringstream head(line.substr(2));
  std::string tok;
  PairingSeries ps;
  std::string schema;
  while (head >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "schema") schema = val;
    else if (key == "force") ps.force_id = val;
    else if (key == "T") ps.T = std::stod(val);
  }
  if (schema != kPairingsSchema) throw SchemaError("unknown pairings schema '" + schema + "'");
  std::getline(in, line);  // column header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() < 2) throw SchemaError("malformed pairings row");
    ps.t.push_back(row[0]);
    Vec v(static_cast<Eigen::Index>(row.size() - 1));
    for (std::size_t k = 1; k < row.size(); ++k) v[static_cast<Eigen::Index>(k - 1)] = row[k];
    ps.values.push_back(std::move(v));
  }
  return ps;
}

int cmd_compare(const RunConfig& cfg, const CliOptions& cli, std::ostream& out) {
  const fs::path dir = output_dir(cfg, cli);
  const fs::path run_path = dir / "run.json";
  if (!fs::exists(run_path) || !fs::exists(dir / "pairings.csv"))
    throw ConfigError("macro run outputs not found in " + dir.string() + "; run `homog run` first");
  json run;
  try {
    run = json::parse(read_file(run_path));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("run.json: ") + e.what());
  }
  if (run.value("schema", "") != kRunSchema) throw SchemaError("unknown run schema");
  const std::string run_force = run.at("force_id").get<std::string>();
  const double run_T = run.at("T").get<double>();
  if (run_force != cfg.force.id())
    throw IncompatibleRuns("macro run used forcing " + run_force + ", config has " + cfg.force.id());
  if (std::abs(run_T - cfg.numerics.T) > 1e-12 * std::max(1.0, run_T))
    throw IncompatibleRuns("macro run horizon T = " + fmt(run_T, "%g") + ", config has T = " +
                           fmt(cfg.numerics.T, "%g"));
  const PairingSeries macro = read_pairings(dir / "pairings.csv");
  if (!cfg.params.laws) throw ConfigError("compare needs exponent laws in a [scaling] section");
  if (cfg.geometry.dim != 2) throw ConfigError("compare runs the 2D eps-problem only");

  const CellGeometry cell = cell_from(cfg);
  const int N = cfg.dns.N;
  const std::size_t ne = cfg.dns.eps.size();
  std::vector<DnsRun> runs(ne);
  std::vector<PairingSeries> series(ne);
  std::vector<double> renorm(ne, 0.0);
  const bool renormalize = cfg.params.p_star.is_inf() || cfg.params.eta0.is_inf();
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < ne; ++i) {
    jobs.emplace_back([&, i] {
      const double eps = cfg.dns.eps[i];
      const int k = static_cast<int>(std::lround(1.0 / eps));
      PorousDomain dom = (N % (k * cell.n()) == 0)
                             ? tile(cell, k, N)
                             : (N % k == 0 ? tile(build_cell(cfg.geometry.at_resolution(N / k)), k, N)
                                           : throw ResolutionMismatch("DNS grid " + std::to_string(N) +
                                                                      " not divisible by 1/eps = " + std::to_string(k)));
      DnsConfig dc;
      dc.dt = cfg.numerics.dt;
      dc.steps = cfg.numerics.steps();
      dc.force = cfg.force.make();
      dc.force_id = cfg.force.id();
      const auto alpha = DnsScalings::from_laws(*cfg.params.laws, eps, cfg.params.rho_f, cfg.params.rho_s);
      runs[i] = solve_eps_problem(dom, alpha, dc);
      series[i] = pairing_series(dns_trajectory(runs[i]));
      if (renormalize && dom.porosity() > 0.0 && dom.porosity() < 1.0) {
        const auto r = renormalize_pressures(dom, runs[i].states.back());
        const double vol = std::pow(dom.h(), dom.dim());
        renorm[i] = std::max(std::abs(r.p_scaled.sum() * vol), std::abs(r.pi_scaled.sum() * vol));
      }
    });
  }
  in_stage("compare", [&] {
    run_jobs(jobs, cli.workers);
    return 0;
  });
  const EstimateReport est = make_estimate_report(runs);
  const DiscrepancyReport disc = compare_to_homogenized(series, cfg.dns.eps, macro);

  json rep;
  rep["schema"] = kCompareSchema;
  rep["regime"] = run.at("regime");
  rep["dns_N"] = N;
  json entries = json::array();
  for (std::size_t i = 0; i < ne; ++i) {
    const auto& e = est.entries[i];
    json j = {{"eps", e.eps},
              {"div_vel_solid", e.div_vel_solid},
              {"grad_vel_solid", e.grad_vel_solid},
              {"accel", e.accel},
              {"div_vel_fluid", e.div_vel_fluid},
              {"grad_accel_fluid", e.grad_accel_fluid},
              {"div_accel_fluid", e.div_accel_fluid},
              {"total", e.total},
              {"fp_ratio", e.fp_ratio},
              {"extension_l2_ratio", e.ext_l2_ratio},
              {"extension_grad_ratio", e.ext_grad_ratio},
              {"fluid_extension_l2_ratio", e.fluid_ext_l2_ratio},
              {"fluid_extension_grad_ratio", e.fluid_ext_grad_ratio},
              {"energy_balance_error", e.energy_balance_error},
              {"discrepancy", disc.discrepancy[i]}};
    if (renormalize) j["renormalized_mean"] = renorm[i];
    entries.push_back(j);
  }
  rep["entries"] = entries;
  rep["estimates_bounded"] = est.bounded();
  rep["max_total"] = est.max_total;
  rep["discrepancy_monotone"] = disc.monotone_decreasing;
  rep["pass"] = est.bounded() && disc.monotone_decreasing;
  write_file(dir / "compare.json", rep.dump(1) + "\n");

  for (std::size_t i = 0; i < ne; ++i)
    out << "eps " << cfg.dns.eps[i] << ": scaled norm " << est.entries[i].total << ", discrepancy "
        << disc.discrepancy[i] << "\n";
  out << "estimates bounded: " << (est.bounded() ? "yes" : "no")
      << ", discrepancy decreasing: " << (disc.monotone_decreasing ? "yes" : "no") << "\n";
  out << "wrote " << (dir / "compare.json").string() << "\n";
  return 0;
}

}  // namespace homog
