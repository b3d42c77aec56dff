#include "homog/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "homog/errors.hpp"

namespace homog {

namespace pt = boost::property_tree;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

bool ForceConfig::is_zero() const {
  return mode == "zero" || std::all_of(amplitude.begin(), amplitude.end(), [](double a) { return a == 0.0; });
}

ForceFn ForceConfig::make() const {
  if (is_zero()) return {};
  const auto amp = amplitude;
  const bool sinsin = mode == "sinsin";
  const std::string tm = time;
  return [amp, sinsin, tm](const Point& x, double t) {
    double s = 1.0;
    if (sinsin) s = std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
    double g = 1.0;
    if (tm == "ramp") g = t;
    else if (tm == "sin") g = std::sin(std::numbers::pi * t);
    return Point{amp[0] * s * g, amp[1] * s * g, amp[2] * s * g};
  };
}

std::string ForceConfig::id() const {
  if (is_zero()) return "zero";
  std::ostringstream os;
  os << std::setprecision(17) << mode << ":" << time << ":" << amplitude[0] << "," << amplitude[1] << ","
     << amplitude[2];
  return os.str();
}

int NumericsConfig::steps() const { return static_cast<int>(std::lround(T / dt)); }

int NumericsConfig::kernel_steps() const {
  const double kT = kernel_T > 0.0 ? kernel_T : T;
  return static_cast<int>(std::lround(kT / effective_kernel_dt()));
}

bool RunConfig::has_stage(const std::string& s) const {
  return std::find(stages.begin(), stages.end(), s) != stages.end();
}

std::string RunConfig::hash() const { return sha256_hex(text); }

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream is(s);
  while (is >> tok) {
    tok.erase(std::remove(tok.begin(), tok.end(), ','), tok.end());
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' is not a number: '" + v + "'");
  }
}

// Accepts a decimal or a fraction a/b.
double parse_number(const std::string& key, const std::string& v) {
  if (auto slash = v.find('/'); slash != std::string::npos)
    return to_double(key, v.substr(0, slash)) / to_double(key, v.substr(slash + 1));
  return to_double(key, v);
}

template <class T>
T get_num(const pt::ptree& tree, const std::string& key, T fallback) {
  auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  double x = parse_number(key, *v);
  if constexpr (std::is_integral_v<T>) {
    if (x != std::floor(x)) throw ConfigError("'" + key + "' must be an integer");
    return static_cast<T>(x);
  } else {
    return x;
  }
}

ExtendedParam get_param(const pt::ptree& tree, const std::string& key, ExtendedParam fallback) {
  auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    return ExtendedParam::parse(*v);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' is not a parameter value: '" + *v + "'");
  }
}

void check_stages(const std::vector<std::string>& stages) {
  for (const auto& s : stages)
    if (std::find(kStageOrder.begin(), kStageOrder.end(), s) == kStageOrder.end())
      throw ConfigError("unknown pipeline stage '" + s + "'");
  // every listed stage needs its predecessors
  for (const auto& s : stages) {
    auto it = std::find(kStageOrder.begin(), kStageOrder.end(), s);
    for (auto p = kStageOrder.begin(); p != it; ++p)
      if (std::find(stages.begin(), stages.end(), *p) == stages.end())
        throw ConfigError("pipeline stage '" + s + "' needs stage '" + *p + "'");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig cfg;
  std::ostringstream norm;
  pt::write_ini(norm, tree);
  cfg.text = norm.str();

  // geometry
  const auto geo = tree.get_child("geometry", pt::ptree());
  auto& g = cfg.geometry;
  g.kind = geometry_kind_from_string(geo.get<std::string>("kind", "cross"));
  g.dim = get_num<int>(geo, "dim", 2);
  g.n = get_num<int>(geo, "n", 32);
  g.width = get_num<double>(geo, "width", g.width);
  g.side = get_num<double>(geo, "side", g.side);
  if (g.dim != 2 && g.dim != 3) throw ConfigError("geometry.dim must be 2 or 3");
  if (g.n < 2) throw ConfigError("geometry.n must be at least 2");
  if (g.kind == GeometryKind::Mask) {
    auto file = geo.get_optional<std::string>("mask_file");
    if (!file) throw ConfigError("geometry.kind = mask needs geometry.mask_file");
    std::filesystem::path p = base_dir / *file;
    if (!std::filesystem::exists(p)) throw ConfigError("geometry file not found: " + p.string());
    CellGeometry cell = read_mask(p, false);
    g.dim = cell.dim();
    g.n = cell.n();
    g.mask = cell.chi();
  }

  // parameters: explicit limits, or exponent laws in [scaling]
  const auto par = tree.get_child("params", pt::ptree());
  const double rho_f = get_num<double>(par, "rho_f", 1.0);
  const double rho_s = get_num<double>(par, "rho_s", 1.0);
  if (!(rho_f > 0.0) || !(rho_s > 0.0)) throw ConstraintViolation("densities rho_f and rho_s must be positive");
  if (auto sc = tree.get_child_optional("scaling")) {
    ScalingLaws laws;
    for (const auto& [key, node] : *sc) {
      auto toks = split_list(node.data());
      if (toks.size() != 2) throw ConfigError("scaling." + key + " must be 'c k'");
      laws[key] = ExponentLaw{parse_number(key, toks[0]), parse_number(key, toks[1])};
    }
    cfg.params = limits_from_scaling_laws(laws, rho_f, rho_s);
  } else {
    auto& p = cfg.params;
    p.mu0 = get_param(par, "mu0", p.mu0);
    p.nu0 = get_param(par, "nu0", p.nu0);
    p.lambda0 = get_param(par, "lambda0", p.lambda0);
    p.tau0 = get_param(par, "tau0", p.tau0);
    p.p_star = get_param(par, "p_star", p.p_star);
    p.eta0 = get_param(par, "eta0", p.eta0);
    p.mu1 = get_param(par, "mu1", p.mu1);
    p.lambda1 = get_param(par, "lambda1", p.lambda1);
    p.rho_f = rho_f;
    p.rho_s = rho_s;
  }

  // numerics
  const auto num = tree.get_child("numerics", pt::ptree());
  auto& n = cfg.numerics;
  n.N = get_num<int>(num, "N", n.N);
  n.dt = get_num<double>(num, "dt", n.dt);
  n.T = get_num<double>(num, "T", n.T);
  n.tol = get_num<double>(num, "tol", n.tol);
  n.kernel_dt = get_num<double>(num, "kernel_dt", 0.0);
  n.kernel_T = get_num<double>(num, "kernel_T", 0.0);
  const std::string vt = num.get<std::string>("viscous_tensor", "assembled");
  if (vt == "assembled") n.viscous = ViscousTensor::Assembled;
  else if (vt == "fluid_only") n.viscous = ViscousTensor::FluidOnly;
  else throw ConfigError("numerics.viscous_tensor must be assembled or fluid_only");
  if (n.N < 2) throw ConfigError("numerics.N must be at least 2");
  if (!(n.dt > 0.0) || !(n.T >= 0.0)) throw ConfigError("numerics needs dt > 0 and T >= 0");
  if (!(n.tol > 0.0)) throw ConfigError("numerics.tol must be positive");
  if (std::abs(n.steps() * n.dt - n.T) > 1e-9 * std::max(1.0, n.T))
    throw ConfigError("numerics.T must be a multiple of numerics.dt");

  // force
  const auto fo = tree.get_child("force", pt::ptree());
  cfg.force.amplitude = {get_num<double>(fo, "amplitude_x", 0.0), get_num<double>(fo, "amplitude_y", 0.0),
                         get_num<double>(fo, "amplitude_z", 0.0)};
  cfg.force.mode = fo.get<std::string>("mode", "sinsin");
  cfg.force.time = fo.get<std::string>("time", "ramp");
  if (cfg.force.mode != "sinsin" && cfg.force.mode != "constant" && cfg.force.mode != "zero")
    throw ConfigError("force.mode must be sinsin, constant or zero");
  if (cfg.force.time != "ramp" && cfg.force.time != "const" && cfg.force.time != "sin")
    throw ConfigError("force.time must be ramp, const or sin");

  // pipeline
  if (auto st = tree.get_optional<std::string>("pipeline.stages")) cfg.stages = split_list(*st);
  check_stages(cfg.stages);

  // dns
  const auto dn = tree.get_child("dns", pt::ptree());
  if (auto e = dn.get_optional<std::string>("eps")) {
    cfg.dns.eps.clear();
    for (const auto& tok : split_list(*e)) cfg.dns.eps.push_back(parse_number("dns.eps", tok));
  }
  cfg.dns.N = get_num<int>(dn, "N", cfg.dns.N);
  for (double e : cfg.dns.eps) {
    const double k = 1.0 / e;
    if (!(e > 0.0) || std::abs(k - std::round(k)) > 1e-9) throw ConfigError("dns.eps entries must be 1/integer");
  }

  if (auto out = tree.get_optional<std::string>("output.dir")) cfg.output_dir = base_dir / *out;
  else cfg.output_dir = base_dir / "out";
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace homog
