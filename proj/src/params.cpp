#include "homog/params.hpp"

#include <cmath>

#include "homog/errors.hpp"

namespace homog {

double ExponentLaw::at(double eps) const { return c * std::pow(eps, k); }

ExtendedParam ExponentLaw::limit(double shift) const {
  if (!(c >= 0.0)) throw ConstraintViolation("exponent law coefficient must be nonnegative");
  if (c == 0.0) return ExtendedParam(0.0);
  const double e = k - shift;
  if (e > 0.0) return ExtendedParam(0.0);
  if (e < 0.0) return ExtendedParam::infinity();
  return ExtendedParam(c);
}

std::string to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::T2_I: return "T2_I";
    case RegimeTag::T2_II_LAM_POS: return "T2_II_LAM_POS";
    case RegimeTag::T2_II_LAM_ZERO: return "T2_II_LAM_ZERO";
    case RegimeTag::T3_I: return "T3_I";
    case RegimeTag::T3_II_LAM_POS: return "T3_II_LAM_POS";
    case RegimeTag::T3_II_LAM_ZERO: return "T3_II_LAM_ZERO";
    case RegimeTag::T3_III_KERNEL: return "T3_III_KERNEL";
    case RegimeTag::T3_III_ZERO: return "T3_III_ZERO";
    case RegimeTag::T3_IV: return "T3_IV";
  }
  return "?";
}

RegimeTag regime_from_string(const std::string& s) {
  for (auto t : {RegimeTag::T2_I, RegimeTag::T2_II_LAM_POS, RegimeTag::T2_II_LAM_ZERO, RegimeTag::T3_I,
                 RegimeTag::T3_II_LAM_POS, RegimeTag::T3_II_LAM_ZERO, RegimeTag::T3_III_KERNEL,
                 RegimeTag::T3_III_ZERO, RegimeTag::T3_IV})
    if (to_string(t) == s) return t;
  throw SchemaError("unknown regime tag '" + s + "'");
}

bool is_t2_family(RegimeTag tag) {
  return tag == RegimeTag::T2_I || tag == RegimeTag::T2_II_LAM_POS || tag == RegimeTag::T2_II_LAM_ZERO;
}

void validate(const ScalingParams& p) {
  if (!p.lambda0.is_zero()) throw ConstraintViolation("lambda0 must be 0 (got " + p.lambda0.str() + ")");
  if (!(p.tau0 == ExtendedParam(1.0))) throw ConstraintViolation("tau0 must be 1 (got " + p.tau0.str() + ")");
  if (p.mu0.is_inf()) throw ConstraintViolation("mu0 must be finite");
  if (p.nu0.is_inf()) throw ConstraintViolation("nu0 must be finite");
  if (p.p_star.is_zero()) throw ConstraintViolation("p_star must be positive");
  if (p.eta0.is_zero()) throw ConstraintViolation("eta0 must be positive");
  if (p.mu0.is_positive() && !p.mu1.is_inf())
    throw ConstraintViolation("mu1 must be infinite when mu0 > 0 (got " + p.mu1.str() + ")");
  if (!(p.rho_f > 0.0) || !(p.rho_s > 0.0)) throw ConstraintViolation("densities rho_f, rho_s must be positive");
}

namespace {

Regime make(RegimeTag tag, const ScalingParams& p) {
  Regime r{tag, {}, {}};
  auto cells = [&](std::initializer_list<const char*> l) { r.required_cell_problems.assign(l.begin(), l.end()); };
  auto coefs = [&](std::initializer_list<const char*> l) { r.required_coefficients.assign(l.begin(), l.end()); };
  const bool finite_p = p.p_star.is_finite();
  std::vector<std::string> t2_cells{kCellIJ, kCellPI, kCellDIV};
  if (finite_p) t2_cells.push_back(kCellMemory);
  std::vector<std::string> t2_coefs{"A_f0", "B_f0", "B_f1_const", "B_f2_kernel", "C_f0", "a_f0", "a_f1", "a_f2_kernel"};
  if (!finite_p) t2_coefs.push_back("q_closure");
  switch (tag) {
    case RegimeTag::T2_I:
      r.required_cell_problems = t2_cells;
      r.required_coefficients = t2_coefs;
      break;
    case RegimeTag::T2_II_LAM_POS:
      r.required_cell_problems = t2_cells;
      r.required_cell_problems.push_back(kCellSolidKernel);
      r.required_coefficients = t2_coefs;
      r.required_coefficients.push_back("B_s1_kernel");
      break;
    case RegimeTag::T2_II_LAM_ZERO:
      r.required_cell_problems = t2_cells;
      r.required_cell_problems.push_back(kCellSolidNeumann);
      r.required_coefficients = t2_coefs;
      r.required_coefficients.push_back("B_s2");
      break;
    case RegimeTag::T3_I: break;
    case RegimeTag::T3_II_LAM_POS:
      cells({kCellSolidKernel});
      coefs({"B_s1_kernel"});
      break;
    case RegimeTag::T3_II_LAM_ZERO:
      cells({kCellSolidNeumann});
      coefs({"B_s2"});
      break;
    case RegimeTag::T3_III_KERNEL:
      cells({kCellFluidKernel});
      coefs({"K_f_kernel"});
      break;
    case RegimeTag::T3_III_ZERO:
      cells({kCellFluidNeumann});
      coefs({"B_f2_matrix"});
      break;
    case RegimeTag::T3_IV:
      cells({kCellTwoPhasePI, kCellTwoPhaseF});
      coefs({"B_pi_kernel", "forcing"});
      break;
  }
  return r;
}

}  // namespace

Regime classify_regime(const ScalingParams& p) {
  validate(p);
  if (p.mu0.is_positive()) {
    if (p.lambda1.is_inf()) return make(RegimeTag::T2_I, p);
    if (p.lambda1.is_positive()) return make(RegimeTag::T2_II_LAM_POS, p);
    return make(RegimeTag::T2_II_LAM_ZERO, p);
  }
  if (p.p_star.is_inf()) throw ConstraintViolation("p_star must be finite when mu0 = 0");
  if (p.eta0.is_inf()) throw ConstraintViolation("eta0 must be finite when mu0 = 0");
  if (p.mu1.is_inf()) {
    if (p.lambda1.is_inf()) return make(RegimeTag::T3_I, p);
    if (p.lambda1.is_positive()) return make(RegimeTag::T3_II_LAM_POS, p);
    return make(RegimeTag::T3_II_LAM_ZERO, p);
  }
  if (p.lambda1.is_inf()) {
    if (p.mu1.is_positive()) return make(RegimeTag::T3_III_KERNEL, p);
    return make(RegimeTag::T3_III_ZERO, p);
  }
  return make(RegimeTag::T3_IV, p);
}

ScalingParams limits_from_scaling_laws(const ScalingLaws& laws, double rho_f, double rho_s) {
  auto get = [&](const char* key) -> const ExponentLaw& {
    auto it = laws.find(key);
    if (it == laws.end()) throw ConfigError(std::string("missing scaling law for alpha_") + key);
    return it->second;
  };
  ScalingParams p;
  p.tau0 = get("tau").limit();
  p.nu0 = get("nu").limit();
  p.mu0 = get("mu").limit();
  p.mu1 = get("mu").limit(2.0);
  p.p_star = get("p").limit();
  p.eta0 = get("eta").limit();
  p.lambda0 = get("lambda").limit();
  p.lambda1 = get("lambda").limit(2.0);
  p.rho_f = rho_f;
  p.rho_s = rho_s;
  p.laws = laws;
  return p;
}

}  // namespace homog
