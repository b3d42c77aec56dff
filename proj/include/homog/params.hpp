#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homog/extended_param.hpp"

namespace homog {

// alpha(eps) = c * eps^k
struct ExponentLaw {
  double c = 1.0;
  double k = 0.0;
  double at(double eps) const;
  // lim_{eps->0} alpha(eps) * eps^{-shift}
  ExtendedParam limit(double shift = 0.0) const;
};

// Keys: "tau", "nu", "mu", "p", "eta", "lambda".
using ScalingLaws = std::map<std::string, ExponentLaw>;

struct ScalingParams {
  ExtendedParam mu0{1.0};
  ExtendedParam nu0{0.0};
  ExtendedParam lambda0{0.0};
  ExtendedParam tau0{1.0};
  ExtendedParam p_star = ExtendedParam::infinity();
  ExtendedParam eta0{1.0};
  ExtendedParam mu1 = ExtendedParam::infinity();
  ExtendedParam lambda1 = ExtendedParam::infinity();
  double rho_f = 1.0;
  double rho_s = 1.0;
  std::optional<ScalingLaws> laws;

  double rho_hat(double m) const { return m * rho_f + (1.0 - m) * rho_s; }
};

enum class RegimeTag {
  T2_I,
  T2_II_LAM_POS,
  T2_II_LAM_ZERO,
  T3_I,
  T3_II_LAM_POS,
  T3_II_LAM_ZERO,
  T3_III_KERNEL,
  T3_III_ZERO,
  T3_IV,
};

std::string to_string(RegimeTag tag);
RegimeTag regime_from_string(const std::string& s);
bool is_t2_family(RegimeTag tag);

// Cell problem identifiers.
inline constexpr const char* kCellIJ = "IJ";
inline constexpr const char* kCellPI = "PI";
inline constexpr const char* kCellDIV = "DIV";
inline constexpr const char* kCellMemory = "MEMORY";
inline constexpr const char* kCellSolidKernel = "SOLID_KERNEL";
inline constexpr const char* kCellSolidNeumann = "SOLID_NEUMANN";
inline constexpr const char* kCellFluidKernel = "FLUID_KERNEL";
inline constexpr const char* kCellFluidNeumann = "FLUID_NEUMANN";
inline constexpr const char* kCellTwoPhasePI = "TWO_PHASE_PI";
inline constexpr const char* kCellTwoPhaseF = "TWO_PHASE_F";

struct Regime {
  RegimeTag tag;
  std::vector<std::string> required_cell_problems;
  std::vector<std::string> required_coefficients;
};

// Throws ConstraintViolation naming the violated constraint.
void validate(const ScalingParams& params);

Regime classify_regime(const ScalingParams& params);

// Limits from exponent laws; densities are passed through.
ScalingParams limits_from_scaling_laws(const ScalingLaws& laws, double rho_f = 1.0, double rho_s = 1.0);

}  // namespace homog
