#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "homog/geometry.hpp"
#include "homog/macro.hpp"
#include "homog/params.hpp"

namespace homog {

struct ForceConfig {
  std::array<double, 3> amplitude{0.0, 0.0, 0.0};
  std::string mode = "sinsin";  // sinsin | constant | zero
  std::string time = "ramp";    // ramp (F ~ t) | const | sin (F ~ sin(pi t))
  bool is_zero() const;
  ForceFn make() const;  // empty for F = 0
  std::string id() const;
};

struct NumericsConfig {
  int N = 16;
  double dt = 0.01;
  double T = 0.1;
  double tol = 1e-10;
  double kernel_dt = 0.0;  // 0: same as dt
  double kernel_T = 0.0;   // 0: same as T
  ViscousTensor viscous = ViscousTensor::Assembled;
  int steps() const;
  int kernel_steps() const;
  double effective_kernel_dt() const { return kernel_dt > 0.0 ? kernel_dt : dt; }
};

struct DnsSection {
  std::vector<double> eps{0.5, 0.25, 0.125};
  int N = 64;
};

inline const std::vector<std::string> kStageOrder{"geometry", "cell", "macro", "compare"};

struct RunConfig {
  GeometryDescriptor geometry;
  ScalingParams params;
  NumericsConfig numerics;
  ForceConfig force;
  std::vector<std::string> stages{"geometry", "cell", "macro"};
  DnsSection dns;
  std::filesystem::path output_dir{"out"};
  std::string text;  // normalized source, hashed for the manifest

  bool has_stage(const std::string& s) const;
  // SHA-256 of the normalized config text.
  std::string hash() const;
};

// Throws ConfigError / ConstraintViolation.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

}  // namespace homog
