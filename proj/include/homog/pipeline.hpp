#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "homog/config.hpp"
#include "homog/dns.hpp"
#include "homog/tensors.hpp"

namespace homog {

inline constexpr const char* kRunSchema = "homog-run/1";
inline constexpr const char* kManifestSchema = "homog-manifest/1";
inline constexpr const char* kCompareSchema = "homog-compare/1";
inline constexpr const char* kTimeseriesSchema = "homog-timeseries/1";
inline constexpr const char* kPairingsSchema = "homog-pairings/1";
inline constexpr const char* kFieldSchema = "homog-field/1";

// Runs independent jobs on up to `workers` threads. Results must go to
// per-job slots; the first failure in job order is rethrown.
void run_jobs(const std::vector<std::function<void()>>& jobs, int workers);

struct CoefficientOptions {
  double kernel_dt = 0.01;
  int kernel_steps = 100;
  CellSolverOptions cell;
  int workers = 1;
};

// Solves the cell problems the regime needs and assembles the coefficients
// (with validation reports).
EffectiveCoefficients compute_coefficients(const CellGeometry& cell, const ScalingParams& params,
                                           const CoefficientOptions& opt);

// Macro run from t = 0 to T, initial state included.
std::vector<MacroState> run_macro(const EffectiveCoefficients& coeffs, const RunConfig& cfg);

struct CliOptions {
  std::optional<std::filesystem::path> out;
  int workers = 1;
  std::optional<double> tol;
};

// Effective output directory and tolerance after CLI overrides.
std::filesystem::path output_dir(const RunConfig& cfg, const CliOptions& cli);
RunConfig apply_overrides(RunConfig cfg, const CliOptions& cli);

// Each returns the process exit code; errors propagate as exceptions.
int cmd_regime(const RunConfig& cfg, std::ostream& out);
int cmd_cell(const RunConfig& cfg, const CliOptions& cli, std::ostream& out);
int cmd_run(const RunConfig& cfg, const CliOptions& cli, std::ostream& out);
int cmd_compare(const RunConfig& cfg, const CliOptions& cli, std::ostream& out);

// Loader for the pairings CSV written by cmd_run; rejects unknown schemas.
PairingSeries read_pairings(const std::filesystem::path& path);

}  // namespace homog
