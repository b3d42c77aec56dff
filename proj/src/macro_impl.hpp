#pragma once

#include <memory>

#include "homog/convolution.hpp"
#include "homog/macro.hpp"

namespace homog {

class MacroSolver::Impl {
public:
  Impl(const EffectiveCoefficients& c, const MacroConfig& config)
      : coeffs(c), cfg(config), ops(c.dim, config.N), regime(c.regime) {}
  virtual ~Impl() = default;
  virtual void advance() = 0;
  virtual double boundary_max() const = 0;

  EffectiveCoefficients coeffs;
  MacroConfig cfg;
  MacroOperators ops;
  RegimeTag regime;
  MacroState state;
};

std::unique_ptr<MacroSolver::Impl> make_t2_impl(const EffectiveCoefficients& c, const MacroConfig& cfg);
std::unique_ptr<MacroSolver::Impl> make_t3_impl(const EffectiveCoefficients& c, const MacroConfig& cfg);

// Matrix kernel acting on a face-vector history: per-entry scalar
// convolutions followed by interpolation between face components.
class FaceKernel {
public:
  FaceKernel(const KernelSample& k, const MacroOperators& ops, double dt, int steps);
  // Explicit trapezoid part at step n (history g_0..g_{n-1}).
  Vec explicit_part(const std::vector<Vec>& hist, int n) const;
  // Full trapezoid at step n (history g_0..g_n).
  Vec full(const std::vector<Vec>& hist) const;
  // dt/2 K(0) as a face matrix.
  const SpMat& endpoint() const { return endpoint_; }

private:
  const MacroOperators* ops_;
  double dt_;
  int dim_;
  std::vector<std::vector<double>> series_;  // (a, b) row-major
  SpMat endpoint_;
};

// Symmetric matrix kernel times a cell-scalar history, one series per strain component.
class StressKernel {
public:
  StressKernel(const KernelSample& k, const MacroOperators& ops, double dt, int steps);
  // Explicit part of int K(t-s) s(s) ds as a face load (weak form of its divergence).
  Vec explicit_load(const std::vector<Vec>& hist, int n) const;
  const SpMat& endpoint() const { return endpoint_; }  // faces x cells, dt/2 K(0)

private:
  const MacroOperators* ops_;
  double dt_;
  std::vector<std::vector<double>> series_;  // per strain component
  SpMat endpoint_;
};

}  // namespace homog
