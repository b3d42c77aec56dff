#pragma once

#include <memory>
#include <vector>

#include "homog/grid.hpp"

namespace homog {

struct SolverOptions {
  double tol = 1e-10;              // relative residual accepted from any solve
  int direct_limit = 400000;       // above this size use the iterative fallback
  int max_iterations = 5000;
};

// Factorizes a square sparse system once and solves for many right-hand sides.
// fixed: unknowns held at zero. gauges: groups whose plain sum is forced to
// zero through an extra multiplier (the multiplier also enters each row of the
// group, absorbing the matching compatibility defect).
class LinearSolver {
public:
  LinearSolver(const SpMat& A, const std::vector<int>& fixed, const std::vector<std::vector<int>>& gauges,
               const SolverOptions& opt = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  Vec solve(const Vec& rhs) const;
  double last_residual() const { return last_residual_; }
  // Multipliers of the gauge groups from the last solve.
  const Vec& gauge_multipliers() const { return multipliers_; }
  int size() const { return n_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
  mutable double last_residual_ = 0.0;
  mutable Vec multipliers_;
};

// Row groups of a constraint matrix B (rows x free columns) connected through
// shared columns whose indicator lies in the null space of B^T. These are the
// pressure constants left undetermined by the velocity equations.
std::vector<std::vector<int>> constant_null_groups(const SpMat& B);

// Assembles [[A, B^T], [B, -C]] (C may be empty).
SpMat saddle_matrix(const SpMat& A, const SpMat& B, const SpMat& C = SpMat());

}  // namespace homog
