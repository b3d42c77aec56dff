#pragma once

#include <vector>

#include "homog/cell_problems.hpp"

namespace homog {

struct KernelOptions {
  double dt = 0.01;
  int steps = 100;
  CellSolverOptions cell;
};

// Result of a time-dependent cell problem, one column per unit direction e_i.
struct KernelRun {
  KernelSample sample;                           // column i: phase mean of the velocity at t_k
  std::vector<std::vector<double>> energy;       // per i, t_0..t_K (kinetic + stored)
  std::vector<std::vector<double>> dissipation;  // per i, cumulative viscous work, t_0..t_K
  std::vector<Vec> initial_velocity;             // per i, admissible velocity at t = 0
  std::vector<Vec> final_displacement;           // per i, displacement at t_K (empty for velocity-only problems)
  double max_divergence = 0.0;                   // over all steps, on constrained cells
};

// Elastic solid kernel: rho_s W_tt - lambda1 Lap W + grad R = 0, div W = 0 in the
// solid, W = 0 on the interface, rho_s W_t(0) = e_i. Energy-conserving
// Crank-Nicolson (average acceleration Newmark) in time.
KernelRun solve_solid_kernel(const CellGeometry& cell, double lambda1, double rho_s, const KernelOptions& opt);

// Viscous fluid kernel: rho_f V_t - mu1 Lap V + grad R = 0, div V = 0 in the
// fluid, V = 0 on the interface, rho_f V(0) = e_i. Backward Euler in time.
KernelRun solve_fluid_kernel(const CellGeometry& cell, double mu1, double rho_f, const KernelOptions& opt);

enum class TwoPhaseForcing { PI, F };

// Coupled kernel on the whole cell: div{mu1 chi D(W_t) + lambda1 (1-chi) D(W) - R I}
// = rho~ W_tt, div W = 0. Crank-Nicolson; energy plus accumulated dissipation
// is conserved.
KernelRun solve_two_phase_kernel(const CellGeometry& cell, double mu1, double lambda1, double rho_f, double rho_s,
                                 TwoPhaseForcing forcing, const KernelOptions& opt);

}  // namespace homog
