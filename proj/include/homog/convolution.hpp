#pragma once

#include <span>
#include <vector>

#include "homog/cell_problems.hpp"

namespace homog {

// Throws KernelGridMismatch unless the kernel is sampled with step dt for at least `steps` steps.
void check_kernel_grid(const KernelSample& k, double dt, int steps);

// Entry (a, b) of the kernel at steps 0..steps; step 0 reuses the first sample.
std::vector<double> kernel_series(const KernelSample& k, int a, int b, int steps);

// Trapezoid rule for int_0^{t_n} K(t_n - s) g(s) ds with g_0..g_n in hist (n = hist.size() - 1).
Vec convolve(const std::vector<Vec>& hist, std::span<const double> kernel, double dt);
// Same sum without the endpoint term (weight dt/2 K_0 on g_n); hist holds g_0..g_{n-1}.
Vec convolve_explicit(const std::vector<Vec>& hist, std::span<const double> kernel, int n, double dt);
inline double endpoint_weight(std::span<const double> kernel, double dt) { return 0.5 * dt * kernel[0]; }

// Scalar history against kernel entry (a, b), evaluated at t_n with n = g.size() - 1.
double convolve_scalar(std::span<const double> g, const KernelSample& k, int a, int b);

}  // namespace homog
