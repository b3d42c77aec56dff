#include "homog/convolution.hpp"

#include <cmath>
#include <string>

#include "homog/errors.hpp"
#include "homog/kernels.hpp"

namespace homog {

void check_kernel_grid(const KernelSample& k, double dt, int steps) {
  if (k.empty()) throw KernelGridMismatch("kernel '" + k.problem + "' has no samples");
  if (std::abs(k.dt - dt) > 1e-12 * std::max(1.0, dt))
    throw KernelGridMismatch("kernel '" + k.problem + "' sampled with dt " + std::to_string(k.dt) +
                             ", macro step is " + std::to_string(dt));
  if (k.steps() < steps)
    throw KernelGridMismatch("kernel '" + k.problem + "' has " + std::to_string(k.steps()) + " samples, " +
                             std::to_string(steps) + " needed");
  for (int s = 0; s < k.steps(); ++s)
    if (std::abs(k.times[s] - (s + 1) * k.dt) > 1e-9 * std::max(1.0, k.times[s]))
      throw KernelGridMismatch("kernel '" + k.problem + "' time grid is not uniform");
}

std::vector<double> kernel_series(const KernelSample& k, int a, int b, int steps) {
  if (k.steps() < steps) throw KernelGridMismatch("kernel '" + k.problem + "' too short");
  std::vector<double> s(steps + 1);
  for (int j = 0; j <= steps; ++j) s[j] = k.at_step(j)(a, b);
  return s;
}

Vec convolve_explicit(const std::vector<Vec>& hist, std::span<const double> kernel, int n, double dt) {
  if (n <= 0 || hist.empty()) return hist.empty() ? Vec() : Vec::Zero(hist.front().size());
  if (static_cast<int>(hist.size()) < n || static_cast<int>(kernel.size()) <= n)
    throw KernelGridMismatch("convolution history or kernel shorter than the step index");
  std::vector<double> w(n);
  w[0] = 0.5 * dt * kernel[n];
  for (int k = 1; k < n; ++k) w[k] = dt * kernel[n - k];
  Vec out;
  kernels::weighted_sum(hist, w, 0, out);
  return out;
}

Vec convolve(const std::vector<Vec>& hist, std::span<const double> kernel, double dt) {
  const int n = static_cast<int>(hist.size()) - 1;
  if (n <= 0) return hist.empty() ? Vec() : Vec::Zero(hist.front().size());
  Vec out = convolve_explicit(hist, kernel, n, dt);
  out += endpoint_weight(kernel, dt) * hist[n];
  return out;
}

double convolve_scalar(std::span<const double> g, const KernelSample& k, int a, int b) {
  const int n = static_cast<int>(g.size()) - 1;
  if (n <= 0) return 0.0;
  auto K = kernel_series(k, a, b, n);
  double s = 0.5 * K[n] * g[0] + 0.5 * K[0] * g[n];
  for (int j = 1; j < n; ++j) s += K[n - j] * g[j];
  return s * k.dt;
}

}  // namespace homog
