#include <gtest/gtest.h>

#include <cmath>

#include "homog/convolution.hpp"
#include "homog/errors.hpp"

using namespace homog;

namespace {

KernelSample sampled(double dt, int steps, const std::function<double(double)>& f) {
  KernelSample k;
  k.problem = "test";
  k.dt = dt;
  for (int s = 1; s <= steps; ++s) {
    k.times.push_back(s * dt);
    k.values.push_back(Eigen::MatrixXd::Constant(1, 1, f(s * dt)));
  }
  return k;
}

std::vector<double> constant_history(int n, double c) { return std::vector<double>(n + 1, c); }

// Error of the sampled-kernel quadrature of int_0^T (T - s) c ds = c T^2 / 2.
double linear_kernel_error(double dt, double T, double c) {
  const int n = static_cast<int>(std::lround(T / dt));
  const auto k = sampled(dt, n, [](double t) { return t; });
  return std::abs(convolve_scalar(constant_history(n, c), k, 0, 0) - c * T * T / 2);
}

}  // namespace

TEST(Convolution, ZeroKernel) {
  const auto k = sampled(0.1, 10, [](double) { return 0.0; });
  EXPECT_EQ(convolve_scalar(constant_history(10, 3.0), k, 0, 0), 0.0);
}

TEST(Convolution, ConstantKernelConstantHistoryExact) {
  const double c = 2.5, dt = 0.1;
  const auto k = sampled(dt, 10, [](double) { return 1.0; });
  for (int n = 1; n <= 10; ++n) EXPECT_NEAR(convolve_scalar(constant_history(n, c), k, 0, 0), c * n * dt, 1e-14);
}

TEST(Convolution, LinearKernelSecondOrder) {
  const double T = 1.0, c = 3.0;
  double prev = linear_kernel_error(0.1, T, c);
  for (double dt : {0.05, 0.025, 0.0125}) {
    const double err = linear_kernel_error(dt, T, c);
    const double ratio = prev / err;
    EXPECT_GE(ratio, 3.4);
    EXPECT_LE(ratio, 4.6);
    prev = err;
  }
}

TEST(Convolution, ResolvedKernelAtZeroIsExactForLinearIntegrand) {
  // With K(0) = 0 supplied the trapezoid rule integrates (t - s) c exactly.
  const double dt = 0.1, c = 1.5;
  const int n = 10;
  std::vector<double> K(n + 1);
  for (int j = 0; j <= n; ++j) K[j] = j * dt;
  std::vector<Vec> hist(n + 1, Vec::Constant(2, c));
  const Vec out = convolve(hist, K, dt);
  EXPECT_NEAR(out[0], c * 0.5, 1e-14);
  EXPECT_NEAR(out[1], c * 0.5, 1e-14);
}

TEST(Convolution, SmoothIntegrandSecondOrder) {
  // int_0^1 exp(-(1 - s)) cos(s) ds = (cos 1 + sin 1 - 1/e) / 2.
  auto err = [](int n) {
    const double dt = 1.0 / n;
    std::vector<double> K(n + 1);
    std::vector<Vec> hist;
    for (int j = 0; j <= n; ++j) {
      K[j] = std::exp(-j * dt);
      hist.push_back(Vec::Constant(1, std::cos(j * dt)));
    }
    return std::abs(convolve(hist, K, dt)[0] - (std::cos(1.0) + std::sin(1.0) - std::exp(-1.0)) / 2);
  };
  const double r = err(20) / err(40);
  EXPECT_GE(r, 3.4);
  EXPECT_LE(r, 4.6);
}

TEST(Convolution, ExplicitPlusEndpointEqualsFull) {
  const double dt = 0.05;
  const int n = 7;
  std::vector<double> K(n + 1);
  std::vector<Vec> hist;
  for (int j = 0; j <= n; ++j) {
    K[j] = std::exp(-j * dt);
    hist.push_back(Vec::LinSpaced(3, j, 2.0 * j));
  }
  const Vec full = convolve(hist, K, dt);
  const std::vector<Vec> past(hist.begin(), hist.end() - 1);
  const Vec split = convolve_explicit(past, K, n, dt) + endpoint_weight(K, dt) * hist[n];
  EXPECT_LT((full - split).norm(), 1e-14);
}

TEST(Convolution, VectorAndScalarPathsAgree) {
  const double dt = 0.1;
  const int n = 6;
  const auto k = sampled(dt, n, [](double t) { return 1.0 + t * t; });
  std::vector<double> g(n + 1);
  std::vector<Vec> hist;
  for (int j = 0; j <= n; ++j) {
    g[j] = std::cos(j * dt);
    hist.push_back(Vec::Constant(1, g[j]));
  }
  const auto series = kernel_series(k, 0, 0, n);
  EXPECT_EQ(series[0], series[1]);
  EXPECT_NEAR(convolve(hist, series, dt)[0], convolve_scalar(g, k, 0, 0), 1e-14);
}

TEST(Convolution, KernelGridChecks) {
  const auto k = sampled(0.1, 5, [](double) { return 1.0; });
  EXPECT_NO_THROW(check_kernel_grid(k, 0.1, 5));
  EXPECT_THROW(check_kernel_grid(k, 0.05, 5), KernelGridMismatch);
  EXPECT_THROW(check_kernel_grid(k, 0.1, 6), KernelGridMismatch);
  KernelSample bad = k;
  bad.times[2] = 0.35;
  EXPECT_THROW(check_kernel_grid(bad, 0.1, 5), KernelGridMismatch);
  EXPECT_THROW(check_kernel_grid(KernelSample{}, 0.1, 1), KernelGridMismatch);
  EXPECT_THROW(k.at_step(6), KernelGridMismatch);
}
