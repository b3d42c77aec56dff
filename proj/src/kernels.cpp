#include "homog/kernels.hpp"

#include <omp.h>

namespace homog::kernels {

void weighted_sum(const std::vector<Vec>& hist, std::span<const double> w, std::size_t first, Vec& out) {
  const Eigen::Index n = hist.empty() ? 0 : hist[first].size();
  out.setZero(n);
  const std::size_t terms = w.size();
  double* o = out.data();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < terms; ++j) s += w[j] * hist[first + j][i];
    o[i] = s;
  }
}

void weighted_sum_serial(const std::vector<Vec>& hist, std::span<const double> w, std::size_t first, Vec& out) {
  const Eigen::Index n = hist.empty() ? 0 : hist[first].size();
  out.setZero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * hist[first + j][i];
    out[i] = s;
  }
}

namespace {

template <bool Parallel>
void divergence_impl(const StaggeredGrid& g, const Vec& u, Vec& out) {
  const int nc = g.cells();
  const int d = g.dim();
  const double ih = 1.0 / g.h();
  out.setZero(nc);
  double* o = out.data();
#pragma omp parallel for schedule(static) if (Parallel)
  for (int c = 0; c < nc; ++c) {
    auto ijk = g.cell_coords(c);
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      auto up = ijk;
      up[a] += 1;
      s += (u[g.face_index(a, up)] - u[g.face_index(a, ijk)]) * ih;
    }
    o[c] = s;
  }
}

}  // namespace

void divergence(const StaggeredGrid& g, const Vec& u, Vec& out) { divergence_impl<true>(g, u, out); }
void divergence_serial(const StaggeredGrid& g, const Vec& u, Vec& out) { divergence_impl<false>(g, u, out); }

int max_threads() { return omp_get_max_threads(); }
void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace homog::kernels
