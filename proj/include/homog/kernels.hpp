#pragma once

#include <span>
#include <vector>

#include "homog/grid.hpp"

// Data-parallel loops with an OpenMP version and a serial reference.
namespace homog::kernels {

// out = sum_j w[j] * hist[first + j]
void weighted_sum(const std::vector<Vec>& hist, std::span<const double> w, std::size_t first, Vec& out);
void weighted_sum_serial(const std::vector<Vec>& hist, std::span<const double> w, std::size_t first, Vec& out);

// Matrix-free discrete divergence on a StaggeredGrid.
void divergence(const StaggeredGrid& g, const Vec& u, Vec& out);
void divergence_serial(const StaggeredGrid& g, const Vec& u, Vec& out);

int max_threads();
void set_threads(int n);

}  // namespace homog::kernels
