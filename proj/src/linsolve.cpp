#include "homog/linsolve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <numeric>

#include "homog/errors.hpp"

namespace homog {

struct LinearSolver::Impl {
  SpMat M;
  std::vector<char> fixed;
  std::vector<std::vector<int>> gauges;
  std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu;
  std::unique_ptr<Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>>> it;
  SolverOptions opt;
};

LinearSolver::LinearSolver(const SpMat& A, const std::vector<int>& fixed,
                           const std::vector<std::vector<int>>& gauges, const SolverOptions& opt)
    : impl_(std::make_unique<Impl>()), n_(static_cast<int>(A.rows())) {
  if (A.rows() != A.cols()) throw SingularSystem("system matrix is not square");
  impl_->opt = opt;
  impl_->gauges = gauges;
  impl_->fixed.assign(n_, 0);
  for (int f : fixed) impl_->fixed[f] = 1;
  const int ng = static_cast<int>(gauges.size());
  const int N = n_ + ng;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros()) + n_ + 2 * n_);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (impl_->fixed[r] || impl_->fixed[c]) continue;
      t.emplace_back(r, c, it.value());
    }
  for (int i = 0; i < n_; ++i)
    if (impl_->fixed[i]) t.emplace_back(i, i, 1.0);
  for (int g = 0; g < ng; ++g)
    for (int i : gauges[g]) {
      t.emplace_back(n_ + g, i, 1.0);
      t.emplace_back(i, n_ + g, 1.0);
    }
  impl_->M.resize(N, N);
  impl_->M.setFromTriplets(t.begin(), t.end());
  impl_->M.makeCompressed();
  if (N <= opt.direct_limit) {
    impl_->lu = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
    impl_->lu->analyzePattern(impl_->M);
    impl_->lu->factorize(impl_->M);
    if (impl_->lu->info() != Eigen::Success)
      throw SingularSystem("sparse LU factorization failed: " + impl_->lu->lastErrorMessage());
  } else {
    impl_->it = std::make_unique<Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>>>();
    impl_->it->setTolerance(opt.tol);
    impl_->it->setMaxIterations(opt.max_iterations);
    impl_->it->compute(impl_->M);
    if (impl_->it->info() != Eigen::Success) throw SingularSystem("preconditioner setup failed");
  }
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Vec LinearSolver::solve(const Vec& rhs) const {
  const int ng = static_cast<int>(impl_->gauges.size());
  Vec b = Vec::Zero(n_ + ng);
  for (int i = 0; i < n_; ++i) b[i] = impl_->fixed[i] ? 0.0 : rhs[i];
  Vec x;
  if (impl_->lu) {
    x = impl_->lu->solve(b);
    if (impl_->lu->info() != Eigen::Success) throw SingularSystem("sparse LU solve failed");
  } else {
    x = impl_->it->solve(b);
    if (impl_->it->info() != Eigen::Success)
      throw NoConvergence("iterative solve stalled after " + std::to_string(impl_->it->iterations()) +
                          " iterations (error " + std::to_string(impl_->it->error()) + ")");
  }
  if (!x.allFinite()) throw SingularSystem("solution is not finite");
  const double bn = b.lpNorm<Eigen::Infinity>();
  Vec r = impl_->M * x - b;
  last_residual_ = bn > 0 ? r.lpNorm<Eigen::Infinity>() / bn : r.lpNorm<Eigen::Infinity>();
  if (last_residual_ > std::max(impl_->opt.tol, 1e-8) * 1e3)
    throw SingularSystem("linear solve residual " + std::to_string(last_residual_) + " too large");
  multipliers_ = x.tail(ng);
  return x.head(n_);
}

std::vector<std::vector<int>> constant_null_groups(const SpMat& B) {
  const int rows = static_cast<int>(B.rows());
  // union-find over rows sharing a column
  std::vector<int> parent(rows);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  SpMat Bc = B;  // column major: iterate columns
  Bc.makeCompressed();
  double scale = 0.0;
  for (int c = 0; c < Bc.outerSize(); ++c) {
    int first = -1;
    for (SpMat::InnerIterator it(Bc, c); it; ++it) {
      if (it.value() == 0.0) continue;
      scale = std::max(scale, std::abs(it.value()));
      const int r = static_cast<int>(it.row());
      if (first < 0) {
        first = r;
      } else {
        parent[find(r)] = find(first);
      }
    }
  }
  std::vector<std::vector<int>> groups;
  std::vector<int> gid(rows, -1);
  for (int r = 0; r < rows; ++r) {
    int root = find(r);
    if (gid[root] < 0) {
      gid[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[gid[root]].push_back(r);
  }
  std::vector<std::vector<int>> out;
  for (auto& g : groups) {
    Vec ind = Vec::Zero(rows);
    for (int r : g) ind[r] = 1.0;
    Vec col = Bc.transpose() * ind;
    if (col.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(scale, 1.0)) out.push_back(g);
  }
  return out;
}

SpMat saddle_matrix(const SpMat& A, const SpMat& B, const SpMat& C) {
  const int n = static_cast<int>(A.rows()), m = static_cast<int>(B.rows());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * B.nonZeros() + C.nonZeros()));
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(n + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), n + it.row(), it.value());
    }
  if (C.nonZeros() > 0)
    for (int k = 0; k < C.outerSize(); ++k)
      for (SpMat::InnerIterator it(C, k); it; ++it) t.emplace_back(n + it.row(), n + it.col(), -it.value());
  SpMat M(n + m, n + m);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

}  // namespace homog
