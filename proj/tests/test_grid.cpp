#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "homog/grid.hpp"
#include "homog/kernels.hpp"

using namespace homog;

namespace {

Vec random_vec(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

struct GridCase {
  int dim;
  int n;
  Boundary bc;
};

class GridTest : public ::testing::TestWithParam<GridCase> {};

}  // namespace

TEST_P(GridTest, GradientIsNegativeDivergenceTranspose) {
  const auto [dim, n, bc] = GetParam();
  StaggeredGrid g(dim, n, bc);
  const Vec u = random_vec(g.total_faces(), 1);
  const Vec s = random_vec(g.cells(), 2);
  const double lhs = s.dot(g.divergence() * u);
  const double rhs = -(g.gradient() * s).dot(u);
  EXPECT_NEAR(lhs, rhs, 1e-13 * std::max(1.0, std::abs(lhs)));
  EXPECT_NEAR((SpMat(g.gradient()) + SpMat(g.divergence().transpose())).norm(), 0.0, 1e-13);
}

TEST_P(GridTest, MatrixFreeDivergenceMatchesAssembled) {
  const auto [dim, n, bc] = GetParam();
  StaggeredGrid g(dim, n, bc);
  const Vec u = random_vec(g.total_faces(), 3);
  Vec a, b;
  kernels::divergence(g, u, a);
  kernels::divergence_serial(g, u, b);
  const Vec ref = g.divergence() * u;
  EXPECT_LT((a - ref).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT((b - ref).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST_P(GridTest, StrainEnergyVanishesOnTranslation) {
  const auto [dim, n, bc] = GetParam();
  if (bc == Boundary::Wall) GTEST_SKIP() << "translations violate the wall condition";
  StaggeredGrid g(dim, n, bc);
  Vec u = Vec::Zero(g.total_faces());
  for (int a = 0; a < dim; ++a) u.segment(g.face_offset(a), g.faces(a)).setConstant(a + 1.0);
  const SpMat E = strain_energy(g, Vec::Ones(g.cells()));
  EXPECT_NEAR(u.dot(E * u), 0.0, 1e-12);
  EXPECT_LT((g.divergence() * u).norm(), 1e-12);
}

TEST_P(GridTest, EnergyMatricesSymmetricPositiveSemidefinite) {
  const auto [dim, n, bc] = GetParam();
  StaggeredGrid g(dim, n, bc);
  const Vec w = random_vec(g.cells(), 4).cwiseAbs();
  for (const SpMat& E : {strain_energy(g, w), gradient_energy(g, w)}) {
    EXPECT_LT((E - SpMat(E.transpose())).norm(), 1e-12);
    for (unsigned s = 0; s < 5; ++s) {
      const Vec u = random_vec(g.total_faces(), 10 + s);
      EXPECT_GE(u.dot(E * u), -1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Layouts, GridTest,
                         ::testing::Values(GridCase{2, 6, Boundary::Periodic}, GridCase{2, 5, Boundary::Wall},
                                           GridCase{3, 4, Boundary::Periodic}, GridCase{3, 3, Boundary::Wall}));

TEST(Grid, WallLayoutCounts) {
  StaggeredGrid g(2, 4, Boundary::Wall);
  EXPECT_EQ(g.cells(), 16);
  EXPECT_EQ(g.faces(0), 5 * 4);
  EXPECT_EQ(g.faces(1), 4 * 5);
  EXPECT_EQ(static_cast<int>(g.boundary_faces().size()), 2 * 4 * 2);
  StaggeredGrid p(2, 4, Boundary::Periodic);
  EXPECT_EQ(p.faces(0), 16);
  EXPECT_TRUE(p.boundary_faces().empty());
}

TEST(Grid, DivergenceOfLinearFieldIsExact) {
  // u = (x, 2y) on a wall grid: div = 3 everywhere.
  StaggeredGrid g(2, 8, Boundary::Wall);
  Vec u(g.total_faces());
  for (int f = 0; f < g.total_faces(); ++f) {
    int axis = 0;
    g.face_coords(f, &axis);
    const auto x = g.face_position(f);
    u[f] = axis == 0 ? x[0] : 2.0 * x[1];
  }
  const Vec div = g.divergence() * u;
  for (int c = 0; c < g.cells(); ++c) EXPECT_NEAR(div[c], 3.0, 1e-12);
}

TEST(Grid, StrainOfShearField) {
  // u = (y, 0) on a periodic-free interior: shear strain 1/2, diagonal strains 0.
  StaggeredGrid g(2, 8, Boundary::Wall);
  Vec u = Vec::Zero(g.total_faces());
  for (int f = 0; f < g.faces(0); ++f) u[f] = g.face_position(f)[1];
  const int shear = g.component_index(0, 1);
  const Vec S = g.strain(shear) * u;
  // Interior edges only: wall edges see the odd reflection of the tangential component.
  for (int e = 0; e < g.points(shear); ++e) {
    const auto ijk = g.edge_coords(shear, e);
    if (ijk[0] == 0 || ijk[0] == 8 || ijk[1] == 0 || ijk[1] == 8) continue;
    EXPECT_NEAR(S[e], 0.5, 1e-12);
  }
  EXPECT_LT((g.strain(0) * u).norm(), 1e-12);
}

TEST(Grid, FaceAverageOfConstant) {
  StaggeredGrid g(3, 3, Boundary::Wall);
  const Vec avg = g.face_average(Vec::Constant(g.cells(), 2.5));
  for (int f = 0; f < g.total_faces(); ++f) EXPECT_DOUBLE_EQ(avg[f], 2.5);
}

TEST(Grid, SelectorPicksColumns) {
  const SpMat S = selector(5, {1, 3});
  Vec x(2);
  x << 7.0, 9.0;
  const Vec y = S * x;
  EXPECT_EQ(y[1], 7.0);
  EXPECT_EQ(y[3], 9.0);
  EXPECT_EQ(y.sum(), 16.0);
}

TEST(Kernels, WeightedSumParallelMatchesSerial) {
  std::vector<Vec> hist;
  for (unsigned k = 0; k < 12; ++k) hist.push_back(random_vec(1000, 100 + k));
  std::vector<double> w(8);
  for (int j = 0; j < 8; ++j) w[j] = 0.1 * (j + 1);
  Vec a, b;
  kernels::weighted_sum(hist, w, 3, a);
  kernels::weighted_sum_serial(hist, w, 3, b);
  Vec ref = Vec::Zero(1000);
  for (int j = 0; j < 8; ++j) ref += w[j] * hist[3 + j];
  EXPECT_LT((a - ref).lpNorm<Eigen::Infinity>(), 1e-13);
  EXPECT_LT((b - ref).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(Kernels, ThreadControl) {
  const int before = kernels::max_threads();
  kernels::set_threads(1);
  EXPECT_EQ(kernels::max_threads(), 1);
  kernels::set_threads(before);
  EXPECT_GE(kernels::max_threads(), 1);
}
