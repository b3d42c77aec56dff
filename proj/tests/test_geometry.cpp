#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>
#include <queue>
#include <random>

#include "homog/errors.hpp"
#include "homog/geometry.hpp"

using namespace homog;

namespace {

GeometryDescriptor desc(GeometryKind kind, int dim, int n) {
  GeometryDescriptor d;
  d.kind = kind;
  d.dim = dim;
  d.n = n;
  return d;
}

// Independent BFS oracle: periodic face-adjacency components of one phase in 2D.
int components_2d(const std::vector<std::uint8_t>& chi, int n, std::uint8_t phase) {
  std::vector<int> label(chi.size(), -1);
  int count = 0;
  for (int s = 0; s < n * n; ++s) {
    if (chi[s] != phase || label[s] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    label[s] = count;
    while (!q.empty()) {
      const int c = q.front();
      q.pop();
      const int i = c % n, j = c / n;
      const int nb[4] = {(i + 1) % n + j * n, (i + n - 1) % n + j * n, i + ((j + 1) % n) * n, i + ((j + n - 1) % n) * n};
      for (int x : nb)
        if (chi[x] == phase && label[x] < 0) {
          label[x] = count;
          q.push(x);
        }
    }
    ++count;
  }
  return count;
}

std::vector<std::uint8_t> translate(const std::vector<std::uint8_t>& chi, int n, int di, int dj) {
  std::vector<std::uint8_t> out(chi.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out[(i + di) % n + ((j + dj) % n) * n] = chi[i + j * n];
  return out;
}

}  // namespace

TEST(BuildCell, FullFluid) {
  const auto g = build_cell(desc(GeometryKind::FullFluid, 2, 16));
  EXPECT_EQ(g.m(), 1.0);
  EXPECT_TRUE(g.interface_faces().empty());
  EXPECT_FALSE(g.has_solid());
}

TEST(BuildCell, FullSolid) {
  const auto g = build_cell(desc(GeometryKind::FullSolid, 3, 4));
  EXPECT_EQ(g.m(), 0.0);
  EXPECT_TRUE(g.interface_faces().empty());
}

TEST(BuildCell, CenteredBlockIsRejected) {
  auto d = desc(GeometryKind::Block, 2, 16);
  d.side = 0.5;
  EXPECT_THROW(build_cell(d), DisconnectedPhase);
  // Porosity of the unvalidated block: 1 - (8/16)^2.
  std::vector<std::uint8_t> chi(256, 1);
  for (int j = 4; j < 12; ++j)
    for (int i = 4; i < 12; ++i) chi[i + 16 * j] = 0;
  CellGeometry g(2, 16, chi);
  EXPECT_DOUBLE_EQ(g.m(), 0.75);
  EXPECT_EQ(g.solid_connectivity().components, 1);
  EXPECT_EQ(g.solid_connectivity().wrap_rank, 0);
}

TEST(BuildCell, CrossPorosityAndInterface) {
  for (int n : {16, 32}) {
    const auto g = build_cell(desc(GeometryKind::Cross, 2, n));
    const int bar = n / 4;
    const int solid = 2 * bar * n - bar * bar;
    EXPECT_DOUBLE_EQ(g.m(), 1.0 - static_cast<double>(solid) / (n * n));
    // Each isolated square pore has a perimeter of 4 * (n - bar) faces.
    EXPECT_EQ(static_cast<int>(g.interface_faces().size()), 4 * (n - bar));
  }
  const auto g3 = build_cell(desc(GeometryKind::Cross, 3, 8));
  const double f = 0.25;
  EXPECT_NEAR(g3.m(), 1.0 - (3 * f * f * (1 - f) + f * f * f), 1e-15);
}

TEST(BuildCell, ConnectivityMatchesBfsOracle) {
  const auto g = build_cell(desc(GeometryKind::Cross, 2, 16));
  EXPECT_EQ(g.solid_connectivity().components, components_2d(g.chi(), 16, 0));
  EXPECT_EQ(g.fluid_connectivity().components, components_2d(g.chi(), 16, 1));
  EXPECT_EQ(g.solid_connectivity().wrap_rank, 2);
}

TEST(BuildCell, ConnectivityInvariantUnderTranslation) {
  std::mt19937 rng(3);
  const auto g = build_cell(desc(GeometryKind::Cross, 2, 16));
  for (int trial = 0; trial < 5; ++trial) {
    const int di = static_cast<int>(rng() % 16), dj = static_cast<int>(rng() % 16);
    CellGeometry t(2, 16, translate(g.chi(), 16, di, dj));
    EXPECT_EQ(t.solid_connectivity().components, g.solid_connectivity().components);
    EXPECT_EQ(t.solid_connectivity().wrap_rank, g.solid_connectivity().wrap_rank);
    EXPECT_EQ(t.fluid_connectivity().components, g.fluid_connectivity().components);
    EXPECT_NO_THROW(validate_connectivity(t));
  }
}

TEST(BuildCell, RandomMasksAgreeWithBfs) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint8_t> chi(64);
    for (auto& c : chi) c = static_cast<std::uint8_t>(rng() % 2);
    CellGeometry g(2, 8, chi);
    EXPECT_EQ(g.fluid_connectivity().components, components_2d(chi, 8, 1));
    EXPECT_EQ(g.solid_connectivity().components, components_2d(chi, 8, 0));
    // Relabeling phases swaps the reports.
    std::vector<std::uint8_t> flipped(chi.size());
    for (std::size_t i = 0; i < chi.size(); ++i) flipped[i] = 1 - chi[i];
    CellGeometry h(2, 8, flipped);
    EXPECT_EQ(h.fluid_connectivity().components, g.solid_connectivity().components);
    EXPECT_EQ(h.solid_connectivity().wrap_rank, g.fluid_connectivity().wrap_rank);
  }
}

TEST(BuildCell, RejectsBadDescriptors) {
  EXPECT_THROW(build_cell(desc(GeometryKind::Cross, 4, 8)), ConfigError);
  auto d = desc(GeometryKind::Cross, 2, 8);
  d.width = 1.5;
  EXPECT_THROW(build_cell(d), ConfigError);
  d = desc(GeometryKind::Mask, 2, 4);
  d.mask.assign(3, 1);
  EXPECT_THROW(build_cell(d), ConfigError);
  EXPECT_THROW(geometry_kind_from_string("sphere"), ConfigError);
}

TEST(Tile, PorosityPreserved) {
  const auto g = build_cell(desc(GeometryKind::Cross, 2, 16));
  for (int k : {1, 2, 4}) {
    const auto dom = tile(g, k, 64);
    EXPECT_DOUBLE_EQ(dom.porosity(), g.m());
    EXPECT_DOUBLE_EQ(dom.eps(), 1.0 / k);
  }
}

TEST(Tile, PeriodicWithPeriodEps) {
  const auto g = build_cell(desc(GeometryKind::Cross, 2, 8));
  const auto dom = tile(g, 4, 64);
  const int N = 64, period = 16;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i + period < N; ++i) ASSERT_EQ(dom.chi()[i + N * j], dom.chi()[i + period + N * j]);
  // Voxel replication: fine voxel (i, j) maps to cell voxel (i/2 mod 8, j/2 mod 8).
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) ASSERT_EQ(dom.chi()[i + N * j], g.chi()[(i / 2) % 8 + 8 * ((j / 2) % 8)]);
}

TEST(Tile, FullFluidAndMismatch) {
  const auto ff = build_cell(desc(GeometryKind::FullFluid, 2, 16));
  const auto dom = tile(ff, 3, 48);
  for (auto v : dom.chi()) EXPECT_EQ(v, 1);
  const auto cross = build_cell(desc(GeometryKind::Cross, 2, 16));
  EXPECT_NO_THROW(tile(cross, 3, 96));
  EXPECT_THROW(tile(cross, 3, 64), ResolutionMismatch);
  EXPECT_THROW(tile(cross, 0, 64), ResolutionMismatch);
}

TEST(Mask, RoundTripAndHash) {
  const auto g = build_cell(desc(GeometryKind::Cross, 2, 8));
  const auto path = std::filesystem::temp_directory_path() / "homog_test_mask.txt";
  write_mask(g, path);
  const auto r = read_mask(path);
  EXPECT_EQ(r.chi(), g.chi());
  EXPECT_EQ(r.hash(), g.hash());
  EXPECT_EQ(g.hash().size(), 64u);
  const auto other = build_cell(desc(GeometryKind::Cross, 2, 16));
  EXPECT_NE(other.hash(), g.hash());
  std::filesystem::remove(path);
  EXPECT_THROW(read_mask(path), ConfigError);
}

TEST(Mask, CannotResample) {
  auto d = desc(GeometryKind::Mask, 2, 4);
  d.mask.assign(16, 1);
  EXPECT_THROW(d.at_resolution(8), ResolutionMismatch);
  EXPECT_EQ(desc(GeometryKind::Cross, 2, 8).at_resolution(16).n, 16);
}
