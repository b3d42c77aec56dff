#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace homog {

enum class GeometryKind { FullFluid, FullSolid, Block, Cross, Mask };

struct GeometryDescriptor {
  GeometryKind kind = GeometryKind::Cross;
  int dim = 2;
  int n = 32;
  double side = 0.5;    // block side fraction
  double width = 0.25;  // cross bar width fraction
  std::vector<std::uint8_t> mask;  // Mask kind only, 1 = fluid

  // Same descriptor at another voxel resolution (Mask kind cannot be resampled).
  GeometryDescriptor at_resolution(int n_new) const;
  std::string describe() const;
};

GeometryKind geometry_kind_from_string(const std::string& s);
std::string to_string(GeometryKind k);

struct InterfaceFace {
  int axis;  // face normal
  int cell;  // face sits on the lower side of this cell along axis
};

struct PhaseConnectivity {
  int components = 0;              // periodic components on the torus
  std::array<bool, 3> percolates{};  // lift reaches its own translate along each axis
  int wrap_rank = 0;               // rank of the lattice of wrap vectors
};

class CellGeometry {
public:
  CellGeometry(int dim, int n, std::vector<std::uint8_t> chi);

  int dim() const { return dim_; }
  int n() const { return n_; }
  int cells() const { return static_cast<int>(chi_.size()); }
  double h() const { return 1.0 / n_; }
  double m() const { return m_; }
  bool fluid(int c) const { return chi_[c] != 0; }
  const std::vector<std::uint8_t>& chi() const { return chi_; }
  const std::vector<InterfaceFace>& interface_faces() const { return interface_; }
  const PhaseConnectivity& fluid_connectivity() const { return fluid_conn_; }
  const PhaseConnectivity& solid_connectivity() const { return solid_conn_; }
  bool has_fluid() const { return m_ > 0.0; }
  bool has_solid() const { return m_ < 1.0; }

  int index(const std::array<int, 3>& ijk) const;
  std::array<int, 3> coords(int c) const;
  // Periodic neighbor of c shifted by s along axis.
  int shift(int c, int axis, int s) const;

  // SHA-256 over (dim, n, chi), hex encoded.
  std::string hash() const;

private:
  int dim_;
  int n_;
  std::vector<std::uint8_t> chi_;
  double m_ = 0.0;
  std::vector<InterfaceFace> interface_;
  PhaseConnectivity fluid_conn_;
  PhaseConnectivity solid_conn_;
};

PhaseConnectivity analyze_phase(const CellGeometry& g, bool fluid_phase);

// Builds and validates. Throws DisconnectedPhase.
CellGeometry build_cell(const GeometryDescriptor& desc);
// Connectivity rule applied by build_cell; exposed for tests.
void validate_connectivity(const CellGeometry& g);

// chi over the macro grid of Omega = (0,1)^dim, cell voxels replicated.
class PorousDomain {
public:
  int dim() const { return dim_; }
  int N() const { return N_; }
  int k() const { return k_; }
  double eps() const { return 1.0 / k_; }
  double h() const { return 1.0 / N_; }
  const std::vector<std::uint8_t>& chi() const { return chi_; }
  double porosity() const;

  friend PorousDomain tile(const CellGeometry& cell, int k, int N);

private:
  int dim_ = 2;
  int N_ = 0;
  int k_ = 1;
  std::vector<std::uint8_t> chi_;
};

// eps = 1/k; macro grid N per side. Throws ResolutionMismatch unless k*n divides N.
PorousDomain tile(const CellGeometry& cell, int k, int N);

void write_mask(const CellGeometry& g, const std::filesystem::path& path);
CellGeometry read_mask(const std::filesystem::path& path, bool validate = true);

}  // namespace homog
