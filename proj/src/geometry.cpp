#include "homog/geometry.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <queue>
#include <sstream>

#include "homog/errors.hpp"

namespace homog {

GeometryKind geometry_kind_from_string(const std::string& s) {
  if (s == "full_fluid") return GeometryKind::FullFluid;
  if (s == "full_solid") return GeometryKind::FullSolid;
  if (s == "block") return GeometryKind::Block;
  if (s == "cross") return GeometryKind::Cross;
  if (s == "mask") return GeometryKind::Mask;
  throw ConfigError("unknown geometry kind '" + s + "'");
}

std::string to_string(GeometryKind k) {
  switch (k) {
    case GeometryKind::FullFluid: return "full_fluid";
    case GeometryKind::FullSolid: return "full_solid";
    case GeometryKind::Block: return "block";
    case GeometryKind::Cross: return "cross";
    case GeometryKind::Mask: return "mask";
  }
  return "?";
}

GeometryDescriptor GeometryDescriptor::at_resolution(int n_new) const {
  if (kind == GeometryKind::Mask && n_new != n)
    throw ResolutionMismatch("a voxel mask cannot be resampled from n=" + std::to_string(n) + " to n=" +
                             std::to_string(n_new));
  GeometryDescriptor d = *this;
  d.n = n_new;
  return d;
}

std::string GeometryDescriptor::describe() const {
  std::ostringstream os;
  os << to_string(kind) << " dim=" << dim << " n=" << n;
  if (kind == GeometryKind::Block) os << " side=" << side;
  if (kind == GeometryKind::Cross) os << " width=" << width;
  return os.str();
}

CellGeometry::CellGeometry(int dim, int n, std::vector<std::uint8_t> chi) : dim_(dim), n_(n), chi_(std::move(chi)) {
  if (dim != 2 && dim != 3) throw ConfigError("dim must be 2 or 3");
  if (n < 1) throw ConfigError("n must be positive");
  std::size_t expect = 1;
  for (int a = 0; a < dim; ++a) expect *= static_cast<std::size_t>(n);
  if (chi_.size() != expect) throw ConfigError("indicator size does not match n^dim");
  std::size_t fluid = 0;
  for (auto& v : chi_) {
    if (v > 1) throw ConfigError("indicator must be 0/1 valued");
    fluid += v;
  }
  m_ = static_cast<double>(fluid) / static_cast<double>(chi_.size());
  for (int c = 0; c < cells(); ++c)
    for (int a = 0; a < dim_; ++a)
      if (chi_[c] != chi_[shift(c, a, -1)]) interface_.push_back({a, c});
  fluid_conn_ = analyze_phase(*this, true);
  solid_conn_ = analyze_phase(*this, false);
}

int CellGeometry::index(const std::array<int, 3>& ijk) const {
  int idx = 0;
  for (int a = dim_ - 1; a >= 0; --a) idx = idx * n_ + ((ijk[a] % n_) + n_) % n_;
  return idx;
}

std::array<int, 3> CellGeometry::coords(int c) const {
  std::array<int, 3> ijk{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    ijk[a] = c % n_;
    c /= n_;
  }
  return ijk;
}

int CellGeometry::shift(int c, int axis, int s) const {
  auto ijk = coords(c);
  ijk[axis] += s;
  return index(ijk);
}

std::string CellGeometry::hash() const {
  std::string buf = std::to_string(dim_) + ":" + std::to_string(n_) + ":";
  for (auto v : chi_) buf.push_back(static_cast<char>('0' + v));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(buf.data(), buf.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

namespace {

int lattice_rank(std::vector<std::array<double, 3>> v, int dim) {
  int rank = 0;
  for (int col = 0; col < dim && rank < static_cast<int>(v.size()); ++col) {
    int piv = -1;
    for (int r = rank; r < static_cast<int>(v.size()); ++r)
      if (std::abs(v[r][col]) > 0.5 && (piv < 0 || std::abs(v[r][col]) > std::abs(v[piv][col]))) piv = r;
    if (piv < 0) continue;
    std::swap(v[rank], v[piv]);
    for (int r = 0; r < static_cast<int>(v.size()); ++r) {
      if (r == rank) continue;
      double f = v[r][col] / v[rank][col];
      for (int k = 0; k < dim; ++k) v[r][k] -= f * v[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

PhaseConnectivity analyze_phase(const CellGeometry& g, bool fluid_phase) {
  PhaseConnectivity out;
  const int nc = g.cells();
  const int d = g.dim();
  std::vector<int> comp(nc, -1);
  std::vector<std::array<int, 3>> lift(nc, {0, 0, 0});
  std::vector<std::array<double, 3>> wraps;
  for (int start = 0; start < nc; ++start) {
    if (g.fluid(start) != fluid_phase || comp[start] >= 0) continue;
    const int id = out.components++;
    std::queue<int> q;
    comp[start] = id;
    q.push(start);
    while (!q.empty()) {
      int c = q.front();
      q.pop();
      auto ijk = g.coords(c);
      for (int a = 0; a < d; ++a) {
        for (int s : {-1, 1}) {
          int nb = g.shift(c, a, s);
          if (g.fluid(nb) != fluid_phase) continue;
          auto l = lift[c];
          int moved = ijk[a] + s;
          if (moved < 0) l[a] -= 1;
          if (moved >= g.n()) l[a] += 1;
          if (comp[nb] < 0) {
            comp[nb] = id;
            lift[nb] = l;
            q.push(nb);
          } else if (id == 0 && l != lift[nb]) {
            std::array<double, 3> w{0, 0, 0};
            for (int k = 0; k < d; ++k) {
              w[k] = l[k] - lift[nb][k];
              if (w[k] != 0) out.percolates[k] = true;
            }
            wraps.push_back(w);
          }
        }
      }
    }
  }
  out.wrap_rank = lattice_rank(wraps, d);
  return out;
}

void validate_connectivity(const CellGeometry& g) {
  const auto& f = g.fluid_connectivity();
  const auto& s = g.solid_connectivity();
  if (g.has_fluid() && f.components != 1)
    throw DisconnectedPhase("fluid phase has " + std::to_string(f.components) + " periodic components");
  if (g.has_solid()) {
    if (s.components != 1)
      throw DisconnectedPhase("solid phase has " + std::to_string(s.components) + " periodic components");
    if (s.wrap_rank != g.dim())
      throw DisconnectedPhase("solid skeleton does not connect across cell boundaries in every direction");
  }
  if (g.dim() == 3 && g.has_fluid() && g.has_solid() && f.wrap_rank != 3)
    throw DisconnectedPhase("fluid phase does not connect across cell boundaries in every direction");
}

CellGeometry build_cell(const GeometryDescriptor& desc) {
  const int d = desc.dim;
  const int n = desc.n;
  if (d != 2 && d != 3) throw ConfigError("dim must be 2 or 3");
  if (n < 1) throw ConfigError("n must be positive");
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  std::vector<std::uint8_t> chi(total, 1);
  // |center - 1/2| < frac/2, in units of half voxels
  auto inside = [&](int i, double frac) { return std::abs(2 * i + 1 - n) < frac * n; };
  switch (desc.kind) {
    case GeometryKind::FullFluid: break;
    case GeometryKind::FullSolid: std::fill(chi.begin(), chi.end(), 0); break;
    case GeometryKind::Block:
    case GeometryKind::Cross: {
      const double frac = desc.kind == GeometryKind::Block ? desc.side : desc.width;
      if (!(frac > 0.0 && frac < 1.0)) throw ConfigError("block side / cross width must lie in (0,1)");
      for (std::size_t c = 0; c < total; ++c) {
        int rem = static_cast<int>(c);
        int hits = 0;
        for (int a = 0; a < d; ++a) {
          hits += inside(rem % n, frac) ? 1 : 0;
          rem /= n;
        }
        const int needed = desc.kind == GeometryKind::Block ? d : d - 1;
        if (hits >= needed) chi[c] = 0;
      }
      break;
    }
    case GeometryKind::Mask:
      if (desc.mask.size() != total) throw ConfigError("mask size does not match n^dim");
      chi = desc.mask;
      break;
  }
  CellGeometry g(d, n, std::move(chi));
  validate_connectivity(g);
  return g;
}

double PorousDomain::porosity() const {
  std::size_t f = 0;
  for (auto v : chi_) f += v;
  return static_cast<double>(f) / static_cast<double>(chi_.size());
}

PorousDomain tile(const CellGeometry& cell, int k, int N) {
  if (k < 1) throw ResolutionMismatch("1/eps must be a positive integer");
  const int kn = k * cell.n();
  if (N % kn != 0)
    throw ResolutionMismatch("macro resolution " + std::to_string(N) + " not divisible by k*n = " +
                             std::to_string(kn));
  const int r = N / kn;  // fine voxels per cell voxel per axis
  PorousDomain dom;
  dom.dim_ = cell.dim();
  dom.N_ = N;
  dom.k_ = k;
  std::size_t total = 1;
  for (int a = 0; a < cell.dim(); ++a) total *= static_cast<std::size_t>(N);
  dom.chi_.resize(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    std::array<int, 3> ijk{0, 0, 0};
    for (int a = 0; a < cell.dim(); ++a) {
      int i = static_cast<int>(rem % N);
      rem /= N;
      ijk[a] = (i / r) % cell.n();
    }
    dom.chi_[idx] = cell.chi()[cell.index(ijk)];
  }
  return dom;
}

void write_mask(const CellGeometry& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write mask file " + path.string());
  out << g.dim() << " " << g.n() << "\n";
  const int rows = g.cells() / g.n();
  for (int r = 0; r < rows; ++r) {
    for (int i = 0; i < g.n(); ++i) out << (i ? " " : "") << int(g.chi()[r * g.n() + i]);
    out << "\n";
  }
}

CellGeometry read_mask(const std::filesystem::path& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mask file " + path.string());
  int d = 0, n = 0;
  if (!(in >> d >> n)) throw ConfigError("mask file header must be 'dim n'");
  if ((d != 2 && d != 3) || n < 1) throw ConfigError("bad mask header");
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  std::vector<std::uint8_t> chi(total);
  for (std::size_t i = 0; i < total; ++i) {
    int v = -1;
    if (!(in >> v) || (v != 0 && v != 1)) throw ConfigError("mask file must contain n^dim values 0/1");
    chi[i] = static_cast<std::uint8_t>(v);
  }
  CellGeometry g(d, n, std::move(chi));
  if (validate) validate_connectivity(g);
  return g;
}

}  // namespace homog
