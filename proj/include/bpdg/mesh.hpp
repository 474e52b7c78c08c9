#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "constants.hpp"

namespace bpdg {

// Piecewise-uniform axis description: [start, end] split into cells of `width`.
struct Segment {
  double start = 0.0;
  double end = 0.0;
  double width = 0.0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

class Axis {
 public:
  Axis() = default;
  explicit Axis(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw std::invalid_argument("Axis: need at least one cell");
    for (std::size_t i = 1; i < edges_.size(); ++i)
      if (!(edges_[i] > edges_[i - 1])) throw std::invalid_argument("Axis: edges must be strictly increasing");
    centers_.resize(size());
    widths_.resize(size());
    for (std::size_t i = 0; i < size(); ++i) {
      centers_[i] = 0.5 * (edges_[i] + edges_[i + 1]);
      widths_[i] = edges_[i + 1] - edges_[i];
    }
  }

  std::size_t size() const { return edges_.empty() ? 0 : edges_.size() - 1; }
  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }
  double edge(std::size_t i) const { return edges_[i]; }
  double center(std::size_t i) const { return centers_[i]; }
  double width(std::size_t i) const { return widths_[i]; }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& centers() const { return centers_; }
  const std::vector<double>& widths() const { return widths_; }

  // Index of the cell containing z; a point on an interior edge belongs to the upper cell.
  std::size_t locate(double z) const {
    if (!(z >= lo() && z <= hi())) throw std::domain_error("Axis::locate: point outside axis");
    auto it = std::upper_bound(edges_.begin(), edges_.end(), z);
    std::size_t idx = static_cast<std::size_t>(it - edges_.begin());
    if (idx == 0) return 0;
    return std::min(idx - 1, size() - 1);
  }

  friend bool operator==(const Axis& a, const Axis& b) { return a.edges_ == b.edges_; }

 private:
  std::vector<double> edges_;
  std::vector<double> centers_;
  std::vector<double> widths_;
};

inline Axis build_axis(const std::vector<Segment>& segments) {
  if (segments.empty()) throw std::invalid_argument("build_axis: no segments");
  std::vector<double> edges{segments.front().start};
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    if (s > 0 && std::abs(seg.start - segments[s - 1].end) > 1e-12)
      throw std::invalid_argument("build_axis: segments are not contiguous");
    const double len = seg.end - seg.start;
    if (!(len > 0.0) || !(seg.width > 0.0)) throw std::invalid_argument("build_axis: empty segment or width");
    const double ratio = len / seg.width;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(n * seg.width - len) > 1e-12 * std::max(1.0, len))
      throw std::invalid_argument("build_axis: width does not divide segment length");
    const auto cells = static_cast<std::size_t>(n);
    for (std::size_t i = 1; i <= cells; ++i)
      edges.push_back(i == cells ? seg.end : seg.start + len * static_cast<double>(i) / n);
  }
  return Axis(std::move(edges));
}

inline Axis uniform_axis(double lo, double hi, std::size_t cells) {
  return build_axis({{lo, hi, (hi - lo) / static_cast<double>(cells)}});
}

enum class Dim { One, Two };

struct PhaseGrid {
  Dim dim = Dim::One;
  Axis x, y, w, mu, phi;
  // 2D only: Poisson y-axis, silicon rows followed by oxide rows.
  Axis poisson_y;
  std::size_t oxide_rows = 0;

  bool two_d() const { return dim == Dim::Two; }
  std::size_t nx() const { return x.size(); }
  std::size_t ny() const { return two_d() ? y.size() : 1; }
  std::size_t nw() const { return w.size(); }
  std::size_t nmu() const { return mu.size(); }
  std::size_t nphi() const { return two_d() ? phi.size() : 1; }
  std::size_t velocity_cells() const { return nw() * nmu() * nphi(); }
  std::size_t spatial_cells() const { return nx() * ny(); }
  std::size_t cells() const { return spatial_cells() * velocity_cells(); }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k, std::size_t m, std::size_t n) const {
    return (((i * ny() + j) * nw() + k) * nmu() + m) * nphi() + n;
  }
  std::size_t velocity_index(std::size_t k, std::size_t m, std::size_t n) const {
    return (k * nmu() + m) * nphi() + n;
  }
  double w_max() const { return w.hi(); }

  void validate() const {
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
    if (x.size() == 0 || w.size() == 0 || mu.size() == 0) throw std::invalid_argument("PhaseGrid: empty axis");
    if (w.lo() != 0.0) throw std::invalid_argument("PhaseGrid: w axis must start at 0");
    if (mu.lo() != -1.0 || mu.hi() != 1.0) throw std::invalid_argument("PhaseGrid: mu axis must span [-1, 1]");
    if (mu.size() % 2 != 0) throw std::invalid_argument("PhaseGrid: number of mu cells must be even");
    if (!two_d()) return;
    if (y.size() == 0 || phi.size() == 0) throw std::invalid_argument("PhaseGrid: empty y or phi axis");
    if (phi.lo() != 0.0 || !near(phi.hi(), kPi)) throw std::invalid_argument("PhaseGrid: phi axis must span [0, pi]");
    if (phi.size() % 2 != 0) throw std::invalid_argument("PhaseGrid: number of phi cells must be even");
    const std::size_t np = phi.size();
    for (std::size_t i = 0; i <= np; ++i)
      if (!near(phi.edge(i) + phi.edge(np - i), kPi))
        throw std::invalid_argument("PhaseGrid: phi edges are not symmetric about pi/2");
    if (!std::binary_search(mu.edges().begin(), mu.edges().end(), 0.0))
      throw std::invalid_argument("PhaseGrid: 2D grids need a mu edge at 0");
    if (poisson_y.size() != y.size() + oxide_rows) throw std::invalid_argument("PhaseGrid: Poisson y axis mismatch");
    for (std::size_t j = 0; j <= y.size(); ++j)
      if (poisson_y.edge(j) != y.edge(j)) throw std::invalid_argument("PhaseGrid: Poisson y axis must extend the silicon axis");
  }
};

// Reflection partner of phi cell n under phi -> pi - phi.
inline std::size_t mirror_phi(const PhaseGrid& g, std::size_t n) { return g.nphi() - 1 - n; }

// FNV-1a over the dimension tag and all edge coordinates.
inline std::uint64_t grid_hash(const PhaseGrid& g) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix_bytes = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint32_t tag = g.two_d() ? 2u : 1u;
  mix_bytes(&tag, sizeof tag);
  auto mix_axis = [&](const Axis& a) {
    const std::uint64_t n = a.edges().size();
    mix_bytes(&n, sizeof n);
    if (n) mix_bytes(a.edges().data(), n * sizeof(double));
  };
  mix_axis(g.x);
  mix_axis(g.w);
  mix_axis(g.mu);
  if (g.two_d()) {
    mix_axis(g.y);
    mix_axis(g.phi);
    mix_axis(g.poisson_y);
  }
  return h;
}

enum class DevicePreset { Diode400, Diode50, Mosfet };

inline std::string preset_name(DevicePreset p) {
  switch (p) {
    case DevicePreset::Diode400: return "diode400";
    case DevicePreset::Diode50: return "diode50";
    case DevicePreset::Mosfet: return "mosfet";
  }
  return "?";
}

inline DevicePreset parse_preset(const std::string& s) {
  if (s == "diode400") return DevicePreset::Diode400;
  if (s == "diode50") return DevicePreset::Diode50;
  if (s == "mosfet") return DevicePreset::Mosfet;
  throw std::invalid_argument("unknown device preset: " + s);
}

// Axis breakpoints for the built-in diode meshes. The coarse variants halve
// every cell count and are used for quick regression runs.
struct DiodeMeshSpec {
  std::vector<Segment> x, mu;
  std::size_t nw = 60;
  friend bool operator==(const DiodeMeshSpec&, const DiodeMeshSpec&) = default;
};

inline DiodeMeshSpec diode_mesh_spec(DevicePreset p, bool coarse = false) {
  DiodeMeshSpec s;
  if (p == DevicePreset::Diode400) {
    const double f = coarse ? 2.0 : 1.0;
    s.x = {{0.0, 0.2, 0.01 * f}, {0.2, 0.4, 0.005 * f}, {0.4, 1.0, 0.01 * f}};
    s.mu = {{-1.0, 0.7, 0.85 / 6.0 * f}, {0.7, 1.0, 0.025 * f}};
  } else if (p == DevicePreset::Diode50) {
    if (coarse) {
      s.x = {{0.0, 0.09, 0.015}, {0.09, 0.11, 0.002}, {0.11, 0.14, 0.01}, {0.14, 0.16, 0.002}, {0.16, 0.25, 0.015}};
      s.mu = {{-1.0, 0.7, 0.34}, {0.7, 1.0, 0.06}};
    } else {
      s.x = {{0.0, 0.09, 0.01}, {0.09, 0.11, 0.001}, {0.11, 0.14, 0.005}, {0.14, 0.16, 0.001}, {0.16, 0.25, 0.01}};
      s.mu = {{-1.0, 0.7, 0.17}, {0.7, 1.0, 0.03}};
    }
  } else {
    throw std::invalid_argument("diode_mesh_spec: not a diode preset");
  }
  s.nw = coarse ? 30 : 60;
  return s;
}

inline PhaseGrid make_grid_1d(const Axis& x, const Axis& w, const Axis& mu) {
  PhaseGrid g;
  g.dim = Dim::One;
  g.x = x;
  g.w = w;
  g.mu = mu;
  g.validate();
  return g;
}

inline PhaseGrid preset_diode_mesh(DevicePreset p, double w_max = 40.0, bool coarse = false) {
  const DiodeMeshSpec s = diode_mesh_spec(p, coarse);
  return make_grid_1d(build_axis(s.x), uniform_axis(0.0, w_max, s.nw), build_axis(s.mu));
}

struct MosfetMeshSpec {
  double length = 0.15;       // x extent
  double si_height = 0.12;    // silicon half-height above the symmetry line
  double oxide_thickness = 0.02;
  std::size_t nx = 24, ny = 14, nw = 120, nmu = 8, nphi = 6, oxide_rows = 2;
  friend bool operator==(const MosfetMeshSpec&, const MosfetMeshSpec&) = default;
};

inline PhaseGrid make_grid_2d(const MosfetMeshSpec& s, double w_max) {
  PhaseGrid g;
  g.dim = Dim::Two;
  g.x = uniform_axis(0.0, s.length, s.nx);
  g.y = uniform_axis(0.0, s.si_height, s.ny);
  g.w = uniform_axis(0.0, w_max, s.nw);
  g.mu = uniform_axis(-1.0, 1.0, s.nmu);
  g.phi = uniform_axis(0.0, kPi, s.nphi);
  g.oxide_rows = s.oxide_rows;
  std::vector<double> py = g.y.edges();
  for (std::size_t r = 1; r <= s.oxide_rows; ++r)
    py.push_back(r == s.oxide_rows ? s.si_height + s.oxide_thickness
                                   : s.si_height + s.oxide_thickness * static_cast<double>(r) /
                                                       static_cast<double>(s.oxide_rows));
  g.poisson_y = Axis(py);
  g.validate();
  return g;
}

inline MosfetMeshSpec mosfet_mesh_spec(bool coarse = false) {
  MosfetMeshSpec s;
  if (coarse) {
    s.nx = 12;
    s.ny = 7;
    s.nw = 60;
  }
  return s;
}

inline PhaseGrid preset_mosfet_mesh(double w_max = 40.0, bool coarse = false) {
  return make_grid_2d(mosfet_mesh_spec(coarse), w_max);
}

}  // namespace bpdg
