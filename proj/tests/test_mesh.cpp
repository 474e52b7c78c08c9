#include <cmath>
#include <numeric>
#include <stdexcept>

#include <gtest/gtest.h>

#include "bpdg/mesh.hpp"

namespace {

using bpdg::build_axis;
using bpdg::Segment;

double width_sum(const bpdg::Axis& a) {
  return std::accumulate(a.widths().begin(), a.widths().end(), 0.0);
}

TEST(Axis, TwoUniformCells) {
  const auto a = build_axis({{0.0, 1.0, 0.5}});
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.edges(), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_DOUBLE_EQ(a.center(1), 0.75);
}

TEST(Axis, RefinedWindowCounts) {
  const auto a = build_axis({{0.0, 0.2, 0.01}, {0.2, 0.4, 0.005}, {0.4, 0.6, 0.01}});
  EXPECT_EQ(a.size(), 80u);
  EXPECT_NEAR(width_sum(a), 0.6, 1e-12);
}

TEST(Axis, PitchAxisCounts) {
  // 1.7 / (0.85/6) = 12 cells below 0.7 and 0.3 / 0.025 = 12 above
  const auto a = build_axis({{-1.0, 0.7, 0.85 / 6.0}, {0.7, 1.0, 0.025}});
  EXPECT_EQ(a.size(), 24u);
  EXPECT_EQ(a.lo(), -1.0);
  EXPECT_EQ(a.hi(), 1.0);
}

TEST(Axis, Errors) {
  EXPECT_THROW(build_axis({{0.0, 0.5, 0.1}, {0.6, 1.0, 0.1}}), std::invalid_argument);
  EXPECT_THROW(build_axis({{0.0, 1.0, 0.3}}), std::invalid_argument);
  EXPECT_THROW(build_axis({}), std::invalid_argument);
  EXPECT_THROW(bpdg::Axis(std::vector<double>{0.0, 0.0, 1.0}), std::invalid_argument);
}

TEST(Axis, LocateAssignsInteriorEdgeToUpperCell) {
  const auto a = bpdg::uniform_axis(0.0, 1.0, 4);
  EXPECT_EQ(a.locate(0.0), 0u);
  EXPECT_EQ(a.locate(0.25), 1u);
  EXPECT_EQ(a.locate(0.3), 1u);
  EXPECT_EQ(a.locate(1.0), 3u);
  EXPECT_THROW(a.locate(1.01), std::domain_error);
}

TEST(Axis, WidthsSumToLengthProperty) {
  for (double w0 : {0.1, 0.05, 0.02, 0.001})
    for (double w1 : {0.2, 0.01, 0.004}) {
      const auto a = build_axis({{-0.3, 0.5, w0}, {0.5, 1.3, w1}});
      EXPECT_NEAR(width_sum(a), 1.6, 1e-12);
      for (double w : a.widths()) EXPECT_GT(w, 0.0);
    }
}

TEST(PresetMesh, Diode400) {
  const auto g = bpdg::preset_diode_mesh(bpdg::DevicePreset::Diode400);
  EXPECT_EQ(g.nx(), 120u);
  EXPECT_EQ(g.nw(), 60u);
  EXPECT_EQ(g.nmu(), 24u);
  EXPECT_EQ(g.cells(), 120u * 60u * 24u);
  EXPECT_DOUBLE_EQ(g.w.hi(), 40.0);
  std::size_t below = 0;
  for (std::size_t m = 0; m < g.nmu(); ++m) below += g.mu.center(m) < 0.7;
  EXPECT_EQ(below, 12u);
  EXPECT_NEAR(g.x.width(g.x.locate(0.3)), 0.005, 1e-12);
  EXPECT_NEAR(g.x.width(g.x.locate(0.1)), 0.01, 1e-12);
  EXPECT_NEAR(g.x.width(g.x.locate(0.8)), 0.01, 1e-12);
}

TEST(PresetMesh, Diode50) {
  const auto g = bpdg::preset_diode_mesh(bpdg::DevicePreset::Diode50);
  EXPECT_EQ(g.nx(), 64u);
  EXPECT_EQ(g.cells(), 64u * 60u * 20u);
  std::size_t counts[5] = {0, 0, 0, 0, 0};
  const double cuts[] = {0.09, 0.11, 0.14, 0.16};
  for (std::size_t i = 0; i < g.nx(); ++i) {
    std::size_t r = 0;
    while (r < 4 && g.x.center(i) > cuts[r]) ++r;
    ++counts[r];
  }
  EXPECT_EQ(counts[0], 9u);
  EXPECT_EQ(counts[1], 20u);
  EXPECT_EQ(counts[2], 6u);
  EXPECT_EQ(counts[3], 20u);
  EXPECT_EQ(counts[4], 9u);
  std::size_t below = 0;
  for (std::size_t m = 0; m < g.nmu(); ++m) below += g.mu.center(m) < 0.7;
  EXPECT_EQ(below, 10u);
}

TEST(PresetMesh, Mosfet) {
  const auto g = bpdg::preset_mosfet_mesh();
  EXPECT_EQ(g.cells(), 24u * 14u * 120u * 8u * 6u);
  EXPECT_EQ(g.nmu() % 2, 0u);
  EXPECT_EQ(g.nphi() % 2, 0u);
  for (std::size_t n = 0; n <= 6; ++n) EXPECT_NEAR(g.phi.edge(n) + g.phi.edge(6 - n), bpdg::kPi, 1e-14);
  EXPECT_EQ(g.poisson_y.size(), g.ny() + g.oxide_rows);
  EXPECT_EQ(g.oxide_rows, 2u);
  for (std::size_t j = 0; j <= g.ny(); ++j) EXPECT_EQ(g.poisson_y.edge(j), g.y.edge(j));
}

TEST(PresetMesh, CoarseVariants) {
  EXPECT_EQ(bpdg::preset_diode_mesh(bpdg::DevicePreset::Diode400, 40.0, true).cells(), 60u * 30u * 12u);
  EXPECT_EQ(bpdg::preset_mosfet_mesh(40.0, true).cells(), 12u * 7u * 60u * 8u * 6u);
}

TEST(PhaseGrid, MirrorPhiIsInvolution) {
  const auto g = bpdg::preset_mosfet_mesh(40.0, true);
  for (std::size_t n = 0; n < g.nphi(); ++n) {
    EXPECT_EQ(bpdg::mirror_phi(g, bpdg::mirror_phi(g, n)), n);
    EXPECT_NEAR(g.phi.center(bpdg::mirror_phi(g, n)), bpdg::kPi - g.phi.center(n), 1e-14);
  }
}

TEST(PhaseGrid, ValidationRejectsBadAxes) {
  auto g = bpdg::preset_diode_mesh(bpdg::DevicePreset::Diode400, 40.0, true);
  auto odd = g;
  odd.mu = bpdg::uniform_axis(-1.0, 1.0, 5);
  EXPECT_THROW(odd.validate(), std::invalid_argument);
  auto shifted = g;
  shifted.w = bpdg::uniform_axis(0.5, 40.0, 10);
  EXPECT_THROW(shifted.validate(), std::invalid_argument);
  auto g2 = bpdg::preset_mosfet_mesh(40.0, true);
  g2.phi = bpdg::build_axis({{0.0, 1.0, 0.5}, {1.0, bpdg::kPi, bpdg::kPi - 1.0}});
  EXPECT_THROW(g2.validate(), std::invalid_argument);
}

TEST(PhaseGrid, IndexLayoutIsVelocityFastest) {
  const auto g = bpdg::preset_mosfet_mesh(40.0, true);
  EXPECT_EQ(g.index(0, 0, 0, 0, 1), 1u);
  EXPECT_EQ(g.index(0, 0, 0, 1, 0), g.nphi());
  EXPECT_EQ(g.index(0, 1, 0, 0, 0), g.velocity_cells());
  EXPECT_EQ(g.index(1, 0, 0, 0, 0), g.ny() * g.velocity_cells());
  EXPECT_EQ(g.index(g.nx() - 1, g.ny() - 1, g.nw() - 1, g.nmu() - 1, g.nphi() - 1), g.cells() - 1);
}

TEST(PhaseGrid, HashDistinguishesGrids) {
  const auto a = bpdg::preset_diode_mesh(bpdg::DevicePreset::Diode400, 40.0, true);
  const auto b = bpdg::preset_diode_mesh(bpdg::DevicePreset::Diode400, 41.0, true);
  EXPECT_EQ(bpdg::grid_hash(a), bpdg::grid_hash(a));
  EXPECT_NE(bpdg::grid_hash(a), bpdg::grid_hash(b));
}

}  // namespace
