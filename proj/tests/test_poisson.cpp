#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "bpdg/poisson.hpp"

namespace {

using bpdg::Axis;
using bpdg::LdgPoisson;
using bpdg::PoissonBC;
using bpdg::Side;

std::vector<double> zeros(std::size_t cells, std::size_t nb) { return std::vector<double>(cells * nb, 0.0); }

TEST(Poisson1D, LinearRampIsExact) {
  const Axis x = bpdg::build_axis({{0.0, 0.3, 0.1}, {0.3, 0.7, 0.02}, {0.7, 1.0, 0.05}});
  PoissonBC bc;
  bc.add(Side::Left, 0.0).add(Side::Right, 1.0);
  const LdgPoisson p(x, std::vector<double>(x.size(), 11.7), bc, 10.0);
  const auto sol = p.solve(zeros(x.size(), 2));
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(sol.psi[2 * i], x.center(i), 1e-12);
    EXPECT_NEAR(sol.psi[2 * i + 1], 0.5 * x.width(i), 1e-12);
    EXPECT_NEAR(sol.ex(i), -10.0, 1e-10);
  }
}

TEST(Poisson1D, TwoDielectricSlabIsExact) {
  const Axis x = bpdg::uniform_axis(0.0, 1.0, 10);
  std::vector<double> eps(10);
  for (std::size_t i = 0; i < 10; ++i) eps[i] = x.center(i) < 0.5 ? 11.7 : 3.9;
  PoissonBC bc;
  bc.add(Side::Left, 0.0).add(Side::Right, 1.0);
  const auto sol = LdgPoisson(x, eps, bc).solve(zeros(10, 2));
  // constant displacement D: 0.5 D / 11.7 + 0.5 D / 3.9 = 1
  const double D = 1.0 / (0.5 / 11.7 + 0.5 / 3.9);
  auto exact = [&](double z) { return z < 0.5 ? D * z / 11.7 : D * 0.5 / 11.7 + D * (z - 0.5) / 3.9; };
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(sol.psi[2 * i], exact(x.center(i)), 1e-12);
    EXPECT_NEAR(eps[i] * sol.q[2 * i], D, 1e-10);
  }
}

TEST(Poisson1D, ConstantSourceConvergesAtSecondOrder) {
  // eps Psi'' = R, Psi(0) = Psi(1) = 0
  const double eps = 11.7, R = -3.0;
  auto exact = [&](double z, double) { return R / (2.0 * eps) * z * (z - 1.0); };
  double prev = 0.0;
  for (std::size_t n : {8, 16, 32, 64}) {
    const Axis x = bpdg::uniform_axis(0.0, 1.0, n);
    PoissonBC bc;
    bc.add(Side::Left, 0.0).add(Side::Right, 0.0);
    const auto sol = LdgPoisson(x, std::vector<double>(n, eps), bc).solve(bpdg::project_source(x, nullptr, [&](double, double) { return R; }));
    const double err = bpdg::potential_l2_error(sol, x, nullptr, exact);
    if (prev > 0.0) {
      EXPECT_GE(std::log2(prev / err), 1.9) << n;
    }
    prev = err;
  }
}

TEST(Poisson1D, ManufacturedSineConverges) {
  const auto rows = bpdg::poisson_convergence({16, 32, 64, 128}, false);
  for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_GE(rows[r].order, 1.9);
  EXPECT_LT(rows.back().error, 1e-4);
}

TEST(Poisson1D, BoundaryFluxBalancesSource) {
  const Axis x = bpdg::build_axis({{0.0, 0.4, 0.05}, {0.4, 1.0, 0.02}});
  PoissonBC bc;
  bc.add(Side::Left, 0.3).add(Side::Right, -0.2);
  const LdgPoisson p(x, std::vector<double>(x.size(), 11.7), bc);
  auto src = [](double z, double) { return std::exp(z) - 2.0 * z * z; };
  const auto r = bpdg::project_source(x, nullptr, src);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x.width(i) * r[2 * i];
  EXPECT_NEAR(p.boundary_flux(p.solve(r)), total, 1e-10 * std::abs(total));
}

TEST(Poisson1D, RepeatedSolvesAreBitIdentical) {
  const Axis x = bpdg::uniform_axis(0.0, 1.0, 50);
  PoissonBC bc;
  bc.add(Side::Left, 0.0).add(Side::Right, 1.0);
  const LdgPoisson p(x, std::vector<double>(50, 11.7), bc);
  const auto r = bpdg::project_source(x, nullptr, [](double z, double) { return std::sin(7.0 * z); });
  const auto a = p.solve(r), b = p.solve(r);
  EXPECT_EQ(a.psi, b.psi);
  EXPECT_EQ(a.q, b.q);
  const auto c = LdgPoisson(x, std::vector<double>(50, 11.7), bc).solve(r);
  EXPECT_EQ(a.psi, c.psi);
}

TEST(Poisson1D, RejectsWrongRhsSize) {
  const Axis x = bpdg::uniform_axis(0.0, 1.0, 4);
  PoissonBC bc;
  bc.add(Side::Left, 0.0);
  const LdgPoisson p(x, std::vector<double>(4, 1.0), bc);
  EXPECT_THROW(p.solve(zeros(3, 2)), std::invalid_argument);
}

TEST(Poisson2D, ConstantDataGivesConstantPotential) {
  const Axis x = bpdg::uniform_axis(0.0, 1.0, 6), y = bpdg::uniform_axis(0.0, 0.5, 4);
  PoissonBC bc;
  bc.add(Side::Left, 2.0).add(Side::Right, 2.0).add(Side::Bottom, 2.0).add(Side::Top, 2.0);
  const auto sol = LdgPoisson(x, y, std::vector<double>(24, 11.7), bc).solve(zeros(24, 3));
  for (std::size_t c = 0; c < 24; ++c) {
    EXPECT_NEAR(sol.psi_mean(c), 2.0, 1e-12);
    EXPECT_NEAR(sol.ex(c), 0.0, 1e-10);
    EXPECT_NEAR(sol.ey(c), 0.0, 1e-10);
  }
}

TEST(Poisson2D, ExtrudedProblemMatchesOneDimension) {
  const Axis x = bpdg::build_axis({{0.0, 0.5, 0.05}, {0.5, 1.0, 0.1}}), y = bpdg::uniform_axis(0.0, 0.3, 5);
  auto src = [](double z, double) { return 100.0 * std::cos(3.0 * z); };
  PoissonBC bc;
  bc.add(Side::Left, 0.5).add(Side::Right, 1.5);
  const auto s1 = LdgPoisson(x, std::vector<double>(x.size(), 11.7), bc).solve(bpdg::project_source(x, nullptr, src));
  const auto s2 = LdgPoisson(x, y, std::vector<double>(x.size() * 5, 11.7), bc).solve(bpdg::project_source(x, &y, src));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const std::size_t c = i * 5 + j;
      EXPECT_NEAR(s2.psi[3 * c], s1.psi[2 * i], 1e-10);
      EXPECT_NEAR(s2.psi[3 * c + 1], s1.psi[2 * i + 1], 1e-10);
      EXPECT_NEAR(s2.psi[3 * c + 2], 0.0, 1e-10);
      EXPECT_NEAR(s2.ex(c), s1.ex(i), 1e-9);
      EXPECT_NEAR(s2.ey(c), 0.0, 1e-9);
    }
}

TEST(Poisson2D, LayeredDielectricIsExact) {
  // silicon below an oxide cap, biased bottom to top, insulated sides
  const Axis x = bpdg::uniform_axis(0.0, 0.15, 6), y = bpdg::build_axis({{0.0, 0.12, 0.02}, {0.12, 0.14, 0.01}});
  std::vector<double> eps(x.size() * y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) eps[i * y.size() + j] = y.center(j) < 0.12 ? 11.7 : 3.9;
  PoissonBC bc;
  bc.add(Side::Bottom, 0.0).add(Side::Top, 1.0);
  const auto sol = LdgPoisson(x, y, eps, bc).solve(zeros(eps.size(), 3));
  const double D = 1.0 / (0.12 / 11.7 + 0.02 / 3.9);
  auto exact = [&](double z) { return z < 0.12 ? D * z / 11.7 : D * 0.12 / 11.7 + D * (z - 0.12) / 3.9; };
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      const std::size_t c = i * y.size() + j;
      EXPECT_NEAR(sol.psi_mean(c), exact(y.center(j)), 1e-11);
      EXPECT_NEAR(eps[c] * sol.s[3 * c], D, 1e-9);
      EXPECT_NEAR(sol.q[3 * c], 0.0, 1e-9);
    }
}

TEST(Poisson2D, ManufacturedSineConvergesMonotonically) {
  const auto rows = bpdg::poisson_convergence({8, 16, 32}, true);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_LT(rows[r].error, rows[r - 1].error);
    EXPECT_GE(rows[r].order, 1.9);
  }
}

TEST(Poisson2D, BoundaryFluxBalancesSourceWithMixedData) {
  const Axis x = bpdg::uniform_axis(0.0, 0.15, 12), y = bpdg::build_axis({{0.0, 0.12, 0.02}, {0.12, 0.14, 0.01}});
  std::vector<double> eps(x.size() * y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) eps[i * y.size() + j] = y.center(j) < 0.12 ? 11.7 : 3.9;
  PoissonBC bc;
  bc.add(Side::Left, 0.5, 0.0, 0.12).add(Side::Right, 1.5, 0.0, 0.12).add(Side::Top, 1.06, 0.05, 0.10);
  const LdgPoisson p(x, y, eps, bc);
  auto src = [](double a, double b) { return b < 0.12 ? 1e3 * (a < 0.05 || a > 0.10 ? 1.0 : 0.01) : 0.0; };
  const auto r = bpdg::project_source(x, &y, src);
  double total = 0.0;
  for (std::size_t c = 0; c < eps.size(); ++c) total += p.volume(c) * r[3 * c];
  const auto sol = p.solve(r);
  EXPECT_NEAR(p.boundary_flux(sol), total, 1e-9 * std::abs(total));
  for (const auto& t : p.dirichlet_traces(sol)) {
    if (t.side == Side::Left) {
      EXPECT_EQ(t.imposed, 0.5);
    } else if (t.side == Side::Right) {
      EXPECT_EQ(t.imposed, 1.5);
    } else {
      ASSERT_EQ(t.side, Side::Top);
      EXPECT_EQ(t.imposed, 1.06);
      EXPECT_GT(t.along, 0.05);
      EXPECT_LT(t.along, 0.10);
    }
    EXPECT_TRUE(std::isfinite(t.interior));
  }
}

TEST(PoissonBC, PositionDependentDataIsFaceAveraged) {
  const Axis x = bpdg::uniform_axis(0.0, 1.0, 4), y = bpdg::uniform_axis(0.0, 1.0, 4);
  PoissonBC bc;
  // Psi = x + 2y is harmonic and linear, so the scheme reproduces it
  auto lin = [](double a, double b) { return a + 2.0 * b; };
  bc.add(Side::Left, lin).add(Side::Right, lin).add(Side::Bottom, lin).add(Side::Top, lin);
  const auto sol = LdgPoisson(x, y, std::vector<double>(16, 1.0), bc).solve(zeros(16, 3));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(sol.psi_mean(i * 4 + j), lin(x.center(i), y.center(j)), 1e-12);
}

TEST(PoissonBC, OverlappingSegmentsAreRejected) {
  PoissonBC bc;
  bc.add(Side::Left, 0.0, 0.0, 0.6).add(Side::Left, 1.0, 0.5, 1.0);
  EXPECT_THROW(bc.find(Side::Left, 0.55), std::invalid_argument);
  EXPECT_EQ(bc.find(Side::Right, 0.5), nullptr);
}

TEST(Poisson, MatrixMarketDump) {
  const Axis x = bpdg::uniform_axis(0.0, 1.0, 3);
  PoissonBC bc;
  bc.add(Side::Left, 0.0).add(Side::Right, 0.0);
  const LdgPoisson p(x, std::vector<double>(3, 1.0), bc);
  const auto path = (std::filesystem::temp_directory_path() / "bpdg_poisson.mtx").string();
  p.dump_matrix_market(path);
  std::ifstream is(path);
  std::string banner;
  std::getline(is, banner);
  EXPECT_EQ(banner, "%%MatrixMarket matrix coordinate real general");
  long rows = 0, cols = 0, nnz = 0;
  is >> rows >> cols >> nnz;
  EXPECT_EQ(rows, 12);
  EXPECT_EQ(cols, 12);
  EXPECT_EQ(nnz, p.matrix().nonZeros());
  std::filesystem::remove(path);
}

}  // namespace
