#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "bpdg/constants.hpp"

namespace {

using bpdg::DimensionlessConstants;

TEST(Constants, DefaultTableValues) {
  const DimensionlessConstants c = bpdg::default_silicon();
  EXPECT_DOUBLE_EQ(c.c0, 0.26531);
  EXPECT_DOUBLE_EQ(c.c_plus, 0.50705);
  EXPECT_DOUBLE_EQ(c.c_minus, 0.04432);
  EXPECT_DOUBLE_EQ(c.c_x, 0.16857);
  EXPECT_DOUBLE_EQ(c.c_k, 0.32606);
  EXPECT_DOUBLE_EQ(c.c_p, 1830349.0);
  EXPECT_DOUBLE_EQ(c.c_v, 10.0);
  EXPECT_DOUBLE_EQ(c.gamma, 2.43723);
  EXPECT_DOUBLE_EQ(c.alpha_K, 0.01292);
  EXPECT_DOUBLE_EQ(c.eps_r_si, 11.7);
  EXPECT_DOUBLE_EQ(c.eps_r_ox, 3.9);
  EXPECT_NO_THROW(c.validate());
}

TEST(Constants, EmissionOverAbsorptionIsBoltzmannFactor) {
  const DimensionlessConstants c;
  EXPECT_NEAR(c.c_minus / c.c_plus / std::exp(-c.gamma), 1.0, 1e-3);
}

TEST(Constants, PhononOccupation) {
  EXPECT_NEAR(bpdg::phonon_occupation(std::log(2.0)), 1.0, 1e-15);
  EXPECT_NEAR(bpdg::phonon_occupation(2.43723), 1.0 / (std::exp(2.43723) - 1.0), 1e-15);
  EXPECT_NEAR(bpdg::phonon_occupation(2.43723), 0.09578, 1e-5);
  double prev = bpdg::phonon_occupation(0.1);
  for (double g = 0.2; g < 50.0; g += 0.1) {
    const double n = bpdg::phonon_occupation(g);
    EXPECT_LT(n, prev);
    EXPECT_GT(n, 0.0);
    prev = n;
  }
  EXPECT_THROW(bpdg::phonon_occupation(0.0), std::domain_error);
  EXPECT_THROW(bpdg::phonon_occupation(-1.0), std::domain_error);
}

TEST(Constants, DetailedBalanceHoldsForTable) {
  const DimensionlessConstants c;
  const double n = bpdg::phonon_occupation(c.gamma);
  EXPECT_NEAR(c.c_minus * (n + 1.0), 0.04857, 5e-5);
  EXPECT_NEAR(c.c_plus * n, 0.04857, 5e-5);
  EXPECT_LE(bpdg::detailed_balance_mismatch(c), 1e-3);
}

TEST(Constants, ValidationRejectsNonPositive) {
  DimensionlessConstants c;
  c.c_x = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.eps_r_ox = -3.9;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Constants, ConversionFactors) {
  const bpdg::ConversionFactors cf;
  EXPECT_DOUBLE_EQ(cf.density_factor, 1.0115e26);
  EXPECT_DOUBLE_EQ(cf.energy_factor, 0.025849);
  EXPECT_DOUBLE_EQ(cf.velocity_factor, cf.length_scale / cf.time_scale);
  for (double n : {1e15, 2e15, 5e17, 5e18, 1e19})
    EXPECT_NEAR(cf.density_cm3(cf.dimensionless_density(n)) / n, 1.0, 1e-12);
  EXPECT_NEAR(cf.energy_eV(1.5), 0.0387735, 1e-7);
}

TEST(Constants, EnergyWeights) {
  const double a = 0.01292;
  for (double w : {1e-6, 0.3, 1.0, 7.5, 40.0}) {
    const double k = std::sqrt(w * (1.0 + a * w));
    EXPECT_NEAR(bpdg::weight_s(w, a), k * (1.0 + 2.0 * a * w), 1e-13 * k);
    EXPECT_NEAR(bpdg::weight_s1(w, a) * bpdg::weight_s2(w, a), 1.0 / (1.0 + 2.0 * a * w), 1e-14);
  }
  EXPECT_EQ(bpdg::weight_s(0.0, a), 0.0);
  EXPECT_EQ(bpdg::weight_s(-1.0, a), 0.0);
  EXPECT_EQ(bpdg::weight_s1(0.0, a), 0.0);
}

TEST(Constants, LossFrequencyAtZeroEnergy) {
  const DimensionlessConstants c;
  const double expect = 2.0 * bpdg::kPi * c.c_minus * bpdg::weight_s(c.gamma, c.alpha_K);
  EXPECT_NEAR(bpdg::loss_frequency(0.0, c), expect, 1e-14);
  EXPECT_NEAR(bpdg::loss_frequency(0.0, c), 0.4694, 5e-4);
}

TEST(Constants, LossFrequencyIncreasesWithEnergy) {
  const DimensionlessConstants c;
  double prev = bpdg::loss_frequency(0.0, c);
  for (double w = 0.05; w <= 40.0; w += 0.05) {
    const double nu = bpdg::loss_frequency(w, c);
    EXPECT_GE(nu, prev);
    prev = nu;
  }
}

}  // namespace
