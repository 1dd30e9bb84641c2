#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sle/exponents.hpp"

using namespace sle;

namespace {

constexpr double kTol = 1e-9;
const double pi = std::numbers::pi;

// Hand-expanded polynomial forms, written independently of the library.
double double_poly(double kp) { return 2 - (48 + 8 * kp - kp * kp) / (8 * kp); }
double boundary_poly(double k, double rho) { return 1 - (rho * rho + 6 * rho - rho * k / 2 + 8 - k) / k; }

}  // namespace

TEST(Exponents, ConstantsAtKappaFour) {
  const auto c = constants(4.0);
  EXPECT_NEAR(c.chi, 0.0, kTol);
  EXPECT_NEAR(c.lambda, pi / 2, kTol);
  EXPECT_NEAR(c.lambda_prime, pi / 2, kTol);
}

TEST(Exponents, DoublePointValues) {
  EXPECT_NEAR(double_point_dimension(6).value, 0.75, kTol);
  EXPECT_NEAR(double_point_dimension(8).value, 1.25, kTol);
  EXPECT_NEAR(double_point_dimension(12).value, 1 + 2.0 / 12, kTol);
  for (double kp = 4.05; kp < 8; kp += 0.1) EXPECT_NEAR(double_point_dimension(kp).value, double_poly(kp), kTol) << kp;
  EXPECT_THROW(double_point_dimension(4.0), DomainError);
}

TEST(Exponents, DoublePointContinuousAtEight) {
  EXPECT_NEAR(double_point_dimension(8 - 1e-9).value, double_point_dimension(8).value, 1e-8);
}

TEST(Exponents, CutSet) {
  EXPECT_NEAR(cut_set_dimension(6).value, 0.75, kTol);
  EXPECT_NEAR(cut_set_dimension(7.5).value, 0.1875, kTol);
  EXPECT_TRUE(cut_set_dimension(8).empty_set);
  EXPECT_TRUE(cut_set_dimension(10).empty_set);
  EXPECT_FALSE(cut_set_dimension(5).empty_set);
}

TEST(Exponents, OnePointAlpha) {
  EXPECT_NEAR(one_point_alpha(6, 0, 0).value, 1.0 / 3, kTol);
  EXPECT_NEAR(one_point_alpha(3, -1, 0).value, 0.5, kTol);
  EXPECT_THROW(one_point_alpha(6, -2, 5), DomainError);
  EXPECT_THROW(one_point_alpha(6, 0, -1.5), DomainError);
}

TEST(Exponents, BoundaryDimension) {
  for (double kp : {4.5, 5.0, 6.0, 7.0, 7.9}) EXPECT_NEAR(boundary_dimension(kp, 0).value, 2 - 8 / kp, kTol);
  EXPECT_NEAR(boundary_dimension(3, -1).value, 0.5, kTol);
  for (double k = 0.5; k < 8; k += 0.5) {
    const double lo = std::max(-2.0, k / 2 - 4), hi = k / 2 - 2;
    for (int i = 1; i < 10; ++i) {
      const double rho = lo + (hi - lo) * i / 10;
      EXPECT_NEAR(boundary_dimension(k, rho).value, boundary_poly(k, rho), kTol);
    }
  }
  EXPECT_THROW(boundary_dimension(6, 1.0), DomainError);
  EXPECT_THROW(boundary_dimension(3, -2.0), DomainError);
}

TEST(Exponents, BoundaryDimensionInUnitIntervalInsideWindow) {
  for (double k = 0.25; k < 8; k += 0.25) {
    const double lo = std::max(-2.0, k / 2 - 4), hi = k / 2 - 2;
    for (int i = 1; i < 20; ++i) {
      const double d = boundary_dimension(k, lo + (hi - lo) * i / 20).value;
      EXPECT_GT(d, 0.0);
      EXPECT_LT(d, 1.0);
    }
  }
}

TEST(Exponents, AngleDictionaryRoundTrip) {
  for (double k : {0.5, 1.0, 2.0, 3.0, 3.9}) {
    for (int i = 1; i < 10; ++i) {
      const double rho = -2 + (k / 2) * i / 10;
      EXPECT_NEAR(angle_to_rho(0, rho_to_angle_gap(rho, k), k), rho, kTol);
      EXPECT_NEAR(angle_to_rho(1.0, 1.0 + rho_to_angle_gap(rho, k), k), rho, kTol);
    }
  }
  EXPECT_THROW(angle_to_rho(1, 0.5, 3), DomainError);
}

TEST(Exponents, TwoFlowlineIsTwoMinusA) {
  for (double k : {1.0, 2.0, 3.0})
    for (double rho : {-2 + 0.1 * k / 2, -2 + 0.5 * k / 2, -2 + 0.9 * k / 2})
      EXPECT_NEAR(two_flowline_dimension(k, rho).value, 2 - flowline_A(k, rho).value, kTol);
}

TEST(Exponents, MaxHitCount) {
  const auto h = max_hit_count(3, -1);
  EXPECT_NEAR(h.J, 1.5, kTol);
  EXPECT_EQ(h.ceiling, 2);
  EXPECT_EQ(max_hit_count(4, 0).ceiling, 1);  // J exactly 1
}

TEST(Exponents, MultiHitReductions) {
  for (double k : {0.5, 1.0, 2.0, 3.0, 3.5}) {
    for (int i = 1; i < 10; ++i) {
      const double rho = -2 + (k / 2) * i / 10;
      EXPECT_NEAR(multi_hit_dimension(MultiHitKind::interior, k, rho, 1).value, 1 + k / 8, kTol);
      const double J = max_hit_count(k, rho).J;
      EXPECT_NEAR(detail::multi_hit_formula(MultiHitKind::interior, k, rho, J + 1), 0.0, kTol);
      EXPECT_NEAR(detail::multi_hit_formula(MultiHitKind::boundary, k, rho, J), 0.0, kTol);
    }
  }
}

TEST(Exponents, MultiHitEmptyBeyondCeiling) {
  const auto hc = max_hit_count(3, -1);
  EXPECT_FALSE(multi_hit_dimension(MultiHitKind::interior, 3, -1, hc.ceiling).empty_set);
  EXPECT_TRUE(multi_hit_dimension(MultiHitKind::interior, 3, -1, hc.ceiling + 1).empty_set);
  EXPECT_TRUE(multi_hit_dimension(MultiHitKind::boundary, 3, -1, hc.ceiling).empty_set);
  EXPECT_EQ(multi_hit_dimension(MultiHitKind::interior, 3, -1, hc.ceiling + 1).value, 0.0);
}

TEST(Exponents, CflBoundaryEmptyWhenFormulaNonPositive) {
  EXPECT_TRUE(multi_hit_dimension(MultiHitKind::boundary_right_cfl, 5, -1.2, 2).empty_set);
  EXPECT_NEAR(detail::multi_hit_formula(MultiHitKind::boundary_right_cfl, 5, -1.2, 2), -0.288, 1e-12);
}

TEST(Exponents, AngleGaps) {
  EXPECT_NEAR(angle_gap(AngleGapKind::cut, 3), pi, kTol);
  EXPECT_NEAR(angle_gap(AngleGapKind::double_point, 3), 2 * pi, kTol);
  EXPECT_THROW(angle_gap(AngleGapKind::double_point, 2), DomainError);
  EXPECT_THROW(angle_gap(AngleGapKind::interior_j, 3, -1, 1), DomainError);
  EXPECT_THROW(angle_gap(AngleGapKind::interior_j, 3, -1, 3), DomainError);
  EXPECT_NO_THROW(angle_gap(AngleGapKind::interior_j, 3, -1, 2));
  EXPECT_THROW(angle_gap(AngleGapKind::boundary_left_j, 6, 0, 0), DomainError);
}

// Dimension of the flow-line intersection at the angle gap of each set.
TEST(Exponents, DualityIdentities) {
  for (int i = 1; i < 100; ++i) {
    const double kp = 4 + 4.0 * i / 100;
    const double k = 16 / kp;
    const double rd = angle_to_rho(0, angle_gap(AngleGapKind::double_point, k), k);
    EXPECT_NEAR(double_point_dimension(kp).value, two_flowline_dimension(k, rd).value, kTol) << kp;
    const double rc = angle_to_rho(0, pi, k);
    EXPECT_NEAR(cut_set_dimension(kp).value, two_flowline_dimension(k, rc).value, kTol) << kp;
  }
}

TEST(Exponents, RadialWeightIdentities) {
  for (double k : {0.5, 1.0, 2.0, 3.0, 3.9}) {
    for (int i = 1; i < 10; ++i) {
      const double rho = -2 + (k / 2) * i / 10;
      EXPECT_NEAR(boundary_dimension(k, rho).value, 1 - one_point_alpha(k, rho, 0).value, kTol);
      const double r = one_point_r_choice(k, rho);
      const auto w = radial_weight_exponents(k, r);
      EXPECT_NEAR(w.nu - w.xi, flowline_A(k, rho).value, kTol);
      EXPECT_NEAR(w.nu + r, one_point_alpha(k, rho, 2).value, kTol);
    }
  }
}

TEST(Exponents, CatalogContainsKeyRows) {
  bool found = false;
  for (const auto& row : exponent_catalog())
    if (row.formula == "double_point" && row.kappa_prime == 6) {
      EXPECT_NEAR(row.value, 0.75, kTol);
      found = true;
    }
  EXPECT_TRUE(found);
}

TEST(Exponents, ParamsEcho) {
  const auto v = one_point_alpha(6, 0.5, -0.5);
  EXPECT_EQ(v.param("rho1"), 0.5);
  EXPECT_EQ(v.param("rho2"), -0.5);
  EXPECT_TRUE(std::isnan(v.param("nope")));
}
