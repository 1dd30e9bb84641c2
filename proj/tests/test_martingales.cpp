#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "sle/martingales.hpp"

using namespace sle;

// Zero-drift checks: apply the generator of the Loewner flow to log M by
// central differences.  With L = log M, M is a local martingale iff
//   sum_i b_i dL/dx_i + (kappa/2) (L_ww + L_w^2) = 0,
// where x runs over the state (W, V_i, log g'(x_i)) and b is its drift.
namespace {

using State = std::vector<double>;
using LogM = std::function<double(const State&)>;

double generator(const LogM& L, const State& s, const State& drift, double kappa, std::size_t w_index) {
  const double h = 1e-4;
  double out = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (drift[i] == 0) continue;
    State a = s, b = s;
    a[i] += h;
    b[i] -= h;
    out += drift[i] * (L(a) - L(b)) / (2 * h);
  }
  State a = s, b = s;
  a[w_index] += h;
  b[w_index] -= h;
  const double l0 = L(s), la = L(a), lb = L(b);
  const double lw = (la - lb) / (2 * h), lww = (la - 2 * l0 + lb) / (h * h);
  return out + kappa / 2 * (lww + lw * lw);
}

// State layout: [w, v_1..v_n, log g'_1..log g'_n]; the law has force weights
// law_rho on the same points.
State chordal_drift(const State& s, std::size_t n, const std::vector<double>& law_rho) {
  State d(s.size(), 0.0);
  const double w = s[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double u = s[1 + i] - w;
    d[0] += law_rho[i] / (w - s[1 + i]);
    d[1 + i] = 2 / u;
    d[1 + n + i] = -2 / (u * u);
  }
  return d;
}

}  // namespace

TEST(MartingaleFormulas, MultiForceHasZeroDrift) {
  const double kappa = 3.5;
  const std::vector<double> rho{0.7, -0.4, 1.3};
  const std::size_t n = rho.size();
  const LogM L = [&](const State& s) {
    return mg::log_multi_force(kappa, rho, std::span(s).subspan(1, n), std::span(s).subspan(1 + n, n), s[0]);
  };
  // The law is SLE_kappa(rho) with the same force points.
  const State s{0.1, -0.8, 0.9, 1.7, -0.2, -0.1, -0.3};
  const double g = generator(L, s, chordal_drift(s, n, {0, 0, 0}), kappa, 0);
  const double tilt = generator(L, s, chordal_drift(s, n, rho), kappa, 0);
  // Under plain SLE, M is a martingale; under the tilted law it is not.
  EXPECT_NEAR(g, 0.0, 1e-5);
  EXPECT_GT(std::abs(tilt), 1e-2);
}

TEST(MartingaleFormulas, LeftConditioningHasZeroDrift) {
  const double kappa = 4.5, rho_L = -0.7, rho_R = 0.9;
  const LogM L = [&](const State& s) { return mg::log_left_conditioning(kappa, rho_L, rho_R, s[0], s[1], s[2]); };
  const State s{0.05, -0.6, 1.1, 0.0, 0.0};
  EXPECT_NEAR(generator(L, s, chordal_drift(s, 2, {rho_L, rho_R}), kappa, 0), 0.0, 1e-5);
}

TEST(MartingaleFormulas, OnePointHasZeroDrift) {
  const double kappa = 5, rho1 = 0.3, rho2 = -0.6;
  const double alpha = one_point_alpha(kappa, rho1, rho2).value;
  // Points: x_R (weight rho1) and 1 (weight rho2).
  const LogM L = [&](const State& s) { return mg::log_one_point(kappa, rho1, rho2, alpha, s[0], s[1], s[2], s[4]); };
  const State s{-0.2, 0.3, 1.4, -0.1, -0.4};
  EXPECT_NEAR(generator(L, s, chordal_drift(s, 2, {rho1, rho2}), kappa, 0), 0.0, 1e-5);
}

TEST(MartingaleFormulas, RadialWeightHasZeroDrift) {
  for (double kappa : {2.0, 3.0, 6.0}) {
    const double r = 0.5 - 4 / kappa - 0.3;
    // State: [X, Y, log Delta]; W enters through X = Re(g - W).
    const LogM L = [&](const State& s) { return mg::log_radial_weight(kappa, r, {s[0], s[1]}, s[2]).direct; };
    const State s{0.4, 0.7, -0.2};
    const cplx Z{s[0], s[1]};
    const State drift{(2.0 / Z).real(), (2.0 / Z).imag(), (-2.0 / (Z * Z)).real()};
    EXPECT_NEAR(generator(L, s, drift, kappa, 0), 0.0, 1e-5) << kappa;
  }
}

TEST(MartingaleFormulas, RadialFormsAgree) {
  CounterRng g({1, 0});
  for (int i = 0; i < 200; ++i) {
    const cplx Z{2 * g.uniform() - 1, 0.01 + g.uniform()};
    const auto f = mg::log_radial_weight(3, -1.2, Z, g.normal());
    EXPECT_NO_THROW(mg::check_radial_forms(f));
  }
  EXPECT_THROW(mg::check_radial_forms({1.0, 1.1}), SolverError);
}

TEST(MartingaleFormulas, LeftConditioningReducesWithoutRightForce) {
  const double l = mg::log_left_conditioning(4, -1, 0, 0.5, -0.5, 3.0);
  EXPECT_NEAR(l, (4 - 4 + 2) / 4.0 * std::log(1.0), 1e-15);
}

TEST(DriftCheck, StandardCasesAreWellFormed) {
  const auto cases = standard_drift_cases();
  ASSERT_EQ(cases.size(), 12u);
  int counts[4] = {0, 0, 0, 0};
  for (const auto& c : cases) ++counts[static_cast<int>(c.id)];
  for (int k : counts) EXPECT_EQ(k, 3);
}

TEST(DriftCheck, SmallRunIsCentred) {
  const auto rep = drift_check(left_conditioning_case(3, -1, 0), 400, {21, 0});
  EXPECT_LT(std::abs(rep.z_score), 4.0);
  EXPECT_EQ(rep.mean.n, 400u);
}

TEST(DriftCheck, DeterministicAcrossThreads) {
  const auto c = one_point_case(6, 0, 0, 0);
  const auto a = drift_check(c, 40, {22, 0}, 1);
  const auto b = drift_check(c, 40, {22, 0}, 3);
  EXPECT_EQ(a.mean.value, b.mean.value);
}

TEST(DriftCheck, RejectsBadRadialParameter) {
  EXPECT_THROW(drift_check(radial_weight_case(3, 0.0, {0, 1}), 10, {}), DomainError);
}
