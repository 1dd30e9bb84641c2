#pragma once
// Closed-form exponents, dimensions and angle gaps for SLE_kappa(rho) processes.
//
// Naming: `kappa` is the simple-curve parameter in (0,4), `kappa_prime`
// (written kp) the dual 16/kappa > 4.  Every function validates its window
// and throws DomainError outside it.

#include <cmath>
#include <numbers>
#include <algorithm>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sle/error.hpp"

namespace sle {

struct SleConstants {
  double kappa;
  double chi;
  double lambda;
  double lambda_prime;
};

inline SleConstants constants(double kappa) {
  require(kappa > 0, "constants: kappa must be positive");
  const double s = std::sqrt(kappa);
  const double pi = std::numbers::pi;
  return {kappa, 2.0 / s - s / 2.0, pi / s, pi / std::sqrt(16.0 / kappa)};
}

enum class FormulaId {
  double_point,
  cut_set,
  one_point_alpha,
  boundary,
  two_flowline,
  flowline_A,
  interior_multi,
  interior_multi_cfl,
  boundary_multi,
  boundary_multi_cfl_left,
  boundary_multi_cfl_right,
};

inline const char* to_string(FormulaId id) {
  switch (id) {
    case FormulaId::double_point: return "double_point";
    case FormulaId::cut_set: return "cut_set";
    case FormulaId::one_point_alpha: return "one_point_alpha";
    case FormulaId::boundary: return "boundary";
    case FormulaId::two_flowline: return "two_flowline";
    case FormulaId::flowline_A: return "flowline_A";
    case FormulaId::interior_multi: return "interior_multi";
    case FormulaId::interior_multi_cfl: return "interior_multi_cfl";
    case FormulaId::boundary_multi: return "boundary_multi";
    case FormulaId::boundary_multi_cfl_left: return "boundary_multi_cfl_left";
    case FormulaId::boundary_multi_cfl_right: return "boundary_multi_cfl_right";
  }
  return "unknown";
}

inline bool is_dimension(FormulaId id) {
  return id != FormulaId::one_point_alpha && id != FormulaId::flowline_A;
}

struct ExponentValue {
  double value = 0.0;
  FormulaId formula = FormulaId::double_point;
  std::vector<std::pair<std::string, double>> params;
  bool empty_set = false;

  double param(const std::string& name) const {
    for (const auto& [k, v] : params)
      if (k == name) return v;
    return std::nan("");
  }
};

// ---------------------------------------------------------------------------
// Dimensions of self-intersection sets of SLE_kp, kp > 4.

inline ExponentValue double_point_dimension(double kp) {
  require(kp > 4, "double_point_dimension: kappa_prime must exceed 4");
  const double v = kp < 8 ? 2.0 - (12.0 - kp) * (4.0 + kp) / (8.0 * kp) : 1.0 + 2.0 / kp;
  return {v, FormulaId::double_point, {{"kappa_prime", kp}}, false};
}

inline ExponentValue cut_set_dimension(double kp) {
  require(kp > 4, "cut_set_dimension: kappa_prime must exceed 4");
  if (kp >= 8) return {0.0, FormulaId::cut_set, {{"kappa_prime", kp}}, true};
  return {3.0 - 3.0 * kp / 8.0, FormulaId::cut_set, {{"kappa_prime", kp}}, false};
}

// ---------------------------------------------------------------------------
// Boundary exponents.

inline ExponentValue one_point_alpha(double kappa, double rho1, double rho2) {
  require(kappa > 0, "one_point_alpha: kappa must be positive");
  require(rho1 > -2, "one_point_alpha: requires rho1 > -2");
  require(rho1 + rho2 > kappa / 2 - 4, "one_point_alpha: requires rho1 + rho2 > kappa/2 - 4");
  const double v = (rho1 + 2.0) * (rho1 + rho2 + 4.0 - kappa / 2.0) / kappa;
  return {v, FormulaId::one_point_alpha, {{"kappa", kappa}, {"rho1", rho1}, {"rho2", rho2}}, false};
}

inline ExponentValue boundary_dimension(double kappa, double rho) {
  require(kappa > 0, "boundary_dimension: kappa must be positive");
  const double lo = std::max(-2.0, kappa / 2 - 4);
  require(rho > lo && rho < kappa / 2 - 2,
          "boundary_dimension: rho must lie in ((-2) v (kappa/2-4), kappa/2-2)");
  const double v = 1.0 - (rho + 2.0) * (rho + 4.0 - kappa / 2.0) / kappa;
  return {v, FormulaId::boundary, {{"kappa", kappa}, {"rho", rho}}, false};
}

// ---------------------------------------------------------------------------
// Two flow lines at angle gap theta, encoded through rho.

inline ExponentValue flowline_A(double kappa, double rho) {
  require(kappa > 0, "flowline_A: kappa must be positive");
  const double v = (rho + kappa / 2 + 2) * (rho - kappa / 2 + 6) / (2 * kappa);
  return {v, FormulaId::flowline_A, {{"kappa", kappa}, {"rho", rho}}, false};
}

inline ExponentValue two_flowline_dimension(double kappa, double rho) {
  require(kappa > 0 && kappa < 4, "two_flowline_dimension: kappa must lie in (0,4)");
  require(rho > -2 && rho < kappa / 2 - 2, "two_flowline_dimension: rho must lie in (-2, kappa/2-2)");
  ExponentValue a = flowline_A(kappa, rho);
  return {2.0 - a.value, FormulaId::two_flowline, std::move(a.params), false};
}

inline double angle_to_rho(double theta1, double theta2, double kappa) {
  require(kappa > 0 && kappa < 4, "angle_to_rho: kappa must lie in (0,4)");
  const double gap = theta2 - theta1;
  require(gap > 0 && gap < kappa * std::numbers::pi / (4 - kappa),
          "angle_to_rho: need theta1 < theta2 < theta1 + kappa*pi/(4-kappa)");
  return gap * (2 - kappa / 2) / std::numbers::pi - 2;
}

inline double rho_to_angle_gap(double rho, double kappa) {
  require(kappa > 0 && kappa < 4, "rho_to_angle_gap: kappa must lie in (0,4)");
  require(rho > -2 && rho < kappa / 2 - 2, "rho_to_angle_gap: rho must lie in (-2, kappa/2-2)");
  return (rho + 2) * std::numbers::pi / (2 - kappa / 2);
}

// ---------------------------------------------------------------------------
// Multi-hit sets.

struct HitCount {
  double J;
  int ceiling;
};

inline HitCount max_hit_count(double kappa, double rho) {
  require(kappa > 0, "max_hit_count: kappa must be positive");
  require(rho > -2, "max_hit_count: rho must exceed -2");
  const double J = kappa / (2 * (2 + rho));
  return {J, static_cast<int>(std::ceil(J - 1e-9))};
}

enum class AngleGapKind { cut, double_point, interior_j, interior_j_cfl, boundary_left_j, boundary_right_j };

enum class MultiHitKind { interior, interior_cfl, boundary, boundary_left_cfl, boundary_right_cfl };

namespace detail {

inline void require_simple_window(double kappa, double rho, const char* who) {
  require(kappa > 0 && kappa < 4, std::string(who) + ": kappa must lie in (0,4)");
  require(rho > -2 && rho < kappa / 2 - 2, std::string(who) + ": rho must lie in (-2, kappa/2-2)");
}

inline void require_cfl_window(double kp, double rho, const char* who) {
  require(kp > 4, std::string(who) + ": kappa_prime must exceed 4");
  require(rho > kp / 2 - 4 && rho < kp / 2 - 2,
          std::string(who) + ": rho must lie in (kappa'/2-4, kappa'/2-2)");
}

// Real-j extension of the multi-hit closed forms, no window checks.
inline double multi_hit_formula(MultiHitKind kind, double k, double rho, double j) {
  const double u = j * (2 + rho);
  switch (kind) {
    case MultiHitKind::interior:
    case MultiHitKind::interior_cfl:
      return (4 + k + 2 * rho - 2 * u) * (4 + k - 2 * rho + 2 * u) / (8 * k);
    case MultiHitKind::boundary:
    case MultiHitKind::boundary_left_cfl:
      return (k - 2 * u) * (2 + u) / (2 * k);
    case MultiHitKind::boundary_right_cfl:
      return (k + 2 * rho - 2 * u) * (2 - rho + u) / (2 * k);
  }
  return std::nan("");
}

inline FormulaId formula_of(MultiHitKind kind) {
  switch (kind) {
    case MultiHitKind::interior: return FormulaId::interior_multi;
    case MultiHitKind::interior_cfl: return FormulaId::interior_multi_cfl;
    case MultiHitKind::boundary: return FormulaId::boundary_multi;
    case MultiHitKind::boundary_left_cfl: return FormulaId::boundary_multi_cfl_left;
    case MultiHitKind::boundary_right_cfl: return FormulaId::boundary_multi_cfl_right;
  }
  return FormulaId::interior_multi;
}

}  // namespace detail

inline double angle_gap(AngleGapKind kind, double k, double rho = 0.0, int j = 0) {
  const double pi = std::numbers::pi;
  switch (kind) {
    case AngleGapKind::cut:
      return pi;
    case AngleGapKind::double_point:
      require(k > 2 && k < 4, "angle_gap(double): kappa must lie in (2,4)");
      return pi * (k - 2) / (2 - k / 2);
    case AngleGapKind::interior_j: {
      detail::require_simple_window(k, rho, "angle_gap(interior_j)");
      require(j >= 2 && j <= max_hit_count(k, rho).ceiling, "angle_gap(interior_j): need 2 <= j <= ceil(J)");
      return 2 * pi * (j - 1) * (2 + rho) / (4 - k);
    }
    case AngleGapKind::interior_j_cfl: {
      detail::require_cfl_window(k, rho, "angle_gap(interior_j_cfl)");
      require(j >= 2 && j <= max_hit_count(k, rho).ceiling,
              "angle_gap(interior_j_cfl): need 2 <= j <= ceil(J)");
      return pi * (2 * j * (2 + rho) - 2 * rho - k) / (k - 4);
    }
    case AngleGapKind::boundary_left_j:
    case AngleGapKind::boundary_right_j: {
      detail::require_cfl_window(k, rho, "angle_gap(boundary_j)");
      require(j >= 1 && j <= max_hit_count(k, rho).ceiling, "angle_gap(boundary_j): need 1 <= j <= ceil(J)");
      const double shift = kind == AngleGapKind::boundary_right_j ? -2 * rho : 0.0;
      return pi * (4 - k + shift + 2 * j * (2 + rho)) / (k - 4);
    }
  }
  return std::nan("");
}

inline ExponentValue multi_hit_dimension(MultiHitKind kind, double k, double rho, int j) {
  require(j >= 1, "multi_hit_dimension: j must be at least 1");
  const bool cfl = kind == MultiHitKind::interior_cfl || kind == MultiHitKind::boundary_left_cfl ||
                   kind == MultiHitKind::boundary_right_cfl;
  if (cfl)
    detail::require_cfl_window(k, rho, "multi_hit_dimension");
  else
    detail::require_simple_window(k, rho, "multi_hit_dimension");

  ExponentValue out;
  out.formula = detail::formula_of(kind);
  out.params = {{cfl ? "kappa_prime" : "kappa", k}, {"rho", rho}, {"j", static_cast<double>(j)}};
  const int ceilJ = max_hit_count(k, rho).ceiling;
  bool empty = false;
  switch (kind) {
    case MultiHitKind::interior:
    case MultiHitKind::interior_cfl:
      empty = j > ceilJ;
      break;
    case MultiHitKind::boundary:
      empty = j > ceilJ - 1;
      break;
    case MultiHitKind::boundary_left_cfl:
    case MultiHitKind::boundary_right_cfl:
      empty = detail::multi_hit_formula(kind, k, rho, j) <= 0;
      break;
  }
  out.empty_set = empty;
  out.value = empty ? 0.0 : detail::multi_hit_formula(kind, k, rho, j);
  return out;
}

// ---------------------------------------------------------------------------
// Radial one-point weight.

struct RadialWeight {
  double nu;
  double xi;
};

inline RadialWeight radial_weight_exponents(double kappa, double r) {
  return {r * r * kappa / 4 + r * (1 - kappa / 4), r * r * kappa / 8};
}

inline double one_point_r_choice(double kappa, double rho) {
  detail::require_simple_window(kappa, rho, "one_point_r_choice");
  return -(2 / kappa) * (rho + 6 - kappa / 2);
}

// ---------------------------------------------------------------------------
// Catalog rendered by `exponent-table`.

struct CatalogRow {
  std::string formula;
  double kappa = std::nan("");
  double kappa_prime = std::nan("");
  double rho = std::nan("");
  double rho2 = std::nan("");
  double j = std::nan("");
  double value = 0.0;
  bool empty_set = false;
};

inline std::vector<CatalogRow> exponent_catalog() {
  std::vector<CatalogRow> rows;
  const double nan = std::nan("");
  auto push = [&](const ExponentValue& v, double k, double kp, double rho, double rho2, double j) {
    rows.push_back({to_string(v.formula), k, kp, rho, rho2, j, v.value, v.empty_set});
  };
  for (double kp : {4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 10.0, 12.0}) {
    push(double_point_dimension(kp), 16 / kp, kp, nan, nan, nan);
    push(cut_set_dimension(kp), 16 / kp, kp, nan, nan, nan);
  }
  for (double kp : {5.0, 6.0, 7.0}) push(boundary_dimension(kp, 0.0), nan, kp, 0.0, nan, nan);
  for (auto [k, rho] : {std::pair{3.0, -1.0}, {2.0, -1.5}, {8.0 / 3, -4.0 / 3}}) {
    push(boundary_dimension(k, rho), k, nan, rho, nan, nan);
    push(two_flowline_dimension(k, rho), k, nan, rho, nan, nan);
    push(flowline_A(k, rho), k, nan, rho, nan, nan);
    const HitCount hc = max_hit_count(k, rho);
    for (int j = 1; j <= hc.ceiling; ++j) {
      push(multi_hit_dimension(MultiHitKind::interior, k, rho, j), k, nan, rho, nan, j);
      push(multi_hit_dimension(MultiHitKind::boundary, k, rho, j), k, nan, rho, nan, j);
    }
  }
  for (auto [k, r1, r2] : {std::tuple{6.0, 0.0, 0.0}, {3.0, -1.0, 0.0}, {4.0, 1.0, -1.0}})
    push(one_point_alpha(k, r1, r2), k, nan, r1, r2, nan);
  for (auto [kp, rho] : {std::pair{6.0, 0.0}, {6.0, -0.5}, {7.0, 0.2}}) {
    const HitCount hc = max_hit_count(kp, rho);
    for (int j = 1; j <= hc.ceiling; ++j) {
      push(multi_hit_dimension(MultiHitKind::interior_cfl, kp, rho, j), nan, kp, rho, nan, j);
      push(multi_hit_dimension(MultiHitKind::boundary_left_cfl, kp, rho, j), nan, kp, rho, nan, j);
      push(multi_hit_dimension(MultiHitKind::boundary_right_cfl, kp, rho, j), nan, kp, rho, nan, j);
    }
  }
  return rows;
}

}  // namespace sle
