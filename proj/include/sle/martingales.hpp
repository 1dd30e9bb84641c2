#pragma once
// Local martingales along sampled paths, and optional-stopping drift checks.
//
// All martingales are evaluated in log space.  The pair product of the
// multi-force martingale runs over unordered pairs with exponent
// rho*rho'/(2 kappa); with that convention the left-conditioning and
// one-point martingales are ratios of multi-force ones.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sle/adaptive.hpp"
#include "sle/driving.hpp"
#include "sle/error.hpp"
#include "sle/exponents.hpp"
#include "sle/loewner.hpp"
#include "sle/parallel.hpp"
#include "sle/rng.hpp"
#include "sle/stats.hpp"

namespace sle {

enum class MartingaleId { multi_force, left_conditioning, one_point, radial_weight };

inline const char* to_string(MartingaleId id) {
  switch (id) {
    case MartingaleId::multi_force: return "multi_force";
    case MartingaleId::left_conditioning: return "left_conditioning";
    case MartingaleId::one_point: return "one_point";
    case MartingaleId::radial_weight: return "radial_weight";
  }
  return "?";
}

struct MartingaleSample {
  MartingaleId id{};
  std::vector<double> values;  // M at steps 0..stop_index
  std::size_t stop_index = 0;
};

// ---------------------------------------------------------------------------
// Pointwise formulas (log M).

namespace mg {

// `v` are force-point images, `log_dg` the matching log g_t'(x_i).
inline double log_multi_force(double kappa, std::span<const double> rho, std::span<const double> v,
                              std::span<const double> log_dg, double w) {
  double s = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    s += (4 - kappa + rho[i]) * rho[i] / (4 * kappa) * log_dg[i];
    s += rho[i] / kappa * std::log(std::abs(w - v[i]));
    for (std::size_t j = i + 1; j < rho.size(); ++j)
      s += rho[i] * rho[j] / (2 * kappa) * std::log(std::abs(v[i] - v[j]));
  }
  return s;
}

inline double log_left_conditioning(double kappa, double rho_L, double rho_R, double w, double v_L, double v_R) {
  const double a = (kappa - 4 - 2 * rho_L) / kappa;
  double s = a * std::log(std::abs(w - v_L));
  if (rho_R != 0) s += a * rho_R / 2 * std::log(std::abs(v_L - v_R));
  return s;
}

// g1 = g_t(1), v_R = image of x_R.
inline double log_one_point(double kappa, double rho1, double rho2, double alpha, double w, double v_R, double g1,
                            double log_dg1) {
  const double beta = 2 / kappa * (rho1 + rho2 + 4 - kappa / 2);
  const double gap_v = g1 - v_R;
  return -alpha * (std::log(gap_v) - log_dg1) - beta * (std::log(g1 - w) - std::log(gap_v));
}

struct RadialForms {
  double direct;    // log(|Z|^r Upsilon^xi Delta^nu)
  double rewritten; // log(S^-r Upsilon^(xi+r) Delta^(nu+r))
};

// Z = g_t(z) - W_t, log_delta = log|g_t'(z)|.
inline RadialForms log_radial_weight(double kappa, double r, cplx Z, double log_delta) {
  const auto [nu, xi] = radial_weight_exponents(kappa, r);
  const double log_abs = std::log(std::abs(Z));
  const double log_ups = std::log(Z.imag()) - log_delta;
  const double log_s = std::log(Z.imag()) - log_abs;
  return {r * log_abs + xi * log_ups + nu * log_delta, -r * log_s + (xi + r) * log_ups + (nu + r) * log_delta};
}

inline void check_radial_forms(const RadialForms& f) {
  const double scale = std::max({1.0, std::abs(f.direct), std::abs(f.rewritten)});
  if (!(std::abs(f.direct - f.rewritten) <= 1e-9 * scale))
    throw SolverError("radial weight: algebraic forms disagree", 0);
}

}  // namespace mg

// ---------------------------------------------------------------------------
// Evaluation along fixed-grid paths.

namespace detail {

inline MartingaleSample exp_sample(MartingaleId id, const std::vector<double>& logs) {
  MartingaleSample s{id, {}, logs.empty() ? 0 : logs.size() - 1};
  s.values.reserve(logs.size());
  for (double l : logs) s.values.push_back(std::exp(l));
  return s;
}

// Last index strictly before the driving meets any image or a flow ends.
inline std::size_t collision_limit(const DrivingPath& d, std::span<const std::vector<double>> images) {
  std::size_t n = d.size();
  if (d.threshold_index) n = std::min(n, *d.threshold_index);
  for (const auto& v : images) {
    n = std::min(n, v.size());
    for (std::size_t k = 0; k < n; ++k) {
      if (v[k] == d.w[k]) {
        n = k;
        break;
      }
    }
  }
  return n;
}

}  // namespace detail

// Force points in params order (left closest first, then right); flows[i]
// is the boundary flow of force point i and supplies both V^i = g_t(x_i)
// and g_t'(x_i).  Evaluation stops strictly before the first collision.
inline MartingaleSample eval_multi_force_M(const SleParams& params, const DrivingPath& driving,
                                           std::span<const PointFlow> flows) {
  params.validate();
  require(params.kappa > 0, "eval_multi_force_M: kappa must be positive");
  require(flows.size() == params.force_count(), "eval_multi_force_M: one flow per force point required");
  std::vector<double> rho;
  for (const auto& f : params.left) rho.push_back(f.rho);
  for (const auto& f : params.right) rho.push_back(f.rho);

  std::size_t n = driving.size();
  for (const auto& f : flows) {
    n = std::min(n, f.zt.size());
    if (f.swallowed_index) n = std::min(n, *f.swallowed_index);
  }
  n = std::max<std::size_t>(n, 1);
  std::vector<double> logs, v(rho.size()), ldg(rho.size());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
      v[i] = flows[i].zt[k].real();
      ldg[i] = std::log(std::abs(flows[i].dgt[k]));
    }
    const double l = mg::log_multi_force(params.kappa, rho, v, ldg, driving.w[k]);
    if (!std::isfinite(l)) break;
    logs.push_back(l);
  }
  if (logs.empty()) logs.push_back(0.0);
  return detail::exp_sample(MartingaleId::multi_force, logs);
}

// V^L and V^R come from driving.force_images[0] and [1] (the path is an
// SLE_kappa(rho_L; rho_R) sample with one force on each side).
inline MartingaleSample eval_left_conditioning_M(double kappa, double rho_L, double rho_R, const DrivingPath& driving) {
  require(kappa > 0, "eval_left_conditioning_M: kappa must be positive");
  require(driving.force_images.size() == 2, "eval_left_conditioning_M: needs one left and one right force image");
  const auto& vl = driving.force_images[0];
  const auto& vr = driving.force_images[1];
  require(vl[0] < driving.w[0] && vr[0] > driving.w[0], "eval_left_conditioning_M: needs x_L < 0 < x_R");
  const std::size_t n = std::max<std::size_t>(detail::collision_limit(driving, driving.force_images), 1);
  std::vector<double> logs;
  for (std::size_t k = 0; k < n; ++k) logs.push_back(mg::log_left_conditioning(kappa, rho_L, rho_R, driving.w[k], vl[k], vr[k]));
  return detail::exp_sample(MartingaleId::left_conditioning, logs);
}

// V^R is driving.force_images[0] (force at x_R); g_t(1), g_t'(1) from flow_at_1.
inline MartingaleSample eval_one_point_M(double kappa, double rho1, double rho2, double alpha, const DrivingPath& driving,
                                         const PointFlow& flow_at_1) {
  require(kappa > 0, "eval_one_point_M: kappa must be positive");
  require(!driving.force_images.empty(), "eval_one_point_M: needs the image of x_R");
  const auto& vr = driving.force_images[0];
  std::size_t n = std::min({driving.size(), vr.size(), flow_at_1.zt.size()});
  if (flow_at_1.swallowed_index) n = std::min(n, *flow_at_1.swallowed_index);
  if (driving.threshold_index) n = std::min(n, *driving.threshold_index);
  n = std::max<std::size_t>(n, 1);
  std::vector<double> logs;
  for (std::size_t k = 0; k < n; ++k) {
    const double g1 = flow_at_1.zt[k].real();
    const double l = mg::log_one_point(kappa, rho1, rho2, alpha, driving.w[k], vr[k], g1,
                                       std::log(std::abs(flow_at_1.dgt[k])));
    if (!std::isfinite(l) || g1 - vr[k] <= 0) break;
    logs.push_back(l);
  }
  if (logs.empty()) logs.push_back(0.0);
  return detail::exp_sample(MartingaleId::one_point, logs);
}

inline MartingaleSample eval_radial_weight(double kappa, double r, const InteriorPointFlow& flow) {
  require(kappa > 0, "eval_radial_weight: kappa must be positive");
  require(r < 0.5 - 4 / kappa, "eval_radial_weight: requires r < 1/2 - 4/kappa");
  std::size_t n = flow.Y.size();
  if (flow.base.swallowed_index) n = std::min(n, *flow.base.swallowed_index);
  n = std::max<std::size_t>(std::min(n, flow.Y.size()), 1);
  std::vector<double> logs;
  for (std::size_t k = 0; k < n; ++k) {
    const auto f = mg::log_radial_weight(kappa, r, {flow.X[k], flow.Y[k]}, std::log(flow.Delta[k]));
    mg::check_radial_forms(f);
    logs.push_back(f.direct);
  }
  return detail::exp_sample(MartingaleId::radial_weight, logs);
}

// ---------------------------------------------------------------------------
// Optional-stopping drift checks.
//
// Paths come from the adaptive engine with steps resolving a fixed fraction
// of the smallest gap that enters M, so M is never evaluated across a
// near-singular step.  Stopping is always bounded: the hull enclosure
// sqrt(max|W|^2 + 4t) reaching `radius` (which also caps capacity time at
// radius^2/4), a time cap, a collision, and for one_point / radial_weight an
// eps-threshold on the conformal-radius proxy.

struct DriftCase {
  std::string label;
  MartingaleId id{};
  double kappa = 0;
  // Force points of the sampled law, (x, rho); zero x means 0^+.
  std::vector<std::pair<double, double>> law;
  // multi_force: force points of M (tracked passively under plain SLE).
  std::vector<std::pair<double, double>> mg_forces;
  double rho_L = 0, rho_R = 0;             // left_conditioning
  double rho1 = 0, rho2 = 0, x_R = 0;      // one_point
  double r = 0;                            // radial_weight
  cplx z{0, 1};                            // radial_weight
  double radius = 4.0;
  double time_cap = 4.0;
  double eps = 0.1;
  double collision_gap = 1e-4;  // stop once a gap on which M is singular falls below this
  double step_fraction = 0.05;
  double max_step = 1e-2;
};

inline DriftCase multi_force_case(double kappa, std::vector<std::pair<double, double>> forces) {
  DriftCase c;
  c.id = MartingaleId::multi_force;
  c.kappa = kappa;
  c.mg_forces = std::move(forces);
  c.label = "multi_force kappa=" + std::to_string(kappa);
  return c;
}

inline DriftCase left_conditioning_case(double kappa, double rho_L, double rho_R, double x_L = -1, double x_R = 1) {
  DriftCase c;
  c.id = MartingaleId::left_conditioning;
  c.kappa = kappa;
  c.rho_L = rho_L;
  c.rho_R = rho_R;
  c.law = {{x_L, rho_L}, {x_R, rho_R}};
  c.label = "left_conditioning kappa=" + std::to_string(kappa);
  return c;
}

inline DriftCase one_point_case(double kappa, double rho1, double rho2, double x_R, double eps = 0.2) {
  DriftCase c;
  c.id = MartingaleId::one_point;
  c.kappa = kappa;
  c.rho1 = rho1;
  c.rho2 = rho2;
  c.x_R = x_R;
  c.eps = eps;
  c.law = {{x_R, rho1}, {1.0, rho2}};
  c.step_fraction = 0.025;  // Y-threshold stopping is the most step-sensitive rule
  c.label = "one_point kappa=" + std::to_string(kappa);
  return c;
}

inline DriftCase radial_weight_case(double kappa, double r, cplx z, double eps = 0.1) {
  DriftCase c;
  c.id = MartingaleId::radial_weight;
  c.kappa = kappa;
  c.r = r;
  c.z = z;
  c.eps = eps;
  c.label = "radial_weight kappa=" + std::to_string(kappa);
  return c;
}

// Three parameter sets per martingale id; each keeps M bounded up to the stop.
inline std::vector<DriftCase> standard_drift_cases() {
  return {
      multi_force_case(6, {{1.0, 2.0}}),
      multi_force_case(2, {{-1.0, -1.0}, {1.0, 1.0}}),
      multi_force_case(4, {{-0.5, 1.0}, {1.5, 1.0}}),
      left_conditioning_case(3, -1, 0),
      left_conditioning_case(4, -1, 1),
      left_conditioning_case(6, 0.5, -0.5),
      one_point_case(6, 0, 0, 0),
      one_point_case(3, -1, 0, 0),
      one_point_case(4, 1, -1, 0.5),
      radial_weight_case(3, -1, {0, 1}),
      radial_weight_case(2, -2, {0.5, 0.8}),
      radial_weight_case(4, -1, {-0.3, 0.7}),
  };
}

enum class StopReason { radius, time_cap, threshold, collision };

struct DriftPath {
  double m = 0;  // M at the stopping time
  double m0 = 0;
  StopReason reason = StopReason::time_cap;
  std::size_t steps = 0;
};

namespace detail {

inline DriftPath run_drift_path(const DriftCase& c, RngSpec rng) {
  AdaptiveChordal eng(c.kappa, rng, false);
  // Far from W the dominant force point follows the exact slit map, which
  // keeps it ordered with g_t(1) however close the two are.
  constexpr double bessel_factor = 5.0;
  eng.set_bessel_factor(bessel_factor);
  std::vector<std::size_t> law_idx;
  for (const auto& [x, rho] : c.law) law_idx.push_back(eng.add_force(x == 0 ? kZeroOffset : x, rho));
  std::vector<std::size_t> pts;
  std::vector<double> mg_rho;
  for (const auto& [x, rho] : c.mg_forces) {
    pts.push_back(eng.add_point(x));
    mg_rho.push_back(rho);
  }
  std::size_t pt1 = 0, iz = 0;
  double alpha = 0;
  if (c.id == MartingaleId::one_point) {
    pt1 = eng.add_point(1.0);
    alpha = one_point_alpha(c.kappa, c.rho1, c.rho2).value;
  }
  if (c.id == MartingaleId::radial_weight) iz = eng.add_interior(c.z);

  std::vector<double> v(pts.size()), ldg(pts.size());
  // Evaluates log M and the smallest gap on which M is singular (`sing`).
  // Steps resolve min(sing, second force gap); a collision is the stopping
  // time sing <= collision_gap, where M is evaluated as usual.
  auto evaluate = [&](double& sing) -> double {
    const double w = eng.w();
    sing = std::numeric_limits<double>::infinity();
    switch (c.id) {
      case MartingaleId::multi_force:
        for (std::size_t i = 0; i < pts.size(); ++i) {
          v[i] = eng.point_g(pts[i]);
          ldg[i] = eng.point_log_dg(pts[i]);
          sing = std::min(sing, std::abs(v[i] - w));
        }
        return mg::log_multi_force(c.kappa, mg_rho, v, ldg, w);
      case MartingaleId::left_conditioning: {
        const double vl = eng.force(law_idx[0]), vr = eng.force(law_idx[1]);
        sing = std::abs(w - vl);
        return mg::log_left_conditioning(c.kappa, c.rho_L, c.rho_R, w, vl, vr);
      }
      case MartingaleId::one_point: {
        const double g1 = eng.point_g(pt1), vr = eng.force(law_idx[0]);
        sing = g1 - vr;
        return mg::log_one_point(c.kappa, c.rho1, c.rho2, alpha, w, vr, g1, eng.point_log_dg(pt1));
      }
      case MartingaleId::radial_weight: {
        const cplx Z = eng.interior_g(iz) - w;
        sing = std::abs(Z);
        const auto f = mg::log_radial_weight(c.kappa, c.r, Z, std::log(std::abs(eng.interior_dg(iz))));
        mg::check_radial_forms(f);
        return f.direct;
      }
    }
    return 0.0;
  };
  auto alive = [&]() {
    for (std::size_t p : pts)
      if (!eng.point_alive(p)) return false;
    if (c.id == MartingaleId::one_point && !eng.point_alive(pt1)) return false;
    if (c.id == MartingaleId::radial_weight && !eng.interior_alive(iz)) return false;
    return true;
  };
  auto below_eps = [&]() {
    if (c.id == MartingaleId::one_point)
      return (eng.point_g(pt1) - eng.force(law_idx[0])) / std::exp(eng.point_log_dg(pt1)) <= c.eps;
    if (c.id == MartingaleId::radial_weight)
      return eng.interior_g(iz).imag() / std::abs(eng.interior_dg(iz)) <= c.eps;
    return false;
  };

  DriftPath out;
  double sing = 0;
  double last = evaluate(sing);
  require(std::isfinite(last), "drift check: M is singular at time zero");
  out.m0 = std::exp(last);
  const double h2 = c.step_fraction * c.step_fraction / std::max(c.kappa, 1.0);
  for (;;) {
    if (sing <= c.collision_gap) {
      out.reason = StopReason::collision;
      break;
    }
    if (below_eps()) {
      out.reason = StopReason::threshold;
      break;
    }
    if (eng.hull_bound() >= c.radius) {
      out.reason = StopReason::radius;
      break;
    }
    if (eng.t() >= c.time_cap) {
      out.reason = StopReason::time_cap;
      break;
    }
    double s;
    if (c.id == MartingaleId::one_point) {
      // g_t(1) - V^R can be tiny in absolute terms while the curve is far
      // away; it only has to be resolved while W is close enough to V^R for
      // the Bessel step to be in use.
      const double wv = std::abs(eng.w() - eng.force(law_idx[0]));
      const double x = eng.point_g(pt1) - eng.w();
      const double scale = std::min(x, eng.second_force_gap());
      const double pair = std::max(h2 * sing * sing, wv * wv / (c.kappa * 1.2 * 1.2 * bessel_factor * bessel_factor));
      s = std::min({c.max_step, h2 * scale * scale, pair});
    } else {
      const double scale = std::min(sing, eng.second_force_gap());
      s = std::min(c.max_step, h2 * scale * scale);
    }
    s = std::min(s, c.time_cap - eng.t());
    bool ok;
    if (c.id == MartingaleId::one_point) {
      // V^R may not consume more than half of its distance to g_t(1) in one piece.
      const std::size_t f = law_idx[0];
      ok = eng.step_guarded(s, [&](const AdaptiveChordal& a, const AdaptiveChordal& b) {
        return b.point_alive(pt1) && b.point_g(pt1) - b.force(f) >= 0.5 * (a.point_g(pt1) - a.force(f));
      });
    } else {
      ok = eng.step(s);
    }
    if (!ok || !alive()) {
      // Continuation threshold, or a tracked point crossed W inside a step;
      // every M here carries a positive power of the vanishing gap.
      out.reason = StopReason::collision;
      last = -std::numeric_limits<double>::infinity();
      break;
    }
    last = evaluate(sing);
  }
  out.m = std::exp(last);
  out.steps = eng.steps();
  return out;
}

}  // namespace detail

struct DriftReport {
  DriftCase config;
  double m0 = 0;
  McEstimate mean;
  double z_score = 0;
  bool pass = false;  // |mean - M0| <= 3 SE
  std::size_t stops[4] = {0, 0, 0, 0};  // indexed by StopReason
};

inline DriftReport drift_check(const DriftCase& c, std::size_t samples, RngSpec rng, unsigned threads = 1) {
  require(c.kappa > 0, "drift_check: kappa must be positive");
  require(samples >= 2, "drift_check: need at least two samples");
  if (c.id == MartingaleId::radial_weight)
    require(c.r < 0.5 - 4 / c.kappa, "drift_check: radial weight requires r < 1/2 - 4/kappa");
  if (c.id == MartingaleId::left_conditioning)
    require(c.law.size() == 2 && c.law[0].first < 0 && c.law[1].first > 0, "drift_check: needs x_L < 0 < x_R");
  std::vector<DriftPath> paths(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    paths[i] = detail::run_drift_path(c, {rng.seed, rng.stream + i});
  });
  std::vector<double> m;
  m.reserve(samples);
  DriftReport rep;
  rep.config = c;
  for (const auto& p : paths) {
    m.push_back(p.m);
    ++rep.stops[static_cast<int>(p.reason)];
  }
  rep.m0 = paths.front().m0;
  rep.mean = mean_estimate(m);
  rep.mean.seed = rng.seed;
  rep.mean.config_echo = c.label;
  rep.z_score = rep.mean.std_error > 0 ? (rep.mean.value - rep.m0) / rep.mean.std_error : 0.0;
  rep.pass = std::abs(rep.mean.value - rep.m0) <= 3 * rep.mean.std_error;
  return rep;
}

}  // namespace sle
