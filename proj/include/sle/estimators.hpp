#pragma once
// Monte-Carlo experiments: boundary hitting exponents, boundary-intersection
// dimension, and double/cut-point box slopes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sle/adaptive.hpp"
#include "sle/driving.hpp"
#include "sle/error.hpp"
#include "sle/exponents.hpp"
#include "sle/fast_trace.hpp"
#include "sle/geometry.hpp"
#include "sle/loewner.hpp"
#include "sle/parallel.hpp"
#include "sle/stats.hpp"

namespace sle {

// ---------------------------------------------------------------------------
// Hitting probabilities of B(target, eps).

struct HitExperimentConfig {
  double kappa = 6.0;
  double rho1 = 0.0;  // weight at x_R
  double rho2 = 0.0;  // weight at the target
  double x_R = 0.0;   // 0 means 0^+
  double target = 1.0;
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05};
  double delta = 0.0;
  double radius_r = 4.0;
  std::size_t samples_per_eps = 10000;
  double dt = 1e-2;             // largest capacity-time step
  double step_fraction = 0.1;   // steps resolve the smallest tracked gap to this fraction
  double retire_gap = 1e-6;     // target counts as swallowed below this gap (relative to target)
  double t_max = 1e4;
  RngSpec rng{};
  unsigned threads = 1;

  void validate() const {
    require(kappa > 0, "hit experiment: kappa must be positive");
    require(rho1 > -2, "hit experiment: requires rho1 > -2");
    require(rho1 + rho2 > kappa / 2 - 4, "hit experiment: requires rho1 + rho2 > kappa/2 - 4");
    require(target > 0 && x_R >= 0 && x_R < target, "hit experiment: need 0 <= x_R < target");
    require(delta >= 0 && delta < 1, "hit experiment: delta must lie in [0,1)");
    require(radius_r >= 2 * target, "hit experiment: radius_r must be at least 2 * target");
    require(epsilons.size() >= 1, "hit experiment: need at least one epsilon");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      require(epsilons[i] > 0 && epsilons[i] < target - x_R,
              "hit experiment: epsilons must lie in (0, target - x_R)");
      if (i > 0) require(epsilons[i] < epsilons[i - 1], "hit experiment: epsilons must be strictly decreasing");
    }
    require(samples_per_eps >= 1, "hit experiment: need at least one sample");
    require(dt > 0 && step_fraction > 0 && step_fraction <= 0.5, "hit experiment: bad step controls");
  }
};

// Per-path outcome.  `min_proxy` is the running minimum of (g(x)-W)/g'(x)
// before swallowing or exit; `entry_height[k]` is Im(eta) at the first entry
// into B(target, eps_k) (NaN if none), filled only in trace mode.
struct HitPathResult {
  double min_proxy = std::numeric_limits<double>::infinity();
  std::vector<double> entry_height;
  std::size_t steps = 0;
};

namespace detail {

// First parameter u in [0,1] where the segment p->q enters the closed disk
// B(c, r); nullopt if it does not.
inline std::optional<double> segment_disk_entry(cplx p, cplx q, cplx c, double r) {
  const cplx d = q - p, f = p - c;
  if (std::norm(f) <= r * r) return 0.0;
  const double A = std::norm(d);
  if (A == 0) return std::nullopt;
  const double B = 2 * (f.real() * d.real() + f.imag() * d.imag());
  const double C = std::norm(f) - r * r;
  const double disc = B * B - 4 * A * C;
  if (disc < 0) return std::nullopt;
  const double u = (-B - std::sqrt(disc)) / (2 * A);
  if (u < 0 || u > 1) return std::nullopt;
  return u;
}

inline HitPathResult run_hit_path(const HitExperimentConfig& cfg, std::size_t index, bool trace_mode) {
  AdaptiveChordal eng(cfg.kappa, {cfg.rng.seed, cfg.rng.stream + index}, true);
  const std::size_t f1 = eng.add_force(cfg.x_R > 0 ? cfg.x_R : kZeroOffset, cfg.rho1);
  if (cfg.rho2 != 0) eng.add_force(cfg.target, cfg.rho2);
  const std::size_t pt = eng.add_point(cfg.target);

  HitPathResult res;
  const std::size_t ne = cfg.epsilons.size();
  if (trace_mode) res.entry_height.assign(ne, std::nan(""));
  ExitMonitor exit_monitor(cfg.radius_r);
  const double h2 = cfg.step_fraction * cfg.step_fraction / std::max(cfg.kappa, 1.0);
  const double eps_min = cfg.epsilons.back();
  const cplx centre{cfg.target, 0.0};

  // Trace mode: tips are composed in batches for the steps that pass the
  // Koebe gate, then scanned in order for the first entry into each disk.
  constexpr std::size_t batch = 32;
  std::size_t resolved = 0;  // epsilons[0..resolved) have been entered
  std::vector<std::size_t> pending;
  std::vector<cplx> buf;
  cplx prev_tip{};
  std::size_t prev_step = std::numeric_limits<std::size_t>::max();
  // Returns true once the path is decided (every disk entered, or exit seen).
  auto flush = [&]() -> bool {
    buf.resize(pending.size());
    for (std::size_t a = 0; a < pending.size();) {
      std::size_t b = a + 1;
      while (b < pending.size() && pending[b] == pending[b - 1] + 1) ++b;
      eng.tips(pending[a], b - a, buf.data() + a);
      a = b;
    }
    bool done = false;
    for (std::size_t i = 0; i < pending.size() && !done; ++i) {
      const std::size_t n = pending[i];
      const cplx tip = buf[i];
      if (prev_step + 1 != n) prev_tip = n == 0 ? tip : eng.tip_at(n - 1);
      if (std::abs(tip) >= cfg.radius_r) {
        done = true;
        break;
      }
      while (resolved < ne) {
        const auto u = segment_disk_entry(prev_tip, tip, centre, cfg.epsilons[resolved]);
        if (!u) break;
        res.entry_height[resolved] = (prev_tip + *u * (tip - prev_tip)).imag();
        ++resolved;
      }
      prev_tip = tip;
      prev_step = n;
      done = resolved == ne;
    }
    pending.clear();
    return done;
  };

  while (eng.t() < cfg.t_max) {
    if (!eng.point_alive(pt)) break;
    const double g = eng.point_g(pt);
    const double X = g - eng.w();
    if (X <= cfg.retire_gap * cfg.target) break;
    const double dg = eng.point_dg(pt);
    const double proxy = X / dg;
    if (!trace_mode) {
      if (proxy < res.min_proxy) {
        // A new epsilon is about to count: confirm the curve has not left B(0,r).
        const bool new_event = std::any_of(cfg.epsilons.begin(), cfg.epsilons.end(), [&](double e) {
          return proxy <= e && res.min_proxy > e;
        });
        if (new_event && exit_monitor.exited(eng, true)) break;
        res.min_proxy = proxy;
      }
      if (res.min_proxy <= eps_min) break;
    } else {
      res.min_proxy = std::min(res.min_proxy, proxy);
      // Koebe: dist(target, K_t) >= Z/4 with Z = (g - O^R)/g', so tips are
      // only needed while an unresolved disk is within reach.
      const double Z = (g - eng.force(f1)) / dg;
      if (Z <= 4 * cfg.epsilons[resolved]) {
        pending.push_back(eng.steps());
        if (pending.size() >= batch && flush()) break;
      }
    }
    if (exit_monitor.exited(eng)) break;

    const double scale = std::min(X, eng.second_force_gap());
    const double s = std::min(cfg.dt, h2 * scale * scale);
    if (!eng.step(s)) break;  // continuation threshold
  }
  if (trace_mode && !pending.empty()) flush();
  res.steps = eng.steps();
  return res;
}

}  // namespace detail

inline std::vector<HitPathResult> run_hit_paths(const HitExperimentConfig& cfg, bool trace_mode) {
  cfg.validate();
  std::vector<HitPathResult> out(cfg.samples_per_eps);
  parallel_for(out.size(), cfg.threads, [&](std::size_t i) { out[i] = detail::run_hit_path(cfg, i, trace_mode); });
  return out;
}

inline std::vector<McEstimate> hit_estimates_from_paths(const HitExperimentConfig& cfg,
                                                        const std::vector<HitPathResult>& paths, bool trace_mode,
                                                        double delta) {
  std::vector<McEstimate> est;
  for (std::size_t k = 0; k < cfg.epsilons.size(); ++k) {
    const double eps = cfg.epsilons[k];
    std::size_t hits = 0;
    for (const auto& p : paths) {
      if (trace_mode) {
        const double h = p.entry_height[k];
        hits += (!std::isnan(h) && h >= delta * eps) ? 1 : 0;
      } else {
        hits += p.min_proxy <= eps ? 1 : 0;
      }
    }
    McEstimate e = bernoulli_estimate(hits, paths.size());
    e.seed = cfg.rng.seed;
    e.config_echo = "eps=" + std::to_string(eps);
    est.push_back(e);
  }
  return est;
}

// P[E_eps^{delta,r}] for every eps.  delta = 0 uses the Koebe proxy
// (g(x)-W)/g'(x) <= eps; delta > 0 needs the entry point and uses the trace.
inline std::vector<McEstimate> estimate_hitting_probabilities(const HitExperimentConfig& cfg) {
  const bool trace_mode = cfg.delta > 0;
  const auto paths = run_hit_paths(cfg, trace_mode);
  return hit_estimates_from_paths(cfg, paths, trace_mode, cfg.delta);
}

inline std::vector<std::pair<double, McEstimate>> zip_eps(const std::vector<double>& eps,
                                                          const std::vector<McEstimate>& est) {
  std::vector<std::pair<double, McEstimate>> pts;
  for (std::size_t i = 0; i < eps.size(); ++i) pts.emplace_back(eps[i], est[i]);
  return pts;
}

struct DeltaRobustness {
  SlopeFit fit_delta0;
  SlopeFit fit_delta;
  std::vector<McEstimate> est_delta0;
  std::vector<McEstimate> est_delta;
  double difference;
  double joint_halfwidth;  // 95%, treating the fits as independent (conservative for shared paths)
};

// Both delta values are read off the same traced paths, so the event
// containment E^{delta} ⊆ E^{0} holds sample by sample.
inline DeltaRobustness delta_robustness_check(HitExperimentConfig cfg, double delta = 0.5) {
  require(delta > 0 && delta < 1, "delta_robustness_check: delta must lie in (0,1)");
  cfg.delta = delta;
  const auto paths = run_hit_paths(cfg, true);
  DeltaRobustness r;
  r.est_delta0 = hit_estimates_from_paths(cfg, paths, true, 0.0);
  r.est_delta = hit_estimates_from_paths(cfg, paths, true, delta);
  const auto p0 = zip_eps(cfg.epsilons, r.est_delta0);
  const auto p1 = zip_eps(cfg.epsilons, r.est_delta);
  r.fit_delta0 = fit_exponent(p0);
  r.fit_delta = fit_exponent(p1);
  r.difference = r.fit_delta0.slope - r.fit_delta.slope;
  r.joint_halfwidth = std::hypot(r.fit_delta0.confidence_halfwidth, r.fit_delta.confidence_halfwidth);
  return r;
}

// ---------------------------------------------------------------------------
// Boundary-intersection dimension on the window [x0, x1].

struct BoundaryDimensionConfig {
  double kappa = 6.0;
  double rho = 0.0;  // force at 0^+
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.02};
  double x0 = 1.0, x1 = 2.0;
  std::size_t samples = 200;
  double dt = 1e-2;            // largest capacity-time step
  double step_fraction = 0.1;  // steps resolve the smallest active gap to this fraction
  double retire_gap = 1e-9;    // a point counts as swallowed once g(x) - W < retire_gap * x
  double t_max = 1e4;
  RngSpec rng{};
  unsigned threads = 1;

  void validate() const {
    require(kappa > 0, "boundary dimension: kappa must be positive");
    require(boundary_interaction_regime(kappa, rho) == BoundaryRegime::bounces,
            "boundary dimension: rho must lie in the bouncing window ((-2) v (kappa/2-4), kappa/2-2)");
    require(x0 > 0 && x1 > x0, "boundary dimension: need 0 < x0 < x1");
    require(epsilons.size() >= 3, "boundary dimension: need at least three epsilons");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      require(epsilons[i] > 0 && epsilons[i] <= x1 - x0, "boundary dimension: epsilons must lie in (0, x1 - x0]");
      if (i > 0) require(epsilons[i] < epsilons[i - 1], "boundary dimension: epsilons must be strictly decreasing");
    }
    require(samples >= 2, "boundary dimension: need at least two samples");
    require(dt > 0 && step_fraction > 0 && step_fraction <= 0.5, "boundary dimension: bad step controls");
    require(retire_gap > 0 && retire_gap < 1, "boundary dimension: retire_gap must lie in (0,1)");
  }

  // Cell centres x0 + eps (k + 1/2) of the eps-grid on [x0, x1].
  std::vector<double> grid(double eps) const {
    const auto n = static_cast<std::size_t>(std::floor((x1 - x0) / eps + 1e-9));
    std::vector<double> xs(n);
    for (std::size_t k = 0; k < n; ++k) xs[k] = x0 + eps * (static_cast<double>(k) + 0.5);
    return xs;
  }
};

struct BoundaryDimensionResult {
  SlopeFit fit;                        // slope of log N(eps) against log(1/eps)
  std::vector<McEstimate> counts;      // mean flagged grid points per eps
  std::vector<std::size_t> grid_size;  // grid points per eps
  double target = 0.0;
};

namespace detail {

// Flag counts per eps for one path.
inline std::vector<std::size_t> run_boundary_path(const BoundaryDimensionConfig& cfg, std::size_t index) {
  AdaptiveChordal eng(cfg.kappa, {cfg.rng.seed, cfg.rng.stream + index}, false);
  if (cfg.rho != 0) eng.add_force(kZeroOffset, cfg.rho);
  struct Tracked {
    std::size_t id;
    std::size_t level;
    double eps, x;
  };
  std::vector<Tracked> active;
  for (std::size_t e = 0; e < cfg.epsilons.size(); ++e)
    for (double x : cfg.grid(cfg.epsilons[e])) active.push_back({eng.add_point(x), e, cfg.epsilons[e], x});
  std::vector<std::size_t> counts(cfg.epsilons.size(), 0);
  const double h2 = cfg.step_fraction * cfg.step_fraction / std::max(cfg.kappa, 1.0);
  while (!active.empty() && eng.t() < cfg.t_max) {
    double min_gap = std::numeric_limits<double>::infinity();
    std::erase_if(active, [&](const Tracked& p) {
      if (!eng.point_alive(p.id)) return true;
      const double X = eng.point_g(p.id) - eng.w();
      if (X > 0 && X / eng.point_dg(p.id) <= p.eps) {
        ++counts[p.level];
        return true;
      }
      // Near its swallowing time X follows a Bessel process of dimension
      // below 2 towards 0, and steps shrink with it.
      if (X < cfg.retire_gap * p.x) return true;
      min_gap = std::min(min_gap, X);
      return false;
    });
    if (active.empty()) break;
    const double scale = std::min(min_gap, eng.second_force_gap());
    if (!eng.step(std::min(cfg.dt, h2 * scale * scale))) break;
  }
  return counts;
}

}  // namespace detail

inline BoundaryDimensionResult boundary_dimension_experiment(const BoundaryDimensionConfig& cfg) {
  cfg.validate();
  const std::size_t ne = cfg.epsilons.size();
  std::vector<std::vector<std::size_t>> per_path(cfg.samples);
  parallel_for(cfg.samples, cfg.threads, [&](std::size_t i) { per_path[i] = detail::run_boundary_path(cfg, i); });

  BoundaryDimensionResult res;
  res.target = boundary_dimension(cfg.kappa, cfg.rho).value;
  std::vector<double> x, y, var;
  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<double> c(cfg.samples);
    for (std::size_t i = 0; i < cfg.samples; ++i) c[i] = static_cast<double>(per_path[i][e]);
    McEstimate m = mean_estimate(c);
    m.seed = cfg.rng.seed;
    m.config_echo = "eps=" + std::to_string(cfg.epsilons[e]);
    res.counts.push_back(m);
    res.grid_size.push_back(cfg.grid(cfg.epsilons[e]).size());
    if (m.value > 0) {
      x.push_back(std::log(1 / cfg.epsilons[e]));
      y.push_back(std::log(m.value));
      var.push_back(std::pow(m.std_error / m.value, 2));
    }
  }
  if (x.size() < 3) throw DomainError("boundary dimension: fewer than three epsilons with nonzero counts");
  res.fit = weighted_line_fit(x, y, var);
  for (std::size_t e = 0; e < ne; ++e)
    if (res.counts[e].value >= 0.99 * static_cast<double>(res.grid_size[e]))
      res.fit.warnings.push_back("eps=" + std::to_string(cfg.epsilons[e]) + ": count saturates the grid");
  return res;
}

// ---------------------------------------------------------------------------
// Box slopes of double and cut cells.
//
// Each eps uses its own traces refined to tip spacing eps / resolution_ratio,
// so every rung of the ladder sees the curve at the same relative resolution.
// With one fixed trace resolution the double-cell count saturates once eps
// approaches the spacing (touches below it are not resolved).  A double cell
// must be left by an excursion reaching distance `excursion` (a fixed physical
// scale, i.e. neighborhood radius excursion/eps cells); cut cells use the
// fixed radius `cut_radius`.  Both use index gap 1, so every loop counts.

enum class SelfIntersectionKind { double_points, cut_points };

struct SelfIntersectionConfig {
  double kappa_prime = 6.0;
  std::vector<double> epsilons{0.08, 0.04, 0.02};
  std::size_t samples = 100;   // traces per eps
  std::size_t steps = 20000;   // base driving steps on [0, T] before refinement
  double T = 1.0;
  double resolution_ratio = 4.0;
  double excursion = 0.16;
  int cut_radius = 2;
  std::size_t gap = 1;
  Window window{-1.0, 1.0, 0.0, 1.5};
  RngSpec rng{};
  unsigned threads = 1;

  void validate() const {
    require(kappa_prime > 4 && kappa_prime < 8, "self-intersection dimension: kappa' must lie in (4,8)");
    require(epsilons.size() >= 3, "self-intersection dimension: need at least three epsilons");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      require(epsilons[i] > 0, "self-intersection dimension: epsilons must be positive");
      if (i > 0) require(epsilons[i] < epsilons[i - 1], "self-intersection dimension: epsilons must be strictly decreasing");
    }
    require(samples >= 2 && steps >= 1 && T > 0, "self-intersection dimension: bad sample or step counts");
    require(resolution_ratio >= 4, "self-intersection dimension: resolution_ratio must be at least 4");
    require(excursion >= epsilons.front(), "self-intersection dimension: excursion must be at least the largest eps");
    require(cut_radius >= 0 && gap >= 1, "self-intersection dimension: bad classifier parameters");
    require(window.x1 > window.x0 && window.y1 > window.y0, "self-intersection dimension: empty window");
  }

  int double_radius(double eps) const { return std::max(1, static_cast<int>(std::lround(excursion / eps))); }
};

struct SelfIntersectionResult {
  SlopeFit double_fit, cut_fit;
  std::vector<McEstimate> double_counts, cut_counts;  // mean cells in the window per eps
  std::vector<double> mean_trace_points;
  double double_target = 0.0, cut_target = 0.0;
};

namespace detail {

struct SelfIntersectionCounts {
  std::size_t doubles = 0, cuts = 0, points = 0;
};

inline SelfIntersectionCounts run_self_intersection_trace(const SelfIntersectionConfig& cfg, std::size_t level,
                                                          std::size_t index) {
  const double eps = cfg.epsilons[level];
  const RngSpec spec{cfg.rng.seed, cfg.rng.stream + (static_cast<std::uint64_t>(level) << 32) + index};
  const auto rt = refined_brownian_trace(cfg.kappa_prime, cfg.T, cfg.T / static_cast<double>(cfg.steps),
                                         eps / cfg.resolution_ratio, spec);
  const auto occ = build_occupancy(rt.trace, eps);
  SelfIntersectionCounts c;
  c.points = rt.trace.points.size();
  c.doubles = count_in_window(classify_cells(occ, cfg.gap, cfg.double_radius(eps)).doubles, eps, cfg.window);
  c.cuts = count_in_window(classify_cells(occ, cfg.gap, cfg.cut_radius).cut_cells, eps, cfg.window);
  return c;
}

inline SlopeFit count_slope(const std::vector<double>& eps, const std::vector<McEstimate>& counts, const char* what) {
  std::vector<double> x, y, var;
  SlopeFit fit;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    if (counts[e].value <= 0) continue;
    x.push_back(std::log(1 / eps[e]));
    y.push_back(std::log(counts[e].value));
    var.push_back(std::pow(counts[e].std_error / counts[e].value, 2));
  }
  if (x.size() < 3) throw DomainError(std::string(what) + ": fewer than three epsilons with nonzero counts");
  return weighted_line_fit(x, y, var);
}

}  // namespace detail

inline SelfIntersectionResult self_intersection_experiment(const SelfIntersectionConfig& cfg) {
  cfg.validate();
  const std::size_t ne = cfg.epsilons.size();
  std::vector<detail::SelfIntersectionCounts> all(ne * cfg.samples);
  parallel_for(all.size(), cfg.threads,
               [&](std::size_t k) { all[k] = detail::run_self_intersection_trace(cfg, k / cfg.samples, k % cfg.samples); });

  SelfIntersectionResult res;
  res.double_target = double_point_dimension(cfg.kappa_prime).value;
  res.cut_target = cut_set_dimension(cfg.kappa_prime).value;
  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<double> d(cfg.samples), c(cfg.samples), n(cfg.samples);
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      const auto& r = all[e * cfg.samples + i];
      d[i] = static_cast<double>(r.doubles);
      c[i] = static_cast<double>(r.cuts);
      n[i] = static_cast<double>(r.points);
    }
    for (const auto& [vals, out] : {std::pair{&d, &res.double_counts}, std::pair{&c, &res.cut_counts}}) {
      McEstimate m = mean_estimate(*vals);
      m.seed = cfg.rng.seed;
      m.config_echo = "eps=" + std::to_string(cfg.epsilons[e]);
      out->push_back(m);
    }
    res.mean_trace_points.push_back(std::accumulate(n.begin(), n.end(), 0.0) / static_cast<double>(cfg.samples));
  }
  res.double_fit = detail::count_slope(cfg.epsilons, res.double_counts, "double-point dimension");
  res.cut_fit = detail::count_slope(cfg.epsilons, res.cut_counts, "cut-point dimension");
  return res;
}

inline SlopeFit self_intersection_dimension_experiment(SelfIntersectionKind kind, const SelfIntersectionConfig& cfg) {
  const auto r = self_intersection_experiment(cfg);
  return kind == SelfIntersectionKind::double_points ? r.double_fit : r.cut_fit;
}

// ---------------------------------------------------------------------------
// Stationary law of the angle diffusion dtheta = a cot(theta) dt + dB,
// a = 1 - 4/kappa - r, whose invariant density is proportional to
// sin(theta)^(2a).

struct AngleLawConfig {
  double kappa = 3.0;
  double r = -1.0;
  double theta0 = std::numbers::pi / 2;
  double dt = 0.01;
  std::size_t steps = 1'000'000;  // after burn-in
  std::size_t burn_in = 10'000;
  std::size_t thin = 400;
  std::size_t bins = 20;
  RngSpec rng{};

  void validate() const {
    require(kappa > 0 && r < 0.5 - 4 / kappa, "angle law: requires r < 1/2 - 4/kappa");
    require(dt > 0 && steps >= thin && thin >= 1 && bins >= 2, "angle law: bad step, thinning or bin counts");
  }
  double drift_coefficient() const { return 1 - 4 / kappa - r; }
};

struct AngleLawResult {
  std::vector<double> edges;
  std::vector<double> observed, expected;
  ChiSquareResult chi2{};
  std::size_t samples = 0;
  double density_power = 0.0;  // 2a
};

inline AngleLawResult angle_law_check(const AngleLawConfig& cfg) {
  cfg.validate();
  const double pi = std::numbers::pi;
  const auto path = sample_angle_sde(cfg.kappa, cfg.r, cfg.theta0, static_cast<double>(cfg.burn_in + cfg.steps) * cfg.dt,
                                     cfg.dt, cfg.rng);
  AngleLawResult res;
  res.density_power = 2 * cfg.drift_coefficient();
  res.observed.assign(cfg.bins, 0.0);
  for (std::size_t k = cfg.burn_in + cfg.thin; k < path.size(); k += cfg.thin) {
    const auto b = std::min(cfg.bins - 1, static_cast<std::size_t>(path[k] / pi * static_cast<double>(cfg.bins)));
    res.observed[b] += 1;
    ++res.samples;
  }
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const auto density = [&](double t) { return std::pow(std::sin(t), res.density_power); };
  const double total = Quad::integrate(density, 0.0, pi);
  for (std::size_t b = 0; b <= cfg.bins; ++b) res.edges.push_back(pi * static_cast<double>(b) / static_cast<double>(cfg.bins));
  for (std::size_t b = 0; b < cfg.bins; ++b)
    res.expected.push_back(static_cast<double>(res.samples) * Quad::integrate(density, res.edges[b], res.edges[b + 1]) / total);
  res.chi2 = chi_square_gof(res.observed, res.expected);
  return res;
}

// ---------------------------------------------------------------------------
// Beurling estimate for the straight slit [0, 1] in the unit disk, and the
// Koebe bracket dist(z, K_t u R) <= 2 Upsilon_t(z) <= 4 dist(z, K_t u R).

struct BeurlingConfig {
  std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
  std::size_t samples = 20000;
  double step = 1e-4;
  RngSpec rng{};
  unsigned threads = 1;

  void validate() const {
    require(radii.size() >= 3, "beurling: need at least three radii");
    for (double r : radii) require(r > 0 && r < 1, "beurling: radii must lie in (0,1)");
    require(samples >= 2 && step > 0 && step < 0.01, "beurling: bad sample count or step");
  }
};

struct BeurlingResult {
  std::vector<McEstimate> avoid;
  std::vector<double> oracle;  // (4/pi) atan(sqrt(r)) for the slit
  SlopeFit fit;
};

inline BeurlingResult beurling_experiment(const BeurlingConfig& cfg) {
  cfg.validate();
  const std::vector<cplx> slit{{0.0, 0.0}, {1.0, 0.0}};
  BeurlingResult res;
  std::vector<std::pair<double, McEstimate>> pts;
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    const double r = cfg.radii[i];
    auto est = brownian_avoidance_probability(-r, slit, cfg.samples, cfg.step,
                                              {cfg.rng.seed, cfg.rng.stream + (std::uint64_t{i} << 32)}, cfg.threads);
    est.config_echo = "r=" + std::to_string(r);
    res.avoid.push_back(est);
    res.oracle.push_back(4 / std::numbers::pi * std::atan(std::sqrt(r)));
    pts.emplace_back(r, est);
  }
  res.fit = fit_exponent(pts);
  return res;
}

struct KoebeConfig {
  double kappa = 3.0;
  std::size_t pairs = 100;
  double T = 1.0;
  double dt = 1e-4;
  RngSpec rng{};
};

struct KoebePair {
  cplx z;
  double dist = 0.0;     // to the polyline trace and the real line
  double upsilon = 0.0;  // Im(g_T(z)) / |g_T'(z)|
  double slack = 0.0;    // polyline spacing near the trace
  bool ok = false;
};

// Points are drawn uniformly in [-1.5,1.5] x (0,2] and redrawn if swallowed;
// kappa <= 4 keeps the hull equal to the trace.
inline std::vector<KoebePair> koebe_bracket_check(const KoebeConfig& cfg) {
  require(cfg.kappa > 0 && cfg.kappa <= 4, "koebe bracket: kappa must lie in (0,4]");
  require(cfg.pairs >= 1 && cfg.dt > 0 && cfg.T >= cfg.dt, "koebe bracket: bad pair count or step");
  std::vector<KoebePair> out;
  SleParams p;
  p.kappa = cfg.kappa;
  for (std::size_t i = 0; out.size() < cfg.pairs; ++i) {
    const RngSpec spec{cfg.rng.seed, cfg.rng.stream + i};
    const auto d = sample_chordal_driving(p, cfg.T, cfg.dt, spec);
    const auto tr = compute_trace(d);
    CounterRng pick(spec, std::uint64_t{1} << 40);
    const cplx z{3 * pick.uniform() - 1.5, 2 * pick.uniform()};
    const auto flow = evolve_interior_point(d, z);
    if (flow.base.swallowed_index) continue;
    KoebePair kp;
    kp.z = z;
    kp.dist = std::min(z.imag(), polyline_distance(z, tr.points));
    kp.upsilon = flow.Upsilon.back();
    kp.slack = 2 * max_segment_length(tr.points);
    kp.ok = kp.dist <= 2 * kp.upsilon + kp.slack && 2 * kp.upsilon <= 4 * kp.dist + kp.slack;
    out.push_back(kp);
  }
  return out;
}

}  // namespace sle
