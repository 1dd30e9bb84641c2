#pragma once
// Samplers for SLE driving processes.
//
// Chordal SLE_kappa(rho_L; rho_R) is integrated by Euler-Maruyama on W with
// the force images moved by the exact slit map.  When W gets within one noise
// scale of its nearest force cluster, that pair is advanced by a square-Bessel
// step instead: with b = |W - V|/sqrt(kappa) and d = 1 + 2(rho+2)/kappa,
//
//   b' = sqrt((b + dB~ + x dt)^2 + (d-1) dt),
//
// which is nonnegative, exact in mean for b^2, and reflects at 0 without an
// explicit rule.  The drift integral int dt/b over the step follows from the
// same update, which gives the increment of V (and hence of W).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "sle/error.hpp"
#include "sle/loewner.hpp"
#include "sle/rng.hpp"

namespace sle {

inline constexpr double kZeroOffset = 1e-9;

struct ForcePoint {
  double x = 0.0;
  double rho = 0.0;
  bool zero_offset = false;  // placed at 0^- / 0^+ (x is ignored)
};

struct SleParams {
  double kappa = 0.0;
  std::vector<ForcePoint> left;   // closest to 0 first
  std::vector<ForcePoint> right;  // closest to 0 first

  std::size_t force_count() const { return left.size() + right.size(); }

  // rho-bar partial sums with rho_{0,q} = 0.
  double rho_bar_left(std::size_t j) const {
    double s = 0;
    for (std::size_t i = 0; i < j && i < left.size(); ++i) s += left[i].rho;
    return s;
  }
  double rho_bar_right(std::size_t j) const {
    double s = 0;
    for (std::size_t i = 0; i < j && i < right.size(); ++i) s += right[i].rho;
    return s;
  }

  double left_x(std::size_t i) const { return left[i].zero_offset ? -kZeroOffset : left[i].x; }
  double right_x(std::size_t i) const { return right[i].zero_offset ? kZeroOffset : right[i].x; }

  void validate() const {
    require(kappa >= 0, "SleParams: kappa must be nonnegative");
    for (std::size_t i = 0; i < left.size(); ++i) {
      require(left[i].zero_offset || left[i].x <= 0, "SleParams: left force points must be <= 0");
      if (i > 0) require(left_x(i) < left_x(i - 1), "SleParams: left force points must be strictly ordered");
    }
    for (std::size_t i = 0; i < right.size(); ++i) {
      require(right[i].zero_offset || right[i].x >= 0, "SleParams: right force points must be >= 0");
      if (i > 0) require(right_x(i) > right_x(i - 1), "SleParams: right force points must be strictly ordered");
    }
  }
};

enum class BoundaryRegime { avoids, hits_cannot_continue, fills_interval, bounces };

inline const char* to_string(BoundaryRegime r) {
  switch (r) {
    case BoundaryRegime::avoids: return "avoids";
    case BoundaryRegime::hits_cannot_continue: return "hits_cannot_continue";
    case BoundaryRegime::fills_interval: return "fills_interval";
    case BoundaryRegime::bounces: return "bounces";
  }
  return "unknown";
}

inline BoundaryRegime boundary_interaction_regime(double kappa, double rho_bar) {
  require(kappa > 0, "boundary_interaction_regime: kappa must be positive");
  if (rho_bar >= kappa / 2 - 2) return BoundaryRegime::avoids;
  if (rho_bar <= -2) return BoundaryRegime::hits_cannot_continue;
  if (kappa > 4 && rho_bar <= kappa / 2 - 4) return BoundaryRegime::fills_interval;
  return BoundaryRegime::bounces;
}

namespace detail {

// Square-Bessel step for b = gap/sqrt(kappa).  `a` is dB~ + x dt.  Returns
// the new b and the drift integral int dt/b, or nullopt when a process of
// dimension d <= 1 reaches 0 (continuation threshold).
struct BesselStep {
  double b;
  double drift_integral;
};

inline std::optional<BesselStep> bessel_gap_step(double b, double a, double d, double s) {
  const double shifted = b + a;
  const double q = shifted * shifted + (d - 1) * s;
  if (d <= 1 && (q <= 0 || shifted <= 0)) return std::nullopt;
  const double bn = std::sqrt(std::max(q, 0.0));
  double integral;
  if (std::abs(d - 1) > 1e-12)
    integral = 2 / (d - 1) * (bn - shifted);
  else
    integral = s / std::max(0.5 * (b + bn), 1e-300);
  return BesselStep{bn, std::max(integral, 0.0)};
}

// Chordal driving state shared by the fixed-grid sampler and the adaptive
// engines in estimators.hpp.  Force points are stored side by side; points on
// the same side whose images coincide form a cluster and move together.
class ForceSystem {
 public:
  ForceSystem(double kappa, double w0) : kappa_(kappa), w_(w0) {}

  std::size_t add(double v, double rho, int side) {
    v_.push_back(v);
    rho_.push_back(rho);
    side_.push_back(side);
    return v_.size() - 1;
  }

  double w() const { return w_; }
  double v(std::size_t i) const { return v_[i]; }
  std::size_t size() const { return v_.size(); }
  double kappa() const { return kappa_; }

  struct Layout {
    int dominant_side = 0;  // 0: no force points with nonzero weight
    double dominant_gap = std::numeric_limits<double>::infinity();
    double second_gap = std::numeric_limits<double>::infinity();
  };

  // Dominant cluster: the nearest weighted force cluster to W.  Zero-weight
  // points never influence W and are moved passively.
  Layout layout() const {
    Layout l;
    double near[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (rho_[i] == 0) continue;
      const int s = side_[i] > 0 ? 1 : 0;
      near[s] = std::min(near[s], gap(i));
    }
    const int dom = near[1] <= near[0] ? 1 : 0;
    if (!std::isfinite(near[dom])) return l;
    l.dominant_side = dom == 1 ? 1 : -1;
    l.dominant_gap = near[dom];
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (rho_[i] == 0) continue;
      const int s = side_[i] > 0 ? 1 : 0;
      const double g = gap(i);
      if (s == dom && g <= near[dom] + merge_tol(near[dom])) continue;
      l.second_gap = std::min(l.second_gap, g);
    }
    return l;
  }

  enum class Status { ok, threshold };

  // Advance by s with Brownian increment dB.  Bessel treatment of the
  // dominant pair is used when its gap is below bessel_factor * sqrt(kappa s)
  // or when the Euler step would cross it.
  Status advance(double s, double dB, double bessel_factor) {
    const Layout l = layout();
    const double w0 = w_;
    if (l.dominant_side == 0) {
      for (std::size_t i = 0; i < v_.size(); ++i) {
        const double u = v_[i] - w0;
        v_[i] = w0 + side_[i] * std::sqrt(u * u + 4 * s);
      }
      w_ = w0 + std::sqrt(kappa_) * dB;
      settle();
      return Status::ok;
    }
    const int side = l.dominant_side;
    const double tol = merge_tol(l.dominant_gap);
    std::vector<char> dom(v_.size(), 0);
    double rho_dom = 0, e = 0;
    std::size_t rep = v_.size();
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (rho_[i] != 0 && side_[i] == side && gap(i) <= l.dominant_gap + tol) {
        dom[i] = 1;
        rho_dom += rho_[i];
        if (rep == v_.size()) rep = i;
      } else if (rho_[i] != 0) {
        e += rho_[i] / (w0 - v_[i]);
      }
    }
    auto move_all = [&](double vd) {
      for (std::size_t i = 0; i < v_.size(); ++i) {
        if (dom[i]) {
          v_[i] = vd;
        } else {
          const double u = v_[i] - w0;
          v_[i] = w0 + side_[i] * std::sqrt(u * u + 4 * s);
        }
      }
    };

    const double sk = std::sqrt(kappa_);
    if (l.dominant_gap >= bessel_factor * sk * std::sqrt(s)) {
      const double wn = w0 + (e + rho_dom / (w0 - v_[rep])) * s + sk * dB;
      const double u = v_[rep] - w0;
      const double vd = w0 + side * std::sqrt(u * u + 4 * s);
      if ((vd - wn) * side > 0) {
        move_all(vd);
        w_ = wn;
        settle();
        return Status::ok;
      }
    }

    const double d = 1 + 2 * (rho_dom + 2) / kappa_;
    const double b = l.dominant_gap / sk;
    const double dBt = side > 0 ? -dB : dB;
    const double x = side > 0 ? -e / sk : e / sk;
    const auto st = bessel_gap_step(b, dBt + x * s, d, s);
    if (!st) {
      const double vd = v_[rep];
      move_all(vd);
      w_ = vd;
      return Status::threshold;
    }
    const double vd = v_[rep] + side * 2 / sk * st->drift_integral;
    move_all(vd);
    w_ = vd - side * sk * st->b;
    settle();
    return Status::ok;
  }

  double gap(std::size_t i) const { return side_[i] > 0 ? v_[i] - w_ : w_ - v_[i]; }

 private:
  static double merge_tol(double g) { return 1e-12 * (1 + std::abs(g)); }

  // Restore W-ordering after rounding or a rare large increment and merge
  // same-side images that have met.
  void settle() {
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (gap(i) < 0) v_[i] = w_;
    }
    for (std::size_t i = 0; i < v_.size(); ++i)
      for (std::size_t j = 0; j < v_.size(); ++j)
        if (i != j && side_[i] == side_[j] && gap(j) < gap(i) && gap(i) - gap(j) <= merge_tol(gap(i)))
          v_[i] = v_[j];
  }

  double kappa_;
  double w_;
  std::vector<double> v_;
  std::vector<double> rho_;
  std::vector<int> side_;
};

}  // namespace detail

// ---------------------------------------------------------------------------

struct SamplerOptions {
  double bessel_factor = 1.0;   // Bessel pair step when gap < factor * sqrt(kappa dt)
  double substep_scale = 0.25;  // non-dominant gaps resolved to this fraction per sub-step
  std::size_t max_substeps = 10'000'000;
};

inline DrivingPath sample_chordal_driving(const SleParams& p, double T, double dt, RngSpec rng,
                                          const SamplerOptions& opt = {}) {
  p.validate();
  require(dt > 0, "sample_chordal_driving: dt must be positive");
  require(T >= dt, "sample_chordal_driving: T must be at least dt");
  const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));

  detail::ForceSystem sys(p.kappa, 0.0);
  for (std::size_t i = 0; i < p.left.size(); ++i) sys.add(p.left_x(i), p.left[i].rho, -1);
  for (std::size_t i = 0; i < p.right.size(); ++i) sys.add(p.right_x(i), p.right[i].rho, +1);

  DrivingPath out;
  out.dt = dt;
  out.w.reserve(n_steps + 1);
  out.force_images.assign(sys.size(), {});
  auto record = [&] {
    out.w.push_back(sys.w());
    for (std::size_t i = 0; i < sys.size(); ++i) out.force_images[i].push_back(sys.v(i));
  };
  record();

  CounterRng gen(rng);
  const double kappa_eff = std::max(p.kappa, 1.0);
  for (std::size_t k = 0; k < n_steps; ++k) {
    double remaining = dt;
    std::size_t sub = 0;
    bool threshold = false;
    while (remaining > 0) {
      const auto l = sys.layout();
      double s = remaining;
      if (std::isfinite(l.second_gap)) {
        const double cap = std::pow(opt.substep_scale * l.second_gap, 2) / kappa_eff;
        s = std::min(remaining, std::max(cap, dt * 1e-12));
      }
      if (remaining - s < 1e-9 * dt) s = remaining;
      const double dB = std::sqrt(s) * gen.normal();
      if (sys.advance(s, dB, opt.bessel_factor) == detail::ForceSystem::Status::threshold) {
        threshold = true;
        break;
      }
      remaining -= s;
      if (++sub > opt.max_substeps) throw SolverError("sample_chordal_driving: sub-step budget exhausted", k);
    }
    if (!std::isfinite(sys.w())) throw SolverError("sample_chordal_driving: non-finite driving value", k);
    record();
    if (threshold) {
      out.threshold_index = k + 1;
      break;
    }
  }
  return out;
}

// One force point at gap x0 >= 0 to the right of W (x0 = 0 is 0^+).  The gap
// is integrated purely by the square-Bessel scheme.
inline DrivingPath sample_single_force_driving_exact(double kappa, double rho, double x0, double T, double dt,
                                                     RngSpec rng) {
  require(kappa > 0, "sample_single_force_driving_exact: kappa must be positive");
  require(rho > -2, "sample_single_force_driving_exact: rho must exceed -2");
  require(x0 >= 0, "sample_single_force_driving_exact: starting gap must be nonnegative");
  require(dt > 0 && T >= dt, "sample_single_force_driving_exact: need 0 < dt <= T");
  const auto n_steps = static_cast<std::size_t>(std::llround(T / dt));
  const double sk = std::sqrt(kappa);
  const double d = 1 + 2 * (rho + 2) / kappa;
  DrivingPath out;
  out.dt = dt;
  out.force_images.assign(1, {});
  double w = 0, v = x0, b = x0 / sk;
  out.w.push_back(w);
  out.force_images[0].push_back(v);
  CounterRng gen(rng);
  const double sdt = std::sqrt(dt);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double dB = sdt * gen.normal();
    const auto st = detail::bessel_gap_step(b, -dB, d, dt);
    // d > 1 here, so the step always exists.
    v += 2 / sk * st->drift_integral;
    b = st->b;
    w = v - sk * b;
    out.w.push_back(w);
    out.force_images[0].push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Angle-type diffusions dphi = a cot(phi) dt + dB on (0, pi).

namespace detail {

inline double angle_step(double phi, double a, double s, double dB) {
  const double pi = std::numbers::pi;
  const bool upper = phi > pi / 2;
  const double b = upper ? pi - phi : phi;
  const double noise = upper ? -dB : dB;
  const double correction = a * (1 / std::tan(b) - 1 / b) * s;
  double bn;
  if (a > 0) {
    const double shifted = b + noise + correction;
    bn = std::sqrt(shifted * shifted + 2 * a * s);
  } else {
    bn = std::abs(b + noise + correction + a / b * s);
  }
  // Reflect back into (0, pi) in the unlikely event of a huge increment.
  bn = std::fmod(bn, 2 * pi);
  if (bn > pi) bn = 2 * pi - bn;
  bn = std::clamp(bn, 1e-300, pi - 1e-15);
  return upper ? pi - bn : bn;
}

}  // namespace detail

inline std::vector<double> sample_angle_sde(double kappa, double r, double theta0, double T, double dt, RngSpec rng) {
  require(kappa > 0, "sample_angle_sde: kappa must be positive");
  require(r < 0.5 - 4 / kappa, "sample_angle_sde: requires r < 1/2 - 4/kappa");
  require(theta0 > 0 && theta0 < std::numbers::pi, "sample_angle_sde: theta0 must lie in (0, pi)");
  require(dt > 0 && T >= 0, "sample_angle_sde: need dt > 0 and T >= 0");
  const double a = 1 - 4 / kappa - r;
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  std::vector<double> out;
  out.reserve(n + 1);
  out.push_back(theta0);
  CounterRng gen(rng);
  const double sdt = std::sqrt(dt);
  double th = theta0;
  for (std::size_t k = 0; k < n; ++k) {
    th = detail::angle_step(th, a, dt, sdt * gen.normal());
    out.push_back(th);
  }
  return out;
}

// Radial SLE_kappa(rho) with force point v0.  The phase gap gamma = arg W - arg V
// in (0, 2pi) obeys dgamma = ((rho+2)/2) cot(gamma/2) dt + sqrt(kappa) dB,
// i.e. phi = gamma/2 is an angle diffusion with a = (rho+2)/kappa in time kappa t/4.
inline RadialDrivingPath sample_radial_driving(double kappa, double rho, cplx w0, cplx v0, double T, double dt,
                                               RngSpec rng) {
  require(kappa > 0, "sample_radial_driving: kappa must be positive");
  require(rho > -2, "sample_radial_driving: rho must exceed -2");
  require(std::abs(std::abs(w0) - 1) < 1e-12 && std::abs(std::abs(v0) - 1) < 1e-12,
          "sample_radial_driving: w0 and v0 must be unit complex numbers");
  require(dt > 0 && T >= 0, "sample_radial_driving: need dt > 0 and T >= 0");
  const double two_pi = 2 * std::numbers::pi;
  double theta_w = std::arg(w0);
  double gamma = std::fmod(theta_w - std::arg(v0) + 2 * two_pi, two_pi);
  if (gamma == 0) gamma = 2 * kZeroOffset;  // v0 = w0^-: force point just clockwise of W
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  RadialDrivingPath out;
  out.dt = dt;
  auto record = [&] {
    out.w.push_back(std::polar(1.0, theta_w));
    out.v.push_back(std::polar(1.0, theta_w - gamma));
  };
  record();
  CounterRng gen(rng);
  const double a = (rho + 2) / kappa;
  const double sk = std::sqrt(kappa);
  const double s_phi = kappa * dt / 4;
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = gen.normal();
    const double dB = std::sqrt(dt) * xi;
    const double phi = detail::angle_step(gamma / 2, a, s_phi, std::sqrt(s_phi) * xi);
    const double gn = 2 * phi;
    // int cot(gamma/2) dt over the step, read off the gap update.
    const double cot_integral = (gn - gamma - sk * dB) * 2 / (rho + 2);
    theta_w += sk * dB + rho / 2 * cot_integral;
    gamma = gn;
    record();
  }
  return out;
}

}  // namespace sle
