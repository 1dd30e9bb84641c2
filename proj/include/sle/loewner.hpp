#pragma once
// Discretized Loewner chains.
//
// Chordal: on each step [t_k, t_{k+1}] the driving is frozen at W_k, so the
// elementary map is the vertical-slit map z -> W_k + sqrt((z-W_k)^2 + 4dt).
// The discrete chain is therefore an exact Loewner chain for piecewise
// constant driving, and half-plane capacity grows by exactly 2dt per step.
//
// Radial: the frozen-driving flow has a closed form.  Writing g = w e^{iu},
// the equation becomes du/dt = cot(u/2), so cos(u_t/2) = cos(u_0/2) e^{-t/2}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sle/error.hpp"

namespace sle {

using cplx = std::complex<double>;

enum class DomainTag { chordal_halfplane, radial_disk };

struct DrivingPath {
  double dt = 0.0;
  std::vector<double> w;
  // One sequence per force point: left forces (closest first), then right forces.
  std::vector<std::vector<double>> force_images;
  std::optional<std::size_t> threshold_index;

  std::size_t size() const { return w.size(); }
  std::size_t steps() const { return w.empty() ? 0 : w.size() - 1; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

struct RadialDrivingPath {
  double dt = 0.0;
  std::vector<cplx> w;
  std::vector<cplx> v;  // force point image; empty when there is none

  std::size_t size() const { return w.size(); }
  std::size_t steps() const { return w.empty() ? 0 : w.size() - 1; }
};

struct Trace {
  std::vector<cplx> points;
  std::vector<double> times;
  std::size_t stride = 1;
  DomainTag domain = DomainTag::chordal_halfplane;
};

struct PointFlow {
  cplx z0;
  std::vector<cplx> zt;
  std::vector<cplx> dgt;
  std::optional<std::size_t> swallowed_index;
};

struct InteriorPointFlow {
  PointFlow base;
  std::vector<double> X, Y, Delta, Upsilon, Theta, S;
};

// ---------------------------------------------------------------------------
// Elementary maps.

namespace detail {

// sqrt(a + ib) on the branch with Im >= 0.  When the root is real its sign
// follows `ref` so that real points stay on their side of the slit.
inline cplx upper_sqrt(double a, double b, double ref) {
  // Arguments stay far from overflow, so hypot is not needed.  The larger
  // component comes from a square root and the smaller from |b|/(2s), which
  // keeps precision near the real axis; selects avoid unpredictable branches.
  const double m = std::sqrt(a * a + b * b);
  const double big = std::sqrt(0.5 * (m + std::abs(a)));
  const double small = big > 0 ? std::abs(b) / (2 * big) : 0.0;
  const double sign = b > 0 ? 1.0 : (b < 0 ? -1.0 : (ref < 0 ? -1.0 : 1.0));
  return a >= 0 ? cplx{sign * big, small} : cplx{sign * small, big};
}

}  // namespace detail

inline cplx forward_slit_step(cplx z, double w, double dt) {
  if (dt == 0) return z;
  const cplx u = z - w;
  const double a = u.real() * u.real() - u.imag() * u.imag() + 4 * dt;
  const double b = 2 * u.real() * u.imag();
  return w + detail::upper_sqrt(a, b, u.real());
}

inline cplx inverse_slit_step(cplx z, double w, double dt) {
  if (dt == 0) return z;
  const cplx u = z - w;
  const double a = u.real() * u.real() - u.imag() * u.imag() - 4 * dt;
  const double b = 2 * u.real() * u.imag();
  return w + detail::upper_sqrt(a, b, u.real());
}

// Derivative of forward_slit_step at z.
inline cplx slit_step_derivative(cplx z, double w, double dt) {
  if (dt == 0) return 1.0;
  const cplx u = z - w;
  return u / (forward_slit_step(z, w, dt) - w);
}

// ---------------------------------------------------------------------------
// Traces.

// Tip after n steps of a chain with left-endpoint driving ws[k] and step
// dts[k] (k < n): compose the inverse maps applied to the slit tip of the
// last step.  O(n).
inline cplx chain_tip(std::span<const double> ws, std::span<const double> dts, std::size_t n) {
  if (n == 0) return ws.empty() ? cplx{} : cplx{ws[0], 0.0};
  cplx z{ws[n - 1], 2 * std::sqrt(dts[n - 1])};
  for (std::size_t k = n - 1; k-- > 0;) z = inverse_slit_step(z, ws[k], dts[k]);
  return z;
}

// Tips n0, n0+1, ..., n0+count-1 written to `out`.  The lanes share the
// tail of the composition, so the independent square-root chains overlap and
// this runs several times faster than repeated chain_tip calls.
inline void chain_tips(std::span<const double> ws, std::span<const double> dts, std::size_t n0, std::size_t count,
                       cplx* out) {
  constexpr std::size_t lanes = 8;
  while (count > 0) {
    if (n0 == 0) {
      *out++ = chain_tip(ws, dts, 0);
      ++n0;
      --count;
      continue;
    }
    const std::size_t c = std::min(count, lanes);
    cplx z[lanes];
    for (std::size_t j = 0; j < c; ++j) {
      z[j] = {ws[n0 + j - 1], 2 * std::sqrt(dts[n0 + j - 1])};
      for (std::size_t k = n0 + j - 1; k-- > n0 - 1;) z[j] = inverse_slit_step(z[j], ws[k], dts[k]);
    }
    for (std::size_t k = n0 - 1; k-- > 0;)
      for (std::size_t j = 0; j < c; ++j) z[j] = inverse_slit_step(z[j], ws[k], dts[k]);
    for (std::size_t j = 0; j < c; ++j) out[j] = z[j];
    out += c;
    n0 += c;
    count -= c;
  }
}

inline cplx chain_tip(std::span<const double> ws, double dt, std::size_t n) {
  if (n == 0) return ws.empty() ? cplx{} : cplx{ws[0], 0.0};
  cplx z{ws[n - 1], 2 * std::sqrt(dt)};
  for (std::size_t k = n - 1; k-- > 0;) z = inverse_slit_step(z, ws[k], dt);
  return z;
}

// Trace of a chordal driving path.  With stride k only every k-th tip (plus
// the last) is computed.
inline Trace compute_trace(const DrivingPath& d, std::size_t stride = 1) {
  require(stride >= 1, "compute_trace: stride must be positive");
  require(!d.w.empty(), "compute_trace: empty driving path");
  Trace tr;
  tr.stride = stride;
  const std::size_t n_steps = d.steps();
  if (stride == 1) {
    const std::vector<double> dts(n_steps, d.dt);
    tr.points.resize(n_steps + 1);
    chain_tips(d.w, dts, 0, n_steps + 1, tr.points.data());
    for (std::size_t n = 0; n <= n_steps; ++n) tr.times.push_back(d.time(n));
  } else {
    for (std::size_t n = 0;; n += stride) {
      if (n > n_steps) n = n_steps;
      tr.points.push_back(chain_tip(d.w, d.dt, n));
      tr.times.push_back(d.time(n));
      if (n == n_steps) break;
    }
  }
  for (std::size_t n = 0; n < tr.points.size(); ++n) {
    const cplx p = tr.points[n];
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
      throw SolverError("compute_trace: non-finite trace point", n * stride);
  }
  return tr;
}

// Inverse problem: recover the driving function from a full-resolution trace
// by zipping each new point through the maps built from earlier recoveries.
inline std::vector<double> recover_driving(const Trace& tr, double dt) {
  require(tr.stride == 1, "recover_driving: needs a full-resolution trace");
  std::vector<double> w;
  if (tr.points.size() < 2) return w;
  w.reserve(tr.points.size() - 1);
  for (std::size_t n = 1; n < tr.points.size(); ++n) {
    cplx z = tr.points[n];
    for (std::size_t k = 0; k + 1 < n; ++k) z = forward_slit_step(z, w[k], dt);
    w.push_back(z.real());
  }
  return w;
}

// ---------------------------------------------------------------------------
// Tracked points.

inline double swallow_tolerance(double dt) { return 10 * std::sqrt(dt); }

inline PointFlow evolve_boundary_point(const DrivingPath& d, double x) {
  PointFlow f;
  f.z0 = x;
  const double tol = swallow_tolerance(d.dt);
  double g = x, dg = 1.0;
  f.zt.push_back(g);
  f.dgt.push_back(dg);
  if (std::abs(g - d.w[0]) < tol) {
    f.swallowed_index = 0;
    return f;
  }
  for (std::size_t k = 0; k + 1 < d.w.size(); ++k) {
    const double X = g - d.w[k];
    const double r = std::sqrt(X * X + 4 * d.dt);
    g = d.w[k] + std::copysign(r, X);
    dg *= std::abs(X) / r;
    f.zt.push_back(g);
    f.dgt.push_back(dg);
    const double Xn = g - d.w[k + 1];
    if (std::abs(Xn) < tol || (Xn > 0) != (X > 0)) {
      f.swallowed_index = k + 1;
      break;
    }
  }
  return f;
}

inline InteriorPointFlow evolve_interior_point(const DrivingPath& d, cplx z) {
  require(z.imag() > 0, "evolve_interior_point: point must lie in the upper half-plane");
  InteriorPointFlow f;
  f.base.z0 = z;
  const double tol = swallow_tolerance(d.dt);
  cplx g = z, dg = 1.0;
  auto record = [&](std::size_t k) {
    const cplx Z = g - d.w[k];
    f.base.zt.push_back(g);
    f.base.dgt.push_back(dg);
    const double delta = std::abs(dg);
    f.X.push_back(Z.real());
    f.Y.push_back(Z.imag());
    f.Delta.push_back(delta);
    f.Upsilon.push_back(Z.imag() / delta);
    f.Theta.push_back(std::arg(Z));
    f.S.push_back(Z.imag() / std::abs(Z));
    return std::abs(Z) < tol || Z.imag() <= 0;
  };
  if (record(0)) {
    f.base.swallowed_index = 0;
    return f;
  }
  for (std::size_t k = 0; k + 1 < d.w.size(); ++k) {
    const cplx next = forward_slit_step(g, d.w[k], d.dt);
    dg *= (g - d.w[k]) / (next - d.w[k]);
    g = next;
    if (record(k + 1)) {
      f.base.swallowed_index = k + 1;
      break;
    }
  }
  return f;
}

// Images (O_L, O_R) of the extreme points of K_t ∩ R for every index.
inline std::pair<std::vector<double>, std::vector<double>> hull_image_intervals(const DrivingPath& d) {
  std::vector<double> lo(d.w.size()), hi(d.w.size());
  double L = d.w[0], R = d.w[0];
  lo[0] = L;
  hi[0] = R;
  for (std::size_t k = 0; k + 1 < d.w.size(); ++k) {
    const double w = d.w[k];
    R = std::max(w + std::sqrt((R - w) * (R - w) + 4 * d.dt), d.w[k + 1]);
    L = std::min(w - std::sqrt((L - w) * (L - w) + 4 * d.dt), d.w[k + 1]);
    lo[k + 1] = L;
    hi[k + 1] = R;
  }
  return {std::move(lo), std::move(hi)};
}

inline std::pair<double, double> hull_image_interval(const DrivingPath& d, std::size_t index) {
  require(index < d.w.size(), "hull_image_interval: index out of range");
  DrivingPath head{d.dt, {d.w.begin(), d.w.begin() + static_cast<std::ptrdiff_t>(index) + 1}, {}, {}};
  auto [lo, hi] = hull_image_intervals(head);
  return {lo.back(), hi.back()};
}

// Cheap hull enclosure: K_t lies in [min W, max W] x [0, 2 sqrt(t)].
inline double hull_radius_bound(double w_min, double w_max, double t) {
  const double a = std::max(std::abs(w_min), std::abs(w_max));
  return std::sqrt(a * a + 4 * t);
}

// ---------------------------------------------------------------------------
// Radial chain.

inline cplx radial_step(cplx z, cplx w, double dt) {
  if (dt == 0 || z == cplx{}) return z;
  if (std::abs(z - w) < 1e-15) return w;
  cplx u = cplx{0, -1} * std::log(z / w);
  if (u.real() <= 0) u += 2 * std::numbers::pi;  // Re u in (0, 2pi)
  const cplx c = std::cos(u / 2.0) * std::exp(-dt / 2);
  const cplx v = std::acos(c);
  return w * std::exp(cplx{0, 2} * v);
}

// d/dz of radial_step.
inline cplx radial_step_derivative(cplx z, cplx w, double dt) {
  if (dt == 0) return 1.0;
  if (z == cplx{}) return std::exp(dt);
  cplx u = cplx{0, -1} * std::log(z / w);
  if (u.real() <= 0) u += 2 * std::numbers::pi;
  const cplx c = std::cos(u / 2.0) * std::exp(-dt / 2);
  const cplx v = std::acos(c);
  const cplx g = w * std::exp(cplx{0, 2} * v);
  return std::exp(-dt / 2) * std::sin(u / 2.0) / std::sin(v) * g / z;
}

inline cplx radial_inverse_step(cplx z, cplx w, double dt) {
  if (dt == 0) return z;
  cplx u = cplx{0, -1} * std::log(z / w);
  if (u.real() < 0) u += 2 * std::numbers::pi;
  const cplx c = std::cos(u / 2.0) * std::exp(dt / 2);
  cplx v = std::acos(c);
  v = {v.real(), std::abs(v.imag())};
  return w * std::exp(cplx{0, 2} * v);
}

inline Trace compute_radial_trace(const RadialDrivingPath& d, std::size_t stride = 1) {
  require(stride >= 1, "compute_radial_trace: stride must be positive");
  require(!d.w.empty(), "compute_radial_trace: empty driving path");
  Trace tr;
  tr.stride = stride;
  tr.domain = DomainTag::radial_disk;
  const std::size_t n_steps = d.steps();
  for (std::size_t n = 0;; n += stride) {
    if (n > n_steps) n = n_steps;
    cplx z = d.w[n == 0 ? 0 : n - 1];
    for (std::size_t k = n; k-- > 0;) z = radial_inverse_step(z, d.w[k], d.dt);
    tr.points.push_back(z);
    tr.times.push_back(static_cast<double>(n) * d.dt);
    if (n == n_steps) break;
  }
  return tr;
}

}  // namespace sle
