#pragma once
// Fast tip composition and adaptively refined traces.
//
// A block of consecutive inverse slit maps F = phi_a o ... o phi_{b-1}
// extends by reflection to C minus the real interval [alpha, beta] onto which
// its forward flow sends the block's hull, and F(z) - z vanishes at infinity.
// About m = (alpha+beta)/2 it is therefore a Laurent series in 1/(z-m)
// converging for |z-m| > rho = (beta-alpha)/2.  Blocks of 4, 16, 64, ...
// maps store P = 40 coefficients, obtained by sampling F on the circle of
// radius 1.5 rho.  A pull-back uses the largest aligned block whose series is
// accurate at the current point (|z-m| >= 2 rho, truncation below
// rho 2^-40) and falls back to smaller blocks or single maps otherwise.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numbers>
#include <vector>

#include "sle/error.hpp"
#include "sle/loewner.hpp"
#include "sle/rng.hpp"

namespace sle {

class TipComposer {
 public:
  static constexpr std::size_t kFanout = 4;
  static constexpr std::size_t kTerms = 40;
  static constexpr std::size_t kSamples = 128;
  static constexpr double kSampleRadius = 1.5;  // in units of rho
  static constexpr double kUseRadius = 2.0;

  TipComposer() {
    for (std::size_t s = 0; s < kSamples; ++s) {
      const double th = 2 * std::numbers::pi * (static_cast<double>(s) + 0.5) / static_cast<double>(kSamples);
      unit_[s] = std::polar(1.0, th);
    }
  }

  std::size_t size() const { return w_.size(); }
  double w(std::size_t k) const { return w_[k]; }
  double dt(std::size_t k) const { return dt_[k]; }

  void push(double w, double dt) {
    w_.push_back(w);
    dt_.push_back(dt);
    const std::size_t n = w_.size();
    std::size_t len = kFanout;
    for (std::size_t level = 0; n % len == 0; ++level, len *= kFanout) {
      if (levels_.size() <= level) levels_.emplace_back();
      levels_[level].push_back(build_block(n - len, n, level));
    }
  }

  // Applies maps k-1, ..., 0 to z.
  cplx pull_back(cplx z, std::size_t k) const {
    while (k > 0) {
      bool used = false;
      std::size_t len = 1;
      for (std::size_t level = 0; level < levels_.size(); ++level) len *= kFanout;
      for (std::size_t level = levels_.size(); level-- > 0;) {
        if (k % len == 0) {
          const Block& b = levels_[level][k / len - 1];
          if (std::abs(z - b.m) >= kUseRadius * b.rho) {
            z = eval(b, z);
            k -= len;
            used = true;
            break;
          }
        }
        len /= kFanout;
      }
      if (!used) {
        z = inverse_slit_step(z, w_[k - 1], dt_[k - 1]);
        --k;
      }
    }
    return z;
  }

  // Tip after the committed steps.
  cplx tip() const {
    const std::size_t n = w_.size();
    if (n == 0) return {};
    return pull_back({w_[n - 1], 2 * std::sqrt(dt_[n - 1])}, n - 1);
  }

  // Tip if one more step (w, dt) were committed.
  cplx tip_with(double w, double dt) const { return pull_back({w, 2 * std::sqrt(dt)}, w_.size()); }

 private:
  struct Block {
    double m = 0.0, rho = 0.0;
    std::array<cplx, kTerms> c{};  // F(z) = z + sum_j c_j (z-m)^-(j+1)
  };

  static cplx eval(const Block& b, cplx z) {
    const cplx inv = 1.0 / (z - b.m);
    cplx acc = 0;
    for (std::size_t j = kTerms; j-- > 0;) acc = (acc + b.c[j]) * inv;
    cplx out = z + acc;
    // Truncation error can push points hugging the real line just below it.
    if (out.imag() < 0) out.imag(0.0);
    return out;
  }

  // Applies maps [a, b) (b-1 first) using blocks below `level` where valid.
  cplx apply_range(cplx z, std::size_t a, std::size_t b, std::size_t level) const {
    std::size_t k = b;
    while (k > a) {
      bool used = false;
      std::size_t len = 1;
      for (std::size_t l = 0; l < level; ++l) len *= kFanout;
      for (std::size_t l = level; l-- > 0;) {
        if (k % len == 0 && k - len >= a) {
          const Block& blk = levels_[l][k / len - 1];
          if (std::abs(z - blk.m) >= kUseRadius * blk.rho) {
            z = eval(blk, z);
            k -= len;
            used = true;
            break;
          }
        }
        len /= kFanout;
      }
      if (!used) {
        z = inverse_slit_step(z, w_[k - 1], dt_[k - 1]);
        --k;
      }
    }
    return z;
  }

  Block build_block(std::size_t a, std::size_t b, std::size_t level) const {
    // Forward images of the hull's extreme points give [alpha, beta].
    double L = w_[a], R = w_[a];
    for (std::size_t k = a; k < b; ++k) {
      const double w = w_[k];
      L = std::min(L, w);
      R = std::max(R, w);
      L = w - std::sqrt((L - w) * (L - w) + 4 * dt_[k]);
      R = w + std::sqrt((R - w) * (R - w) + 4 * dt_[k]);
    }
    Block blk;
    blk.m = 0.5 * (L + R);
    blk.rho = 0.5 * (R - L);
    const double r = kSampleRadius * blk.rho;
    std::array<cplx, kSamples> f{};
    for (std::size_t s = 0; s < kSamples / 2; ++s) {
      const cplx z = blk.m + r * unit_[s];  // upper half of the circle
      f[s] = apply_range(z, a, b, level) - z;
      f[kSamples - 1 - s] = std::conj(f[s]);  // reflection symmetry
    }
    // c_j = r^(j+1) / M * sum_s f_s e^{i(j+1) theta_s}
    std::array<cplx, kSamples> tw = unit_;
    double rp = r;
    for (std::size_t j = 0; j < kTerms; ++j, rp *= r) {
      cplx acc = 0;
      for (std::size_t s = 0; s < kSamples; ++s) {
        acc += f[s] * tw[s];
        tw[s] *= unit_[s];
      }
      blk.c[j] = acc * (rp / static_cast<double>(kSamples));
    }
    return blk;
  }

  std::vector<double> w_, dt_;
  std::vector<std::vector<Block>> levels_;
  std::array<cplx, kSamples> unit_{};
};

// ---------------------------------------------------------------------------

struct RefinedTrace {
  Trace trace;             // tips at the accepted knots, starting with 0
  std::vector<double> w;   // driving value on each step
  std::vector<double> dt;  // step lengths
  std::size_t splits = 0;
  std::size_t capped = 0;  // steps accepted at max_depth although a test still failed
};

// Chordal SLE_kappa trace on [0, T] whose consecutive tips are at most
// max_spacing apart, and each tip is that close to the point the following
// slit grows from.  The driving is sampled on a uniform grid of step dt; a
// step that fails either test is bisected by drawing the Brownian-bridge
// midpoint (exact in law), down to dt / 2^max_depth.  A tip depends only on
// the driving up to its own time, so accepted tips are final.
inline RefinedTrace refined_brownian_trace(double kappa, double T, double dt, double max_spacing, RngSpec rng,
                                           int max_depth = 16) {
  require(kappa > 0, "refined_brownian_trace: kappa must be positive");
  require(dt > 0 && T >= dt, "refined_brownian_trace: need 0 < dt <= T");
  require(max_spacing > 0, "refined_brownian_trace: max_spacing must be positive");
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  CounterRng gen(rng);
  CounterRng bridge(rng, std::uint64_t{1} << 40);
  const double sk = std::sqrt(kappa);
  struct Knot {
    double t, w;
    int depth;
  };
  std::deque<Knot> ahead;
  double t = 0, W = 0;
  std::size_t coarse = 0;
  TipComposer comp;
  RefinedTrace out;
  out.trace.points.push_back({0.0, 0.0});
  out.trace.times.push_back(0.0);
  while (true) {
    if (ahead.empty()) {
      if (coarse == n) break;
      ++coarse;
      ahead.push_back({static_cast<double>(coarse) * dt, W + sk * std::sqrt(dt) * gen.normal(), 0});
    }
    Knot& next = ahead.front();
    const double s = next.t - t;
    const cplx tip = comp.tip_with(W, s);
    if (!std::isfinite(tip.real()) || !std::isfinite(tip.imag()))
      throw SolverError("refined_brownian_trace: non-finite tip", comp.size());
    // The next step's slit grows from the preimage of next.w, which leaves
    // the current slit when the driving increment exceeds its height; that
    // point must be close to the tip as well.
    const cplx base = comp.pull_back(inverse_slit_step({next.w, 0.0}, W, s), comp.size());
    const double jump = std::max(std::abs(tip - out.trace.points.back()), std::abs(base - tip));
    if (jump > max_spacing && next.depth < max_depth) {
      // Jumps scale roughly like sqrt(step), so bisect the front segment
      // about 2 log2(jump / max_spacing) times before testing again.
      const int want = std::max(1, static_cast<int>(2 * std::log2(jump / max_spacing)));
      for (int d = 0; d < want && ahead.front().depth < max_depth; ++d) {
        Knot& b = ahead.front();
        const double len = b.t - t;
        const Knot mid{t + len / 2, 0.5 * (W + b.w) + 0.5 * sk * std::sqrt(len) * bridge.normal(), b.depth + 1};
        b.depth += 1;
        ahead.push_front(mid);
        ++out.splits;
      }
      continue;
    }
    if (jump > max_spacing) ++out.capped;
    comp.push(W, s);
    out.w.push_back(W);
    out.dt.push_back(s);
    out.trace.points.push_back(tip);
    out.trace.times.push_back(next.t);
    t = next.t;
    W = next.w;
    ahead.pop_front();
  }
  return out;
}

}  // namespace sle
