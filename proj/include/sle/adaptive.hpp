#pragma once
// Chordal Loewner chain with caller-chosen step sizes.
//
// Fixed-grid driving paths cannot resolve a curve approaching a boundary
// point at distance eps: the relevant gaps shrink like eps while the noise per
// step stays sqrt(kappa dt).  This engine lets the caller pick each step from
// the current geometry (typically a fixed fraction of the smallest tracked gap),
// and records (W_k, dt_k) so tips can still be composed when needed.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "sle/driving.hpp"
#include "sle/loewner.hpp"
#include "sle/rng.hpp"

namespace sle {

class AdaptiveChordal {
 public:
  AdaptiveChordal(double kappa, RngSpec rng, bool keep_history = true)
      : sys_(kappa, 0.0), gen_(rng), keep_history_(keep_history) {}

  // Force point at x (use +-kZeroOffset for 0^+/0^-).  Zero weights are
  // tracked passively, which is how O^R / O^L are followed.
  std::size_t add_force(double x, double rho) { return sys_.add(x, rho, x > 0 ? 1 : -1); }

  // The dominant force cluster moves by the Bessel-pair step while its gap is
  // below factor * sqrt(kappa s), and by the exact slit map (Euler drift on W)
  // otherwise.  The default always uses the Bessel step.
  void set_bessel_factor(double factor) { bessel_factor_ = factor; }

  std::size_t add_point(double x) {
    pts_.push_back({x, 0.0, true});
    return pts_.size() - 1;
  }

  std::size_t add_interior(cplx z) {
    ipts_.push_back({z, 1.0, true});
    return ipts_.size() - 1;
  }

  // One step of size s.  Returns false when the continuation threshold is hit.
  bool step(double s) { return apply(s, std::sqrt(s) * gen_.normal()); }

  // One step of size s whose Brownian increment is bisected (exactly, via the
  // Brownian bridge) until accept(before, after) holds for every piece or
  // max_depth is reached.  The law of the driving is unchanged; only the
  // resolution adapts to moves the caller cannot tolerate in one piece.
  template <class Accept>
  bool step_guarded(double s, Accept&& accept, int max_depth = 40) {
    return guarded(s, std::sqrt(s) * gen_.normal(), accept, max_depth);
  }

  double t() const { return t_; }
  double w() const { return sys_.w(); }
  double force(std::size_t i) const { return sys_.v(i); }
  std::size_t steps() const { return steps_; }
  double kappa() const { return sys_.kappa(); }

  double point_g(std::size_t i) const { return pts_[i].g; }
  double point_log_dg(std::size_t i) const { return pts_[i].log_dg; }
  double point_dg(std::size_t i) const { return std::exp(pts_[i].log_dg); }
  bool point_alive(std::size_t i) const { return pts_[i].alive; }
  void retire_point(std::size_t i) { pts_[i].alive = false; }

  cplx interior_g(std::size_t i) const { return ipts_[i].g; }
  cplx interior_dg(std::size_t i) const { return ipts_[i].dg; }
  bool interior_alive(std::size_t i) const { return ipts_[i].alive; }

  // Gap to the nearest weighted force cluster other than the dominant one.
  double second_force_gap() const { return sys_.layout().second_gap; }

  // K_t is contained in the disk of this radius about 0.
  double hull_bound() const { return hull_radius_bound(wmin_, wmax_, t_); }

  cplx tip() const { return tip_at(ws_.size()); }
  cplx tip_at(std::size_t n) const { return chain_tip(ws_, dts_, n); }
  void tips(std::size_t n0, std::size_t count, cplx* out) const { chain_tips(ws_, dts_, n0, count, out); }

  const std::vector<double>& history_w() const { return ws_; }
  const std::vector<double>& history_dt() const { return dts_; }

 private:
  bool apply(double s, double dB) {
    const double w0 = sys_.w();
    const bool ok = sys_.advance(s, dB, bessel_factor_) == detail::ForceSystem::Status::ok;
    const double w1 = sys_.w();
    for (auto& p : pts_) {
      if (!p.alive) continue;
      const double X = p.g - w0;
      const double r = std::sqrt(X * X + 4 * s);
      p.g = w0 + std::copysign(r, X);
      p.log_dg -= 0.5 * std::log1p(4 * s / (X * X));
      if ((p.g - w1) * X <= 0) p.alive = false;
    }
    for (auto& q : ipts_) {
      if (!q.alive) continue;
      const cplx next = forward_slit_step(q.g, w0, s);
      q.dg *= (q.g - w0) / (next - w0);
      q.g = next;
      if (!(q.g.imag() > 0)) q.alive = false;
    }
    if (keep_history_) {
      ws_.push_back(w0);
      dts_.push_back(s);
    }
    t_ += s;
    wmin_ = std::min(wmin_, w1);
    wmax_ = std::max(wmax_, w1);
    ++steps_;
    return ok;
  }

  template <class Accept>
  bool guarded(double s, double dB, Accept& accept, int depth) {
    AdaptiveChordal before = snapshot();
    const bool ok = apply(s, dB);
    if (depth <= 0 || (ok && accept(static_cast<const AdaptiveChordal&>(before), static_cast<const AdaptiveChordal&>(*this))))
      return ok;
    restore(before);
    const double dB1 = 0.5 * dB + 0.5 * std::sqrt(s) * gen_.normal();
    if (!guarded(0.5 * s, dB1, accept, depth - 1)) return false;
    return guarded(0.5 * s, dB - dB1, accept, depth - 1);
  }

  // Copy without the (possibly long) history; restore() truncates instead.
  AdaptiveChordal snapshot() const {
    AdaptiveChordal c(sys_, gen_);
    c.pts_ = pts_;
    c.ipts_ = ipts_;
    c.t_ = t_;
    c.wmin_ = wmin_;
    c.wmax_ = wmax_;
    c.steps_ = steps_;
    c.history_mark_ = ws_.size();
    return c;
  }

  void restore(const AdaptiveChordal& c) {
    sys_ = c.sys_;
    pts_ = c.pts_;
    ipts_ = c.ipts_;
    t_ = c.t_;
    wmin_ = c.wmin_;
    wmax_ = c.wmax_;
    steps_ = c.steps_;
    ws_.resize(c.history_mark_);
    dts_.resize(c.history_mark_);
  }

  AdaptiveChordal(const detail::ForceSystem& sys, const CounterRng& gen) : sys_(sys), gen_(gen), keep_history_(false) {}

  struct Point {
    double g;
    double log_dg;
    bool alive;
  };
  struct Interior {
    cplx g;
    cplx dg;
    bool alive;
  };

  detail::ForceSystem sys_;
  CounterRng gen_;
  bool keep_history_;
  double bessel_factor_ = std::numeric_limits<double>::infinity();
  std::vector<Point> pts_;
  std::vector<Interior> ipts_;
  std::vector<double> ws_, dts_;
  double t_ = 0.0;
  double wmin_ = 0.0, wmax_ = 0.0;
  std::size_t steps_ = 0;
  std::size_t history_mark_ = 0;
};

// Tracks whether the tip has left the disk of radius r, skipping the O(n) tip
// composition while the hull enclosure is still inside the disk and
// thinning the checks geometrically afterwards.
class ExitMonitor {
 public:
  explicit ExitMonitor(double r, std::size_t max_checks_per_doubling = 16)
      : r_(r), per_doubling_(max_checks_per_doubling) {}

  // `force` bypasses the thinning, e.g. right before an event is recorded.
  bool exited(const AdaptiveChordal& eng, bool force = false) {
    if (eng.hull_bound() < r_) return false;
    const std::size_t n = eng.steps();
    if (!force && n < next_check_) return false;
    next_check_ = n + std::max<std::size_t>(1, n / per_doubling_);
    return std::abs(eng.tip()) >= r_;
  }

 private:
  double r_;
  std::size_t per_doubling_;
  std::size_t next_check_ = 0;
};

}  // namespace sle
