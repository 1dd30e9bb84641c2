#pragma once
// Grid-occupancy analysis of traces and Brownian utilities.
//
// Rasterization: the polyline is first resampled so that no segment exceeds
// eps/4.  Point n is then assigned to the cell containing the midpoint of its
// outgoing segment (the last point uses its incoming segment), so every point
// lands in exactly one cell and a segment lying on a grid line is charged to
// the cell it runs along.

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "sle/error.hpp"
#include "sle/loewner.hpp"
#include "sle/parallel.hpp"
#include "sle/rng.hpp"
#include "sle/stats.hpp"

namespace sle {

struct Cell {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  auto operator<=>(const Cell&) const = default;
};

// Inclusive range of resampled point indices.
struct VisitInterval {
  std::size_t entry = 0;
  std::size_t exit = 0;
};

struct GridOccupancy {
  double cell_size = 0.0;
  std::map<Cell, std::vector<VisitInterval>> cells;
  std::vector<cplx> points;               // resampled polyline
  std::vector<Cell> path;                 // cell of every resampled point
  std::vector<std::size_t> source_index;  // trace index each resampled point came from

  std::size_t size() const { return path.size(); }
  bool empty() const { return path.empty(); }
};

inline Cell cell_of(cplx p, double eps) {
  return {static_cast<std::int64_t>(std::floor(p.real() / eps)), static_cast<std::int64_t>(std::floor(p.imag() / eps))};
}

// Inserts equally spaced points so that no segment is longer than max_segment.
inline std::vector<cplx> resample_polyline(std::span<const cplx> pts, double max_segment,
                                           std::vector<std::size_t>* source = nullptr,
                                           std::size_t max_points = 200'000'000) {
  require(max_segment > 0, "resample_polyline: max_segment must be positive");
  std::vector<cplx> out;
  if (source) source->clear();
  if (pts.empty()) return out;
  std::size_t total = 1;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    total += std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(pts[k + 1] - pts[k]) / max_segment)));
  if (total > max_points)
    throw DomainError("resample_polyline: trace too coarse for this cell size; supply a denser trace");
  out.reserve(total);
  if (source) source->reserve(total);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(pts[k + 1] - pts[k]) / max_segment)));
    for (std::size_t j = 0; j < m; ++j) {
      out.push_back(pts[k] + (static_cast<double>(j) / static_cast<double>(m)) * (pts[k + 1] - pts[k]));
      if (source) source->push_back(k);
    }
  }
  out.push_back(pts.back());
  if (source) source->push_back(pts.size() - 1);
  return out;
}

inline double max_segment_length(std::span<const cplx> pts) {
  double m = 0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) m = std::max(m, std::abs(pts[k + 1] - pts[k]));
  return m;
}

// With resample = false a polyline coarser than eps/4 is rejected instead.
inline GridOccupancy build_occupancy(std::span<const cplx> pts, double eps, bool resample = true) {
  require(eps > 0, "build_occupancy: eps must be positive");
  GridOccupancy occ;
  occ.cell_size = eps;
  if (pts.empty()) return occ;
  if (resample) {
    occ.points = resample_polyline(pts, eps / 4, &occ.source_index);
  } else {
    if (max_segment_length(pts) > eps / 4 * (1 + 1e-12))
      throw DomainError("build_occupancy: polyline resolution exceeds eps/4; supply a denser trace");
    occ.points.assign(pts.begin(), pts.end());
    occ.source_index.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) occ.source_index[i] = i;
  }
  const std::size_t n = occ.points.size();
  occ.path.resize(n);
  if (n == 1) {
    occ.path[0] = cell_of(occ.points[0], eps);
  } else {
    for (std::size_t i = 0; i + 1 < n; ++i) occ.path[i] = cell_of(0.5 * (occ.points[i] + occ.points[i + 1]), eps);
    occ.path[n - 1] = occ.path[n - 2];
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = occ.cells[occ.path[i]];
    if (!v.empty() && v.back().exit + 1 == i)
      v.back().exit = i;
    else
      v.push_back({i, i});
  }
  return occ;
}

inline GridOccupancy build_occupancy(const Trace& tr, double eps, bool resample = true) {
  return build_occupancy(std::span<const cplx>(tr.points), eps, resample);
}

namespace detail {

// Range extent (min/max cell coordinates) over index ranges of the path.
class PathExtent {
 public:
  explicit PathExtent(const std::vector<Cell>& path) : n_(path.size()), t_(2 * std::max<std::size_t>(1, path.size())) {
    for (std::size_t i = 0; i < n_; ++i) t_[n_ + i] = {path[i].ix, path[i].ix, path[i].iy, path[i].iy};
    for (std::size_t i = n_; i-- > 1;) t_[i] = join(t_[2 * i], t_[2 * i + 1]);
  }

  // True if some index in [lo, hi) lies outside the block of radius r about c.
  bool leaves(std::size_t lo, std::size_t hi, Cell c, std::int64_t r) const {
    Box b = empty_box();
    for (lo += n_, hi += n_; lo < hi; lo >>= 1, hi >>= 1) {
      if (lo & 1) b = join(b, t_[lo++]);
      if (hi & 1) b = join(b, t_[--hi]);
    }
    return b.x0 < c.ix - r || b.x1 > c.ix + r || b.y0 < c.iy - r || b.y1 > c.iy + r;
  }

 private:
  struct Box {
    std::int64_t x0, x1, y0, y1;
  };
  static Box empty_box() {
    constexpr auto lo = std::numeric_limits<std::int64_t>::min(), hi = std::numeric_limits<std::int64_t>::max();
    return {hi, lo, hi, lo};
  }
  static Box join(const Box& a, const Box& b) {
    return {std::min(a.x0, b.x0), std::max(a.x1, b.x1), std::min(a.y0, b.y0), std::max(a.y1, b.y1)};
  }
  std::size_t n_;
  std::vector<Box> t_;
};

}  // namespace detail

struct CellClassification {
  std::set<Cell> doubles;
  std::set<Cell> cut_cells;
  std::size_t gap_parameter = 0;
  int neighborhood_radius = 2;
  // Merged open index spans (exit(I1), entry(I2)) of all double pairs, stored
  // as half-open [first, last) ranges of indices strictly inside them.
  std::vector<std::pair<std::size_t, std::size_t>> non_cut_spans;
};

// Gaps are measured in indices of the original trace, so resampling at finer
// cell sizes does not change which loops count.
inline std::size_t trace_length(const GridOccupancy& occ) { return occ.empty() ? 0 : occ.source_index.back() + 1; }

inline std::size_t default_gap(const GridOccupancy& occ) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.01 * static_cast<double>(trace_length(occ)))));
}

inline CellClassification classify_cells(const GridOccupancy& occ, std::size_t gap, int neighborhood_radius = 2) {
  require(gap >= 1, "classify_cells: gap must be at least 1");
  require(neighborhood_radius >= 0, "classify_cells: neighborhood radius must be nonnegative");
  CellClassification out;
  out.gap_parameter = gap;
  out.neighborhood_radius = neighborhood_radius;
  if (occ.empty()) return out;
  const detail::PathExtent extent(occ.path);
  const auto& src = occ.source_index;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& [cell, iv] : occ.cells) {
    bool is_double = false;
    for (std::size_t a = 0; a < iv.size(); ++a) {
      for (std::size_t b = a + 1; b < iv.size(); ++b) {
        if (src[iv[b].entry] - src[iv[a].exit] < gap) continue;
        if (!extent.leaves(iv[a].exit + 1, iv[b].entry, cell, neighborhood_radius)) continue;
        is_double = true;
        spans.emplace_back(iv[a].exit + 1, iv[b].entry);
      }
    }
    if (is_double) out.doubles.insert(cell);
  }
  std::sort(spans.begin(), spans.end());
  for (const auto& s : spans) {
    if (!out.non_cut_spans.empty() && s.first <= out.non_cut_spans.back().second)
      out.non_cut_spans.back().second = std::max(out.non_cut_spans.back().second, s.second);
    else
      out.non_cut_spans.push_back(s);
  }
  // Walk the indices outside the spans and away from both ends.
  const std::size_t n = occ.size(), len = trace_length(occ);
  if (len <= 2 * gap) return out;
  std::size_t i = 0, k = 0;
  while (i < n && src[i] < gap) ++i;
  while (i < n && src[i] < len - gap) {
    while (k < out.non_cut_spans.size() && out.non_cut_spans[k].second <= i) ++k;
    if (k < out.non_cut_spans.size() && out.non_cut_spans[k].first <= i) {
      i = out.non_cut_spans[k].second;
      continue;
    }
    if (!out.doubles.contains(occ.path[i])) out.cut_cells.insert(occ.path[i]);
    ++i;
  }
  return out;
}

inline std::set<Cell> classify_double_cells(const GridOccupancy& occ, std::size_t gap, int neighborhood_radius = 2) {
  return classify_cells(occ, gap, neighborhood_radius).doubles;
}

inline std::set<Cell> classify_cut_cells(const GridOccupancy& occ, std::size_t gap, int neighborhood_radius = 2) {
  return classify_cells(occ, gap, neighborhood_radius).cut_cells;
}

// Cells whose square [ix eps, (ix+1) eps) x [iy eps, (iy+1) eps) lies in the
// window [x0, x1] x [y0, y1].
struct Window {
  double x0, x1, y0, y1;
  bool contains(Cell c, double eps) const {
    const double a = static_cast<double>(c.ix) * eps, b = static_cast<double>(c.iy) * eps;
    return a >= x0 && a + eps <= x1 && b >= y0 && b + eps <= y1;
  }
};

inline std::size_t count_in_window(const std::set<Cell>& cells, double eps, const Window& w) {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [&](Cell c) { return w.contains(c, eps); }));
}

// ---------------------------------------------------------------------------
// Boundary proximity without a trace.

// Running minimum of |g_t(x) - W_t| / g_t'(x) before x is swallowed.
inline double boundary_proximity_minimum(const DrivingPath& d, double x) {
  require(!d.w.empty(), "boundary_proximity: empty driving path");
  const double side = x - d.w[0];
  require(side != 0, "boundary_proximity: x must lie off the hull base");
  double g = x, dg = 1.0, best = std::abs(side);
  for (std::size_t k = 0; k + 1 < d.w.size(); ++k) {
    const double X = g - d.w[k];
    const double r = std::sqrt(X * X + 4 * d.dt);
    g = d.w[k] + std::copysign(r, X);
    dg *= std::abs(X) / r;
    const double Xn = g - d.w[k + 1];
    if (Xn == 0 || (Xn > 0) != (side > 0)) break;
    best = std::min(best, std::abs(Xn) / dg);
  }
  return best;
}

inline std::vector<bool> boundary_proximity_profile(const DrivingPath& d, std::span<const double> xs, double eps) {
  require(eps > 0, "boundary_proximity_profile: eps must be positive");
  std::vector<bool> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = boundary_proximity_minimum(d, xs[i]) <= eps;
  return out;
}

// ---------------------------------------------------------------------------
// Brownian motion in the unit disk.

inline double segment_distance(cplx p, cplx a, cplx b) {
  const cplx d = b - a;
  const double L = std::norm(d);
  if (L == 0) return std::abs(p - a);
  const double u = std::clamp(((p - a) * std::conj(d)).real() / L, 0.0, 1.0);
  return std::abs(p - (a + u * d));
}

inline double polyline_distance(cplx p, std::span<const cplx> curve) {
  if (curve.size() == 1) return std::abs(p - curve[0]);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) m = std::min(m, segment_distance(p, curve[k], curve[k + 1]));
  return m;
}

// P[BM from z leaves the unit disk before touching the curve], by
// walk-on-spheres: each move jumps to a uniform point on the largest circle
// about the current position that avoids the curve and the unit circle.  A
// walker within `step` of the curve counts as a hit, within `step` of the
// unit circle as an exit.
inline McEstimate brownian_avoidance_probability(cplx z, std::span<const cplx> curve, std::size_t samples,
                                                 double step, RngSpec rng, unsigned threads = 1) {
  require(std::abs(z) < 1, "brownian_avoidance_probability: z must lie in the unit disk");
  require(!curve.empty(), "brownian_avoidance_probability: empty curve");
  require(samples >= 1 && step > 0 && step < 0.5, "brownian_avoidance_probability: bad sample count or step");
  std::vector<char> avoided(samples, 0);
  parallel_for(samples, threads, [&](std::size_t i) {
    CounterRng gen({rng.seed, rng.stream + i});
    cplx p = z;
    for (std::size_t moves = 0; moves < 100'000'000; ++moves) {
      const double dc = polyline_distance(p, curve);
      if (dc <= step) return;
      const double de = 1 - std::abs(p);
      if (de <= step) {
        avoided[i] = 1;
        return;
      }
      const double r = std::min(dc, de);
      p += std::polar(r, 2 * std::numbers::pi * gen.uniform());
    }
    throw SolverError("brownian_avoidance_probability: walk did not terminate", i);
  });
  const auto hits = static_cast<std::size_t>(std::count(avoided.begin(), avoided.end(), 1));
  auto est = bernoulli_estimate(hits, samples);
  est.seed = rng.seed;
  return est;
}

}  // namespace sle
