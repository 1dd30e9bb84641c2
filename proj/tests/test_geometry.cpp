#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sle/driving.hpp"
#include "sle/geometry.hpp"

using namespace sle;

namespace {

std::vector<cplx> polyline(std::initializer_list<cplx> pts) { return {pts}; }

// Figure eight: out along the bottom, a big loop, back through the start
// cell region, and away.  The crossing cell (2,2) at eps = 1 is visited twice
// with a long excursion in between.
std::vector<cplx> figure_eight() {
  return polyline({{0.5, 2.5}, {2.5, 2.5}, {6.5, 2.5}, {6.5, 6.5}, {2.5, 6.5}, {2.5, 2.5}, {2.5, -1.5}});
}

std::size_t visits(const GridOccupancy& occ) {
  std::size_t n = 0;
  for (const auto& [c, iv] : occ.cells) n += iv.size();
  return n;
}

}  // namespace

TEST(Occupancy, VerticalSegment) {
  const auto pts = polyline({{0.5, 0.0}, {0.5, 2.0}});
  const auto occ = build_occupancy(std::span<const cplx>(pts), 1.0);
  ASSERT_EQ(occ.cells.size(), 2u);
  EXPECT_EQ(occ.cells.at(Cell{0, 0}).size(), 1u);
  EXPECT_EQ(occ.cells.at(Cell{0, 1}).size(), 1u);
}

TEST(Occupancy, SegmentOnGridLine) {
  const auto pts = polyline({{0.0, 0.0}, {0.0, 2.0}});
  const auto occ = build_occupancy(std::span<const cplx>(pts), 1.0);
  EXPECT_EQ(occ.cells.size(), 2u);
  EXPECT_TRUE(occ.cells.contains(Cell{0, 0}));
  EXPECT_TRUE(occ.cells.contains(Cell{0, 1}));
}

// Unit square traversed from an interior point of its bottom edge, offset so
// the edges run through cell interiors: 8 boundary cells, one visit each.
TEST(Occupancy, ClosedSquare) {
  const double o = 0.25;
  const auto pts = polyline({{0.5 + o, o}, {1 + o, o}, {1 + o, 1 + o}, {o, 1 + o}, {o, o}, {0.5 + o - 1e-9, o}});
  const auto occ = build_occupancy(std::span<const cplx>(pts), 0.5);
  EXPECT_EQ(occ.cells.size(), 8u);
  std::size_t twice = 0;
  for (const auto& [c, iv] : occ.cells) twice += iv.size() > 1;
  EXPECT_EQ(twice, 1u);  // the start cell is re-entered at the end
  EXPECT_EQ(visits(occ), 9u);
}

TEST(Occupancy, Empty) {
  const std::vector<cplx> none;
  const auto occ = build_occupancy(std::span<const cplx>(none), 0.1);
  EXPECT_TRUE(occ.empty());
  EXPECT_TRUE(occ.cells.empty());
  EXPECT_TRUE(classify_cells(occ, 1).doubles.empty());
}

TEST(Occupancy, EveryPointInExactlyOneInterval) {
  const auto pts = figure_eight();
  const auto occ = build_occupancy(std::span<const cplx>(pts), 0.7);
  std::vector<int> hit(occ.size(), 0);
  for (const auto& [c, iv] : occ.cells) {
    for (std::size_t k = 0; k < iv.size(); ++k) {
      if (k > 0) EXPECT_GT(iv[k].entry, iv[k - 1].exit + 1);
      for (std::size_t i = iv[k].entry; i <= iv[k].exit; ++i) {
        ++hit[i];
        EXPECT_EQ(occ.path[i], c);
      }
    }
  }
  for (int h : hit) EXPECT_EQ(h, 1);
}

TEST(Occupancy, ResamplingLimits) {
  const auto pts = polyline({{0, 0}, {1, 0}});
  const auto occ = build_occupancy(std::span<const cplx>(pts), 0.4);
  EXPECT_LE(max_segment_length(occ.points), 0.1 + 1e-12);
  EXPECT_EQ(occ.source_index.front(), 0u);
  EXPECT_EQ(occ.source_index.back(), 1u);
  EXPECT_THROW(build_occupancy(std::span<const cplx>(pts), 0.4, false), DomainError);
  EXPECT_THROW(resample_polyline(pts, 1e-9, nullptr, 1000), DomainError);
}

TEST(Occupancy, ResolutionStable) {
  // Halving the input spacing changes cell counts by at most 2%.
  std::vector<cplx> coarse, fine;
  for (int i = 0; i <= 2000; ++i) {
    const double t = 2 * std::numbers::pi * i / 2000;
    fine.emplace_back(std::cos(3 * t) + 0.3 * std::cos(t), std::sin(2 * t) + 0.3 * std::sin(5 * t));
    if (i % 2 == 0) coarse.push_back(fine.back());
  }
  const double eps = 0.05;
  const auto a = build_occupancy(std::span<const cplx>(coarse), eps), b = build_occupancy(std::span<const cplx>(fine), eps);
  const double na = static_cast<double>(a.cells.size()), nb = static_cast<double>(b.cells.size());
  EXPECT_LE(std::abs(na - nb) / nb, 0.02);
}

TEST(Classification, SimplePolylineHasNoDoubles) {
  std::vector<cplx> pts;
  for (int i = 0; i <= 100; ++i) pts.emplace_back(0.1 * i, std::sin(0.1 * i));
  const auto occ = build_occupancy(std::span<const cplx>(pts), 0.2);
  const auto cl = classify_cells(occ, 1);
  EXPECT_TRUE(cl.doubles.empty());
  EXPECT_TRUE(cl.non_cut_spans.empty());
}

TEST(Classification, SimplePolylineInteriorCellsAreCut) {
  std::vector<cplx> pts;
  for (int i = 0; i <= 100; ++i) pts.emplace_back(0.1 * i + 0.05, 0.05);
  const auto occ = build_occupancy(std::span<const cplx>(pts), 1.0);
  const auto cl = classify_cells(occ, 3);
  // Cells 0..9 along the line; the ends within `gap` indices are excluded.
  EXPECT_EQ(cl.cut_cells.size(), 10u);
  EXPECT_TRUE(cl.cut_cells.contains(Cell{5, 0}));
}

TEST(Classification, FigureEightCrossingCell) {
  const auto pts = figure_eight();
  const auto occ = build_occupancy(std::span<const cplx>(pts), 1.0);
  const auto doubles = classify_double_cells(occ, 2);
  ASSERT_EQ(doubles.size(), 1u);
  EXPECT_EQ(*doubles.begin(), (Cell{2, 2}));
}

TEST(Classification, FigureEightLoopExcludedFromCuts) {
  // Tails keep the probe cells more than `gap` source indices from the ends.
  const auto pts = polyline({{-4.5, 2.5}, {-2.5, 2.5}, {0.5, 2.5}, {2.5, 2.5}, {6.5, 2.5}, {6.5, 6.5}, {2.5, 6.5},
                             {2.5, 2.5}, {2.5, -1.5}, {2.5, -3.5}, {2.5, -5.5}});
  const auto occ = build_occupancy(std::span<const cplx>(pts), 1.0);
  const auto cl = classify_cells(occ, 2);
  EXPECT_EQ(cl.doubles, (std::set<Cell>{{2, 2}}));
  for (int x = 3; x <= 6; ++x) EXPECT_FALSE(cl.cut_cells.contains(Cell{x, 6})) << x;
  for (int y = 3; y <= 6; ++y) EXPECT_FALSE(cl.cut_cells.contains(Cell{6, y})) << y;
  EXPECT_FALSE(cl.cut_cells.contains(Cell{2, 2}));
  EXPECT_TRUE(cl.cut_cells.contains(Cell{1, 2}));
  EXPECT_TRUE(cl.cut_cells.contains(Cell{2, 0}));
}

TEST(Classification, SpanAlgebraCoversIndices) {
  const auto pts = figure_eight();
  const auto occ = build_occupancy(std::span<const cplx>(pts), 0.5);
  const std::size_t gap = 2;
  const auto cl = classify_cells(occ, gap);
  const std::size_t len = trace_length(occ);
  // Every index away from the ends is either inside a non-cut span or its
  // cell is a cut cell or a double cell, never more than one span.
  for (std::size_t i = 0; i < occ.size(); ++i) {
    const auto s = occ.source_index[i];
    if (s < gap || s >= len - gap) continue;
    int spans = 0;
    for (const auto& [a, b] : cl.non_cut_spans) spans += a <= i && i < b;
    ASSERT_LE(spans, 1);
    if (spans == 0) EXPECT_TRUE(cl.cut_cells.contains(occ.path[i]) || cl.doubles.contains(occ.path[i]));
  }
  for (std::size_t k = 1; k < cl.non_cut_spans.size(); ++k)
    EXPECT_GT(cl.non_cut_spans[k].first, cl.non_cut_spans[k - 1].second);
}

TEST(Classification, JitterDoesNotCount) {
  // Back-and-forth within one block never leaves the 5x5 neighbourhood.
  std::vector<cplx> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(0.5 + 0.6 * (i % 2), 0.5);
  const auto occ = build_occupancy(std::span<const cplx>(pts), 1.0);
  EXPECT_TRUE(classify_double_cells(occ, 1).empty());
}

TEST(Classification, DisjointOnSleTraces) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    SleParams p;
    p.kappa = 6;
    const auto tr = compute_trace(sample_chordal_driving(p, 0.5, 1e-3, {30, s}));
    const auto occ = build_occupancy(tr, 0.05);
    const auto cl = classify_cells(occ, default_gap(occ));
    for (const auto& c : cl.cut_cells) EXPECT_FALSE(cl.doubles.contains(c));
  }
}

TEST(Classification, SimpleCurveDoublesVanish) {
  // kappa = 2 traces are simple: double-cell counts do not grow as eps shrinks.
  std::vector<double> counts;
  for (double eps : {0.1, 0.05, 0.025}) {
    double total = 0;
    for (std::uint64_t s = 0; s < 4; ++s) {
      SleParams p;
      p.kappa = 2;
      const auto tr = compute_trace(sample_chordal_driving(p, 1, 1e-3, {31, s}));
      const auto occ = build_occupancy(tr, eps);
      total += static_cast<double>(classify_double_cells(occ, default_gap(occ)).size());
    }
    counts.push_back(total);
  }
  EXPECT_LE(counts[2], counts[0] + 1);
}

TEST(Window, ContainsAndCount) {
  const Window w{0, 1, 0, 1};
  EXPECT_TRUE(w.contains({0, 0}, 0.5));
  EXPECT_TRUE(w.contains({1, 1}, 0.5));
  EXPECT_FALSE(w.contains({2, 0}, 0.5));
  EXPECT_FALSE(w.contains({-1, 0}, 0.5));
  EXPECT_EQ(count_in_window({{0, 0}, {1, 1}, {5, 5}}, 0.5, w), 2u);
}

TEST(BoundaryProximity, ZeroDriving) {
  DrivingPath d;
  d.dt = 1e-3;
  d.w.assign(1001, 0.0);
  const std::vector<double> xs{0.05, 0.1, 0.5, 1.0};
  EXPECT_NEAR(boundary_proximity_minimum(d, 0.5), 0.5, 1e-12);
  const auto flags = boundary_proximity_profile(d, xs, 0.2);
  EXPECT_EQ(flags, (std::vector<bool>{true, true, false, false}));
  EXPECT_EQ(boundary_proximity_profile(d, xs, 2.0), (std::vector<bool>(4, true)));
}

TEST(BoundaryProximity, MonotoneInEps) {
  SleParams p;
  p.kappa = 6;
  const auto d = sample_chordal_driving(p, 2, 1e-3, {32, 0});
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(1 + 0.02 * i);
  const auto a = boundary_proximity_profile(d, xs, 0.05), b = boundary_proximity_profile(d, xs, 0.1);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_LE(a[i], b[i]);
}

// Koebe: the proxy is comparable to the distance from x to the trace.
TEST(BoundaryProximity, KoebeBracket) {
  SleParams p;
  p.kappa = 3;
  int ok = 0, total = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto d = sample_chordal_driving(p, 1, 1e-4, {33, s});
    const auto tr = compute_trace(d, 4);
    for (double x : {1.2, 1.5, 2.0}) {
      const double proxy = boundary_proximity_minimum(d, x);
      const double dist = polyline_distance(x, tr.points);
      const double slack = 4 * std::sqrt(d.dt) * 4;  // polyline spacing
      ++total;
      ok += proxy <= 4 * dist + slack && dist <= 4 * proxy + slack;
    }
  }
  EXPECT_EQ(ok, total);
}

TEST(Brownian, SegmentDistance) {
  EXPECT_NEAR(segment_distance({0.5, 1}, 0, 1), 1.0, 1e-15);
  EXPECT_NEAR(segment_distance({2, 0}, 0, 1), 1.0, 1e-15);
  EXPECT_NEAR(segment_distance({0, 0}, {1, 1}, {1, 1}), std::sqrt(2.0), 1e-15);
}

TEST(Brownian, StartOnCurveNeverAvoids) {
  const std::vector<cplx> slit{{0, 0}, {1, 0}};
  EXPECT_EQ(brownian_avoidance_probability(0.0, slit, 50, 1e-3, {1, 0}).value, 0.0);
  EXPECT_EQ(brownian_avoidance_probability({0.5, 0}, slit, 50, 1e-3, {1, 0}).value, 0.0);
}

TEST(Brownian, SlitOracle) {
  // P[avoid [0,1]] from -x in the unit disk is (4/pi) atan(sqrt(x)).
  const std::vector<cplx> slit{{0, 0}, {1, 0}};
  const double x = 0.3;
  const auto est = brownian_avoidance_probability(-x, slit, 20000, 1e-4, {2, 0});
  EXPECT_NEAR(est.value, 4 / std::numbers::pi * std::atan(std::sqrt(x)), 4 * est.std_error + 0.01);
}
