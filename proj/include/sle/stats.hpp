#pragma once
// Small statistics kit: compensated accumulation, Monte-Carlo estimates,
// log-log regression, KS and chi-square goodness of fit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "sle/error.hpp"

namespace sle {

// Neumaier summation; the result is independent of how replicas were scheduled
// as long as values are added in a fixed order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string config_echo;
};

inline McEstimate bernoulli_estimate(std::size_t hits, std::size_t n) {
  require(n > 0, "bernoulli_estimate: need at least one sample");
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(n)), n, 0, {}};
}

inline McEstimate mean_estimate(std::span<const double> xs) {
  require(xs.size() > 1, "mean_estimate: need at least two samples");
  CompensatedSum s, s2;
  for (double x : xs) s.add(x);
  const double m = s.value() / static_cast<double>(xs.size());
  for (double x : xs) s2.add((x - m) * (x - m));
  const double var = s2.value() / static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(xs.size())), xs.size(), 0, {}};
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double confidence_halfwidth = 0.0;  // 95%
  std::vector<std::pair<double, double>> points;  // (log x, log y) actually used
  std::vector<std::string> warnings;
};

// Weighted least squares y = a + b x with known per-point variances; if
// `variances` is empty an ordinary fit is done and the slope error comes from
// the residuals.
inline SlopeFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                                  std::span<const double> variances) {
  const std::size_t n = x.size();
  require(n >= 3 && y.size() == n, "line fit: need at least three points");
  const bool weighted = !variances.empty();
  std::vector<double> w(n, 1.0);
  if (weighted)
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(variances[i], 1e-300);
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0, "line fit: abscissae are all equal");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double se;
  if (weighted) {
    se = std::sqrt(1.0 / sxx);
  } else {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  f.confidence_halfwidth = 1.959963984540054 * se;
  for (std::size_t i = 0; i < n; ++i) f.points.emplace_back(x[i], y[i]);
  return f;
}

enum class FitWeighting { inverse_variance, uniform };

// Slope of log p against log eps.  Points with p = 0 are dropped with a warning.
inline SlopeFit fit_exponent(std::span<const std::pair<double, McEstimate>> pts,
                             FitWeighting weighting = FitWeighting::inverse_variance) {
  std::vector<double> x, y, v;
  std::vector<std::string> warnings;
  for (const auto& [eps, est] : pts) {
    if (!(est.value > 0)) {
      warnings.push_back("dropped eps=" + std::to_string(eps) + " (zero estimate)");
      continue;
    }
    x.push_back(std::log(eps));
    y.push_back(std::log(est.value));
    const double rel = est.std_error / est.value;
    v.push_back(std::max(rel * rel, 1e-30));
  }
  require(x.size() >= 3, "fit_exponent: fewer than three usable points");
  if (weighting == FitWeighting::uniform) {
    // Known variances still set the error bar; only the estimator changes.
    SlopeFit f = weighted_line_fit(x, y, {});
    double mx = 0;
    for (double xi : x) mx += xi;
    mx /= static_cast<double>(x.size());
    double sxx = 0, num = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      num += (x[i] - mx) * (x[i] - mx) * v[i];
    }
    f.confidence_halfwidth = 1.959963984540054 * std::sqrt(num) / sxx;
    f.warnings = std::move(warnings);
    return f;
  }
  SlopeFit f = weighted_line_fit(x, y, v);
  f.warnings = std::move(warnings);
  return f;
}

// ---------------------------------------------------------------------------
// Goodness of fit.

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

inline KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  require(!a.empty(), "ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sq = std::sqrt(n);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

struct ChiSquareResult {
  double statistic;
  int dof;
  double p_value;
};

inline ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected) {
  require(observed.size() == expected.size() && observed.size() >= 2, "chi_square_gof: bin mismatch");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    require(expected[i] > 0, "chi_square_gof: expected count must be positive");
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  const int dof = static_cast<int>(observed.size()) - 1;
  boost::math::chi_squared dist(dof);
  return {stat, dof, boost::math::cdf(boost::math::complement(dist, stat))};
}

}  // namespace sle
