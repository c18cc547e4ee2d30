#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "droplet/errors.hpp"

namespace droplet {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  /// Standard error of the slope; absent with fewer than three points.
  std::optional<double> slope_stderr;
  double max_residual = 0.0;  ///< max of y - fitted (signed, upper side)
  double max_abs_residual = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("fit_line: need at least two (x, y) pairs");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  f.max_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rss += r * r;
    f.max_residual = std::max(f.max_residual, r);
    f.max_abs_residual = std::max(f.max_abs_residual, std::abs(r));
  }
  if (n > 2) f.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  return f;
}

struct DecayPoint {
  double distance;
  double value;
};

/// Envelope value ~ c * exp(-mu * distance) fitted on the log scale.
struct ExponentialFit {
  double c = 0.0;
  double mu = 0.0;
  /// max over points of ln(value) - (ln c - mu * distance).
  double max_violation = 0.0;
  std::optional<double> mu_stderr;
  std::size_t points_used = 0;

  bool decays() const { return mu > 0.0; }
};

inline constexpr double kFitValueFloor = 1e-300;

inline ExponentialFit fit_exponential_envelope(std::span<const DecayPoint> points) {
  std::vector<double> x, y;
  std::set<double> distinct;
  for (const auto& p : points) {
    if (p.value > kFitValueFloor && std::isfinite(p.value)) {
      x.push_back(p.distance);
      y.push_back(std::log(p.value));
      distinct.insert(p.distance);
    }
  }
  if (distinct.size() < 3) {
    throw DomainError("fit_exponential_envelope: need >= 3 positive points at distinct distances, got " +
                      std::to_string(distinct.size()));
  }
  const LineFit line = fit_line(x, y);
  ExponentialFit f;
  f.c = std::exp(line.intercept);
  f.mu = -line.slope;
  f.max_violation = line.max_residual;
  f.mu_stderr = line.slope_stderr;
  f.points_used = x.size();
  return f;
}

/// Upper envelope max value per integer distance, sorted by distance.
inline std::vector<DecayPoint> envelope_by_distance(std::span<const DecayPoint> points) {
  std::vector<DecayPoint> out;
  std::vector<DecayPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.distance < b.distance; });
  for (const auto& p : sorted) {
    if (!out.empty() && out.back().distance == p.distance) {
      out.back().value = std::max(out.back().value, p.value);
    } else {
      out.push_back(p);
    }
  }
  return out;
}

/// S(s) ~ scale * ln(offset + rate * s) with scale, offset, rate > 0.
struct ConcaveLogFit {
  double scale = 0.0;
  double offset = 1.0;
  double rate = 0.0;
  double max_abs_residual = 0.0;

  double operator()(double s) const { return scale * std::log(offset + rate * s); }
};

/// Least-squares fit of y ~ A + C ln(1 + r s) over a log grid in r, then
/// scale = C, offset = exp(A / C), rate = r * offset. Requires C > 0.
inline ConcaveLogFit fit_concave_log(std::span<const double> s, std::span<const double> y) {
  if (s.size() < 3 || s.size() != y.size()) throw DomainError("fit_concave_log: need >= 3 points");
  ConcaveLogFit best;
  double best_rss = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int g = 0; g <= 1200; ++g) {
    const double r = std::pow(10.0, -4.0 + 8.0 * g / 1200.0);
    std::vector<double> u(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) u[i] = std::log1p(r * s[i]);
    LineFit line;
    try {
      line = fit_line(u, y);
    } catch (const DomainError&) {
      continue;
    }
    if (!(line.slope > 0.0)) continue;
    double rss = 0, worst = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double res = y[i] - (line.intercept + line.slope * u[i]);
      rss += res * res;
      worst = std::max(worst, std::abs(res));
    }
    if (rss < best_rss) {
      best_rss = rss;
      found = true;
      best.scale = line.slope;
      best.offset = std::exp(line.intercept / line.slope);
      best.rate = r * best.offset;
      best.max_abs_residual = worst;
    }
  }
  if (!found) throw DomainError("fit_concave_log: data admit no increasing concave-log fit");
  return best;
}

}  // namespace droplet
