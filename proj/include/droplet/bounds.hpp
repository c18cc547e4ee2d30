#pragma once

// Summability constants for exponentially weighted configuration sums and
// their brute-force verification on finite windows of Z.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "droplet/configspace.hpp"
#include "droplet/errors.hpp"

namespace droplet {

struct ConstantValue {
  double value = 0.0;
  int terms = 0;              ///< product factors kept
  double truncation_bound = 0.0;  ///< absolute bound on value(untruncated) - value
};

/// (1 / (1 - e^{-mu})) * (prod_{k >= 1} 1 / (1 - e^{-k mu}))^2.
inline ConstantValue c_infinity(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("c_infinity: mu must be positive, got " + std::to_string(mu));
  const double q = std::exp(-mu);
  double log_prod = 0.0;
  int k = 1;
  double qk = q;
  for (; qk >= 1e-15; ++k, qk *= q) log_prod -= std::log1p(-qk);
  ConstantValue c;
  c.terms = k - 1;
  c.value = std::exp(2.0 * log_prod) / (-std::expm1(-mu));
  // -ln(1 - t) <= t / (1 - t) and sum_{j >= k} q^j = q^k / (1 - q).
  const double tail_log = qk / ((1.0 - q) * (1.0 - qk));
  c.truncation_bound = c.value * std::expm1(2.0 * tail_log);
  return c;
}

/// 2 C_inf(mu / 3) (s + coth(mu / 6)).
inline double c1(int s, double mu) {
  if (s < 1) throw DomainError("c1: s must be >= 1");
  return 2.0 * c_infinity(mu / 3.0).value * (s + 1.0 / std::tanh(mu / 6.0));
}

/// 2 C_inf(mu / 2) / (1 - e^{-mu / 2}).
inline double c2(double mu) { return 2.0 * c_infinity(mu / 2.0).value / (-std::expm1(-mu / 2.0)); }

struct LemmaCheck {
  double lhs = 0.0;
  double bound = 0.0;
  int window = 0;             ///< truncation parameter used for lhs
  double doubling_change = 0.0;  ///< |lhs(2 window) - lhs(window)| / lhs
  bool holds = false;         ///< lhs <= bound (1 + 1e-9)
};

inline constexpr double kBoundSlack = 1e-9;
inline constexpr double kDoublingTolerance = 1e-10;

namespace detail {

inline void check_lemma_inputs(double mu, int n, const char* where) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError(std::string(where) + ": mu must be positive");
  if (n < 1) throw DomainError(std::string(where) + ": n must be >= 1");
}

template <typename Sum>
LemmaCheck with_doubling(Sum sum, int window, double bound, const char* where) {
  LemmaCheck r;
  r.window = window;
  r.lhs = sum(window);
  const double doubled = sum(2 * window);
  r.doubling_change = std::abs(doubled - r.lhs) / r.lhs;
  if (r.doubling_change >= kDoublingTolerance) {
    throw ResourceError(std::string(where) + ": window " + std::to_string(window) +
                        " is not converged (doubling changes the sum by " + std::to_string(r.doubling_change) +
                        "); use a larger window");
  }
  r.bound = bound;
  r.holds = r.lhs <= bound * (1.0 + kBoundSlack);
  return r;
}

inline int default_window(double mu, int n) { return static_cast<int>(std::ceil(40.0 / mu)) + 2 * n; }

}  // namespace detail

/// sum over n-particle y in [-w, w] of e^{-mu d(x, y)} for the clustered x
/// starting at `start`, by a transfer recursion over the ordered particles.
inline double clustered_distance_sum(double mu, int n, Site start, int w) {
  const int width = 2 * w + 1;
  std::vector<double> f(static_cast<std::size_t>(width), 0.0), g(f.size());
  for (int p = 0; p < width; ++p) f[static_cast<std::size_t>(p)] = std::exp(-mu * std::abs((p - w) - start));
  for (int k = 1; k < n; ++k) {
    double prefix = 0.0;
    for (int p = 0; p < width; ++p) {
      g[static_cast<std::size_t>(p)] = prefix * std::exp(-mu * std::abs((p - w) - (start + k)));
      prefix += f[static_cast<std::size_t>(p)];
    }
    std::swap(f, g);
  }
  double s = 0.0;
  for (double v : f) s += v;
  return s;
}

/// max over clustered x near the window centre of sum_y e^{-mu d(x, y)}, against C_inf(mu).
inline LemmaCheck verify_lemma_a1(double mu, int n, int window = 0) {
  detail::check_lemma_inputs(mu, n, "verify_lemma_a1");
  if (window <= 0) window = detail::default_window(mu, n);
  auto sum = [&](int w) {
    double best = 0.0;
    const Site centred = -(n / 2);
    for (Site a = centred - 1; a <= centred + 1; ++a) best = std::max(best, clustered_distance_sum(mu, n, a, w));
    return best;
  };
  return detail::with_doubling(sum, window, c_infinity(mu).value, "verify_lemma_a1");
}

namespace detail {

/// Visits every increasing n-tuple of sites in [lo, hi] whose free distance to
/// the clustered set is at most `cut`; prefixes already beyond `cut` are pruned.
inline void enumerate_near_clustered(int n, Site lo, Site hi, long cut,
                                     const std::function<void(const std::vector<Site>&, long)>& visit) {
  std::vector<Site> x;
  std::vector<long> z;
  std::function<void(Site)> rec = [&](Site from) {
    const int k = static_cast<int>(x.size());
    if (k == n) {
      visit(x, median_alignment(z, z.front(), z.back()));
      return;
    }
    for (Site s = from; s <= hi - (n - k - 1); ++s) {
      x.push_back(s);
      z.push_back(long{s} - k);
      if (median_alignment(z, z.front(), z.back()) <= cut) rec(s + 1);
      x.pop_back();
      z.pop_back();
      if (k > 0 && long{s} - k - z.front() > cut) break;  // spread alone exceeds the cut
    }
  };
  rec(lo);
}

}  // namespace detail

/// sum of e^{-mu d(x, C)} over n-particle x on Z with d(x, C) <= w and
/// |x cap B| not in {0, |B|, n}, for B = [0, block_size - 1]. Such x lie within
/// w + n of B.
inline double straddling_sum(double mu, int n, int block_size, int w) {
  const Site b_lo = 0, b_hi = block_size - 1;
  double s = 0.0;
  detail::enumerate_near_clustered(n, b_lo - w - n, b_hi + w + n, w, [&](const std::vector<Site>& x, long d) {
    int inside = 0;
    for (Site u : x) inside += (u >= b_lo && u <= b_hi) ? 1 : 0;
    if (inside == 0 || inside == block_size || inside == n) return;
    s += std::exp(-mu * static_cast<double>(d));
  });
  return s;
}

/// straddling_sum on a doubling-stable window, against C1(min{n, |B|}, mu).
inline LemmaCheck verify_lemma_a2(double mu, int n, int block_size, int window = 0) {
  detail::check_lemma_inputs(mu, n, "verify_lemma_a2");
  if (n < 2) throw DomainError("verify_lemma_a2: n must be >= 2");
  if (block_size < 1) throw DomainError("verify_lemma_a2: |B| must be >= 1");
  if (window <= 0) window = detail::default_window(mu, n);
  auto sum = [&](int w) { return straddling_sum(mu, n, block_size, w); };
  return detail::with_doubling(sum, window, c1(std::min(n, block_size), mu), "verify_lemma_a2");
}

/// sum over the n-particle sector of the lattice of e^{-mu [d(x, C) + d(x, dLambda)]}, against C2(mu).
inline LemmaCheck verify_lemma_a3(double mu, int n, const Lattice& lattice) {
  detail::check_lemma_inputs(mu, n, "verify_lemma_a3");
  if (n > lattice.size()) throw DomainError("verify_lemma_a3: n exceeds the lattice size");
  const auto basis = enumerate_sector(lattice, n);
  const Interval whole = full_interval(lattice);
  LemmaCheck r;
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const Configuration x = basis->config(i);
    r.lhs += std::exp(-mu * static_cast<double>(distance_to_clustered(x, lattice) + distance_to_edge(x, whole)));
  }
  r.window = lattice.half_length();
  r.bound = c2(mu);
  r.holds = r.lhs <= r.bound * (1.0 + kBoundSlack);
  return r;
}

}  // namespace droplet
