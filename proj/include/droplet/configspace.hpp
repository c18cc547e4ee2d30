#pragma once

// Hard-core particle configurations on the interval [-L, L] of Z: sector
// enumeration in colexicographic order, cluster structure and the l1
// distances between configurations.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "droplet/errors.hpp"

namespace droplet {

using Site = int;

/// Sites [-L, L]; internal array index of a site is site + L.
class Lattice {
 public:
  explicit Lattice(int half_length) : half_length_(half_length) {
    if (half_length < 1) {
      throw DomainError("Lattice: half-length must be >= 1, got " + std::to_string(half_length));
    }
  }

  int half_length() const { return half_length_; }
  int size() const { return 2 * half_length_ + 1; }
  Site min_site() const { return -half_length_; }
  Site max_site() const { return half_length_; }
  bool contains(Site s) const { return s >= -half_length_ && s <= half_length_; }
  int index(Site s) const { return s + half_length_; }
  Site site(int index) const { return index - half_length_; }

  bool operator==(const Lattice&) const = default;

 private:
  int half_length_;
};

/// Closed, nonempty interval of sites.
struct Interval {
  Site lo;
  Site hi;

  Interval(Site lo_, Site hi_) : lo(lo_), hi(hi_) {
    if (hi < lo) {
      throw DomainError("Interval: empty interval [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }

  int size() const { return hi - lo + 1; }
  bool contains(Site s) const { return s >= lo && s <= hi; }
  bool within(const Lattice& lattice) const { return lattice.contains(lo) && lattice.contains(hi); }
  bool operator==(const Interval&) const = default;
};

/// The whole lattice as an interval.
inline Interval full_interval(const Lattice& lattice) { return {lattice.min_site(), lattice.max_site()}; }

/// Interval of `length` sites placed as centrally as possible: lo = -floor(length / 2).
inline Interval centered_interval(const Lattice& lattice, int length) {
  if (length < 1 || length > lattice.size()) {
    throw DomainError("centered_interval: length " + std::to_string(length) + " does not fit the lattice");
  }
  Site lo = -(length / 2);
  Site hi = lo + length - 1;
  if (hi > lattice.max_site()) {
    hi = lattice.max_site();
    lo = hi - length + 1;
  }
  return {lo, hi};
}

/// Strictly increasing sequence of occupied sites; the empty sequence is the vacuum.
class Configuration {
 public:
  Configuration() = default;

  explicit Configuration(std::vector<Site> sites) : sites_(std::move(sites)) {
    for (std::size_t i = 1; i < sites_.size(); ++i) {
      if (sites_[i] <= sites_[i - 1]) {
        throw DomainError("Configuration: sites must be strictly increasing");
      }
    }
  }

  Configuration(std::initializer_list<Site> sites) : Configuration(std::vector<Site>(sites)) {}

  /// Contiguous block {first, ..., first + n - 1}.
  static Configuration block(Site first, int n) {
    std::vector<Site> s(static_cast<std::size_t>(std::max(n, 0)));
    for (int k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = first + k;
    return Configuration(std::move(s));
  }

  std::span<const Site> sites() const { return sites_; }
  int count() const { return static_cast<int>(sites_.size()); }
  bool empty() const { return sites_.empty(); }
  Site operator[](std::size_t i) const { return sites_[i]; }
  bool contains(Site s) const { return std::binary_search(sites_.begin(), sites_.end(), s); }

  bool fits(const Lattice& lattice) const {
    return empty() || (lattice.contains(sites_.front()) && lattice.contains(sites_.back()));
  }

  /// Bit i set iff site lattice.site(i) is occupied.
  std::uint64_t mask(const Lattice& lattice) const {
    std::uint64_t m = 0;
    for (Site s : sites_) m |= std::uint64_t{1} << lattice.index(s);
    return m;
  }

  static Configuration from_mask(std::uint64_t mask, const Lattice& lattice) {
    std::vector<Site> s;
    s.reserve(static_cast<std::size_t>(std::popcount(mask)));
    while (mask != 0) {
      int i = std::countr_zero(mask);
      s.push_back(lattice.site(i));
      mask &= mask - 1;
    }
    return Configuration(std::move(s));
  }

  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      if (i != 0) out += ",";
      out += std::to_string(sites_[i]);
    }
    return out + "}";
  }

  auto operator<=>(const Configuration&) const = default;

 private:
  std::vector<Site> sites_;
};

namespace detail {

inline constexpr int kMaxMaskSites = 62;

/// Pascal triangle up to kMaxMaskSites; binomial(a, b) = 0 for b > a.
inline const std::vector<std::vector<std::uint64_t>>& binomial_table() {
  static const auto table = [] {
    std::vector<std::vector<std::uint64_t>> t(kMaxMaskSites + 2, std::vector<std::uint64_t>(kMaxMaskSites + 2, 0));
    for (int a = 0; a <= kMaxMaskSites + 1; ++a) {
      t[a][0] = 1;
      for (int b = 1; b <= a; ++b) t[a][b] = t[a - 1][b - 1] + (b <= a - 1 ? t[a - 1][b] : 0);
    }
    return t;
  }();
  return table;
}

}  // namespace detail

inline std::uint64_t binomial(int a, int b) {
  if (b < 0 || a < 0 || b > a) return 0;
  if (a > detail::kMaxMaskSites + 1) throw ResourceError("binomial: argument too large");
  return detail::binomial_table()[a][b];
}

/// All n-particle configurations of a lattice in colexicographic order.
///
/// Colex rank of sorted indices c_0 < ... < c_{n-1} is sum_i binomial(c_i, i + 1),
/// which makes index_of an O(n) computation.
class SectorBasis {
 public:
  SectorBasis(Lattice lattice, int n) : lattice_(lattice), n_(n) {
    if (n < 0 || n > lattice.size()) {
      throw DomainError("enumerate_sector: particle count n=" + std::to_string(n) + " outside [0, " +
                        std::to_string(lattice.size()) + "]");
    }
    if (lattice.size() > detail::kMaxMaskSites) {
      throw ResourceError("enumerate_sector: lattice too large for bitmask indexing");
    }
    const std::uint64_t dim = binomial(lattice.size(), n);
    masks_.reserve(dim);
    if (n == 0) {
      masks_.push_back(0);
    } else {
      // Gosper's hack enumerates n-bit masks in increasing numeric order, which is colex order.
      std::uint64_t m = (std::uint64_t{1} << n) - 1;
      const std::uint64_t limit = std::uint64_t{1} << lattice.size();
      while (m < limit) {
        masks_.push_back(m);
        const std::uint64_t c = m & (~m + 1);
        const std::uint64_t r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
      }
    }
  }

  const Lattice& lattice() const { return lattice_; }
  int particles() const { return n_; }
  std::size_t size() const { return masks_.size(); }

  std::uint64_t mask(std::size_t ordinal) const { return masks_[ordinal]; }
  std::span<const std::uint64_t> masks() const { return masks_; }
  Configuration config(std::size_t ordinal) const { return Configuration::from_mask(masks_[ordinal], lattice_); }

  std::size_t rank_mask(std::uint64_t m) const {
    std::size_t r = 0;
    int i = 0;
    while (m != 0) {
      const int c = std::countr_zero(m);
      r += binomial(c, ++i);
      m &= m - 1;
    }
    return r;
  }

  /// Ordinal of x; throws when x is not an n-particle configuration of this lattice.
  std::size_t index_of(const Configuration& x) const {
    if (x.count() != n_ || !x.fits(lattice_)) {
      throw DomainError("SectorBasis::index_of: " + x.to_string() + " is not in the n=" + std::to_string(n_) +
                        " sector");
    }
    return rank_mask(x.mask(lattice_));
  }

 private:
  Lattice lattice_;
  int n_;
  std::vector<std::uint64_t> masks_;
};

using SectorBasisPtr = std::shared_ptr<const SectorBasis>;

inline SectorBasisPtr enumerate_sector(const Lattice& lattice, int n) {
  return std::make_shared<const SectorBasis>(lattice, n);
}

struct Cluster {
  Site start;
  int length;
  bool operator==(const Cluster&) const = default;
};

struct ClusterDecomposition {
  std::vector<Cluster> clusters;
  bool touches_left = false;
  bool touches_right = false;

  int count() const { return static_cast<int>(clusters.size()); }
  /// Vacuum and single runs are clustered.
  bool clustered() const { return clusters.size() <= 1; }
};

/// Number of maximal runs of adjacent occupied sites.
inline int cluster_count(const Configuration& x) {
  const auto s = x.sites();
  if (s.empty()) return 0;
  int k = 1;
  for (std::size_t i = 1; i < s.size(); ++i) k += (s[i] != s[i - 1] + 1) ? 1 : 0;
  return k;
}

inline int cluster_count_mask(std::uint64_t m) {
  // A run starts at every occupied bit whose lower neighbour is empty.
  return std::popcount(m & ~(m << 1));
}

inline ClusterDecomposition cluster_decompose(const Configuration& x, const Lattice& lattice) {
  ClusterDecomposition out;
  const auto s = x.sites();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == 0 || s[i] != s[i - 1] + 1) {
      out.clusters.push_back({s[i], 1});
    } else {
      ++out.clusters.back().length;
    }
  }
  if (!s.empty()) {
    out.touches_left = s.front() == lattice.min_site();
    out.touches_right = s.back() == lattice.max_site();
  }
  return out;
}

/// l1 distance sum_k |x_k - y_k| between sorted configurations of equal particle number.
inline long config_distance(const Configuration& x, const Configuration& y) {
  if (x.count() != y.count()) {
    throw DomainError("config_distance: particle counts differ (" + std::to_string(x.count()) + " vs " +
                      std::to_string(y.count()) + ")");
  }
  long d = 0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(x.count()); ++k) d += std::labs(long{x[k]} - long{y[k]});
  return d;
}

namespace detail {

/// min over integer a in [lo, hi] of sum_k |z_k - a| for nondecreasing z.
inline long median_alignment(std::span<const long> z, long lo, long hi) {
  const long med = z[(z.size() - 1) / 2];
  const long a = std::clamp(med, lo, hi);
  long d = 0;
  for (long v : z) d += std::labs(v - a);
  return d;
}

inline std::vector<long> shifted_positions(const Configuration& x) {
  // Placing block {a, ..., a+n-1} against x costs sum_k |(x_k - k) - a|.
  std::vector<long> z(static_cast<std::size_t>(x.count()));
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = long{x[k]} - static_cast<long>(k);
  return z;
}

}  // namespace detail

/// Distance to the nearest single cluster of x.count() sites placed inside the lattice.
inline long distance_to_clustered(const Configuration& x, const Lattice& lattice) {
  const int n = x.count();
  if (n <= 1) return 0;
  const auto z = detail::shifted_positions(x);
  return detail::median_alignment(z, lattice.min_site(), lattice.max_site() - n + 1);
}

/// Distance to the nearest single cluster anywhere on Z.
inline long distance_to_clustered(const Configuration& x) {
  if (x.count() <= 1) return 0;
  const auto z = detail::shifted_positions(x);
  return detail::median_alignment(z, z.front(), z.back());
}

/// Smallest distance from an occupied site to one of the interval's two extreme sites.
inline long distance_to_edge(const Configuration& x, const Interval& interval) {
  if (x.empty()) throw DomainError("distance_to_edge: configuration must be nonempty");
  long best = std::labs(long{x[0]} - interval.lo);
  for (Site u : x.sites()) {
    best = std::min({best, std::labs(long{u} - interval.lo), std::labs(long{u} - interval.hi)});
  }
  return best;
}

}  // namespace droplet
