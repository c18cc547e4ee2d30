#pragma once

// Bipartite entanglement of many-body vectors: matricization over an interval
// bipartition, the Renyi family from singular values, the Ising-limit
// Schmidt-rank bounds and the droplet-subspace scan of the logarithmic bound.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "droplet/amplitude.hpp"
#include "droplet/configspace.hpp"
#include "droplet/errors.hpp"
#include "droplet/fitting.hpp"
#include "droplet/random.hpp"
#include "droplet/spectral.hpp"

namespace droplet {

inline constexpr double kRankTolerance = 1e-12;
inline constexpr double kNormTolerance = 1e-9;

/// Interval B of the lattice and its complement.
class Bipartition {
 public:
  Bipartition(Lattice lattice, Interval block) : lattice_(lattice), block_(block) {
    if (!block.within(lattice)) {
      throw DomainError("Bipartition: [" + std::to_string(block.lo) + ", " + std::to_string(block.hi) +
                        "] is not inside the lattice");
    }
  }

  /// Builds the bipartition from a site list; throws unless the sites form an interval.
  static Bipartition from_sites(Lattice lattice, std::vector<Site> sites) {
    if (sites.empty()) throw DomainError("Bipartition: B must be nonempty");
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    if (sites.back() - sites.front() + 1 != static_cast<int>(sites.size())) {
      throw DomainError("Bipartition: B must be an interval of sites");
    }
    return {lattice, Interval(sites.front(), sites.back())};
  }

  const Lattice& lattice() const { return lattice_; }
  const Interval& block() const { return block_; }
  int block_size() const { return block_.size(); }
  int complement_size() const { return lattice_.size() - block_.size(); }

  /// Number of bonds joining B to its complement (0, 1 or 2).
  int boundary_size() const {
    return (block_.lo > lattice_.min_site() ? 1 : 0) + (block_.hi < lattice_.max_site() ? 1 : 0);
  }

  std::uint64_t block_mask() const {
    const int lo = lattice_.index(block_.lo);
    const std::uint64_t width = static_cast<std::uint64_t>(block_.size());
    return ((width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1)) << lo;
  }

  std::uint64_t complement_mask() const {
    const std::uint64_t all = (std::uint64_t{1} << lattice_.size()) - 1;
    return all & ~block_mask();
  }

 private:
  Lattice lattice_;
  Interval block_;
};

/// Row/column placement of every basis configuration of a set of sectors.
///
/// Row labels are the occupations inside `row_sites`, column labels those
/// outside; both are sorted by mask value.
class MatricizationLayout {
 public:
  MatricizationLayout(std::span<const SectorBasisPtr> bases, std::uint64_t row_sites) {
    std::vector<std::uint64_t> rows, cols;
    for (const auto& b : bases) {
      for (std::uint64_t m : b->masks()) {
        rows.push_back(m & row_sites);
        cols.push_back(m & ~row_sites);
      }
    }
    auto uniq = [](std::vector<std::uint64_t>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(rows);
    uniq(cols);
    row_masks_ = rows;
    col_masks_ = cols;
    std::unordered_map<std::uint64_t, int> row_of, col_of;
    for (std::size_t i = 0; i < rows.size(); ++i) row_of.emplace(rows[i], static_cast<int>(i));
    for (std::size_t i = 0; i < cols.size(); ++i) col_of.emplace(cols[i], static_cast<int>(i));
    cells_.reserve(bases.size());
    for (const auto& b : bases) {
      std::vector<Cell> c;
      c.reserve(b->size());
      for (std::uint64_t m : b->masks()) c.push_back({row_of.at(m & row_sites), col_of.at(m & ~row_sites)});
      cells_.push_back(std::move(c));
    }
  }

  struct Cell {
    int row;
    int col;
  };

  Eigen::Index rows() const { return static_cast<Eigen::Index>(row_masks_.size()); }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(col_masks_.size()); }
  const std::vector<std::uint64_t>& row_masks() const { return row_masks_; }
  const std::vector<std::uint64_t>& col_masks() const { return col_masks_; }
  const std::vector<Cell>& cells(std::size_t block) const { return cells_[block]; }

 private:
  std::vector<std::uint64_t> row_masks_;
  std::vector<std::uint64_t> col_masks_;
  std::vector<std::vector<Cell>> cells_;
};

/// M[x_B, z] = psi(x_B u z).
struct Matricization {
  std::vector<std::uint64_t> row_masks;  ///< occupations inside the row sites
  std::vector<std::uint64_t> col_masks;
  Eigen::MatrixXcd entries;
};

namespace detail {

inline Matricization matricize_sites(const AmplitudeMap& psi, std::uint64_t row_sites) {
  require_normalized(psi, kNormTolerance, "matricize");
  std::vector<std::pair<std::uint64_t, std::complex<double>>> support;
  for (const auto& [n, sec] : psi.sectors()) {
    for (Eigen::Index i = 0; i < sec.values.size(); ++i) {
      if (sec.values(i) != 0.0) support.emplace_back(sec.basis->mask(static_cast<std::size_t>(i)), sec.values(i));
    }
  }
  Matricization m;
  for (const auto& [mask, v] : support) {
    m.row_masks.push_back(mask & row_sites);
    m.col_masks.push_back(mask & ~row_sites);
  }
  for (auto* v : {&m.row_masks, &m.col_masks}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  m.entries = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m.row_masks.size()),
                                     static_cast<Eigen::Index>(m.col_masks.size()));
  auto position = [](const std::vector<std::uint64_t>& v, std::uint64_t key) {
    return static_cast<Eigen::Index>(std::lower_bound(v.begin(), v.end(), key) - v.begin());
  };
  for (const auto& [mask, v] : support) {
    m.entries(position(m.row_masks, mask & row_sites), position(m.col_masks, mask & ~row_sites)) = v;
  }
  return m;
}

}  // namespace detail

inline Matricization matricize(const AmplitudeMap& psi, const Bipartition& part) {
  if (!(psi.lattice() == part.lattice())) throw DomainError("matricize: lattice mismatch");
  return detail::matricize_sites(psi, part.block_mask());
}

/// Same amplitudes with the complement's occupations as rows.
inline Matricization matricize_complement(const AmplitudeMap& psi, const Bipartition& part) {
  if (!(psi.lattice() == part.lattice())) throw DomainError("matricize: lattice mismatch");
  return detail::matricize_sites(psi, part.complement_mask());
}

struct EntropyReport {
  double alpha = 1.0;
  double value = 0.0;
  std::vector<double> schmidt_spectrum;  ///< descending, normalized to sum 1
  double rank_tol = kRankTolerance;       ///< relative to the largest Schmidt value
  int rank = 0;                           ///< Schmidt values above rank_tol * max
};

inline std::vector<double> schmidt_spectrum(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const Eigen::VectorXd s = svd.singularValues();
  std::vector<double> lambda(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) lambda[static_cast<std::size_t>(i)] = s(i) * s(i);
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return lambda;
}

/// Renyi entropy of a Schmidt spectrum (any nonnegative weights; normalized here).
inline EntropyReport renyi_from_spectrum(std::vector<double> lambda, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("renyi_entropy: alpha must be finite and >= 0");
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  double total = 0;
  for (double l : lambda) total += std::max(l, 0.0);
  if (!(total > 0.0)) throw DomainError("renyi_entropy: zero state");
  for (double& l : lambda) l = std::max(l, 0.0) / total;
  EntropyReport r;
  r.alpha = alpha;
  const double cutoff = kRankTolerance * lambda.front();
  std::vector<double> kept;
  for (double l : lambda) {
    if (l > cutoff) kept.push_back(l);
  }
  r.rank = static_cast<int>(kept.size());
  if (alpha == 0.0) {
    r.value = std::log(static_cast<double>(kept.size()));
  } else if (alpha == 1.0) {
    double s = 0;
    for (double l : kept) s -= l * std::log(l);
    r.value = s;
  } else {
    double s = 0;
    for (double l : kept) s += std::pow(l, alpha);
    r.value = std::log(s) / (1.0 - alpha);
  }
  r.value = std::max(r.value, 0.0);
  r.schmidt_spectrum = std::move(lambda);
  return r;
}

inline EntropyReport renyi_entropy(const Matricization& m, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("renyi_entropy: alpha must be >= 0");
  return renyi_from_spectrum(schmidt_spectrum(m.entries), alpha);
}

inline EntropyReport entanglement_entropy(const AmplitudeMap& psi, const Bipartition& part, double alpha) {
  return renyi_entropy(matricize(psi, part), alpha);
}

inline constexpr double kSchmidtAgreement = 1e-10;

/// Entropy computed from B, after checking that B and its complement share the nonzero Schmidt spectrum.
inline EntropyReport min_side_entropy(const AmplitudeMap& psi, const Bipartition& part, double alpha) {
  const EntropyReport a = renyi_entropy(matricize(psi, part), alpha);
  const EntropyReport b = renyi_entropy(matricize_complement(psi, part), alpha);
  const std::size_t k = static_cast<std::size_t>(std::max(a.rank, b.rank));
  for (std::size_t i = 0; i < k; ++i) {
    const double la = i < a.schmidt_spectrum.size() ? a.schmidt_spectrum[i] : 0.0;
    const double lb = i < b.schmidt_spectrum.size() ? b.schmidt_spectrum[i] : 0.0;
    if (std::abs(la - lb) > kSchmidtAgreement) {
      throw VerificationError("min_side_entropy: Schmidt values differ between B and its complement at index " +
                              std::to_string(i) + " (" + std::to_string(la) + " vs " + std::to_string(lb) + ")");
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Ising limit.

/// Equal-weight superposition of all n-site clusters of the lattice.
inline AmplitudeMap uniform_cluster_superposition(const Lattice& lattice, int n) {
  if (n < 1 || n > lattice.size()) throw DomainError("uniform_cluster_superposition: n out of range");
  AmplitudeMap psi(lattice);
  for (Site a = lattice.min_site(); a + n - 1 <= lattice.max_site(); ++a) psi.set(Configuration::block(a, n), 1.0);
  return psi.normalize();
}

/// Superposition of the vacuum and every cluster contained in `support`; equal
/// weights, or iid complex Gaussian weights when `rng` is given.
inline AmplitudeMap cluster_superposition(const Lattice& lattice, const Interval& support, Rng* rng = nullptr) {
  if (!support.within(lattice)) throw DomainError("cluster_superposition: support outside the lattice");
  AmplitudeMap psi(lattice);
  auto weight = [&]() { return rng != nullptr ? complex_normal(*rng) : std::complex<double>(1.0); };
  psi.set(Configuration{}, weight());
  for (Site a = support.lo; a <= support.hi; ++a) {
    for (Site b = a; b <= support.hi; ++b) psi.set(Configuration::block(a, b - a + 1), weight());
  }
  return psi.normalize();
}

struct IsingBoundReport {
  double s0 = 0.0;
  int rank = 0;
  double bound_boundary = 0.0;  ///< ln(3 + |dB| (|B| - 1))
  std::optional<double> bound_particles;  ///< ln(3 + 2 (min{n, |B|} - 1)) when n is given
  double slack = 0.0;  ///< smallest bound minus s0
  bool holds = true;
};

inline constexpr double kSupportTolerance = 1e-14;

/// Hartley entropy of a state supported on clustered configurations against the Ising-limit bounds.
inline IsingBoundReport ising_bound_check(const AmplitudeMap& psi, const Bipartition& part,
                                          std::optional<int> n = std::nullopt) {
  std::string offending;
  int max_particles = 0;
  for (const auto& [k, sec] : psi.sectors()) {
    for (Eigen::Index i = 0; i < sec.values.size(); ++i) {
      if (std::abs(sec.values(i)) <= kSupportTolerance) continue;
      const std::uint64_t m = sec.basis->mask(static_cast<std::size_t>(i));
      if (cluster_count_mask(m) > 1) {
        if (offending.size() < 200) offending += " " + sec.basis->config(static_cast<std::size_t>(i)).to_string();
      }
      max_particles = std::max(max_particles, k);
    }
  }
  if (!offending.empty()) {
    throw DomainError("ising_bound_check: state has weight on non-clustered configurations:" + offending);
  }
  if (n && max_particles > *n) {
    throw DomainError("ising_bound_check: state has weight on " + std::to_string(max_particles) +
                      " particles, above n=" + std::to_string(*n));
  }
  const EntropyReport e = entanglement_entropy(psi, part, 0.0);
  IsingBoundReport r;
  r.s0 = e.value;
  r.rank = e.rank;
  r.bound_boundary = std::log(3.0 + part.boundary_size() * (part.block_size() - 1.0));
  r.slack = r.bound_boundary - r.s0;
  if (n) {
    const int s = std::min(*n, part.block_size());
    r.bound_particles = std::log(3.0 + 2.0 * (s - 1.0));
    r.slack = std::min(r.slack, *r.bound_particles - r.s0);
  }
  r.holds = r.slack >= -1e-12;
  return r;
}

// ---------------------------------------------------------------------------
// Entropy over a subspace spanned by real eigenvectors.

/// Orthonormal real columns spanning part of one sector.
struct SubspaceBlock {
  SectorBasisPtr basis;
  Eigen::MatrixXd vectors;
};

/// Subspace of droplet states with particle numbers in [n_min, n_max].
inline std::vector<SubspaceBlock> droplet_blocks(const SpectralProjector& projector, int n_min, int n_max) {
  std::vector<SubspaceBlock> out;
  for (int n = std::max(n_min, 0); n <= std::min(n_max, projector.n_max()); ++n) {
    const auto& s = projector.sectors[static_cast<std::size_t>(n)];
    if (s.count() > 0) out.push_back({s.basis, s.vectors});
  }
  return out;
}

/// S_alpha(psi(c), B) for psi(c) = sum_j c_j v_j over a fixed orthonormal family.
class SubspaceEntropy {
 public:
  SubspaceEntropy(std::vector<SubspaceBlock> blocks, const Bipartition& part)
      : blocks_(std::move(blocks)), layout_(bases_of(blocks_), part.block_mask()) {
    Eigen::Index off = 0;
    for (const auto& b : blocks_) {
      offsets_.push_back(off);
      off += b.vectors.cols();
    }
    dimension_ = off;
  }

  Eigen::Index dimension() const { return dimension_; }
  std::size_t block_count() const { return blocks_.size(); }
  Eigen::Index block_offset(std::size_t b) const { return offsets_[b]; }
  Eigen::Index block_dimension(std::size_t b) const { return blocks_[b].vectors.cols(); }

  Eigen::MatrixXcd matrix(const Eigen::VectorXcd& c) const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(layout_.rows(), layout_.cols());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto k = blocks_[b].vectors.cols();
      const Eigen::VectorXcd cb = c.segment(offsets_[b], k);
      const Eigen::VectorXd re = blocks_[b].vectors * cb.real();
      const Eigen::VectorXd im = blocks_[b].vectors * cb.imag();
      const auto& cells = layout_.cells(b);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        m(cells[i].row, cells[i].col) = {re(ii), im(ii)};
      }
    }
    return m;
  }

  double entropy(const Eigen::VectorXcd& c, double alpha) const {
    return renyi_from_spectrum(schmidt_spectrum(matrix(c)), alpha).value;
  }

  AmplitudeMap state(const Lattice& lattice, const Eigen::VectorXcd& c) const {
    AmplitudeMap psi(lattice);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const Eigen::VectorXcd cb = c.segment(offsets_[b], blocks_[b].vectors.cols());
      psi.add(blocks_[b].basis, blocks_[b].vectors.cast<std::complex<double>>() * cb);
    }
    return psi;
  }

 private:
  static std::vector<SectorBasisPtr> bases_of(const std::vector<SubspaceBlock>& blocks) {
    std::vector<SectorBasisPtr> out;
    for (const auto& b : blocks) out.push_back(b.basis);
    return out;
  }

  std::vector<SubspaceBlock> blocks_;
  MatricizationLayout layout_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index dimension_ = 0;
};

struct SupOptions {
  int random_draws = 64;  ///< per sector block, and again over the whole span
  int ascent_steps = 20;  ///< coordinate sweeps
  double initial_step = 0.5;
  std::uint64_t seed = 0;
};

/// Estimated sup (lower bound) of S_alpha over unit vectors of the subspace.
struct SupEstimate {
  double value = 0.0;
  double eigenstate_max = 0.0;  ///< best over the spanning vectors themselves
  double random_max = 0.0;      ///< best over random draws
  long evaluations = 0;
  bool empty = false;
  Eigen::VectorXcd argmax;
};

inline Eigen::VectorXcd random_unit(Rng& rng, Eigen::Index dim, Eigen::Index offset, Eigen::Index len) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(dim);
  for (Eigen::Index i = 0; i < len; ++i) c(offset + i) = complex_normal(rng);
  return c / c.norm();
}

inline SupEstimate estimate_sup_entropy(const SubspaceEntropy& space, double alpha, const SupOptions& opt = {}) {
  SupEstimate r;
  const Eigen::Index k = space.dimension();
  if (k == 0) {
    r.empty = true;
    return r;
  }
  double best = -1.0;
  auto consider = [&](const Eigen::VectorXcd& c) {
    const double v = space.entropy(c, alpha);
    ++r.evaluations;
    if (v > best) {
      best = v;
      r.argmax = c;
    }
    return v;
  };
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(k);
    e(j) = 1.0;
    r.eigenstate_max = std::max(r.eigenstate_max, consider(e));
  }
  Rng rng(derive_seed(opt.seed, 0x5eed, static_cast<std::uint64_t>(k)));
  for (std::size_t b = 0; b < space.block_count(); ++b) {
    for (int d = 0; d < opt.random_draws; ++d) {
      r.random_max = std::max(r.random_max, consider(random_unit(rng, k, space.block_offset(b), space.block_dimension(b))));
    }
  }
  if (space.block_count() > 1) {
    for (int d = 0; d < opt.random_draws; ++d) r.random_max = std::max(r.random_max, consider(random_unit(rng, k, 0, k)));
  }
  Eigen::VectorXcd c = r.argmax;
  double step = opt.initial_step;
  const std::complex<double> dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int s = 0; s < opt.ascent_steps && k > 1; ++s) {
    bool improved = false;
    for (Eigen::Index j = 0; j < k; ++j) {
      for (const auto& dir : dirs) {
        Eigen::VectorXcd trial = c;
        trial(j) += step * dir;
        const double nrm = trial.norm();
        if (nrm == 0.0) continue;
        trial /= nrm;
        const double before = best;
        consider(trial);
        if (best > before) {
          c = r.argmax;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  r.value = best;
  return r;
}

// ---------------------------------------------------------------------------
// Scan of the logarithmic bound.

struct Theorem1Row {
  int block_size = 0;
  int n = 0;  ///< particle-number cap: states in sectors 0..n
  double alpha = 1.0;
  double max_entropy = 0.0;
  double eigenstate_max = 0.0;
  bool empty = false;
};

struct Theorem1Scan {
  std::vector<Theorem1Row> rows;
  std::map<double, ConcaveLogFit> fits;  ///< per alpha, in s = min{n, |B|}
  std::vector<std::string> notices;

  /// Fitted envelope for alpha at s; throws when no fit was possible.
  double envelope(double alpha, int s) const {
    auto it = fits.find(alpha);
    if (it == fits.end()) throw DomainError("Theorem1Scan: no fit for this alpha");
    return it->second(static_cast<double>(s));
  }
};

struct Theorem1Options {
  std::vector<int> block_sizes;
  std::vector<double> alphas{1.0};
  std::vector<int> particle_caps;  ///< empty: the projector's n_max only
  SupOptions sup;
};

inline Theorem1Scan theorem1_scan(const SpectralProjector& projector, const Theorem1Options& opt) {
  Theorem1Scan out;
  std::vector<int> caps = opt.particle_caps;
  if (caps.empty()) caps.push_back(projector.n_max());
  for (int n : caps) {
    if (n < 0 || n > projector.n_max()) throw DomainError("theorem1_scan: particle cap " + std::to_string(n) + " out of range");
    const auto blocks = droplet_blocks(projector, 0, n);
    if (blocks.empty()) out.notices.push_back("empty droplet subspace for n<=" + std::to_string(n));
    for (int len : opt.block_sizes) {
      const Bipartition part(projector.lattice, centered_interval(projector.lattice, len));
      const SubspaceEntropy space(blocks, part);
      for (std::size_t a = 0; a < opt.alphas.size(); ++a) {
        SupOptions sup = opt.sup;
        sup.seed = derive_seed(opt.sup.seed, static_cast<std::uint64_t>(n) * 1000 + static_cast<std::uint64_t>(len), a);
        const SupEstimate est = estimate_sup_entropy(space, opt.alphas[a], sup);
        out.rows.push_back({len, n, opt.alphas[a], est.value, est.eigenstate_max, est.empty});
      }
    }
  }
  for (double alpha : opt.alphas) {
    std::vector<double> s, y;
    std::vector<int> distinct;
    for (const auto& row : out.rows) {
      if (row.alpha != alpha || row.empty) continue;
      const int m = std::min(row.n, row.block_size);
      s.push_back(m);
      y.push_back(row.max_entropy);
      if (std::find(distinct.begin(), distinct.end(), m) == distinct.end()) distinct.push_back(m);
    }
    if (distinct.size() < 3) {
      out.notices.push_back("too few distinct min{n,|B|} values to fit alpha=" + std::to_string(alpha));
      continue;
    }
    try {
      out.fits.emplace(alpha, fit_concave_log(s, y));
    } catch (const DomainError& e) {
      out.notices.push_back(e.what());
    }
  }
  return out;
}

}  // namespace droplet
