#pragma once

// XXZ chain with boundary field and nonnegative potential, H = h + V, written
// in the hard-core particle picture (down spin = occupied site).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "droplet/configspace.hpp"
#include "droplet/errors.hpp"

namespace droplet {

enum class BoundaryMode {
  standard,  ///< beta = (1 - delta_inv) / 2
  droplet,   ///< beta = sqrt(1 - delta_inv^2) / 2
};

inline std::string to_string(BoundaryMode m) { return m == BoundaryMode::standard ? "standard" : "droplet"; }

inline double boundary_beta(double delta_inv, BoundaryMode mode) {
  return mode == BoundaryMode::standard ? 0.5 * (1.0 - delta_inv) : 0.5 * std::sqrt(1.0 - delta_inv * delta_inv);
}

/// Anisotropy, boundary-field convention and the site potential b_x >= 0.
///
/// The field is indexed by lattice index (site + L); an empty field means b = 0.
class ModelParams {
 public:
  ModelParams(double delta_inv, BoundaryMode mode = BoundaryMode::standard, std::vector<double> field = {})
      : delta_inv_(delta_inv), mode_(mode), field_(std::move(field)) {
    if (!(delta_inv >= 0.0 && delta_inv < 1.0)) {
      throw DomainError("ModelParams: delta_inv must lie in [0, 1), got " + std::to_string(delta_inv));
    }
    for (double b : field_) {
      if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("ModelParams: field values must be finite and >= 0");
    }
  }

  double delta_inv() const { return delta_inv_; }
  BoundaryMode mode() const { return mode_; }
  double beta() const { return boundary_beta(delta_inv_, mode_); }
  const std::vector<double>& field() const { return field_; }
  bool zero_field() const {
    return std::all_of(field_.begin(), field_.end(), [](double b) { return b == 0.0; });
  }
  double field_at_index(int i) const { return field_.empty() ? 0.0 : field_[static_cast<std::size_t>(i)]; }

  /// Same anisotropy and mode with b replaced.
  ModelParams with_field(std::vector<double> field) const { return {delta_inv_, mode_, std::move(field)}; }
  /// The bare chain: standard boundary field, no potential.
  ModelParams bare() const { return {delta_inv_, BoundaryMode::standard, {}}; }

  void check_lattice(const Lattice& lattice) const {
    if (!field_.empty() && static_cast<int>(field_.size()) != lattice.size()) {
      throw DomainError("ModelParams: field has " + std::to_string(field_.size()) + " entries for a lattice of " +
                        std::to_string(lattice.size()) + " sites");
    }
  }

 private:
  double delta_inv_;
  BoundaryMode mode_;
  std::vector<double> field_;
};

/// Ordered subset of sector ordinals.
struct RestrictionMask {
  std::vector<std::size_t> kept;

  std::size_t size() const { return kept.size(); }
  bool empty() const { return kept.empty(); }
};

/// Real symmetric matrix on (a restriction of) one particle-number sector.
///
/// Row/column r corresponds to basis ordinal `ordinals[r]`; `hops` lists the
/// structurally nonzero off-diagonal pairs (r < c) in local indices.
struct SectorMatrix {
  SectorBasisPtr basis;
  std::vector<std::size_t> ordinals;
  Eigen::MatrixXd entries;
  std::vector<std::pair<std::size_t, std::size_t>> hops;

  std::size_t dimension() const { return ordinals.size(); }
  std::uint64_t mask(std::size_t local) const { return basis->mask(ordinals[local]); }
  Configuration config(std::size_t local) const { return basis->config(ordinals[local]); }
};

namespace detail {

/// Diagonal energy: W/2 + beta * (boundary occupancy) + sum of the field over occupied sites.
inline double diagonal_energy(std::uint64_t m, int sites, double beta, const ModelParams& params) {
  const std::uint64_t bond_mask = (std::uint64_t{1} << (sites - 1)) - 1;
  const int walls = std::popcount((m ^ (m >> 1)) & bond_mask);
  const int edge = static_cast<int>(m & 1u) + static_cast<int>((m >> (sites - 1)) & 1u);
  double e = 0.5 * walls + beta * edge;
  if (!params.field().empty()) {
    for (std::uint64_t r = m; r != 0; r &= r - 1) e += params.field_at_index(std::countr_zero(r));
  }
  return e;
}

}  // namespace detail

inline SectorMatrix assemble_sector(const ModelParams& params, const SectorBasisPtr& basis) {
  const Lattice& lattice = basis->lattice();
  params.check_lattice(lattice);
  const int sites = lattice.size();
  const std::size_t dim = basis->size();
  const double beta = params.beta();
  // -0.0 would otherwise leak into Ising-limit matrices.
  const double hop = params.delta_inv() == 0.0 ? 0.0 : -0.5 * params.delta_inv();

  SectorMatrix out;
  out.basis = basis;
  out.ordinals.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) out.ordinals[i] = i;
  out.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));

  for (std::size_t i = 0; i < dim; ++i) {
    const std::uint64_t m = basis->mask(i);
    const auto ii = static_cast<Eigen::Index>(i);
    out.entries(ii, ii) = detail::diagonal_energy(m, sites, beta, params);
    // Particle at bond position b moves to the empty site b+1 (the reverse move is the transpose).
    for (int b = 0; b + 1 < sites; ++b) {
      const bool left = (m >> b) & 1u;
      const bool right = (m >> (b + 1)) & 1u;
      if (left && !right) {
        const std::uint64_t moved = m ^ (std::uint64_t{3} << b);
        const std::size_t j = basis->rank_mask(moved);
        const auto jj = static_cast<Eigen::Index>(j);
        out.entries(ii, jj) = hop;
        out.entries(jj, ii) = hop;
        out.hops.emplace_back(std::min(i, j), std::max(i, j));
      }
    }
  }
  return out;
}

inline SectorMatrix assemble_sector(const ModelParams& params, const Lattice& lattice, int n) {
  return assemble_sector(params, enumerate_sector(lattice, n));
}

inline RestrictionMask full_mask(const SectorBasis& basis) {
  RestrictionMask m;
  m.kept.resize(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) m.kept[i] = i;
  return m;
}

/// Configurations with at least k_min clusters.
inline RestrictionMask cluster_mask(const SectorBasis& basis, int k_min) {
  if (k_min < 1) throw DomainError("cluster_mask: k_min must be >= 1");
  RestrictionMask m;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (cluster_count_mask(basis.mask(i)) >= k_min) m.kept.push_back(i);
  }
  return m;
}

/// Principal submatrix on the mask's ordinals, which index `matrix` locally.
inline SectorMatrix restrict(const SectorMatrix& matrix, const RestrictionMask& mask) {
  const std::size_t dim = matrix.dimension();
  std::vector<std::ptrdiff_t> position(dim, -1);
  SectorMatrix out;
  out.basis = matrix.basis;
  out.ordinals.reserve(mask.size());
  for (std::size_t r = 0; r < mask.size(); ++r) {
    const std::size_t local = mask.kept[r];
    if (local >= dim) {
      throw DomainError("restrict: ordinal " + std::to_string(local) + " out of range for dimension " +
                        std::to_string(dim));
    }
    position[local] = static_cast<std::ptrdiff_t>(r);
    out.ordinals.push_back(matrix.ordinals[local]);
  }
  const auto k = static_cast<Eigen::Index>(mask.size());
  out.entries.resize(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) {
      out.entries(r, c) = matrix.entries(static_cast<Eigen::Index>(mask.kept[static_cast<std::size_t>(r)]),
                                         static_cast<Eigen::Index>(mask.kept[static_cast<std::size_t>(c)]));
    }
  }
  for (const auto& [a, b] : matrix.hops) {
    if (position[a] >= 0 && position[b] >= 0) {
      const auto pa = static_cast<std::size_t>(position[a]);
      const auto pb = static_cast<std::size_t>(position[b]);
      out.hops.emplace_back(std::min(pa, pb), std::max(pa, pb));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full tensor-product oracle.

inline constexpr int kOracleMaxSites = 14;

/// Index of a particle mask in the tensor-product basis: site -L is the most
/// significant factor, |1/2> is basis state 0 and |-1/2> (occupied) is state 1.
inline std::uint64_t tensor_index(std::uint64_t particle_mask, int sites) {
  std::uint64_t out = 0;
  for (int i = 0; i < sites; ++i) {
    if ((particle_mask >> i) & 1u) out |= std::uint64_t{1} << (sites - 1 - i);
  }
  return out;
}

namespace detail {

using SpMatC = Eigen::SparseMatrix<std::complex<double>>;

inline SpMatC spin_matrix(int component) {
  using C = std::complex<double>;
  SpMatC s(2, 2);
  std::vector<Eigen::Triplet<C>> t;
  switch (component) {
    case 1:
      t = {{0, 1, C(0.5, 0)}, {1, 0, C(0.5, 0)}};
      break;
    case 2:
      t = {{0, 1, C(0, -0.5)}, {1, 0, C(0, 0.5)}};
      break;
    case 3:
      t = {{0, 0, C(0.5, 0)}, {1, 1, C(-0.5, 0)}};
      break;
    default:
      t = {{0, 0, C(1, 0)}, {1, 1, C(1, 0)}};
  }
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

inline SpMatC identity(std::uint64_t dim) {
  SpMatC id(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  id.setIdentity();
  return id;
}

/// I (x) ... (x) op_at_site ... (x) I, where `ops` maps lattice index -> 2x2 factor.
inline SpMatC lift(const std::vector<std::pair<int, SpMatC>>& ops, int sites) {
  SpMatC acc = identity(1);
  for (int i = 0; i < sites; ++i) {
    SpMatC factor = identity(2);
    for (const auto& [idx, op] : ops) {
      if (idx == i) factor = op;
    }
    SpMatC next = Eigen::kroneckerProduct(acc, factor).eval();
    acc = std::move(next);
  }
  return acc;
}

}  // namespace detail

/// Full 2^|Lambda| matrix assembled from spin-1/2 operators by tensor products.
inline Eigen::SparseMatrix<double> assemble_full_oracle(const ModelParams& params, const Lattice& lattice) {
  const int sites = lattice.size();
  if (sites > kOracleMaxSites) {
    throw ResourceError("assemble_full_oracle: " + std::to_string(sites) + " sites exceeds the cap of " +
                        std::to_string(kOracleMaxSites));
  }
  params.check_lattice(lattice);
  using C = std::complex<double>;
  const std::uint64_t dim = std::uint64_t{1} << sites;
  const auto s1 = detail::spin_matrix(1);
  const auto s2 = detail::spin_matrix(2);
  const auto s3 = detail::spin_matrix(3);
  const auto id = detail::identity(dim);

  detail::SpMatC h(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (int x = 0; x + 1 < sites; ++x) {
    const auto xx = detail::lift({{x, s1}, {x + 1, s1}}, sites);
    const auto yy = detail::lift({{x, s2}, {x + 1, s2}}, sites);
    const auto zz = detail::lift({{x, s3}, {x + 1, s3}}, sites);
    h += C(-params.delta_inv(), 0) * (xx + yy);
    h -= zz - C(0.25, 0) * id;
  }
  const auto z_left = detail::lift({{0, s3}}, sites);
  const auto z_right = detail::lift({{sites - 1, s3}}, sites);
  h += C(params.beta(), 0) * (id - z_left - z_right);
  for (int x = 0; x < sites; ++x) {
    const double b = params.field_at_index(x);
    if (b != 0.0) h += C(b, 0) * (C(0.5, 0) * id - detail::lift({{x, s3}}, sites));
  }
  h.prune(C(0, 0));

  Eigen::SparseMatrix<double> real(h.rows(), h.cols());
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
    for (detail::SpMatC::InnerIterator it(h, k); it; ++it) {
      if (std::abs(it.value().imag()) > 1e-14) throw NumericError("assemble_full_oracle: non-real matrix element");
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value().real());
    }
  }
  real.setFromTriplets(t.begin(), t.end());
  return real;
}

/// Total magnetization S^3_tot as a diagonal matrix in the tensor-product basis.
inline Eigen::SparseMatrix<double> total_magnetization(const Lattice& lattice) {
  const int sites = lattice.size();
  const std::uint64_t dim = std::uint64_t{1} << sites;
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(dim);
  for (std::uint64_t s = 0; s < dim; ++s) {
    const int down = std::popcount(s);
    t.emplace_back(static_cast<int>(s), static_cast<int>(s), 0.5 * (sites - down) - 0.5 * down);
  }
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Block of the oracle on the n-particle product states, ordered by the sector basis.
inline Eigen::MatrixXd oracle_block(const Eigen::SparseMatrix<double>& full, const SectorBasis& basis) {
  const int sites = basis.lattice().size();
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd block(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto tr = static_cast<Eigen::Index>(tensor_index(basis.mask(static_cast<std::size_t>(r)), sites));
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto tc = static_cast<Eigen::Index>(tensor_index(basis.mask(static_cast<std::size_t>(c)), sites));
      block(r, c) = full.coeff(tr, tc);
    }
  }
  return block;
}

}  // namespace droplet
