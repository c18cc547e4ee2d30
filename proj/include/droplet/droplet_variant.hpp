#pragma once

// Spectral structure of the chain with the droplet boundary field
// beta = sqrt(1 - delta_inv^2) / 2: the |Lambda| - n + 1 lowest eigenvalues of
// each sector, their spread around sqrt(1 - delta_inv^2) and the gap above them.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "droplet/configspace.hpp"
#include "droplet/errors.hpp"
#include "droplet/hamiltonian.hpp"
#include "droplet/spectral.hpp"

namespace droplet {

struct DropletSpectrumReport {
  int n = 0;
  int lowest_count = 0;
  double band_center = 0.0;
  double band_width = 0.0;     ///< max |lambda_i - band_center| over the lowest_count eigenvalues
  std::optional<double> gap;   ///< absent when the sector has no eigenvalue above the band
  double clustered_mass = 0.0; ///< min over band eigenvectors of their weight on clustered configurations
  std::vector<double> band;
};

inline DropletSpectrumReport droplet_spectrum_report(double delta_inv, const Lattice& lattice, int n) {
  if (!(delta_inv > 0.0 && delta_inv < 1.0)) {
    throw DomainError("droplet_spectrum_report: delta_inv must lie in (0, 1); the Ising case is diagonal");
  }
  if (n < 1 || n > lattice.size()) throw DomainError("droplet_spectrum_report: n must lie in [1, |Lambda|]");
  const SectorMatrix m = assemble_sector(ModelParams(delta_inv, BoundaryMode::droplet), lattice, n);
  const SpectralData s = eigensolve(m);
  DropletSpectrumReport r;
  r.n = n;
  r.lowest_count = lattice.size() - n + 1;
  r.band_center = std::sqrt(1.0 - delta_inv * delta_inv);
  r.clustered_mass = 1.0;
  for (int i = 0; i < r.lowest_count; ++i) {
    const double e = s.eigenvalues(i);
    r.band.push_back(e);
    r.band_width = std::max(r.band_width, std::abs(e - r.band_center));
    double mass = 0.0;
    for (std::size_t k = 0; k < s.dimension(); ++k) {
      if (cluster_count_mask(m.mask(k)) <= 1) mass += s.eigenvectors(static_cast<Eigen::Index>(k), i) * s.eigenvectors(static_cast<Eigen::Index>(k), i);
    }
    r.clustered_mass = std::min(r.clustered_mass, mass);
  }
  if (r.lowest_count < s.eigenvalues.size()) r.gap = s.eigenvalues(r.lowest_count) - s.eigenvalues(r.lowest_count - 1);
  return r;
}

struct GapLimitRow {
  int n = 0;
  double gap = 0.0;
  double deficit = 0.0;  ///< (1 - delta_inv) - gap
};

struct GapLimitCheck {
  std::vector<GapLimitRow> rows;
  /// Gap nondecreasing along n_list.
  bool trend_ok = true;
  /// |deficit| at the largest n is within the confinement scale
  /// delta_inv (1 - cos(pi / (|Lambda| - n + 2))) of a particle hopping over
  /// the |Lambda| - n + 1 cluster positions.
  bool limit_ok = true;
  double limit_tolerance = 0.0;
  /// Deficit positive and strictly decreasing along n_list.
  bool deficit_positive_decreasing = true;
  bool verdict = true;  ///< trend_ok && limit_ok
};

inline GapLimitCheck gap_limit_check(double delta_inv, const Lattice& lattice, const std::vector<int>& n_list) {
  if (n_list.empty()) throw DomainError("gap_limit_check: n_list is empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw DomainError("gap_limit_check: n_list must be increasing");
  }
  GapLimitCheck out;
  for (int n : n_list) {
    const auto r = droplet_spectrum_report(delta_inv, lattice, n);
    if (!r.gap) {
      throw DomainError("gap_limit_check: sector n=" + std::to_string(n) + " has no eigenvalue above the band");
    }
    out.rows.push_back({n, *r.gap, (1.0 - delta_inv) - *r.gap});
  }
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    if (out.rows[i].deficit <= 0.0) out.deficit_positive_decreasing = false;
    if (i > 0) {
      if (out.rows[i].gap < out.rows[i - 1].gap) out.trend_ok = false;
      if (out.rows[i].deficit >= out.rows[i - 1].deficit) out.deficit_positive_decreasing = false;
    }
  }
  const int positions = lattice.size() - out.rows.back().n + 1;
  out.limit_tolerance = delta_inv * (1.0 - std::cos(std::numbers::pi / (positions + 1)));
  if (out.rows.size() > 1) out.limit_ok = std::abs(out.rows.back().deficit) <= out.limit_tolerance;
  out.verdict = out.trend_ok && out.limit_ok;
  return out;
}

}  // namespace droplet
