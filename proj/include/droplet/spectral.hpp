#pragma once

// Sector eigendecompositions, spectral projectors onto energy windows, the
// restricted Green's function on non-clustered configurations, and the
// exponential-decay scans built on them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "droplet/amplitude.hpp"
#include "droplet/configspace.hpp"
#include "droplet/errors.hpp"
#include "droplet/fitting.hpp"
#include "droplet/hamiltonian.hpp"

namespace droplet {

inline constexpr std::size_t kMaxSectorDimension = 15000;
inline constexpr double kEigenTolerance = 1e-10;
inline constexpr double kWindowEdgeSlack = 1e-12;

/// Ascending eigenvalues and orthonormal eigenvectors (columns) of a sector matrix.
struct SpectralData {
  SectorBasisPtr basis;
  std::vector<std::size_t> ordinals;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  int particles() const { return basis->particles(); }
  std::size_t dimension() const { return ordinals.size(); }
};

inline SpectralData eigensolve(const SectorMatrix& matrix) {
  const std::size_t dim = matrix.dimension();
  if (dim == 0) throw DomainError("eigensolve: empty matrix");
  if (dim > kMaxSectorDimension) {
    throw ResourceError("eigensolve: sector dimension " + std::to_string(dim) + " exceeds the cap of " +
                        std::to_string(kMaxSectorDimension) + "; reduce L or n_max");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix.entries);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigensolve: no convergence for n=" + std::to_string(matrix.basis->particles()) +
                       " sector of dimension " + std::to_string(dim));
  }
  return {matrix.basis, matrix.ordinals, solver.eigenvalues(), solver.eigenvectors()};
}

/// max_i ||M v_i - lambda_i v_i|| / max(1, ||M||_F).
inline double max_residual(const SectorMatrix& matrix, const SpectralData& s) {
  const double scale = std::max(1.0, matrix.entries.norm());
  const Eigen::MatrixXd r = matrix.entries * s.eigenvectors - s.eigenvectors * s.eigenvalues.asDiagonal();
  return r.colwise().norm().maxCoeff() / scale;
}

inline double orthonormality_error(const SpectralData& s) {
  const auto k = s.eigenvectors.cols();
  return (s.eigenvectors.transpose() * s.eigenvectors - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
}

/// Full eigendecompositions of sectors 0..n_max of one model.
struct ModelSpectrum {
  Lattice lattice;
  ModelParams params;
  std::vector<SpectralData> sectors;  ///< index n

  const SpectralData& sector(int n) const { return sectors.at(static_cast<std::size_t>(n)); }
  int n_max() const { return static_cast<int>(sectors.size()) - 1; }
};

inline ModelSpectrum solve_sectors(const ModelParams& params, const Lattice& lattice, int n_max = -1) {
  if (n_max < 0 || n_max > lattice.size()) n_max = lattice.size();
  ModelSpectrum out{lattice, params, {}};
  out.sectors.reserve(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) out.sectors.push_back(eigensolve(assemble_sector(params, lattice, n)));
  return out;
}

// ---------------------------------------------------------------------------
// Ground state and thresholds.

struct GroundStateReport {
  double min_eigenvalue = 0.0;
  int min_sector = 0;
  int zero_modes = 0;  ///< eigenvalues within tolerance of 0, over all sectors
  std::vector<double> lowest_per_sector;
};

/// Checks h >= 0 with zero a simple eigenvalue attained only in the vacuum sector.
inline GroundStateReport ground_state_check(const ModelParams& params, const Lattice& lattice,
                                            double tol = kEigenTolerance) {
  if (!params.zero_field() || params.mode() != BoundaryMode::standard) {
    throw DomainError("ground_state_check: requires b = 0 and the standard boundary field");
  }
  GroundStateReport r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= lattice.size(); ++n) {
    const SpectralData s = eigensolve(assemble_sector(params, lattice, n));
    const double low = s.eigenvalues(0);
    r.lowest_per_sector.push_back(low);
    if (low < r.min_eigenvalue) {
      r.min_eigenvalue = low;
      r.min_sector = n;
    }
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
      if (s.eigenvalues(i) < -tol) {
        throw VerificationError("ground_state_check: negative eigenvalue " + std::to_string(s.eigenvalues(i)) +
                                " in sector n=" + std::to_string(n));
      }
      if (std::abs(s.eigenvalues(i)) <= tol) {
        ++r.zero_modes;
        if (n != 0) {
          throw VerificationError("ground_state_check: zero eigenvalue " + std::to_string(s.eigenvalues(i)) +
                                  " outside the vacuum, sector n=" + std::to_string(n));
        }
      }
    }
  }
  if (r.zero_modes != 1 || std::abs(r.min_eigenvalue) > tol) {
    throw VerificationError("ground_state_check: expected one zero eigenvalue, found " +
                            std::to_string(r.zero_modes) + " (min " + std::to_string(r.min_eigenvalue) +
                            " in sector n=" + std::to_string(r.min_sector) + ")");
  }
  return r;
}

struct ThresholdReport {
  int k = 1;
  /// min over sectors of lambda_min(Q h Q) - k (1 - delta_inv); +inf when every restriction is empty.
  double margin = std::numeric_limits<double>::infinity();
  /// Same with H (params as given, field and boundary mode included).
  double margin_full = std::numeric_limits<double>::infinity();
  int worst_sector = -1;
  bool chain_holds = true;  ///< lambda_min(Q H Q) >= lambda_min(Q h Q) in every sector
  bool empty = true;
};

inline ThresholdReport threshold_check(const ModelParams& params, const Lattice& lattice, int k,
                                       double tol = kEigenTolerance) {
  if (k < 1) throw DomainError("threshold_check: k must be >= 1");
  const ModelParams bare = params.bare();
  const double level = k * (1.0 - params.delta_inv());
  ThresholdReport r;
  r.k = k;
  for (int n = 0; n <= lattice.size(); ++n) {
    auto basis = enumerate_sector(lattice, n);
    const RestrictionMask mask = cluster_mask(*basis, k);
    if (mask.empty()) continue;
    r.empty = false;
    const SectorMatrix h = restrict(assemble_sector(bare, basis), mask);
    const SectorMatrix H = restrict(assemble_sector(params, basis), mask);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sh(h.entries, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sH(H.entries, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sdiff(H.entries - h.entries, Eigen::EigenvaluesOnly);
    const double mh = sh.eigenvalues()(0) - level;
    const double mH = sH.eigenvalues()(0) - level;
    if (mh < r.margin) {
      r.margin = mh;
      r.worst_sector = n;
    }
    r.margin_full = std::min(r.margin_full, mH);
    if (mH < mh - tol || sdiff.eigenvalues()(0) < -tol) r.chain_holds = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Energy windows and projectors.

/// The droplet window I = [0, e_max].
struct DropletWindow {
  double e_max = 0.0;

  /// Upper limit 2(1 - 3 delta_inv) for e_max (strict).
  static double limit(double delta_inv) { return 2.0 * (1.0 - 3.0 * delta_inv); }
  /// Default e_max = 0.9 of the limit.
  static DropletWindow automatic(double delta_inv) {
    const double lim = limit(delta_inv);
    if (!(lim > 0.0)) {
      throw DomainError("DropletWindow: no admissible window, 2(1 - 3*delta_inv) = " + std::to_string(lim) +
                        " <= 0");
    }
    return {0.9 * lim};
  }
  bool valid_for(double delta_inv) const { return e_max >= 0.0 && e_max < limit(delta_inv); }
};

/// General compact energy window [lo, hi].
struct EnergyWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// Eigenpairs of one sector whose eigenvalues lie in the window.
struct SelectedEigenpairs {
  SectorBasisPtr basis;
  std::vector<std::size_t> ordinals;
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;  ///< columns
  int edge_ties = 0;        ///< eigenvalues within kWindowEdgeSlack of the upper edge

  int count() const { return static_cast<int>(vectors.cols()); }
};

struct SpectralProjector {
  Lattice lattice;
  EnergyWindow window;
  std::vector<SelectedEigenpairs> sectors;  ///< index n

  int rank() const {
    int r = 0;
    for (const auto& s : sectors) r += s.count();
    return r;
  }
  int n_max() const { return static_cast<int>(sectors.size()) - 1; }
  int edge_ties() const {
    int t = 0;
    for (const auto& s : sectors) t += s.edge_ties;
    return t;
  }

  /// Dense P restricted to sector n.
  Eigen::MatrixXd sector_matrix(int n) const {
    const auto& s = sectors.at(static_cast<std::size_t>(n));
    return s.vectors * s.vectors.transpose();
  }
};

using DropletProjector = SpectralProjector;

inline SpectralProjector spectral_projector(const ModelSpectrum& spectrum, EnergyWindow window) {
  SpectralProjector p{spectrum.lattice, window, {}};
  for (const auto& s : spectrum.sectors) {
    std::vector<Eigen::Index> cols;
    int ties = 0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
      const double e = s.eigenvalues(i);
      if (e >= window.lo - kWindowEdgeSlack && e <= window.hi + kWindowEdgeSlack) {
        cols.push_back(i);
        if (std::abs(e - window.hi) <= kWindowEdgeSlack) ++ties;
      }
    }
    SelectedEigenpairs sel;
    sel.basis = s.basis;
    sel.ordinals = s.ordinals;
    sel.edge_ties = ties;
    sel.energies.resize(static_cast<Eigen::Index>(cols.size()));
    sel.vectors.resize(s.eigenvectors.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      sel.energies(static_cast<Eigen::Index>(c)) = s.eigenvalues(cols[c]);
      sel.vectors.col(static_cast<Eigen::Index>(c)) = s.eigenvectors.col(cols[c]);
    }
    p.sectors.push_back(std::move(sel));
  }
  return p;
}

inline void check_droplet_window(const DropletWindow& window, double delta_inv) {
  if (!window.valid_for(delta_inv)) {
    std::ostringstream msg;
    msg << "droplet window e_max=" << window.e_max << " violates 0 <= e_max < 2(1 - 3*delta_inv) = "
        << DropletWindow::limit(delta_inv);
    throw DomainError(msg.str());
  }
}

inline DropletProjector droplet_projector(const ModelSpectrum& spectrum, DropletWindow window,
                                          bool allow_invalid_window = false) {
  if (!allow_invalid_window) check_droplet_window(window, spectrum.params.delta_inv());
  return spectral_projector(spectrum, {0.0, window.e_max});
}

inline DropletProjector droplet_projector(const ModelParams& params, const Lattice& lattice, DropletWindow window,
                                          int n_max, bool allow_invalid_window = false) {
  if (!allow_invalid_window) check_droplet_window(window, params.delta_inv());
  return droplet_projector(solve_sectors(params, lattice, n_max), window, true);
}

/// N(x) = <delta_x, P delta_x>.
inline double local_dos(const SpectralProjector& projector, const Configuration& x) {
  if (!x.fits(projector.lattice)) throw DomainError("local_dos: configuration outside the lattice");
  if (x.count() > projector.n_max()) return 0.0;
  const auto& s = projector.sectors[static_cast<std::size_t>(x.count())];
  if (s.count() == 0) return 0.0;
  const auto row = static_cast<Eigen::Index>(s.basis->index_of(x));
  return s.vectors.row(row).squaredNorm();
}

/// N(x) for every ordinal of sector n.
inline Eigen::VectorXd local_dos_sector(const SpectralProjector& projector, int n) {
  const auto& s = projector.sectors.at(static_cast<std::size_t>(n));
  if (s.count() == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.basis->size()));
  return s.vectors.rowwise().squaredNorm();
}

// ---------------------------------------------------------------------------
// Restricted Green's function G2(x, y; E) = <x, (Q2 (H - E) Q2)^{-1} y>.

inline constexpr std::size_t kGreensMaterializeCap = 2000;

class GreensSlice {
 public:
  GreensSlice(const ModelParams& params, const SectorBasisPtr& basis, double energy) : energy_(energy) {
    const double limit = DropletWindow::limit(params.delta_inv());
    if (!(energy >= 0.0 && energy < limit)) {
      std::ostringstream msg;
      msg << "greens_function: energy " << energy << " outside [0, 2(1 - 3*delta_inv)) = [0, " << limit << ")";
      throw DomainError(msg.str());
    }
    const SectorMatrix full = assemble_sector(params, basis);
    mask_ = cluster_mask(*basis, 2);
    restricted_ = restrict(full, mask_);
    const auto dim = static_cast<Eigen::Index>(mask_.size());
    if (dim > 0) {
      llt_.compute(restricted_.entries - energy * Eigen::MatrixXd::Identity(dim, dim));
      if (llt_.info() != Eigen::Success) {
        throw NumericError("greens_function: Q2 (H - E) Q2 is not positive definite at E=" + std::to_string(energy) +
                           "; the window is too large or delta_inv >= 1/3");
      }
    }
  }

  double energy() const { return energy_; }
  const RestrictionMask& mask() const { return mask_; }
  std::size_t dimension() const { return mask_.size(); }
  Configuration config(std::size_t local) const { return restricted_.config(local); }

  /// Column j of the inverse, computed on first use.
  const Eigen::VectorXd& column(std::size_t j) const {
    std::lock_guard lock(mutex_);
    auto it = columns_.find(j);
    if (it == columns_.end()) {
      if (j >= dimension()) throw DomainError("GreensSlice::column: index out of range");
      Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension()));
      e(static_cast<Eigen::Index>(j)) = 1.0;
      it = columns_.emplace(j, llt_.solve(e)).first;
    }
    return it->second;
  }

  double value(std::size_t i, std::size_t j) const { return column(j)(static_cast<Eigen::Index>(i)); }

  Eigen::MatrixXd materialize() const {
    if (dimension() > kGreensMaterializeCap) {
      throw ResourceError("GreensSlice::materialize: dimension " + std::to_string(dimension()) +
                          " above the cap; use column()");
    }
    const auto dim = static_cast<Eigen::Index>(dimension());
    return llt_.solve(Eigen::MatrixXd::Identity(dim, dim));
  }

 private:
  double energy_;
  RestrictionMask mask_;
  SectorMatrix restricted_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, Eigen::VectorXd> columns_;
};

/// Slices keyed by (params, n, E); insertion of distinct keys is safe from several threads.
class GreensCache {
 public:
  std::shared_ptr<const GreensSlice> get(const ModelParams& params, const SectorBasisPtr& basis, double energy) {
    std::ostringstream key;
    key.precision(17);
    key << params.delta_inv() << '|' << to_string(params.mode()) << '|' << basis->lattice().half_length() << '|'
        << basis->particles() << '|' << energy;
    for (double b : params.field()) key << ',' << b;
    std::lock_guard lock(mutex_);
    auto it = slices_.find(key.str());
    if (it != slices_.end()) return it->second;
    auto slice = std::make_shared<const GreensSlice>(params, basis, energy);
    slices_.emplace(key.str(), slice);
    return slice;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return slices_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const GreensSlice>> slices_;
};

inline std::shared_ptr<const GreensSlice> greens_function(const ModelParams& params, const SectorBasisPtr& basis,
                                                          double energy) {
  return std::make_shared<const GreensSlice>(params, basis, energy);
}

// ---------------------------------------------------------------------------
// Decay scans.

/// Exponential fit of an envelope restricted to its bulk range: distances up to
/// floor(bulk_fraction * largest distance) and values above noise_floor * max.
inline ExponentialFit fit_bulk_envelope(const std::vector<DecayPoint>& envelope, double bulk_fraction,
                                        double noise_floor, double* cap_out = nullptr) {
  double dmax = 0, vmax = 0;
  for (const auto& p : envelope) {
    dmax = std::max(dmax, p.distance);
    vmax = std::max(vmax, p.value);
  }
  const double cap = std::floor(bulk_fraction * dmax);
  std::vector<DecayPoint> used;
  for (const auto& p : envelope) {
    if (p.distance <= cap && p.value > noise_floor * vmax) used.push_back(p);
  }
  if (cap_out != nullptr) *cap_out = cap;
  return fit_exponential_envelope(used);
}

struct CombesThomasReport {
  int n = 0;
  double energy = 0.0;
  std::vector<DecayPoint> envelope;  ///< max |G2(x, y)| per d(x, y)
  double fit_max_distance = 0.0;
  ExponentialFit fit;
  double max_asymmetry = 0.0;  ///< max |G(x,y) - G(y,x)| / max |G|
};

inline constexpr double kBulkFraction = 2.0 / 3.0;
inline constexpr double kGreensNoiseFloor = 1e-12;

inline CombesThomasReport combes_thomas_scan(const GreensSlice& g, double bulk_fraction = kBulkFraction,
                                             double noise_floor = kGreensNoiseFloor) {
  CombesThomasReport r;
  r.energy = g.energy();
  const std::size_t dim = g.dimension();
  if (dim == 0) throw DomainError("combes_thomas_scan: no non-clustered configurations in this sector");
  r.n = g.config(0).count();
  const Eigen::MatrixXd inv = g.materialize();
  std::vector<Configuration> configs;
  configs.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) configs.push_back(g.config(i));
  std::map<long, double> env;
  const double gmax = inv.cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = std::abs(inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      const long d = config_distance(configs[i], configs[j]);
      auto [it, inserted] = env.emplace(d, v);
      if (!inserted) it->second = std::max(it->second, v);
      r.max_asymmetry = std::max(r.max_asymmetry, std::abs(inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                                                 inv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) /
                                                         gmax);
    }
  }
  for (const auto& [d, v] : env) r.envelope.push_back({static_cast<double>(d), v});
  r.fit = fit_bulk_envelope(r.envelope, bulk_fraction, noise_floor, &r.fit_max_distance);
  return r;
}

struct LocalDosReport {
  std::vector<DecayPoint> envelope;  ///< max N(x) per distance_to_clustered(x)
  double fit_max_distance = 0.0;
  ExponentialFit fit;
  double max_dos = 0.0;
  double min_dos = 0.0;
  double trace = 0.0;  ///< sum_x N(x), equals the rank
  /// max over selected eigenvectors psi and configurations x of |psi(x)|^2 - N(x).
  double max_amplitude_excess = -std::numeric_limits<double>::infinity();
};

inline constexpr double kDosNoiseFloor = 1e-24;

inline LocalDosReport local_dos_scan(const SpectralProjector& projector, double bulk_fraction = kBulkFraction,
                                     double noise_floor = kDosNoiseFloor) {
  LocalDosReport r;
  r.min_dos = std::numeric_limits<double>::infinity();
  std::map<long, double> env;
  for (int n = 0; n <= projector.n_max(); ++n) {
    const auto& s = projector.sectors[static_cast<std::size_t>(n)];
    const Eigen::VectorXd dos = local_dos_sector(projector, n);
    for (Eigen::Index i = 0; i < dos.size(); ++i) {
      const double v = dos(i);
      r.max_dos = std::max(r.max_dos, v);
      r.min_dos = std::min(r.min_dos, v);
      r.trace += v;
      const long d = distance_to_clustered(s.basis->config(static_cast<std::size_t>(i)), projector.lattice);
      auto [it, inserted] = env.emplace(d, v);
      if (!inserted) it->second = std::max(it->second, v);
      for (Eigen::Index c = 0; c < s.vectors.cols(); ++c) {
        r.max_amplitude_excess = std::max(r.max_amplitude_excess, s.vectors(i, c) * s.vectors(i, c) - v);
      }
    }
  }
  for (const auto& [d, v] : env) r.envelope.push_back({static_cast<double>(d), v});
  r.fit = fit_bulk_envelope(r.envelope, bulk_fraction, noise_floor, &r.fit_max_distance);
  return r;
}

// ---------------------------------------------------------------------------
// Time evolution.

/// psi_t = exp(-i t H) psi, applied sector by sector in the eigenbasis.
inline AmplitudeMap evolve(const ModelSpectrum& spectrum, const AmplitudeMap& psi, double t) {
  require_normalized(psi, 1e-8, "evolve");
  AmplitudeMap out(psi.lattice());
  for (const auto& [n, sec] : psi.sectors()) {
    if (n > spectrum.n_max()) throw DomainError("evolve: sector n=" + std::to_string(n) + " was not diagonalized");
    const SpectralData& s = spectrum.sector(n);
    const Eigen::VectorXcd coeff = s.eigenvectors.transpose().cast<std::complex<double>>() * sec.values;
    Eigen::VectorXcd phased(coeff.size());
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
      phased(i) = coeff(i) * std::polar(1.0, -s.eigenvalues(i) * t);
    }
    out.add(s.basis, s.eigenvectors.cast<std::complex<double>>() * phased);
  }
  return out;
}

}  // namespace droplet
