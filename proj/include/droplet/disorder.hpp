#pragma once

// Seeded iid random potentials and the two disorder-averaged experiments:
// decay of the mean local density of states in the particle number, and the
// |B|-dependence of the averaged exponentiated droplet-subspace entropy.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "droplet/configspace.hpp"
#include "droplet/entanglement.hpp"
#include "droplet/errors.hpp"
#include "droplet/fitting.hpp"
#include "droplet/hamiltonian.hpp"
#include "droplet/random.hpp"
#include "droplet/spectral.hpp"

namespace droplet {

enum class Distribution { uniform, bernoulli, constant };

inline std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::uniform:
      return "uniform";
    case Distribution::bernoulli:
      return "bernoulli";
    default:
      return "constant";
  }
}

/// Law of the iid site potential b_x >= 0, with the sample count and master seed.
///
/// uniform: first = lo, second = hi; bernoulli: first = p, second = magnitude;
/// constant: first = value.
struct DisorderSpec {
  Distribution kind = Distribution::uniform;
  double first = 0.0;
  double second = 2.0;
  int samples = 1;
  std::uint64_t master_seed = 0;

  static DisorderSpec uniform(double lo, double hi, int samples = 1, std::uint64_t seed = 0) {
    return {Distribution::uniform, lo, hi, samples, seed};
  }
  static DisorderSpec bernoulli(double p, double magnitude, int samples = 1, std::uint64_t seed = 0) {
    return {Distribution::bernoulli, p, magnitude, samples, seed};
  }
  static DisorderSpec constant(double value, int samples = 1, std::uint64_t seed = 0) {
    return {Distribution::constant, value, 0.0, samples, seed};
  }

  void validate() const {
    switch (kind) {
      case Distribution::uniform:
        if (!(first >= 0.0 && second >= first && std::isfinite(second))) {
          throw DomainError("DisorderSpec: uniform(lo, hi) needs 0 <= lo <= hi");
        }
        break;
      case Distribution::bernoulli:
        if (!(first >= 0.0 && first <= 1.0)) throw DomainError("DisorderSpec: bernoulli p must lie in [0, 1]");
        if (!(second >= 0.0 && std::isfinite(second))) throw DomainError("DisorderSpec: bernoulli magnitude must be >= 0");
        break;
      case Distribution::constant:
        if (!(first >= 0.0 && std::isfinite(first))) throw DomainError("DisorderSpec: constant value must be >= 0");
        break;
    }
  }

  /// False for point masses; the disorder-averaged statements need a non-degenerate law.
  bool nontrivial() const {
    switch (kind) {
      case Distribution::uniform:
        return second > first;
      case Distribution::bernoulli:
        return first > 0.0 && first < 1.0 && second > 0.0;
      default:
        return false;
    }
  }

  std::string describe() const {
    std::ostringstream s;
    s.precision(17);
    switch (kind) {
      case Distribution::uniform:
        s << "uniform(" << first << "," << second << ")";
        break;
      case Distribution::bernoulli:
        s << "bernoulli(" << first << "," << second << ")";
        break;
      default:
        s << "constant(" << first << ")";
    }
    return s.str();
  }
};

inline constexpr std::uint64_t kFieldStream = 0xf1e1d;

/// Field for sample `sample_index`, by lattice index; a function of (master_seed, sample_index) only.
inline std::vector<double> draw_field(const DisorderSpec& spec, std::uint64_t sample_index, const Lattice& lattice) {
  spec.validate();
  Rng rng = make_rng(spec.master_seed, kFieldStream, sample_index);
  std::vector<double> b(static_cast<std::size_t>(lattice.size()));
  for (auto& v : b) {
    const double u = uniform01(rng);
    switch (spec.kind) {
      case Distribution::uniform:
        v = spec.first + (spec.second - spec.first) * u;
        break;
      case Distribution::bernoulli:
        v = u < spec.first ? spec.second : 0.0;
        break;
      case Distribution::constant:
        v = spec.first;
        break;
    }
  }
  return b;
}

struct MeanEstimate {
  double mean = 0.0;
  std::optional<double> standard_error;  ///< absent for a single sample
};

inline MeanEstimate sample_mean(const std::vector<double>& v) {
  if (v.empty()) throw DomainError("sample_mean: no samples");
  MeanEstimate m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.standard_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Mean local density of states versus particle number.

struct DosDecayRow {
  int n = 0;
  Configuration probe;
  MeanEstimate estimate;
  std::vector<double> samples;
};

struct DosDecayResult {
  std::vector<DosDecayRow> rows;
  std::optional<ExponentialFit> fit;  ///< ln(mean) against n; c = fit->mu
  bool trivial_support = false;
  bool decays = false;  ///< fitted c > 0 under a non-trivial law
  std::vector<std::string> notices;
};

/// Default window J for the particle-number decay experiment.
inline constexpr EnergyWindow kDefaultDosWindow{0.0, 3.0};

inline DosDecayResult dos_decay_experiment(const DisorderSpec& spec, double delta_inv, const Lattice& lattice,
                                           EnergyWindow window, const std::map<int, Configuration>& probes,
                                           BoundaryMode mode = BoundaryMode::standard) {
  spec.validate();
  if (spec.samples < 1) throw DomainError("dos_decay_experiment: samples must be >= 1");
  if (probes.empty()) throw DomainError("dos_decay_experiment: no probes");
  if (!(window.hi >= window.lo)) throw DomainError("dos_decay_experiment: empty window");
  DosDecayResult out;
  for (const auto& [n, x] : probes) {
    if (x.count() != n || !x.fits(lattice)) {
      throw DomainError("dos_decay_experiment: probe " + x.to_string() + " is not an n=" + std::to_string(n) +
                        " configuration of the lattice");
    }
    out.rows.push_back({n, x, {}, {}});
  }
  for (int s = 0; s < spec.samples; ++s) {
    const ModelParams params(delta_inv, mode, draw_field(spec, static_cast<std::uint64_t>(s), lattice));
    for (auto& row : out.rows) {
      const auto basis = enumerate_sector(lattice, row.n);
      const SpectralData sd = eigensolve(assemble_sector(params, basis));
      const auto i = static_cast<Eigen::Index>(basis->index_of(row.probe));
      double v = 0;
      for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
        const double e = sd.eigenvalues(k);
        if (e >= window.lo - kWindowEdgeSlack && e <= window.hi + kWindowEdgeSlack) v += sd.eigenvectors(i, k) * sd.eigenvectors(i, k);
      }
      row.samples.push_back(v);
    }
  }
  std::vector<DecayPoint> pts;
  for (auto& row : out.rows) {
    row.estimate = sample_mean(row.samples);
    pts.push_back({static_cast<double>(row.n), row.estimate.mean});
  }
  out.trivial_support = !spec.nontrivial();
  if (out.trivial_support) out.notices.push_back("disorder law " + spec.describe() + " is a point mass; decay requires non-trivial support");
  try {
    out.fit = fit_exponential_envelope(pts);
  } catch (const DomainError& e) {
    out.notices.push_back(e.what());
  }
  out.decays = out.fit && out.fit->mu > 0.0 && !out.trivial_support;
  return out;
}

// ---------------------------------------------------------------------------
// Averaged exponentiated entropy versus |B|.

struct AreaLawRow {
  int block_size = 0;
  MeanEstimate estimate;  ///< of exp{(1 - epsilon) S}, S the estimated sup (lower bound)
  std::vector<double> samples;
  int vacuum_only_samples = 0;
};

struct AreaLawResult {
  std::vector<AreaLawRow> rows;
  std::optional<LineFit> trend;  ///< mean against ln|B|
  double trend_tol = 0.05;
  bool flat = false;
  std::vector<std::string> notices;
};

inline constexpr double kTrendTolerance = 0.05;

struct AreaLawOptions {
  std::vector<int> block_sizes{2, 3, 4, 5};
  double alpha = 1.0;
  double epsilon = 0.5;
  SupOptions sup;
  double trend_tol = kTrendTolerance;
};

inline AreaLawResult area_law_experiment(const DisorderSpec& spec, double delta_inv, const Lattice& lattice,
                                         DropletWindow window, const AreaLawOptions& opt,
                                         BoundaryMode mode = BoundaryMode::standard) {
  spec.validate();
  if (spec.samples < 1) throw DomainError("area_law_experiment: samples must be >= 1");
  if (!(opt.epsilon > 0.0 && opt.epsilon < std::min(opt.alpha, 1.0))) {
    throw DomainError("area_law_experiment: epsilon must satisfy 0 < epsilon < min{alpha, 1}");
  }
  for (std::size_t i = 1; i < opt.block_sizes.size(); ++i) {
    if (opt.block_sizes[i] <= opt.block_sizes[i - 1]) throw DomainError("area_law_experiment: block sizes must increase");
  }
  check_droplet_window(window, delta_inv);
  AreaLawResult out;
  out.trend_tol = opt.trend_tol;
  for (int len : opt.block_sizes) {
    AreaLawRow row;
    row.block_size = len;
    out.rows.push_back(row);
  }
  for (int s = 0; s < spec.samples; ++s) {
    const ModelParams params(delta_inv, mode, draw_field(spec, static_cast<std::uint64_t>(s), lattice));
    const auto proj = droplet_projector(solve_sectors(params, lattice), window);
    const auto blocks = droplet_blocks(proj, 0, proj.n_max());
    const bool vacuum_only = proj.rank() <= 1;
    for (std::size_t b = 0; b < out.rows.size(); ++b) {
      auto& row = out.rows[b];
      const Bipartition part(lattice, centered_interval(lattice, row.block_size));
      const SubspaceEntropy space(blocks, part);
      SupOptions sup = opt.sup;
      sup.seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(s), b);
      const SupEstimate est = estimate_sup_entropy(space, opt.alpha, sup);
      row.samples.push_back(std::exp((1.0 - opt.epsilon) * est.value));
      if (vacuum_only || est.empty) ++row.vacuum_only_samples;
    }
  }
  std::vector<double> x, y;
  for (auto& row : out.rows) {
    row.estimate = sample_mean(row.samples);
    x.push_back(std::log(static_cast<double>(row.block_size)));
    y.push_back(row.estimate.mean);
  }
  if (out.rows.size() >= 2) {
    out.trend = fit_line(x, y);
    out.flat = out.trend->slope <= out.trend_tol;
  } else {
    out.notices.push_back("a single block size admits no trend; reported as flat");
    out.flat = true;
  }
  return out;
}

}  // namespace droplet
