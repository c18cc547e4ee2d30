#pragma once

// One pipeline per command; each fills the tables and verdicts of a record.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "droplet/bounds.hpp"
#include "droplet/cli/config.hpp"
#include "droplet/cli/record.hpp"
#include "droplet/disorder.hpp"
#include "droplet/droplet_variant.hpp"
#include "droplet/entanglement.hpp"
#include "droplet/random.hpp"
#include "droplet/spectral.hpp"

namespace droplet::cli {

inline constexpr double kResidualTolerance = 1e-10;
inline constexpr double kMarginTolerance = -1e-9;
inline constexpr double kMinDecayRate = 0.05;
inline constexpr double kAmplitudeSlack = 1e-12;
inline constexpr double kFitResidualTolerance = 0.2;
inline constexpr double kClusteredMassFloor = 0.9;
inline constexpr double kEnvelopeSlack = 0.1;

namespace commands {

/// Short decimal form for verdict names.
inline std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline ModelParams params_of(const ExperimentConfig& c) {
  return ModelParams(c.delta_inv, c.boundary, draw_field(c.disorder, 0, c.lattice()));
}

inline SupOptions sup_options(const ExperimentConfig& c, std::uint64_t tag) {
  SupOptions o;
  o.random_draws = c.draws;
  o.seed = derive_seed(c.seed, tag, 0);
  return o;
}

inline void spectrum(const ExperimentConfig& c, ResultRecord& r) {
  const ModelParams p = params_of(c);
  const Lattice lat = c.lattice();
  Table t("eigenvalues", {"n", "index", "eigenvalue"});
  double residual = 0.0, ortho = 0.0;
  for (int n = 0; n <= lat.size(); ++n) {
    const SectorMatrix m = assemble_sector(p, lat, n);
    const SpectralData s = eigensolve(m);
    residual = std::max(residual, max_residual(m, s));
    ortho = std::max(ortho, orthonormality_error(s));
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) t.add_row({n, static_cast<long>(i), num(s.eigenvalues(i))});
  }
  r.tables.push_back(std::move(t));
  r.verdict("eigen_residual", residual <= kResidualTolerance, num(residual), kResidualTolerance);
  r.verdict("orthonormality", ortho <= kResidualTolerance, num(ortho), kResidualTolerance);
  if (p.zero_field() && p.mode() == BoundaryMode::standard) {
    try {
      const auto g = ground_state_check(p, lat);
      r.verdict("ground_state", true, num(g.min_eigenvalue), kEigenTolerance, "zero is simple, in the n=0 sector");
    } catch (const VerificationError& e) {
      r.verdict("ground_state", false, nullptr, kEigenTolerance, e.what());
    }
  } else {
    r.notices.push_back("ground-state check skipped: requires b = 0 and the standard boundary field");
  }
  if (c.e_max && DropletWindow{*c.e_max}.valid_for(c.delta_inv)) {
    const auto proj = droplet_projector(p, lat, DropletWindow{*c.e_max}, lat.size());
    r.notices.push_back("droplet projector rank at e_max=" + short_num(*c.e_max) + ": " + std::to_string(proj.rank()));
  }
}

inline void thresholds(const ExperimentConfig& c, ResultRecord& r) {
  const ModelParams p = params_of(c);
  Table t("thresholds", {"k", "margin", "margin_full", "worst_sector", "chain_holds", "empty"});
  for (int k : c.k) {
    const auto th = threshold_check(p, c.lattice(), k);
    t.add_row({k, num(th.margin), num(th.margin_full), th.worst_sector, th.chain_holds, th.empty});
    r.verdict("threshold_k" + std::to_string(k), th.margin >= kMarginTolerance && th.chain_holds, num(th.margin),
              kMarginTolerance, th.empty ? "no configuration with k clusters" : "");
  }
  r.tables.push_back(std::move(t));
}

inline void ct_decay(const ExperimentConfig& c, ResultRecord& r) {
  const DropletWindow w = c.window();
  const ModelParams p = params_of(c);
  Table t("decay", {"n", "energy", "c", "mu", "mu_stderr", "max_violation", "fit_max_distance", "max_asymmetry"});
  Table env("envelope", {"n", "energy", "distance", "max_abs_green"});
  for (int n : c.particles) {
    const auto basis = enumerate_sector(c.lattice(), n);
    for (double e : {0.0, w.e_max / 2, w.e_max}) {
      const auto g = greens_function(p, basis, e);
      if (g->dimension() == 0) {
        r.notices.push_back("n=" + std::to_string(n) + " has no configuration with two or more clusters");
        continue;
      }
      const auto ct = combes_thomas_scan(*g);
      for (const auto& pt : ct.envelope) env.add_row({n, num(e), num(pt.distance), num(pt.value)});
      t.add_row({n, num(e), num(ct.fit.c), num(ct.fit.mu), ct.fit.mu_stderr ? num(*ct.fit.mu_stderr) : json(nullptr),
                 num(ct.fit.max_violation), num(ct.fit_max_distance), num(ct.max_asymmetry)});
      r.verdict("decay_n" + std::to_string(n) + "_E" + short_num(e), ct.fit.mu > kMinDecayRate, num(ct.fit.mu),
                kMinDecayRate);
    }
  }
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(env));
}

inline void dos_bound(const ExperimentConfig& c, ResultRecord& r) {
  const auto proj = droplet_projector(params_of(c), c.lattice(), c.window(), c.lattice().size());
  const auto s = local_dos_scan(proj);
  Table t("local_dos_envelope", {"distance", "max_local_dos"});
  for (const auto& pt : s.envelope) t.add_row({num(pt.distance), num(pt.value)});
  r.tables.push_back(std::move(t));
  Table f("fit", {"rank", "trace", "c", "mu", "fit_max_distance", "max_amplitude_excess"});
  f.add_row({proj.rank(), num(s.trace), num(s.fit.c), num(s.fit.mu), num(s.fit_max_distance), num(s.max_amplitude_excess)});
  r.tables.push_back(std::move(f));
  r.verdict("amplitude_bound", s.max_amplitude_excess <= kAmplitudeSlack, num(s.max_amplitude_excess), kAmplitudeSlack);
  r.verdict("dos_decay", s.fit.mu > kMinDecayRate, num(s.fit.mu), kMinDecayRate);
}

/// Largest S_0 of the uniform n-cluster superposition over intervals B, with its report.
inline std::pair<Interval, IsingBoundReport> ising_witness(const Lattice& lat, int n) {
  const AmplitudeMap psi = uniform_cluster_superposition(lat, n);
  std::optional<std::pair<Interval, IsingBoundReport>> best;
  for (Site lo = lat.min_site(); lo <= lat.max_site(); ++lo) {
    for (Site hi = lo; hi <= lat.max_site(); ++hi) {
      const Interval b{lo, hi};
      if (b.size() == lat.size()) continue;
      const auto rep = ising_bound_check(psi, Bipartition(lat, b), n);
      if (!best || rep.s0 > best->second.s0 + 1e-12) best.emplace(b, rep);
    }
  }
  return *best;
}

inline void ising_entropy(const ExperimentConfig& c, ResultRecord& r) {
  const Lattice lat = c.lattice();
  Table t("random_states", {"state", "support_lo", "support_hi", "block_lo", "block_hi", "s0", "bound", "slack"});
  bool all = true;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.states; ++i) {
    Rng rng = make_rng(c.seed, 0x15e7, static_cast<std::uint64_t>(i));
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(uniform01(rng) * (hi - lo + 1)); };
    Site a = pick(lat.min_site(), lat.max_site()), b = pick(lat.min_site(), lat.max_site());
    if (a > b) std::swap(a, b);
    const int len = c.block_sizes.empty() ? pick(1, lat.size() - 1)
                                          : c.block_sizes[static_cast<std::size_t>(pick(0, static_cast<int>(c.block_sizes.size()) - 1))];
    const Site lo = pick(lat.min_site(), lat.max_site() - len + 1);
    const AmplitudeMap psi = cluster_superposition(lat, {a, b}, &rng);
    const auto rep = ising_bound_check(psi, Bipartition(lat, {lo, lo + len - 1}));
    t.add_row({i, a, b, lo, lo + len - 1, num(rep.s0), num(rep.bound_boundary), num(rep.slack)});
    all = all && rep.holds;
    worst = std::min(worst, rep.slack);
  }
  r.tables.push_back(std::move(t));
  r.verdict("boundary_bound", all, num(worst), 0.0, std::to_string(c.states) + " random clustered states");
  Table wt("saturation", {"n", "block_lo", "block_hi", "s0", "rank", "bound_particles", "gap"});
  for (int n : c.particles) {
    if (n >= lat.size()) {
      r.notices.push_back("saturation witness skipped for n=" + std::to_string(n) + ": needs n < |Lambda|");
      continue;
    }
    const auto [b, rep] = ising_witness(lat, n);
    const double gap = *rep.bound_particles - rep.s0;
    wt.add_row({n, b.lo, b.hi, num(rep.s0), rep.rank, num(*rep.bound_particles), num(gap)});
    r.verdict("saturation_n" + std::to_string(n), rep.holds && gap <= std::log(2.0), num(gap), std::log(2.0));
  }
  r.tables.push_back(std::move(wt));
}

/// Block-size ratio check: S(b_hi) / S(b_hi / 2) < 2 when both sizes were scanned.
inline void sublinear_verdict(const Theorem1Scan& scan, double alpha, ResultRecord& r) {
  std::map<int, double> by_size;
  for (const auto& row : scan.rows) {
    if (row.alpha == alpha) by_size[row.block_size] = std::max(by_size[row.block_size], row.max_entropy);
  }
  if (by_size.empty()) return;
  const int hi = by_size.rbegin()->first;
  const auto lo = by_size.find(hi / 2);
  if (hi < 2 || hi % 2 != 0 || lo == by_size.end() || lo->second <= 0.0) {
    r.notices.push_back("sublinearity ratio needs block sizes b and 2b");
    return;
  }
  const double ratio = by_size[hi] / lo->second;
  r.verdict("sublinear_alpha" + short_num(alpha), ratio < 2.0, num(ratio), 2.0,
            "S(" + std::to_string(hi) + ")/S(" + std::to_string(hi / 2) + ")");
}

inline Theorem1Scan run_scan(const ExperimentConfig& c, const SpectralProjector& proj) {
  Theorem1Options opt;
  opt.block_sizes = c.block_sizes;
  opt.alphas = c.alphas;
  opt.sup = sup_options(c, 0x7a1);
  return theorem1_scan(proj, opt);
}

inline void entropy_scan(const ExperimentConfig& c, ResultRecord& r) {
  const auto proj = droplet_projector(params_of(c), c.lattice(), c.window(), c.lattice().size());
  const auto scan = run_scan(c, proj);
  Table t("entropy", {"block_size", "n", "alpha", "max_entropy", "eigenstate_max", "envelope"});
  for (const auto& row : scan.rows) {
    const auto it = scan.fits.find(row.alpha);
    const json env = it == scan.fits.end() ? json(nullptr) : num(it->second(std::min(row.n, row.block_size)));
    t.add_row({row.block_size, row.n, num(row.alpha), num(row.max_entropy), num(row.eigenstate_max), env});
  }
  r.tables.push_back(std::move(t));
  Table f("fits", {"alpha", "scale", "offset", "rate", "max_abs_residual"});
  for (double a : c.alphas) {
    const auto it = scan.fits.find(a);
    if (it == scan.fits.end()) {
      r.verdict("fit_alpha" + short_num(a), false, nullptr, kFitResidualTolerance, "no concave fit");
      continue;
    }
    const auto& fit = it->second;
    f.add_row({num(a), num(fit.scale), num(fit.offset), num(fit.rate), num(fit.max_abs_residual)});
    r.verdict("fit_alpha" + short_num(a), fit.max_abs_residual < kFitResidualTolerance, num(fit.max_abs_residual),
              kFitResidualTolerance);
    sublinear_verdict(scan, a, r);
  }
  r.tables.push_back(std::move(f));
  r.notices.insert(r.notices.end(), scan.notices.begin(), scan.notices.end());
}

inline void droplet_band(const ExperimentConfig& c, ResultRecord& r) {
  if (!(c.delta_inv > 0.0)) throw ConfigError("delta-inv", "droplet-band requires delta_inv in (0, 1)");
  const Lattice lat = c.lattice();
  Table t("band", {"n", "lowest_count", "band_center", "band_width", "gap", "deficit", "clustered_mass"});
  std::vector<int> with_gap;
  double mass = 1.0;
  std::vector<double> widths;
  for (int n : c.particles) {
    const auto rep = droplet_spectrum_report(c.delta_inv, lat, n);
    t.add_row({n, rep.lowest_count, num(rep.band_center), num(rep.band_width), rep.gap ? num(*rep.gap) : json(nullptr),
               rep.gap ? num((1.0 - c.delta_inv) - *rep.gap) : json(nullptr), num(rep.clustered_mass)});
    if (rep.gap) with_gap.push_back(n);
    mass = std::min(mass, rep.clustered_mass);
    widths.push_back(rep.band_width);
  }
  r.tables.push_back(std::move(t));
  if (widths.size() >= 2) {
    r.verdict("width_shrinks", widths.back() < widths.front(), num(widths.back()), num(widths.front()));
  }
  if (c.delta_inv <= 0.1) {
    r.verdict("clustered_mass", mass > kClusteredMassFloor, num(mass), kClusteredMassFloor);
  } else {
    r.notices.push_back("clustered mass reported only; the 0.9 floor is checked for delta_inv <= 0.1");
  }
  if (!with_gap.empty()) {
    const auto g = gap_limit_check(c.delta_inv, lat, with_gap);
    r.verdict("gap_nondecreasing", g.trend_ok, g.trend_ok, true);
    r.verdict("gap_limit", g.limit_ok, num(std::abs(g.rows.back().deficit)), num(g.limit_tolerance),
              "|1 - delta_inv - gap| at the largest n");
    if (!g.deficit_positive_decreasing) {
      r.notices.push_back("deficit 1 - delta_inv - gap is not positive and decreasing on this grid");
    }
  }
}

inline std::map<int, Configuration> centered_probes(const std::vector<int>& ns) {
  std::map<int, Configuration> p;
  for (int n : ns) p[n] = Configuration::block(-(n / 2), n);
  return p;
}

inline void disorder_dos(const ExperimentConfig& c, ResultRecord& r) {
  const auto res = dos_decay_experiment(c.disorder, c.delta_inv, c.lattice(), kDefaultDosWindow,
                                        centered_probes(c.particles), c.boundary);
  Table t("mean_dos", {"n", "mean", "standard_error"});
  for (const auto& row : res.rows) {
    t.add_row({row.n, num(row.estimate.mean),
               row.estimate.standard_error ? num(*row.estimate.standard_error) : json(nullptr)});
  }
  r.tables.push_back(std::move(t));
  r.notices.insert(r.notices.end(), res.notices.begin(), res.notices.end());
  if (!res.fit) {
    r.verdict("decay", false, nullptr, 0.0, "no fit");
    return;
  }
  r.verdict("decay", res.decays, num(res.fit->mu), 0.0, "fitted rate c of ln E[N_J] against n");
  if (res.fit->mu_stderr) {
    r.verdict("decay_resolved", *res.fit->mu_stderr < res.fit->mu / 2, num(*res.fit->mu_stderr), num(res.fit->mu / 2));
  }
}

inline void area_law(const ExperimentConfig& c, ResultRecord& r) {
  AreaLawOptions opt;
  opt.block_sizes = c.block_sizes;
  opt.alpha = c.alphas.front();
  opt.epsilon = c.epsilon;
  opt.sup.random_draws = c.draws;
  const auto res = area_law_experiment(c.disorder, c.delta_inv, c.lattice(), c.window(), opt, c.boundary);
  DisorderSpec clean = DisorderSpec::constant(0.0, 1, c.seed);
  const auto ref = area_law_experiment(clean, c.delta_inv, c.lattice(), c.window(), opt, c.boundary);
  Table t("means", {"block_size", "mean", "standard_error", "vacuum_only_samples", "zero_disorder"});
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& row = res.rows[i];
    t.add_row({row.block_size, num(row.estimate.mean),
               row.estimate.standard_error ? num(*row.estimate.standard_error) : json(nullptr), row.vacuum_only_samples,
               num(ref.rows[i].estimate.mean)});
  }
  r.tables.push_back(std::move(t));
  r.notices.insert(r.notices.end(), res.notices.begin(), res.notices.end());
  r.notices.push_back("entries are the estimated sup (lower bound) of exp{(1 - epsilon) S_alpha}");
  if (res.trend) {
    r.verdict("flat", res.flat, num(res.trend->slope), res.trend_tol, "slope of the mean against ln|B|");
    if (ref.trend) {
      r.verdict("contrast", ref.trend->slope > res.trend_tol, num(ref.trend->slope), res.trend_tol,
                "zero-disorder slope against ln|B|");
    }
  } else {
    r.verdict("flat", res.flat, nullptr, res.trend_tol, "single block size");
  }
}

inline void sum_constants(const ExperimentConfig& c, ResultRecord& r) {
  Table t("lemmas", {"lemma", "mu", "n", "block_size", "lhs", "bound", "window", "doubling_change", "holds"});
  bool all = true;
  double worst = 0.0;
  auto add = [&](const char* lemma, double mu, int n, json bs, const LemmaCheck& k) {
    t.add_row({lemma, num(mu), n, std::move(bs), num(k.lhs), num(k.bound), k.window, num(k.doubling_change), k.holds});
    all = all && k.holds && k.doubling_change < kDoublingTolerance;
    worst = std::max(worst, k.lhs / k.bound);
  };
  for (double mu : c.mu) {
    for (int n : c.particles) {
      add("A1", mu, n, nullptr, verify_lemma_a1(mu, n));
      if (n >= 2) {
        for (int bs : c.block_sizes) add("A2", mu, n, bs, verify_lemma_a2(mu, n, bs));
      }
      if (n <= c.lattice().size()) add("A3", mu, n, nullptr, verify_lemma_a3(mu, n, c.lattice()));
    }
  }
  r.tables.push_back(std::move(t));
  Table k("constants", {"mu", "c_infinity", "c_infinity_terms", "c_infinity_truncation", "c2"});
  for (double mu : c.mu) {
    const auto ci = c_infinity(mu);
    k.add_row({num(mu), num(ci.value), ci.terms, num(ci.truncation_bound), num(c2(mu))});
  }
  r.tables.push_back(std::move(k));
  r.verdict("summation_bounds", all, num(worst), 1.0 + kBoundSlack, "max lhs / bound");
}

inline void evolve_entropy(const ExperimentConfig& c, ResultRecord& r) {
  const Lattice lat = c.lattice();
  const ModelParams p = params_of(c);
  const ModelSpectrum spec = solve_sectors(p, lat);
  const auto proj = droplet_projector(spec, c.window());
  const auto scan = run_scan(c, proj);
  const double alpha = c.alphas.front();
  const auto fit = scan.fits.find(alpha);
  if (fit == scan.fits.end()) throw ConfigError("block-sizes", "too few block sizes for an entropy envelope");
  const auto blocks = droplet_blocks(proj, 0, proj.n_max());
  Table t("entropy_in_time", {"state", "block_size", "time", "entropy", "envelope"});
  double worst = -std::numeric_limits<double>::infinity();
  int n_top = 0;
  for (const auto& b : blocks) n_top = std::max(n_top, b.basis->particles());
  for (int i = 0; i < c.states; ++i) {
    const SubspaceEntropy space(blocks, Bipartition(lat, centered_interval(lat, c.block_sizes.front())));
    Rng rng = make_rng(c.seed, 0xe7e7, static_cast<std::uint64_t>(i));
    const AmplitudeMap psi = space.state(lat, random_unit(rng, space.dimension(), 0, space.dimension()));
    for (double time : c.times) {
      const AmplitudeMap psi_t = evolve(spec, psi, time);
      for (int len : c.block_sizes) {
        const double s = entanglement_entropy(psi_t, Bipartition(lat, centered_interval(lat, len)), alpha).value;
        const double env = fit->second(std::min(n_top, len));
        t.add_row({i, len, num(time), num(s), num(env)});
        worst = std::max(worst, s - env);
      }
    }
  }
  r.tables.push_back(std::move(t));
  r.verdict("bounded_in_time", worst <= kEnvelopeSlack, num(worst), kEnvelopeSlack,
            "max over states, times and blocks of S - envelope");
}

}  // namespace commands

/// Runs the pipeline for a resolved configuration and returns its record (without timestamp).
inline ResultRecord execute(const ExperimentConfig& c) {
  ResultRecord r;
  r.command = c.command;
  r.config = to_json(c);
  r.config_hash = cache_key(c);
  const std::string& k = c.command;
  if (k == "spectrum") {
    commands::spectrum(c, r);
  } else if (k == "thresholds") {
    commands::thresholds(c, r);
  } else if (k == "ct-decay") {
    commands::ct_decay(c, r);
  } else if (k == "dos-bound") {
    commands::dos_bound(c, r);
  } else if (k == "ising-entropy") {
    commands::ising_entropy(c, r);
  } else if (k == "entropy-scan") {
    commands::entropy_scan(c, r);
  } else if (k == "droplet-band") {
    commands::droplet_band(c, r);
  } else if (k == "disorder-dos") {
    commands::disorder_dos(c, r);
  } else if (k == "area-law") {
    commands::area_law(c, r);
  } else if (k == "sum-constants") {
    commands::sum_constants(c, r);
  } else if (k == "evolve-entropy") {
    commands::evolve_entropy(c, r);
  } else {
    throw ConfigError("command", "'" + k + "' is not a pipeline command");
  }
  return r;
}

}  // namespace droplet::cli
