#pragma once

// Experiment configuration: parsed options, per-command defaults, canonical
// serialization and the cache key.

#include <openssl/evp.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "droplet/disorder.hpp"
#include "droplet/errors.hpp"
#include "droplet/hamiltonian.hpp"
#include "droplet/spectral.hpp"

namespace droplet::cli {

using nlohmann::json;

#ifdef DROPLET_VERSION
inline constexpr const char* kArtifactVersion = DROPLET_VERSION;
#else
inline constexpr const char* kArtifactVersion = "1.0.0";
#endif

inline const std::vector<std::string>& pipeline_commands() {
  static const std::vector<std::string> c{"spectrum",      "thresholds",   "ct-decay",     "dos-bound",
                                          "ising-entropy", "entropy-scan", "droplet-band", "disorder-dos",
                                          "area-law",      "sum-constants", "evolve-entropy"};
  return c;
}

inline bool is_command(const std::string& c) {
  if (c == "verify-all") return true;
  for (const auto& p : pipeline_commands()) {
    if (p == c) return true;
  }
  return false;
}

/// A precondition failure attributable to one configuration field.
class ConfigError : public DomainError {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : DomainError("--" + field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Options as given on the command line; unset fields take per-command defaults.
struct RawOptions {
  std::optional<int> L;
  std::optional<double> delta_inv;
  std::optional<std::string> boundary;
  std::optional<std::string> e_max;
  std::optional<std::string> disorder;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<int>> block_sizes;
  std::optional<std::vector<double>> alphas;
  std::optional<double> epsilon;
  std::optional<std::vector<int>> particles;
  std::optional<std::vector<int>> k;
  std::optional<std::vector<double>> mu;
  std::optional<std::vector<double>> times;
  std::optional<int> states;
  std::optional<int> draws;
  std::string out_dir = "results";
  std::optional<std::string> cache_dir;
  bool no_cache = false;
};

inline constexpr int kMaxHalfLength = 7;

/// Resolved configuration; every field numeric and checked.
struct ExperimentConfig {
  std::string command;
  int L = 4;
  double delta_inv = 0.1;
  BoundaryMode boundary = BoundaryMode::standard;
  std::optional<double> e_max;  ///< absent when no admissible droplet window exists
  DisorderSpec disorder;
  std::uint64_t seed = 7;
  std::vector<int> block_sizes;
  std::vector<double> alphas;
  double epsilon = 0.5;
  std::vector<int> particles;
  std::vector<int> k;
  std::vector<double> mu;
  std::vector<double> times;
  int states = 0;
  int draws = 64;
  // Not part of the cache key.
  std::string out_dir = "results";
  std::string cache_dir = "results/cache";
  bool cache = true;

  Lattice lattice() const { return Lattice(L); }
  int sites() const { return 2 * L + 1; }

  DropletWindow window() const {
    if (!e_max) {
      throw ConfigError("e-max", "no admissible droplet window: 2(1 - 3*delta_inv) = " +
                                     std::to_string(DropletWindow::limit(delta_inv)) + " <= 0");
    }
    const DropletWindow w{*e_max};
    if (!w.valid_for(delta_inv)) {
      throw ConfigError("e-max", "window e_max=" + std::to_string(*e_max) + " violates 0 <= e_max < 2(1 - 3*delta_inv) = " +
                                     std::to_string(DropletWindow::limit(delta_inv)));
    }
    return w;
  }
};

inline DisorderSpec parse_disorder(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  auto num = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("disorder", "cannot parse '" + text + "'; expected uniform:LO:HI, bernoulli:P:V or constant:V");
    }
  };
  DisorderSpec d;
  if (!parts.empty() && parts[0] == "uniform" && parts.size() == 3) {
    d = DisorderSpec::uniform(num(1), num(2));
  } else if (!parts.empty() && parts[0] == "bernoulli" && parts.size() == 3) {
    d = DisorderSpec::bernoulli(num(1), num(2));
  } else if (!parts.empty() && parts[0] == "constant" && parts.size() == 2) {
    d = DisorderSpec::constant(num(1));
  } else {
    throw ConfigError("disorder", "cannot parse '" + text + "'; expected uniform:LO:HI, bernoulli:P:V or constant:V");
  }
  try {
    d.validate();
  } catch (const DomainError& e) {
    throw ConfigError("disorder", e.what());
  }
  return d;
}

inline std::string disorder_text(const DisorderSpec& d) {
  std::ostringstream s;
  s.precision(17);
  switch (d.kind) {
    case Distribution::uniform:
      s << "uniform:" << d.first << ":" << d.second;
      break;
    case Distribution::bernoulli:
      s << "bernoulli:" << d.first << ":" << d.second;
      break;
    default:
      s << "constant:" << d.first;
  }
  return s.str();
}

namespace detail {

inline std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

inline bool disordered(const std::string& c) { return c == "disorder-dos" || c == "area-law"; }

}  // namespace detail

/// Applies per-command defaults and checks every field the command uses.
inline ExperimentConfig resolve(const std::string& command, const RawOptions& raw) {
  if (!is_command(command)) throw ConfigError("command", "unknown command '" + command + "'");
  ExperimentConfig c;
  c.command = command;
  c.L = raw.L.value_or(4);
  if (c.L < 1 || c.L > kMaxHalfLength) {
    throw ConfigError("L", "half-length must lie in [1, " + std::to_string(kMaxHalfLength) + "], got " + std::to_string(c.L));
  }
  const int sites = c.sites();
  c.delta_inv = raw.delta_inv.value_or(0.1);
  if (!(c.delta_inv >= 0.0 && c.delta_inv < 1.0)) throw ConfigError("delta-inv", "must lie in [0, 1)");
  const std::string mode = raw.boundary.value_or(command == "droplet-band" ? "droplet" : "standard");
  if (mode == "standard") {
    c.boundary = BoundaryMode::standard;
  } else if (mode == "droplet") {
    c.boundary = BoundaryMode::droplet;
  } else {
    throw ConfigError("boundary", "expected 'standard' or 'droplet', got '" + mode + "'");
  }
  const std::string window = raw.e_max.value_or("auto");
  if (window == "auto") {
    const double lim = DropletWindow::limit(c.delta_inv);
    if (lim > 0.0) c.e_max = DropletWindow::automatic(c.delta_inv).e_max;
  } else {
    try {
      std::size_t used = 0;
      c.e_max = std::stod(window, &used);
      if (used != window.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("e-max", "expected a number or 'auto', got '" + window + "'");
    }
  }
  c.disorder = parse_disorder(raw.disorder.value_or(detail::disordered(command) ? "uniform:0:2" : "constant:0"));
  c.seed = raw.seed.value_or(7);
  c.disorder.master_seed = c.seed;
  c.disorder.samples = raw.samples.value_or(command == "disorder-dos" ? 200 : command == "area-law" ? 100 : 1);
  if (c.disorder.samples < 1) throw ConfigError("samples", "must be >= 1");

  if (command == "area-law") {
    c.block_sizes = raw.block_sizes.value_or(std::vector<int>{2, 3, 4, 5});
  } else if (command == "entropy-scan" || command == "evolve-entropy") {
    // Beyond |Lambda| / 2 the complement is the smaller side and the sizes repeat.
    const int half = std::min(6, sites / 2);
    c.block_sizes = raw.block_sizes.value_or(detail::range(half >= 4 ? 2 : 1, half));
  } else if (command == "ising-entropy") {
    c.block_sizes = raw.block_sizes.value_or(std::vector<int>{});
  } else if (command == "sum-constants") {
    c.block_sizes = raw.block_sizes.value_or(std::vector<int>{2, 3, 4});
  } else if (command == "verify-all" && raw.block_sizes) {
    c.block_sizes = *raw.block_sizes;
  }
  for (std::size_t i = 0; i < c.block_sizes.size(); ++i) {
    const int b = c.block_sizes[i];
    if (b < 1 || (command != "sum-constants" && b >= sites)) {
      throw ConfigError("block-sizes", "block size " + std::to_string(b) + " must lie in [1, " + std::to_string(sites - 1) + "]");
    }
    if (i > 0 && b <= c.block_sizes[i - 1]) throw ConfigError("block-sizes", "must be strictly increasing");
  }

  c.alphas = raw.alphas.value_or(std::vector<double>{1.0});
  for (double a : c.alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alphas", "Renyi orders must be finite and >= 0");
  }
  c.epsilon = raw.epsilon.value_or(0.5);
  if (command == "area-law") {
    if (c.alphas.size() != 1) throw ConfigError("alphas", "area-law takes a single alpha");
    if (!(c.epsilon > 0.0 && c.epsilon < std::min(c.alphas[0], 1.0))) {
      throw ConfigError("epsilon", "must satisfy 0 < epsilon < min{alpha, 1}");
    }
  }

  if (command == "ct-decay") {
    c.particles = raw.particles.value_or(std::vector<int>{2, 3});
  } else if (command == "disorder-dos") {
    c.particles = raw.particles.value_or(detail::range(1, std::min(4, sites)));
  } else if (command == "droplet-band") {
    c.particles = raw.particles.value_or(detail::range(3, std::min(6, sites - 1)));
  } else if (command == "ising-entropy" || command == "sum-constants") {
    c.particles = raw.particles.value_or(std::vector<int>{2, 3, 4});
  } else if (command == "verify-all" && raw.particles) {
    c.particles = *raw.particles;
  }
  for (std::size_t i = 0; i < c.particles.size(); ++i) {
    const int n = c.particles[i];
    if (n < 1 || (command != "sum-constants" && n > sites)) {
      throw ConfigError("particles", "particle number " + std::to_string(n) + " must lie in [1, " + std::to_string(sites) + "]");
    }
    if (i > 0 && n <= c.particles[i - 1]) throw ConfigError("particles", "must be strictly increasing");
  }

  if (command == "thresholds" || command == "verify-all") c.k = raw.k.value_or(std::vector<int>{1, 2, 3});
  for (int k : c.k) {
    if (k < 1) throw ConfigError("k", "cluster counts must be >= 1");
  }
  if (command == "sum-constants" || command == "verify-all") c.mu = raw.mu.value_or(std::vector<double>{0.5, 1.0, 2.0});
  for (double m : c.mu) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("mu", "decay rates must be positive");
  }
  if (command == "evolve-entropy" || command == "verify-all") c.times = raw.times.value_or(std::vector<double>{0, 1, 10, 100});
  for (double t : c.times) {
    if (!std::isfinite(t)) throw ConfigError("times", "times must be finite");
  }
  c.states = raw.states.value_or(command == "ising-entropy" ? 500 : command == "evolve-entropy" ? 5 : 0);
  if (c.states < 0) throw ConfigError("states", "must be >= 0");
  c.draws = raw.draws.value_or(64);
  if (c.draws < 0) throw ConfigError("draws", "must be >= 0");

  c.out_dir = raw.out_dir;
  c.cache = !raw.no_cache;
  if (raw.cache_dir) {
    c.cache_dir = *raw.cache_dir;
  } else if (const char* env = std::getenv("DROPLET_LAB_CACHE"); env != nullptr && *env != '\0') {
    c.cache_dir = env;
  } else {
    c.cache_dir = "results/cache";
  }
  return c;
}

/// Canonical form: every result-affecting field, numeric, keys sorted.
inline json to_json(const ExperimentConfig& c) {
  json j;
  j["command"] = c.command;
  j["L"] = c.L;
  j["delta_inv"] = c.delta_inv;
  j["boundary"] = to_string(c.boundary);
  j["e_max"] = c.e_max ? json(*c.e_max) : json(nullptr);
  j["disorder"] = disorder_text(c.disorder);
  j["samples"] = c.disorder.samples;
  j["seed"] = c.seed;
  j["block_sizes"] = c.block_sizes;
  j["alphas"] = c.alphas;
  j["epsilon"] = c.epsilon;
  j["particles"] = c.particles;
  j["k"] = c.k;
  j["mu"] = c.mu;
  j["times"] = c.times;
  j["states"] = c.states;
  j["draws"] = c.draws;
  return j;
}

inline std::string canonical_text(const ExperimentConfig& c) { return to_json(c).dump(); }

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

/// SHA-256 of the canonical configuration and the artifact version.
inline std::string cache_key(const ExperimentConfig& c) {
  return sha256_hex(canonical_text(c) + "\n" + kArtifactVersion);
}

}  // namespace droplet::cli
