#pragma once

// Command-line entry point: parsing, caching, dispatch and exit codes.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "droplet/cli/commands.hpp"
#include "droplet/cli/config.hpp"
#include "droplet/cli/record.hpp"

namespace droplet::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerdict = 2;

struct RunOutcome {
  ResultRecord record;
  std::string summary;  ///< exact bytes of the summary document
  bool cache_hit = false;
  OutputPaths paths;
};

inline std::filesystem::path cache_path(const ExperimentConfig& c, const std::string& key) {
  return std::filesystem::path(c.cache_dir) / (key + ".json");
}

/// Returns the cached record when enabled and present; otherwise computes it
/// with `compute`, stores it in the cache and writes the output files.
template <typename Compute>
RunOutcome run_cached(const ExperimentConfig& c, Compute compute) {
  RunOutcome o;
  const std::string key = cache_key(c);
  const auto cached = cache_path(c, key);
  if (c.cache && std::filesystem::exists(cached)) {
    o.summary = read_file(cached);
    o.record = parse_summary(o.summary);
    o.cache_hit = true;
  } else {
    o.record = compute();
    o.record.timestamp = utc_timestamp();
    o.summary = summary_text(o.record);
    if (c.cache) atomic_write(cached, o.summary);
  }
  o.paths = write_outputs(c.out_dir, o.record, o.summary);
  return o;
}

inline void report(std::ostream& out, const RunOutcome& o) {
  out << o.record.command << " " << o.record.config_hash.substr(0, 12) << (o.cache_hit ? " (cached)" : "") << "\n";
  for (const auto& v : o.record.verdicts) {
    out << "  " << (v.passed ? "PASS " : "FAIL ") << v.name << " value=" << csv_cell(v.value)
        << " tol=" << csv_cell(v.tolerance);
    if (!v.detail.empty()) out << "  " << v.detail;
    out << "\n";
  }
  for (const auto& n : o.record.notices) out << "  note: " << n << "\n";
  out << "  wrote " << o.paths.csv.string() << " and " << o.paths.summary.string() << "\n";
}

inline RunOutcome run_verify_all(const RawOptions& raw, std::ostream& out) {
  const ExperimentConfig top = resolve("verify-all", raw);
  std::vector<ExperimentConfig> subs;
  for (const auto& cmd : pipeline_commands()) subs.push_back(resolve(cmd, raw));
  return run_cached(top, [&] {
    ResultRecord r;
    r.command = top.command;
    r.config = to_json(top);
    r.config_hash = cache_key(top);
    Table t("commands", {"command", "config_hash", "passed", "failed_verdicts"});
    for (const auto& sub : subs) {
      const RunOutcome o = run_cached(sub, [&] { return execute(sub); });
      report(out, o);
      std::string failed;
      for (const auto& v : o.record.verdicts) {
        if (!v.passed) failed += (failed.empty() ? "" : ";") + v.name;
      }
      t.add_row({sub.command, o.record.config_hash, o.record.passed(), failed});
      r.verdict(sub.command, o.record.passed(), o.record.passed(), true, failed);
    }
    r.tables.push_back(std::move(t));
    return r;
  });
}

namespace detail {

template <typename T>
void take(CLI::Option* opt, const T& value, std::optional<T>& into) {
  if (opt->count() > 0) into = value;
}

}  // namespace detail

/// Parses argv and runs one command. Exit 0: all verdicts pass; 2: a verdict
/// failed; 1: usage or configuration error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical checks for droplet states of the XXZ chain", "droplet_lab"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(kArtifactVersion));

  int L = 0, samples = 0, states = 0, draws = 0;
  double delta_inv = 0, epsilon = 0;
  std::string boundary, e_max, disorder, cache_dir;
  std::uint64_t seed = 0;
  std::vector<int> block_sizes, particles, k;
  std::vector<double> alphas, mu, times;
  RawOptions raw;

  struct Bound {
    CLI::App* app;
    std::vector<std::function<void()>> collect;
  };
  std::vector<Bound> bound;
  std::vector<std::string> names = pipeline_commands();
  names.push_back("verify-all");
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " pipeline");
    Bound b{sub, {}};
    auto opt = [&](auto flag, auto& var, auto& into, const char* help) {
      CLI::Option* o = sub->add_option(flag, var, help);
      using V = std::remove_reference_t<decltype(var)>;
      if constexpr (std::is_same_v<V, std::vector<int>> || std::is_same_v<V, std::vector<double>>) o->delimiter(',');
      b.collect.push_back([o, &var, &into] { detail::take(o, var, into); });
    };
    opt("--L", L, raw.L, "lattice half-length; sites -L..L");
    opt("--delta-inv", delta_inv, raw.delta_inv, "anisotropy delta_inv in [0, 1)");
    opt("--boundary", boundary, raw.boundary, "boundary field: standard or droplet");
    opt("--e-max", e_max, raw.e_max, "droplet window upper edge, or auto = 0.9 * 2(1 - 3 delta_inv)");
    opt("--disorder", disorder, raw.disorder, "uniform:LO:HI, bernoulli:P:V or constant:V");
    opt("--samples", samples, raw.samples, "disorder samples");
    opt("--seed", seed, raw.seed, "master seed");
    opt("--block-sizes", block_sizes, raw.block_sizes, "interval lengths |B|, comma separated");
    opt("--alphas", alphas, raw.alphas, "Renyi orders, comma separated");
    opt("--epsilon", epsilon, raw.epsilon, "area-law exponent epsilon");
    opt("--particles", particles, raw.particles, "particle numbers n, comma separated");
    opt("--k", k, raw.k, "cluster counts for thresholds, comma separated");
    opt("--mu", mu, raw.mu, "decay rates for sum-constants, comma separated");
    opt("--times", times, raw.times, "evolution times, comma separated");
    opt("--states", states, raw.states, "random states per check");
    opt("--draws", draws, raw.draws, "random draws of the entropy sup estimator");
    sub->add_option("--out", raw.out_dir, "output directory")->capture_default_str();
    CLI::Option* cd = sub->add_option("--cache-dir", cache_dir, "cache directory (default $DROPLET_LAB_CACHE or results/cache)");
    b.collect.push_back([cd, &cache_dir, &raw] {
      if (cd->count() > 0) raw.cache_dir = cache_dir;
    });
    sub->add_flag("--no-cache", raw.no_cache, "recompute and do not store in the cache");
    bound.push_back(std::move(b));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  std::string command;
  for (auto& b : bound) {
    if (b.app->parsed()) {
      command = b.app->get_name();
      for (auto& f : b.collect) f();
    }
  }

  try {
    RunOutcome o;
    if (command == "verify-all") {
      o = run_verify_all(raw, out);
    } else {
      const ExperimentConfig c = resolve(command, raw);
      o = run_cached(c, [&] { return execute(c); });
    }
    report(out, o);
    return o.record.passed() ? kExitPass : kExitVerdict;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: precondition failed: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "error: resource limit: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "error: numerical failure: " << e.what() << "\n";
    return kExitUsage;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"droplet_lab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace droplet::cli
