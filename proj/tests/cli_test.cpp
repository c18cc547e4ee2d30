#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "droplet/cli/run.hpp"

using namespace droplet;
using namespace droplet::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("droplet_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string str(const std::string& sub = "") const { return (path_ / sub).string(); }

 private:
  fs::path path_;
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_args(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<fs::path> files_with(const std::string& dir, const std::string& suffix) {
  std::vector<fs::path> v;
  if (!fs::exists(dir)) return v;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) v.push_back(e.path());
  }
  return v;
}

}  // namespace

TEST(CacheKey, EqualForEqualConfigs) {
  RawOptions raw;
  raw.L = 3;
  EXPECT_EQ(cache_key(resolve("spectrum", raw)), cache_key(resolve("spectrum", raw)));
  RawOptions other = raw;
  other.seed = 8;
  EXPECT_NE(cache_key(resolve("spectrum", raw)), cache_key(resolve("spectrum", other)));
  other = raw;
  other.delta_inv = 0.2;
  EXPECT_NE(cache_key(resolve("spectrum", raw)), cache_key(resolve("spectrum", other)));
  EXPECT_NE(cache_key(resolve("spectrum", raw)), cache_key(resolve("thresholds", raw)));
  // Output location and cache toggle do not change the key.
  other = raw;
  other.out_dir = "elsewhere";
  other.no_cache = true;
  EXPECT_EQ(cache_key(resolve("spectrum", raw)), cache_key(resolve("spectrum", other)));
  // Explicit defaults resolve to the same configuration.
  other = raw;
  other.e_max = "auto";
  other.delta_inv = 0.1;
  EXPECT_EQ(cache_key(resolve("spectrum", raw)), cache_key(resolve("spectrum", other)));
}

TEST(CacheKey, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Config, AutoWindowResolvedNumerically) {
  RawOptions raw;
  raw.delta_inv = 0.1;
  const auto c = resolve("dos-bound", raw);
  ASSERT_TRUE(c.e_max.has_value());
  EXPECT_DOUBLE_EQ(*c.e_max, 0.9 * 2.0 * (1.0 - 0.3));
  EXPECT_TRUE(to_json(c)["e_max"].is_number());
  raw.delta_inv = 0.5;
  EXPECT_TRUE(to_json(resolve("dos-bound", raw))["e_max"].is_null());
  EXPECT_THROW(resolve("dos-bound", raw).window(), ConfigError);
}

TEST(Config, FieldErrorsNameTheField) {
  auto field_of = [](const std::string& cmd, const RawOptions& raw) {
    try {
      resolve(cmd, raw);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  RawOptions raw;
  raw.L = 0;
  EXPECT_EQ(field_of("spectrum", raw), "L");
  raw = {};
  raw.delta_inv = 1.0;
  EXPECT_EQ(field_of("spectrum", raw), "delta-inv");
  raw = {};
  raw.disorder = "gauss:0:1";
  EXPECT_EQ(field_of("area-law", raw), "disorder");
  raw = {};
  raw.epsilon = 1.0;
  EXPECT_EQ(field_of("area-law", raw), "epsilon");
  raw = {};
  raw.block_sizes = std::vector<int>{3, 2};
  EXPECT_EQ(field_of("entropy-scan", raw), "block-sizes");
  raw = {};
  raw.e_max = "wide";
  EXPECT_EQ(field_of("dos-bound", raw), "e-max");
  EXPECT_EQ(field_of("nonsense", {}), "command");
}

TEST(Config, DisorderParsing) {
  const auto u = parse_disorder("uniform:0:2");
  EXPECT_EQ(u.kind, Distribution::uniform);
  EXPECT_EQ(u.second, 2.0);
  EXPECT_EQ(parse_disorder("bernoulli:0.5:3").kind, Distribution::bernoulli);
  EXPECT_EQ(parse_disorder("constant:0").kind, Distribution::constant);
  EXPECT_EQ(disorder_text(parse_disorder("uniform:0:2")), "uniform:0:2");
  EXPECT_THROW(parse_disorder("uniform:-1:2"), ConfigError);
  EXPECT_THROW(parse_disorder("uniform:0"), ConfigError);
  EXPECT_THROW(parse_disorder("uniform:0:2x"), ConfigError);
}

TEST(Record, RoundTrip) {
  RawOptions raw;
  raw.L = 2;
  ResultRecord r = execute(resolve("thresholds", raw));
  r.timestamp = "2026-01-01T00:00:00Z";
  r.notices.push_back("a, \"quoted\" note");
  Table t("extra", {"x", "label"});
  t.add_row({num(std::numeric_limits<double>::infinity()), "a,b"});
  t.add_row({num(0.1), "plain"});
  r.tables.push_back(t);
  const ResultRecord back = parse_summary(summary_text(r));
  EXPECT_EQ(back, r);
  EXPECT_EQ(summary_text(back), summary_text(r));
  EXPECT_EQ(csv_text(t), "x,label\ninf,\"a,b\"\n0.10000000000000001,plain\n");
}

TEST(Run, ThresholdsExampleExitsZero) {
  TempDir dir;
  const auto r = run_args({"thresholds", "--L", "3", "--delta-inv", "0.9", "--k", "2", "--out", dir.str("out"),
                           "--cache-dir", dir.str("cache")});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto csv = files_with(dir.str("out"), ".csv");
  ASSERT_EQ(csv.size(), 1u);
  EXPECT_EQ(csv[0].filename().string().rfind("thresholds-", 0), 0u);
  EXPECT_EQ(read_file(csv[0]).rfind("k,margin,margin_full,worst_sector,chain_holds,empty\n2,", 0), 0u);
  EXPECT_EQ(files_with(dir.str("out"), ".summary.txt").size(), 1u);
}

TEST(Run, WindowPreconditionExitsOne) {
  TempDir dir;
  const auto r = run_args({"ct-decay", "--L", "4", "--delta-inv", "0.5", "--out", dir.str("out"), "--cache-dir", dir.str("c")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--e-max"), std::string::npos);
  EXPECT_TRUE(files_with(dir.str("out"), ".csv").empty());
}

TEST(Run, UsageErrorsExitOne) {
  EXPECT_EQ(run_args({"bogus"}).code, 1);
  EXPECT_EQ(run_args({}).code, 1);
  const auto r = run_args({"spectrum", "--L", "0"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--L"), std::string::npos);
  EXPECT_EQ(run_args({"spectrum", "--L", "abc"}).code, 1);
  EXPECT_EQ(run_args({"droplet-band", "--delta-inv", "0"}).code, 1);
}

TEST(Run, VerdictFailureExitsTwoAndIsRecorded) {
  TempDir dir;
  // A point-mass field keeps the logarithmic growth, so the flatness verdict fails.
  const auto r = run_args({"area-law", "--L", "2", "--disorder", "constant:0", "--samples", "1", "--block-sizes", "1,2",
                           "--draws", "8", "--out", dir.str("out"), "--cache-dir", dir.str("c")});
  ASSERT_EQ(r.code, 2) << r.out << r.err;
  const auto summary = files_with(dir.str("out"), ".summary.txt");
  ASSERT_EQ(summary.size(), 1u);
  const auto rec = parse_summary(read_file(summary[0]));
  EXPECT_FALSE(rec.passed());
  EXPECT_FALSE(json::parse(read_file(summary[0]))["passed"].get<bool>());
}

TEST(Run, PassingRecordHasOnlyTrueVerdicts) {
  TempDir dir;
  const auto r = run_args({"droplet-band", "--L", "3", "--out", dir.str("out"), "--cache-dir", dir.str("c")});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const auto rec = parse_summary(read_file(files_with(dir.str("out"), ".summary.txt").at(0)));
  ASSERT_FALSE(rec.verdicts.empty());
  for (const auto& v : rec.verdicts) EXPECT_TRUE(v.passed) << v.name;
  EXPECT_EQ(rec.config["boundary"], "droplet");
}

TEST(Run, CacheHitIsBitIdentical) {
  TempDir dir;
  const std::vector<std::string> args{"spectrum", "--L", "2", "--out", dir.str("out"), "--cache-dir", dir.str("cache")};
  const auto first = run_args(args);
  ASSERT_EQ(first.code, 0);
  const auto summary = files_with(dir.str("out"), ".summary.txt").at(0);
  const std::string before = read_file(summary);
  EXPECT_EQ(files_with(dir.str("cache"), ".json").size(), 1u);
  const auto second = run_args(args);
  EXPECT_EQ(second.code, 0);
  EXPECT_NE(second.out.find("(cached)"), std::string::npos);
  EXPECT_EQ(read_file(summary), before);
  EXPECT_EQ(read_file(files_with(dir.str("cache"), ".json").at(0)), before);
}

TEST(Run, ReorderedFlagsShareTheKey) {
  TempDir dir;
  ASSERT_EQ(run_args({"thresholds", "--L", "2", "--k", "1,2", "--delta-inv", "0.2", "--out", dir.str("out"), "--cache-dir",
                      dir.str("c")})
                .code,
            0);
  const auto second = run_args({"thresholds", "--cache-dir", dir.str("c"), "--delta-inv", "0.2", "--out", dir.str("out"),
                                "--k", "1,2", "--L", "2"});
  ASSERT_EQ(second.code, 0);
  EXPECT_NE(second.out.find("(cached)"), std::string::npos);
  EXPECT_EQ(files_with(dir.str("out"), ".csv").size(), 1u);
}

TEST(Run, DeterministicWithoutCache) {
  TempDir a, b;
  const std::vector<std::string> common{"ising-entropy", "--L", "2", "--states", "20", "--no-cache"};
  auto with_out = [&](const TempDir& d) {
    auto v = common;
    v.insert(v.end(), {"--out", d.str("out"), "--cache-dir", d.str("c")});
    return v;
  };
  ASSERT_EQ(run_args(with_out(a)).code, 0);
  ASSERT_EQ(run_args(with_out(b)).code, 0);
  EXPECT_FALSE(fs::exists(a.str("c")));
  const auto ca = files_with(a.str("out"), ".csv").at(0), cb = files_with(b.str("out"), ".csv").at(0);
  EXPECT_EQ(ca.filename(), cb.filename());
  EXPECT_EQ(read_file(ca), read_file(cb));
  const auto ra = parse_summary(read_file(files_with(a.str("out"), ".summary.txt").at(0)));
  const auto rb = parse_summary(read_file(files_with(b.str("out"), ".summary.txt").at(0)));
  EXPECT_EQ(ra.tables, rb.tables);
  EXPECT_EQ(ra.verdicts, rb.verdicts);
}

TEST(Run, CacheDirectoryFromEnvironment) {
  TempDir dir;
  ::setenv("DROPLET_LAB_CACHE", dir.str("envcache").c_str(), 1);
  const auto r = run_args({"spectrum", "--L", "1", "--out", dir.str("out")});
  ::unsetenv("DROPLET_LAB_CACHE");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(files_with(dir.str("envcache"), ".json").size(), 1u);
  // The flag takes precedence over the environment.
  ::setenv("DROPLET_LAB_CACHE", dir.str("envcache2").c_str(), 1);
  ASSERT_EQ(run_args({"spectrum", "--L", "1", "--out", dir.str("out"), "--cache-dir", dir.str("flag")}).code, 0);
  ::unsetenv("DROPLET_LAB_CACHE");
  EXPECT_FALSE(fs::exists(dir.str("envcache2")));
  EXPECT_EQ(files_with(dir.str("flag"), ".json").size(), 1u);
}

TEST(Run, CsvUsesSeventeenDigits) {
  TempDir dir;
  ASSERT_EQ(run_args({"spectrum", "--L", "1", "--delta-inv", "0.3", "--out", dir.str("out"), "--no-cache"}).code, 0);
  const std::string csv = read_file(files_with(dir.str("out"), ".csv").at(0));
  EXPECT_EQ(csv.rfind("n,index,eigenvalue\n", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    const std::string value = line.substr(line.rfind(',') + 1);
    EXPECT_EQ(std::stod(value), std::stod(value));  // parses
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", std::stod(value));
    EXPECT_EQ(value, buf);
  }
}
