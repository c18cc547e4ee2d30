#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "droplet/disorder.hpp"

using namespace droplet;

TEST(DrawField, ConstantZeroIsZero) {
  const auto b = draw_field(DisorderSpec::constant(0.0), 3, Lattice(4));
  ASSERT_EQ(b.size(), 9u);
  for (double v : b) EXPECT_EQ(v, 0.0);
}

TEST(DrawField, DeterministicAndDistinct) {
  const auto spec = DisorderSpec::uniform(0.0, 1.0, 1, 42);
  const Lattice lat(3);
  EXPECT_EQ(draw_field(spec, 5, lat), draw_field(spec, 5, lat));
  EXPECT_NE(draw_field(spec, 5, lat), draw_field(spec, 6, lat));
  auto other = spec;
  other.master_seed = 43;
  EXPECT_NE(draw_field(spec, 5, lat), draw_field(other, 5, lat));
  for (double v : draw_field(spec, 0, lat)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(DrawField, LawOfLargeNumbers) {
  const auto spec = DisorderSpec::uniform(0.0, 1.0, 1, 11);
  const Lattice lat(1);
  double sum = 0.0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) sum += draw_field(spec, static_cast<std::uint64_t>(s), lat)[1];
  EXPECT_NEAR(sum / draws, 0.5, 0.02);

  const auto bern = DisorderSpec::bernoulli(0.3, 2.0, 1, 11);
  double hits = 0.0;
  for (int s = 0; s < draws; ++s) hits += draw_field(bern, static_cast<std::uint64_t>(s), lat)[0] > 0 ? 1 : 0;
  EXPECT_NEAR(hits / draws, 0.3, 0.02);
}

TEST(DrawField, InvalidSupportRejected) {
  EXPECT_THROW(draw_field(DisorderSpec::uniform(-1.0, 1.0), 0, Lattice(1)), DomainError);
  EXPECT_THROW(draw_field(DisorderSpec::constant(-0.5), 0, Lattice(1)), DomainError);
  EXPECT_THROW(draw_field(DisorderSpec::bernoulli(1.5, 1.0), 0, Lattice(1)), DomainError);
  EXPECT_THROW(draw_field(DisorderSpec::bernoulli(0.5, -1.0), 0, Lattice(1)), DomainError);
  EXPECT_FALSE(DisorderSpec::constant(1.0).nontrivial());
  EXPECT_FALSE(DisorderSpec::bernoulli(1.0, 1.0).nontrivial());
  EXPECT_TRUE(DisorderSpec::uniform(0.0, 2.0).nontrivial());
}

TEST(SampleMean, SingleSampleHasNoStandardError) {
  const auto m = sample_mean({2.5});
  EXPECT_EQ(m.mean, 2.5);
  EXPECT_FALSE(m.standard_error.has_value());
  const auto m2 = sample_mean({1.0, 3.0});
  EXPECT_DOUBLE_EQ(m2.mean, 2.0);
  EXPECT_DOUBLE_EQ(*m2.standard_error, 1.0);
  EXPECT_THROW(sample_mean({}), DomainError);
}

TEST(MonotoneCoupling, BernoulliEigenvaluesNondecreasing) {
  const Lattice lat(3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto low = draw_field(DisorderSpec::bernoulli(0.5, 0.5, 1, 3), s, lat);
    const auto high = draw_field(DisorderSpec::bernoulli(0.5, 1.5, 1, 3), s, lat);
    for (std::size_t i = 0; i < low.size(); ++i) EXPECT_EQ(low[i] > 0, high[i] > 0);
    const ModelParams pl(0.3, BoundaryMode::standard, low), ph(0.3, BoundaryMode::standard, high);
    EXPECT_NEAR(eigensolve(assemble_sector(ph, lat, 0)).eigenvalues(0), 0.0, 1e-14);
    for (int n = 0; n <= lat.size(); ++n) {
      const auto el = eigensolve(assemble_sector(pl, lat, n)).eigenvalues;
      const auto eh = eigensolve(assemble_sector(ph, lat, n)).eigenvalues;
      for (Eigen::Index k = 0; k < el.size(); ++k) EXPECT_GE(eh(k), el(k) - 1e-10);
      if (n > 0) EXPECT_GT(eh(0), 1e-10);
    }
  }
}

namespace {

std::map<int, Configuration> centered_probes(const Lattice& lat, int n_max) {
  std::map<int, Configuration> p;
  for (int n = 1; n <= n_max; ++n) p[n] = Configuration::block(-(n / 2), n);
  return p;
}

}  // namespace

TEST(DosDecay, ConstantZeroIsingIsFlatAndFlagged) {
  const Lattice lat(4);
  const auto r = dos_decay_experiment(DisorderSpec::constant(0.0, 2), 0.0, lat, kDefaultDosWindow, centered_probes(lat, 4));
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) EXPECT_NEAR(row.estimate.mean, 1.0, 1e-12);
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_NEAR(r.fit->mu, 0.0, 1e-12);
  EXPECT_TRUE(r.trivial_support);
  EXPECT_FALSE(r.decays);
  EXPECT_FALSE(r.notices.empty());
}

TEST(DosDecay, SingleSampleAndErrors) {
  const Lattice lat(2);
  const auto r = dos_decay_experiment(DisorderSpec::uniform(0, 2, 1, 1), 0.1, lat, kDefaultDosWindow, centered_probes(lat, 3));
  for (const auto& row : r.rows) EXPECT_FALSE(row.estimate.standard_error.has_value());
  EXPECT_THROW(dos_decay_experiment(DisorderSpec::uniform(0, 2, 0), 0.1, lat, kDefaultDosWindow, centered_probes(lat, 3)),
               DomainError);
  EXPECT_THROW(dos_decay_experiment(DisorderSpec::uniform(0, 2, 1), 0.1, lat, kDefaultDosWindow, {}), DomainError);
  EXPECT_THROW(dos_decay_experiment(DisorderSpec::uniform(0, 2, 1), 0.1, lat, kDefaultDosWindow, {{2, Configuration{0}}}),
               DomainError);
}

TEST(DosDecay, Reproducible) {
  const Lattice lat(3);
  const auto spec = DisorderSpec::uniform(0, 2, 4, 9);
  const auto a = dos_decay_experiment(spec, 0.1, lat, kDefaultDosWindow, centered_probes(lat, 3));
  const auto b = dos_decay_experiment(spec, 0.1, lat, kDefaultDosWindow, centered_probes(lat, 3));
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].samples, b.rows[i].samples);
}

TEST(AreaLaw, EpsilonAndBlockValidation) {
  const Lattice lat(2);
  AreaLawOptions opt;
  opt.block_sizes = {1, 2};
  opt.epsilon = 1.0;
  EXPECT_THROW(area_law_experiment(DisorderSpec::uniform(0, 2, 1), 0.1, lat, DropletWindow::automatic(0.1), opt), DomainError);
  opt.epsilon = 0.5;
  opt.alpha = 0.4;
  EXPECT_THROW(area_law_experiment(DisorderSpec::uniform(0, 2, 1), 0.1, lat, DropletWindow::automatic(0.1), opt), DomainError);
  opt.alpha = 1.0;
  opt.block_sizes = {2, 2};
  EXPECT_THROW(area_law_experiment(DisorderSpec::uniform(0, 2, 1), 0.1, lat, DropletWindow::automatic(0.1), opt), DomainError);
}

TEST(AreaLaw, VacuumOnlySamplesContributeOne) {
  AreaLawOptions opt;
  opt.block_sizes = {1, 2, 3};
  const auto r = area_law_experiment(DisorderSpec::constant(5.0, 2), 0.1, Lattice(2), DropletWindow::automatic(0.1), opt);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.vacuum_only_samples, 2);
    EXPECT_DOUBLE_EQ(row.estimate.mean, 1.0);
  }
  EXPECT_TRUE(r.flat);
}

TEST(AreaLaw, SmallRunReproducibleAndContrasted) {
  AreaLawOptions opt;
  opt.block_sizes = {1, 2, 3};
  opt.sup.random_draws = 8;
  opt.sup.ascent_steps = 4;
  const Lattice lat(2);
  const auto clean = area_law_experiment(DisorderSpec::constant(0.0, 1), 0.1, lat, DropletWindow::automatic(0.1), opt);
  const auto dis = area_law_experiment(DisorderSpec::uniform(0, 2, 6, 5), 0.1, lat, DropletWindow::automatic(0.1), opt);
  const auto again = area_law_experiment(DisorderSpec::uniform(0, 2, 6, 5), 0.1, lat, DropletWindow::automatic(0.1), opt);
  for (std::size_t i = 0; i < dis.rows.size(); ++i) EXPECT_EQ(dis.rows[i].samples, again.rows[i].samples);
  ASSERT_TRUE(clean.trend && dis.trend);
  EXPECT_GT(clean.trend->slope, dis.trend->slope);
  for (std::size_t i = 0; i < dis.rows.size(); ++i) EXPECT_GE(dis.rows[i].estimate.mean, 1.0);
}

TEST(SupEstimator, BetweenEigenstatesAndHartleyCeiling) {
  const Lattice lat(2);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const ModelParams p(0.1, BoundaryMode::standard, draw_field(DisorderSpec::uniform(0, 2, 1, 21), s, lat));
    const auto proj = droplet_projector(solve_sectors(p, lat), DropletWindow::automatic(0.1));
    const auto blocks = droplet_blocks(proj, 0, proj.n_max());
    for (int len = 1; len <= 4; ++len) {
      const Bipartition part(lat, centered_interval(lat, len));
      const SubspaceEntropy space(blocks, part);
      SupOptions o;
      o.random_draws = 8;
      o.ascent_steps = 4;
      o.seed = s;
      const auto e = estimate_sup_entropy(space, 1.0, o);
      EXPECT_GE(e.value, e.eigenstate_max);
      EXPECT_LE(e.value, std::min(len, lat.size() - len) * std::log(2.0) + 1e-12);
    }
  }
}
