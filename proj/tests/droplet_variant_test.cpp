#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "droplet/droplet_variant.hpp"

using namespace droplet;

TEST(DropletSpectrum, VacuumIsSimpleZero) {
  const auto s = eigensolve(assemble_sector(ModelParams(0.1, BoundaryMode::droplet), Lattice(5), 0));
  ASSERT_EQ(s.eigenvalues.size(), 1);
  EXPECT_NEAR(s.eigenvalues(0), 0.0, 1e-14);
  const auto s1 = eigensolve(assemble_sector(ModelParams(0.1, BoundaryMode::droplet), Lattice(5), 1));
  EXPECT_GT(s1.eigenvalues(0), 1e-3);
}

TEST(DropletSpectrum, ReportFields) {
  const auto r = droplet_spectrum_report(0.1, Lattice(5), 4);
  EXPECT_EQ(r.lowest_count, 8);
  EXPECT_DOUBLE_EQ(r.band_center, std::sqrt(0.99));
  ASSERT_EQ(r.band.size(), 8u);
  ASSERT_TRUE(r.gap.has_value());
  EXPECT_GE(*r.gap, 0.0);
  // Oracle: full-sector eigenvalues from an independent solver.
  const auto m = assemble_sector(ModelParams(0.1, BoundaryMode::droplet), Lattice(5), 4);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m.entries);
  double width = 0.0;
  for (int i = 0; i < 8; ++i) width = std::max(width, std::abs(ref.eigenvalues()(i) - std::sqrt(0.99)));
  EXPECT_NEAR(r.band_width, width, 1e-12);
  EXPECT_NEAR(*r.gap, ref.eigenvalues()(8) - ref.eigenvalues()(7), 1e-12);
}

TEST(DropletSpectrum, NoGapWhenBandFillsSector) {
  const auto r = droplet_spectrum_report(0.1, Lattice(2), 1);
  EXPECT_EQ(r.lowest_count, 5);
  EXPECT_FALSE(r.gap.has_value());
  EXPECT_FALSE(droplet_spectrum_report(0.1, Lattice(2), 5).gap.has_value());
}

TEST(DropletSpectrum, Preconditions) {
  EXPECT_THROW(droplet_spectrum_report(0.0, Lattice(3), 2), DomainError);
  EXPECT_THROW(droplet_spectrum_report(1.0, Lattice(3), 2), DomainError);
  EXPECT_THROW(droplet_spectrum_report(0.1, Lattice(3), 0), DomainError);
  EXPECT_THROW(droplet_spectrum_report(0.1, Lattice(3), 8), DomainError);
}

TEST(DropletSpectrum, WidthShrinksAndGapGrows) {
  const Lattice lat(5);
  EXPECT_LT(droplet_spectrum_report(0.1, lat, 6).band_width, droplet_spectrum_report(0.1, lat, 4).band_width);
  double prev = -1.0;
  for (int n = 3; n <= 6; ++n) {
    const double g = *droplet_spectrum_report(0.1, lat, n).gap;
    EXPECT_GT(g, prev) << "n=" << n;
    prev = g;
  }
}

TEST(DropletSpectrum, BandIsClustered) {
  for (double d : {0.05, 0.1}) {
    for (int n = 3; n <= 5; ++n) EXPECT_GT(droplet_spectrum_report(d, Lattice(5), n).clustered_mass, 0.9);
  }
}

TEST(GapLimit, TrendAndLimit) {
  const auto g = gap_limit_check(0.1, Lattice(6), {3, 4, 5, 6});
  ASSERT_EQ(g.rows.size(), 4u);
  for (const auto& r : g.rows) EXPECT_NEAR(r.deficit, 0.9 - r.gap, 1e-15);
  EXPECT_TRUE(g.trend_ok);
  EXPECT_TRUE(g.limit_ok);
  EXPECT_TRUE(g.verdict);
}

TEST(GapLimit, SingleEntryAndOrdering) {
  const auto g = gap_limit_check(0.1, Lattice(5), {4});
  EXPECT_TRUE(g.trend_ok);
  EXPECT_TRUE(g.verdict);
  EXPECT_THROW(gap_limit_check(0.1, Lattice(5), {4, 3}), DomainError);
  EXPECT_THROW(gap_limit_check(0.1, Lattice(5), {}), DomainError);
  EXPECT_LT(*droplet_spectrum_report(0.2, Lattice(5), 5).gap, *droplet_spectrum_report(0.1, Lattice(5), 5).gap);
}

TEST(BoundaryModes, AgreeAsDeltaInvVanishes) {
  const Lattice lat(3);
  double prev = 1.0;
  for (double d : {0.2, 0.1, 0.05, 0.01}) {
    double diff = 0.0;
    for (int n = 0; n <= lat.size(); ++n) {
      const auto a = assemble_sector(ModelParams(d, BoundaryMode::standard), lat, n);
      const auto b = assemble_sector(ModelParams(d, BoundaryMode::droplet), lat, n);
      diff = std::max(diff, (a.entries - b.entries).cwiseAbs().maxCoeff());
    }
    EXPECT_NEAR(diff, 2.0 * std::abs(boundary_beta(d, BoundaryMode::standard) - boundary_beta(d, BoundaryMode::droplet)), 1e-14);
    EXPECT_LT(diff, prev);
    prev = diff;
  }
}
