#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "droplet/entanglement.hpp"

using namespace droplet;

namespace {

AmplitudeMap random_state(const Lattice& lat, int n_max, Rng& rng, bool complex_values = true) {
  AmplitudeMap psi(lat);
  for (int n = 0; n <= n_max; ++n) {
    auto& s = psi.sector(n);
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      s.values(i) = complex_values ? complex_normal(rng) : std::complex<double>(standard_normal(rng), 0.0);
    }
  }
  return psi.normalize();
}

// rho_B(x, y) = sum_z conj(psi(x u z)) psi(y u z), assembled by pairing configurations.
Eigen::MatrixXcd partial_trace_oracle(const AmplitudeMap& psi, const Bipartition& part,
                                      const std::vector<std::uint64_t>& row_masks) {
  std::map<std::uint64_t, int> row_of;
  for (std::size_t i = 0; i < row_masks.size(); ++i) row_of[row_masks[i]] = static_cast<int>(i);
  const auto k = static_cast<Eigen::Index>(row_masks.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(k, k);
  const std::uint64_t in = part.block_mask();
  for (const auto& [n1, s1] : psi.sectors()) {
    for (std::size_t i = 0; i < s1.basis->size(); ++i) {
      for (const auto& [n2, s2] : psi.sectors()) {
        for (std::size_t j = 0; j < s2.basis->size(); ++j) {
          const std::uint64_t a = s1.basis->mask(i), b = s2.basis->mask(j);
          if ((a & ~in) != (b & ~in)) continue;
          if (s1.values(static_cast<Eigen::Index>(i)) == 0.0 || s2.values(static_cast<Eigen::Index>(j)) == 0.0) continue;
          rho(row_of.at(a & in), row_of.at(b & in)) +=
              std::conj(s1.values(static_cast<Eigen::Index>(i))) * s2.values(static_cast<Eigen::Index>(j));
        }
      }
    }
  }
  return rho;
}

// Schmidt rank from the rank of rho by full-pivot LU on the oracle.
int oracle_rank(const AmplitudeMap& psi, const Bipartition& part) {
  const auto m = matricize(psi, part);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(partial_trace_oracle(psi, part, m.row_masks));
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

}  // namespace

TEST(Bipartition, Validation) {
  const Lattice lat(3);
  EXPECT_THROW(Bipartition(lat, Interval(2, 4)), DomainError);
  EXPECT_THROW(Bipartition::from_sites(lat, {-1, 1}), DomainError);
  EXPECT_EQ(Bipartition::from_sites(lat, {1, 0, -1}).block(), Interval(-1, 1));
  EXPECT_EQ(Bipartition(lat, Interval(-3, 0)).boundary_size(), 1);
  EXPECT_EQ(Bipartition(lat, Interval(-1, 0)).boundary_size(), 2);
  EXPECT_EQ(Bipartition(lat, full_interval(lat)).boundary_size(), 0);
}

TEST(Matricize, Examples) {
  const Lattice lat(2);
  const Bipartition left(lat, Interval(-2, 0));
  const auto vac = matricize(AmplitudeMap::basis_state(lat, {}), left);
  ASSERT_EQ(vac.entries.rows(), 1);
  ASSERT_EQ(vac.entries.cols(), 1);
  EXPECT_EQ(vac.entries(0, 0), std::complex<double>(1.0));

  AmplitudeMap psi(lat);
  psi.set({0}, 1.0);
  psi.set({1}, 1.0);
  psi.normalize();
  const auto m = matricize(psi, left);
  ASSERT_EQ(m.entries.rows(), 2);
  ASSERT_EQ(m.entries.cols(), 2);
  int nonzero = 0;
  for (Eigen::Index r = 0; r < 2; ++r) {
    for (Eigen::Index c = 0; c < 2; ++c) {
      if (std::abs(m.entries(r, c)) > 0) {
        ++nonzero;
        EXPECT_NEAR(std::abs(m.entries(r, c)), 1 / std::sqrt(2.0), 1e-15);
      }
    }
  }
  EXPECT_EQ(nonzero, 2);
  // distinct rows and columns
  EXPECT_EQ(m.entries(0, 0) * m.entries(1, 1) == 0.0, m.entries(0, 1) * m.entries(1, 0) != 0.0);

  AmplitudeMap bad(lat);
  bad.set({0}, 2.0);
  EXPECT_THROW(matricize(bad, left), DomainError);
}

TEST(Matricize, NormAndPartialTraceOracle) {
  Rng rng(42);
  for (int L = 1; L <= 3; ++L) {
    const Lattice lat(L);
    for (bool cplx : {false, true}) {
      const auto psi = random_state(lat, std::min(2, lat.size()), rng, cplx);
      for (Site lo = lat.min_site(); lo <= lat.max_site(); ++lo) {
        const Bipartition part(lat, Interval(lo, lat.max_site()));
        const auto m = matricize(psi, part);
        EXPECT_NEAR(m.entries.norm(), 1.0, 1e-12);
        const Eigen::MatrixXcd rho = partial_trace_oracle(psi, part, m.row_masks);
        const Eigen::MatrixXcd mm = m.entries * m.entries.adjoint();
        // The sum formula conjugates the row configuration, M M^dagger the column one.
        EXPECT_LE((rho - (cplx ? Eigen::MatrixXcd(mm.conjugate()) : mm)).cwiseAbs().maxCoeff(), 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
        auto lambda = schmidt_spectrum(m.entries);
        double sum = 0;
        for (double l : lambda) sum += l;
        EXPECT_NEAR(sum, 1.0, 1e-10);
        std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
        std::sort(ev.begin(), ev.end(), std::greater<>());
        for (std::size_t i = 0; i < std::min(ev.size(), lambda.size()); ++i) EXPECT_NEAR(ev[i], lambda[i], 1e-12);
      }
    }
  }
}

TEST(Renyi, Examples) {
  const Lattice lat(4);
  for (double a : {0.0, 0.5, 1.0, 2.0}) {
    EXPECT_EQ(entanglement_entropy(AmplitudeMap::basis_state(lat, {-1, 0, 3}), Bipartition(lat, Interval(-4, 0)), a).value,
              0.0);
  }
  EXPECT_NEAR(renyi_from_spectrum({0.5, 0.5}, 1.0).value, std::log(2.0), 1e-15);
  EXPECT_THROW(renyi_from_spectrum({0.5, 0.5}, -1.0), DomainError);

  // One boundary bond: n + 1 distinct row patterns for the uniform n-cluster state.
  const auto psi = uniform_cluster_superposition(lat, 2);
  const Bipartition part(lat, Interval(-4, 0));
  const auto r = entanglement_entropy(psi, part, 0.0);
  EXPECT_EQ(r.rank, oracle_rank(psi, part));
  EXPECT_EQ(r.rank, 3);
  EXPECT_NEAR(r.value, std::log(3.0), 1e-15);
}

TEST(Renyi, SymmetryMonotonicityAndCeilings) {
  const std::vector<double> alphas{0.0, 0.25, 0.5, 1.0, 2.0, 64.0};
  for (int L = 2; L <= 4; ++L) {
    const Lattice lat(L);
    Rng rng(derive_seed(9, 1, static_cast<std::uint64_t>(L)));
    for (int draw = 0; draw < 100; ++draw) {
      const auto psi = random_state(lat, 2 + draw % 3, rng);
      const Site lo = lat.min_site() + draw % lat.size();
      const Bipartition part(lat, Interval(lo, std::min(lat.max_site(), lo + draw % 4)));
      double prev = std::numeric_limits<double>::infinity();
      for (double a : alphas) {
        const auto r = min_side_entropy(psi, part, a);
        ASSERT_LE(r.value, prev + 1e-12);
        prev = r.value;
        ASSERT_LE(r.value, std::min(part.block_size(), part.complement_size()) * std::log(2.0) + 1e-12);
        const auto c = renyi_entropy(matricize_complement(psi, part), a);
        ASSERT_NEAR(r.value, c.value, 1e-9);
      }
    }
  }
}

TEST(Renyi, VacuumAndDropletEigenstateBothSides) {
  const Lattice lat(3);
  const Bipartition part(lat, Interval(-1, 1));
  EXPECT_EQ(min_side_entropy(AmplitudeMap::basis_state(lat, {}), part, 1.0).value, 0.0);
  const auto spec = solve_sectors(ModelParams(0.1), lat);
  AmplitudeMap psi(lat);
  psi.add(spec.sector(3).basis, spec.sector(3).eigenvectors.col(2));
  const auto a = renyi_entropy(matricize(psi, part), 1.0);
  const auto b = renyi_entropy(matricize_complement(psi, part), 1.0);
  EXPECT_NEAR(a.value, b.value, 1e-9);
  EXPECT_GT(a.value, 0.0);
}

TEST(IsingBound, Examples) {
  const Lattice lat(4);
  const Bipartition left(lat, Interval(-4, 0));
  const auto vac = ising_bound_check(AmplitudeMap::basis_state(lat, {}), left);
  EXPECT_EQ(vac.s0, 0.0);
  EXPECT_NEAR(vac.bound_boundary, std::log(3.0 + 4.0), 1e-15);

  const auto three = ising_bound_check(uniform_cluster_superposition(lat, 3), left, 3);
  EXPECT_TRUE(three.holds);
  EXPECT_LE(three.s0, std::log(3.0 + 2.0 * 2.0));
  EXPECT_EQ(three.rank, oracle_rank(uniform_cluster_superposition(lat, 3), left));

  AmplitudeMap split(lat);
  split.set({-2, 2}, 1.0);
  EXPECT_THROW(ising_bound_check(split, left), DomainError);
  EXPECT_THROW(ising_bound_check(uniform_cluster_superposition(lat, 3), left, 2), DomainError);
}

TEST(IsingBound, GenericClusterSuperpositionSaturates) {
  const Lattice lat(7);
  Rng rng(3);
  double prev = std::numeric_limits<double>::infinity();
  for (int len = 1; len <= 5; ++len) {
    const Bipartition part(lat, centered_interval(lat, len));
    const auto r = ising_bound_check(cluster_superposition(lat, full_interval(lat), &rng), part);
    EXPECT_TRUE(r.holds);
    EXPECT_LE(r.slack, prev + 1e-12);
    prev = r.slack;
  }
  EXPECT_LT(prev, 1e-12);
  const auto uniform = ising_bound_check(cluster_superposition(lat, full_interval(lat)), Bipartition(lat, Interval(-2, 2)));
  EXPECT_GT(uniform.slack, 0.5);
}

TEST(IsingBound, RandomDropletStates) {
  const Lattice lat(4);
  Rng rng(5);
  for (int draw = 0; draw < 100; ++draw) {
    AmplitudeMap psi(lat);
    psi.set({}, complex_normal(rng));
    for (int n = 1; n <= lat.size(); ++n) {
      for (Site a = lat.min_site(); a + n - 1 <= lat.max_site(); ++a) psi.set(Configuration::block(a, n), complex_normal(rng));
    }
    psi.normalize();
    for (Site lo = lat.min_site(); lo <= lat.max_site(); ++lo) {
      for (Site hi = lo; hi <= lat.max_site(); ++hi) {
        ASSERT_TRUE(ising_bound_check(psi, Bipartition(lat, Interval(lo, hi))).holds);
      }
    }
  }
}

TEST(Theorem1, IsingFixedSectorRandomSuperpositions) {
  const Lattice lat(4);
  const auto proj = droplet_projector(solve_sectors(ModelParams(0.0), lat), {1.5});
  for (int n = 1; n <= 4; ++n) {
    const Bipartition part(lat, centered_interval(lat, n));
    const SubspaceEntropy space(droplet_blocks(proj, n, n), part);
    SupOptions opt;
    opt.random_draws = 200;
    opt.ascent_steps = 0;
    const auto est = estimate_sup_entropy(space, 1.0, opt);
    EXPECT_LE(est.value, std::log(2.0 * n + 1.0) + 0.1);
    EXPECT_GE(est.value, est.eigenstate_max);
  }
}

TEST(Theorem1, ScanRowsAndEstimatorDirection) {
  const Lattice lat(3);
  const auto proj = droplet_projector(solve_sectors(ModelParams(0.1), lat), DropletWindow::automatic(0.1));
  Theorem1Options opt;
  opt.block_sizes = {1, 2, 3};
  opt.alphas = {0.5, 1.0, 2.0};
  opt.particle_caps = {0, 2, 7};
  opt.sup.random_draws = 16;
  opt.sup.ascent_steps = 4;
  const auto scan = theorem1_scan(proj, opt);
  ASSERT_EQ(scan.rows.size(), 27u);
  std::map<std::pair<int, int>, double> prev;
  for (const auto& row : scan.rows) {
    if (row.n == 0) EXPECT_EQ(row.max_entropy, 0.0);
    EXPECT_GE(row.max_entropy, row.eigenstate_max);
    const int bc = lat.size() - row.block_size;
    EXPECT_LE(row.max_entropy, std::min(row.block_size, bc) * std::log(2.0) + 1e-12);
  }
  EXPECT_TRUE(scan.fits.count(1.0));
  EXPECT_THROW(theorem1_scan(proj, Theorem1Options{{1}, {1.0}, {8}, {}}), DomainError);
}

TEST(Theorem1, EmptySubspaceIsReported) {
  const Lattice lat(2);
  const auto proj = droplet_projector(solve_sectors(ModelParams(0.0), lat), {1.5}, true);
  const SubspaceEntropy space({}, Bipartition(lat, Interval(0, 0)));
  const auto est = estimate_sup_entropy(space, 1.0);
  EXPECT_TRUE(est.empty);
  EXPECT_EQ(est.value, 0.0);
}
