#include <gtest/gtest.h>

#include <random>

#include "annealmap/reverse_map.hpp"
#include "oracles.hpp"

using namespace annealmap;

namespace {

QuantumHamiltonian user(const Eigen::MatrixXd& m, int n) {
  QuantumHamiltonian q;
  q.matrix = m;
  q.n_spins = n;
  return q;
}

double ground_energy(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST(Perron, SingleSpin) {
  Eigen::MatrixXd h(2, 2);
  h << 1, -1, -1, 1;
  const auto v = perron_ground_state(user(h, 1));
  EXPECT_NEAR(v(0), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v(1), 1 / std::sqrt(2.0), 1e-15);
}

TEST(Perron, HeatBathChainIsSqrtBoltzmann) {
  const auto v = perron_ground_state(chain_heatbath_hamiltonian(6, 0.5));
  const auto pi = oracle::boltzmann(uniform_chain(6), 0.5);
  for (Eigen::Index s = 0; s < 64; ++s) {
    EXPECT_GT(v(s), 0.0);
    EXPECT_NEAR(v(s), std::sqrt(pi[s]), 1e-12);
  }
}

TEST(Perron, Rejections) {
  auto h = transverse_field_chain(3, 0.7).matrix;
  h(0, 1) = h(1, 0) = 0.1;
  EXPECT_THROW(perron_ground_state(user(h, 3)), std::domain_error);

  // two decoupled spins flipped only on site 0: states split into two islands
  Eigen::MatrixXd island = -oracle::sx(0, 2);
  EXPECT_THROW(perron_ground_state(user(island, 2)), std::domain_error);

  // tunnelling amplitude gamma^N far below the degeneracy guard
  EXPECT_THROW(perron_ground_state(transverse_field_chain(4, 1e-6)), std::domain_error);

  // connected, well separated, but the second entry underflows the floor
  Eigen::MatrixXd tiny(2, 2);
  tiny << 0, -1e-310, -1e-310, 100;
  EXPECT_THROW(perron_ground_state(user(tiny, 1)), std::domain_error);
}

TEST(ExtractCouplings, Examples) {
  // H0 = -s0 s1 over two spins
  const std::vector<double> pair{-1, 1, 1, -1};
  const auto ex = extract_couplings(pair);
  for (StateIndex mask = 0; mask < 4; ++mask) EXPECT_DOUBLE_EQ(ex.coefficients[mask], mask == 3 ? -1.0 : 0.0);
  const auto flat = extract_couplings(std::vector<double>(8, 2.5));
  EXPECT_DOUBLE_EQ(flat.coefficients[0], 2.5);
  for (StateIndex mask = 1; mask < 8; ++mask) EXPECT_DOUBLE_EQ(flat.coefficients[mask], 0.0);
  EXPECT_THROW(extract_couplings(std::vector<double>(6, 0.0)), std::invalid_argument);
}

TEST(ExtractCouplings, MatchesProjectionOracleAndReconstructs) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int n = 1; n <= 10; ++n) {
    std::vector<double> table(state_count(n));
    for (auto& x : table) x = g(rng);
    const auto ex = extract_couplings(table);
    ASSERT_EQ(ex.coefficients.size(), table.size());
    EXPECT_LT(oracle::max_abs_diff(reconstruct(ex), table), 1e-10) << "n = " << n;
    if (n <= 6) {
      for (StateIndex mask = 0; mask < table.size(); ++mask) {
        double proj = 0.0;
        for (StateIndex s = 0; s < table.size(); ++s) {
          const auto sp = oracle::spins_of(s, n);
          double prod = 1.0;
          for (int i = 0; i < n; ++i)
            if ((mask >> i) & 1u) prod *= sp[i];
          proj += table[s] * prod;
        }
        EXPECT_NEAR(ex.coefficients[mask], proj / table.size(), 1e-12);
      }
    }
  }
}

TEST(ExtractCouplings, RecoversModelTerms) {
  std::mt19937_64 rng(32);
  const auto m = oracle::random_model(5, rng);
  const auto ex = extract_couplings(oracle::energies(m));
  std::vector<double> expect(32, 0.0);
  for (const auto& t : m.terms()) {
    StateIndex mask = 0;
    for (int i : t.sites) mask |= StateIndex{1} << i;
    expect[mask] += t.coeff;
  }
  EXPECT_LT(oracle::max_abs_diff(ex.coefficients, expect), 1e-13);
  EXPECT_LT(oracle::max_abs_diff(energy_table(to_model(ex)), oracle::energies(m)), 1e-13);
}

TEST(QuantumToClassical, SingleSpinFlatEnergy) {
  Eigen::MatrixXd h(2, 2);
  h << 1, -1, -1, 1;
  const auto r = quantum_to_classical(user(h, 1));
  EXPECT_NEAR(r.energy_table[0], r.energy_table[1], 1e-14);
  const auto& w = r.generator.matrix();
  EXPECT_NEAR(w(0, 1), 1.0, 1e-14);
  EXPECT_NEAR(w(1, 0), 1.0, 1e-14);
  EXPECT_NEAR(w(0, 0), -1.0, 1e-14);
  EXPECT_NEAR(w(1, 1), -1.0, 1e-14);
  EXPECT_TRUE(r.conditions.all_within(1e-9));
}

TEST(QuantumToClassical, RoundTripHeatBathChain) {
  const auto m = uniform_chain(4);
  const auto gen = build_generator(m, 1.0, RateRule::heat_bath());
  const auto r = quantum_to_classical(classical_to_quantum(gen));
  EXPECT_LT((r.generator.matrix() - gen.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(max_deviation_up_to_constant(r.energy_table, oracle::energies(m)), 1e-10);
  EXPECT_EQ(r.beta_effective, 1.0);
}

TEST(QuantumToClassical, RoundTripRandomGenerators) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + trial % 4;
    const auto m = oracle::random_model(n, rng);
    for (const auto& rule : {RateRule::heat_bath(), RateRule::metropolis(), RateRule::uniform(0.2)}) {
      const auto gen = build_generator(m, 1.0, rule);
      const auto r = quantum_to_classical(classical_to_quantum(gen));
      EXPECT_LT((r.generator.matrix() - gen.matrix()).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT(max_deviation_up_to_constant(r.energy_table, oracle::energies(m)), 1e-10);
      EXPECT_TRUE(r.conditions.all_within(1e-9));
    }
  }
}

TEST(QuantumToClassical, TemperatureIsAbsorbedIntoEnergy) {
  // input built at beta = 0.5 comes back as 0.5 H0 at unit temperature
  const auto m = uniform_chain(6);
  const auto r = quantum_to_classical(chain_heatbath_hamiltonian(6, 0.5));
  auto scaled = oracle::energies(m);
  for (auto& e : scaled) e *= 0.5;
  EXPECT_LT(max_deviation_up_to_constant(r.energy_table, scaled), 1e-10);
}

TEST(QuantumToClassical, TransverseFieldChainConditions) {
  const double shift = -ground_energy(transverse_field_chain(4, 0.7).matrix);
  const auto r = quantum_to_classical(transverse_field_chain(4, 0.7, 1.0, shift));
  EXPECT_NEAR(r.energy_shift, 0.0, 1e-9);
  EXPECT_TRUE(r.conditions.all_within(1e-9));
  EXPECT_GE(r.conditions.min_offdiagonal, 0.0);
  // unshifted input: the map shifts and records it
  const auto u = quantum_to_classical(transverse_field_chain(4, 0.7));
  EXPECT_NEAR(u.energy_shift, -shift, 1e-12);
  EXPECT_TRUE(u.conditions.all_within(1e-9));
}

TEST(QuantumToClassical, SpectrumPreserved) {
  for (double gamma : {0.3, 0.7, 1.4}) {
    const auto q = transverse_field_chain(5, gamma);
    const auto r = quantum_to_classical(q);
    auto h = spectrum_of_matrix(q.matrix).eigenvalues;
    for (double& x : h) x -= r.energy_shift;
    const auto w = oracle::general_eigenvalues(r.generator.matrix());
    EXPECT_TRUE(compare_spectra(negated(w), h, 1e-9).matched) << "gamma = " << gamma;
  }
}

TEST(QuantumToClassical, LocalityBlowup) {
  for (int n : {6, 8})
    for (double gamma : {0.3, 0.7, 0.95}) {
      const auto r = quantum_to_classical(transverse_field_chain(n, gamma));
      const auto& prof = r.couplings.locality_profile;
      double high = 0.0;
      for (int k = 4; k <= n; ++k) high = std::max(high, prof[k]);
      EXPECT_GT(high, 1e-6) << "n = " << n << ", gamma = " << gamma;
      // global flip symmetry leaves only even orders, up to roundoff in the logs
      double scale = 0.0;
      for (double e : r.energy_table) scale = std::max(scale, std::abs(e));
      for (int k = 1; k <= n; k += 2) EXPECT_LT(prof[k], 1e-10 * scale);
    }
  const auto a = quantum_to_classical(transverse_field_chain(6, 0.7));
  const auto b = quantum_to_classical(transverse_field_chain(6, 0.7));
  EXPECT_EQ(a.couplings.locality_profile, b.couplings.locality_profile);
  EXPECT_GT(a.couplings.locality_profile[2], a.couplings.locality_profile[4]);
  EXPECT_GT(a.couplings.locality_profile[4], 0.0);
  EXPECT_GT(a.couplings.locality_profile[6], 0.0);
}

TEST(QuantumToClassical, SizeMismatch) {
  auto q = transverse_field_chain(3, 0.5);
  q.n_spins = 4;
  EXPECT_THROW(quantum_to_classical(q), std::invalid_argument);
}
