#include <gtest/gtest.h>

#include <random>

#include "annealmap/model_io.hpp"
#include "annealmap/spin_core.hpp"
#include "oracles.hpp"

using namespace annealmap;

namespace {

StateIndex config(std::initializer_list<int> spins) {
  std::vector<int> v(spins);
  return encode(v);
}

}  // namespace

TEST(Indexing, EncodeDecodeRoundTrip) {
  for (int n = 1; n <= 10; ++n)
    for (StateIndex s = 0; s < state_count(n); ++s) EXPECT_EQ(encode(decode(s, n)), s);
}

TEST(Indexing, FlipTogglesExactlyOneBit) {
  for (StateIndex s = 0; s < 64; ++s)
    for (int i = 0; i < 6; ++i) {
      EXPECT_EQ(flip(s, i) ^ s, StateIndex{1} << i);
      EXPECT_EQ(spin(flip(s, i), i), -spin(s, i));
      EXPECT_EQ(hamming_distance(s, flip(s, i)), 1);
    }
}

TEST(Indexing, BitZeroIsSpinUp) {
  EXPECT_EQ(spin(0, 0), 1);
  EXPECT_EQ(spin(1, 0), -1);
  EXPECT_EQ(config({1, 1, 1}), 0u);
  EXPECT_EQ(complement(0, 4), 15u);
}

TEST(IsingModel, ValidatesTerms) {
  EXPECT_THROW(IsingModel(0, {}), std::invalid_argument);
  EXPECT_THROW(IsingModel(31, {}), std::invalid_argument);
  EXPECT_THROW(IsingModel(3, {{{0, 3}, 1.0}}), std::invalid_argument);
  EXPECT_THROW(IsingModel(3, {{{1, 1}, 1.0}}), std::invalid_argument);
  EXPECT_THROW(IsingModel(3, {{{0, 1}, 1.0}, {{1, 0}, 2.0}}), std::invalid_argument);
  EXPECT_NO_THROW(IsingModel(3, {{{}, 2.0}, {{0, 1, 2}, 1.0}}));
}

TEST(ChainModel, Examples) {
  EXPECT_DOUBLE_EQ(energy(chain_model(3, std::vector<double>{1, 1, 1}), config({1, 1, 1})), -3.0);
  EXPECT_DOUBLE_EQ(energy(chain_model(4, std::vector<double>{1, 1, 1, 1}), config({1, -1, 1, -1})), 4.0);
  EXPECT_DOUBLE_EQ(energy(chain_model(4, std::vector<double>{1, -1, 1, -1}), config({1, 1, 1, 1})), 0.0);
  EXPECT_THROW(chain_model(2, std::vector<double>{1, 1}), std::invalid_argument);
  EXPECT_THROW(chain_model(4, std::vector<double>{1, 1}), std::invalid_argument);
}

TEST(Energy, Examples) {
  const IsingModel empty(3, {});
  for (StateIndex s = 0; s < 8; ++s) EXPECT_EQ(energy(empty, s), 0.0);
  const IsingModel pair(2, {{{0, 1}, -1.0}});
  EXPECT_DOUBLE_EQ(energy(pair, config({1, 1})), -1.0);
  EXPECT_DOUBLE_EQ(energy(uniform_chain(5, 0.7), 0), -5 * 0.7);
}

TEST(FlipDelta, Examples) {
  const auto chain = uniform_chain(6, 1.3);
  for (int j = 0; j < 6; ++j) EXPECT_DOUBLE_EQ(flip_delta(chain, 0, j), 4 * 1.3);
  EXPECT_DOUBLE_EQ(flip_delta(uniform_chain(4), config({1, 1, -1, -1}), 0), 0.0);
}

TEST(FlipDelta, MatchesTwoEvaluationOracle) {
  std::mt19937_64 rng(7);
  const auto m = oracle::random_model(6, rng);
  std::uniform_int_distribution<StateIndex> st(0, 63);
  std::uniform_int_distribution<int> site(0, 5);
  for (int k = 0; k < 200; ++k) {
    const auto s = st(rng);
    const int j = site(rng);
    const double expect = oracle::energy(m, flip(s, j)) - oracle::energy(m, s);
    EXPECT_NEAR(flip_delta(m, s, j), expect, 1e-12 * (1 + std::abs(expect)));
  }
}

TEST(FlipDelta, ExactForIntegerCoefficients) {
  // Integer coefficients keep every partial sum exact.
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> c(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Term> terms;
    for (StateIndex mask = 1; mask < 32; ++mask) terms.push_back({mask_sites(mask), double(c(rng))});
    const IsingModel m(5, terms);
    for (StateIndex s = 0; s < 32; ++s)
      for (int j = 0; j < 5; ++j) EXPECT_EQ(flip_delta(m, s, j), energy(m, flip(s, j)) - energy(m, s));
  }
}

TEST(Energy, MatchesOracleOnRandomModels) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = oracle::random_model(7, rng, 4);
    const auto e = energy_table(m);
    EXPECT_LT(oracle::max_abs_diff(e, oracle::energies(m)), 1e-13);
  }
}

TEST(Boltzmann, Examples) {
  std::mt19937_64 rng(5);
  const auto m = oracle::random_model(4, rng);
  for (double p : boltzmann(m, 0.0)) EXPECT_DOUBLE_EQ(p, 1.0 / 16);

  const auto b = boltzmann(uniform_chain(3), 50.0);
  EXPECT_GE(b[0] + b[7], 1 - 1e-10);

  EXPECT_LT(oracle::max_abs_diff(boltzmann(uniform_chain(4), 0.5), oracle::boltzmann(uniform_chain(4), 0.5)),
            1e-14);
}

TEST(Boltzmann, Properties) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = oracle::random_model(6, rng);
    const double beta = 0.3 + trial * 0.4;
    const auto p = boltzmann(m, beta);
    double sum = 0.0;
    for (double x : p) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LT(oracle::max_abs_diff(p, boltzmann(m.with_offset(17.5), beta)), 1e-12);
  }
  // even-order model: invariant under global flip
  std::vector<Term> even;
  std::uniform_real_distribution<double> u(-1, 1);
  for (StateIndex mask = 1; mask < 64; ++mask)
    if (std::popcount(mask) % 2 == 0) even.push_back({mask_sites(mask), u(rng)});
  const IsingModel m(6, even);
  ASSERT_TRUE(m.is_even());
  const auto p = boltzmann(m, 1.1);
  for (StateIndex s = 0; s < 64; ++s) EXPECT_NEAR(p[s], p[complement(s, 6)], 1e-15);
}

TEST(Boltzmann, LargeBetaStaysFinite) {
  const auto p = boltzmann(uniform_chain(4), 500.0);
  EXPECT_NEAR(p[0], 0.5, 1e-12);
  EXPECT_NEAR(p[15], 0.5, 1e-12);
}

TEST(FlipTableTest, AgreesWithModel) {
  std::mt19937_64 rng(1);
  const auto m = oracle::random_model(5, rng);
  const FlipTable t(m);
  for (StateIndex s = 0; s < 32; ++s)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(t.delta(s, j), m.flip_delta(s, j));
}

TEST(Builtins, FrustratedInstanceIsFrustratedAndDeterministic) {
  const auto a = frustrated_instance(1), b = frustrated_instance(1);
  ASSERT_EQ(a.terms().size(), 6u);
  double all_satisfied = 0.0;
  for (std::size_t i = 0; i < a.terms().size(); ++i) {
    EXPECT_EQ(a.terms()[i].coeff, b.terms()[i].coeff);
    EXPECT_GE(std::abs(a.terms()[i].coeff), 1.0);
    EXPECT_LE(std::abs(a.terms()[i].coeff), 2.0);
    all_satisfied -= std::abs(a.terms()[i].coeff);
  }
  const auto e = energy_table(a);
  EXPECT_GT(*std::min_element(e.begin(), e.end()), all_satisfied + 1e-9);
  EXPECT_EQ(seeded_couplings(6, 3), seeded_couplings(6, 3));
  EXPECT_NE(seeded_couplings(6, 3), seeded_couplings(6, 4));
}

TEST(ModelIo, RoundTripAndErrors) {
  std::mt19937_64 rng(2);
  const auto m = oracle::random_model(5, rng);
  const auto back = parse_model(model_to_json(m).dump());
  EXPECT_EQ(energy_table(back), energy_table(m));
  EXPECT_THROW(parse_model(R"({"n_spins": 3, "terms": [{"sites": [0, 5], "coeff": 1}]})"),
               std::invalid_argument);
  EXPECT_THROW(parse_model("{not json"), std::invalid_argument);
  EXPECT_THROW(parse_model(R"({"terms": []})"), std::invalid_argument);
}
