#include <gtest/gtest.h>

#include <complex>
#include <random>

#include "annealmap/anneal.hpp"
#include "oracles.hpp"

using namespace annealmap;

namespace {

AnnealOptions options(double dt, int n_intervals, bool term = true) {
  AnnealOptions o;
  o.dt = dt;
  o.n_intervals = n_intervals;
  o.include_beta_dot_term = term;
  return o;
}

ProbabilityVector uniform_p(int n) { return ProbabilityVector(state_count(n), 1.0 / state_count(n)); }

// Cosine deficit between two imaginary-time trajectories, maximized over samples.
double max_deficit(const AnnealTrajectory& a, const AnnealTrajectory& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.samples.size(); ++k)
    worst = std::max(worst, 1.0 - a.samples[k].state.normalized().dot(b.samples[k].state.normalized()));
  return worst;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mapped_eig(const IsingModel& m, double beta,
                                                          const RateRule& rule) {
  const auto w = oracle::generator(m, beta, rule);
  const auto e = oracle::energies(m);
  Eigen::VectorXd d(w.rows());
  for (Eigen::Index s = 0; s < w.rows(); ++s) d(s) = std::exp(0.5 * beta * e[s]);
  Eigen::MatrixXd h = -(d.asDiagonal() * w * d.cwiseInverse().asDiagonal());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (h + h.transpose()));
}

}  // namespace

TEST(ScheduleTest, DerivativeMatchesCentralDifference) {
  const Schedule schedules[] = {Schedule(LinearBeta{0.0, 2.0, 10.0}), Schedule(ExponentialBeta{0.1, 0.3, 10.0}),
                                Schedule(GemanGeman{2.0, 4, 1.0, 10.0}), Schedule(GemanGeman{0.5, 3, 2.5, 10.0})};
  for (const auto& s : schedules) {
    double prev = s.beta(0.0);
    for (double t = 0.05; t < 10.0; t += 0.1) {
      const double h = 1e-5;
      const double fd = (s.beta(t + h) - s.beta(t - h)) / (2 * h);
      EXPECT_NEAR(s.beta_dot(t), fd, 1e-6 * std::abs(fd) + 1e-12) << s.to_string() << " t = " << t;
      EXPECT_GE(s.beta(t), prev);
      prev = s.beta(t);
    }
  }
}

TEST(ScheduleTest, Examples) {
  const Schedule gg(GemanGeman{2.0, 4, 1.0, 1e4});
  EXPECT_NEAR(gg.beta(1e4 - 1), std::log(1e4) / 8.0, 1e-15);
  EXPECT_EQ(gg.beta(0.0), 0.0);
  const Schedule lin(LinearBeta{0.0, 3.0, 200.0});
  EXPECT_DOUBLE_EQ(lin.beta(100.0), 1.5);
  EXPECT_DOUBLE_EQ(lin.beta(500.0), 3.0);
  EXPECT_EQ(lin.beta_dot(500.0), 0.0);
  EXPECT_TRUE(Schedule::frozen(0.7, 5.0).is_frozen());
  EXPECT_FALSE(lin.is_frozen());
}

TEST(ScheduleTest, ParseAndValidate) {
  for (const char* text : {"linear:0,3,200", "exp:0.1,0.5,20", "geman:2,4,10000", "geman:2,4,100,3"}) {
    const auto s = Schedule::parse(text);
    const auto back = Schedule::parse(s.to_string());
    for (double t : {0.0, 1.0, 7.5}) EXPECT_EQ(s.beta(t), back.beta(t));
    EXPECT_EQ(s.t_final(), back.t_final());
  }
  EXPECT_THROW(Schedule::parse("linear:0,3"), std::invalid_argument);
  EXPECT_THROW(Schedule::parse("cosine:1,2,3"), std::invalid_argument);
  EXPECT_THROW(Schedule::parse("geman:2,4.5,100"), std::invalid_argument);
  EXPECT_THROW(Schedule(LinearBeta{2.0, 1.0, 10.0}), std::invalid_argument);
  EXPECT_THROW(Schedule(LinearBeta{0.0, 1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(Schedule(GemanGeman{2.0, 4, 0.5, 10.0}), std::invalid_argument);
  EXPECT_THROW(Schedule(ExponentialBeta{-1.0, 0.1, 10.0}), std::invalid_argument);
  EXPECT_EQ(parse_engine("imaginary"), Engine::Imaginary);
  EXPECT_EQ(to_string(Engine::Real), "real");
  EXPECT_THROW(parse_engine("langevin"), std::invalid_argument);
}

TEST(FlipDynamicsTest, MatchesDenseOperators) {
  std::mt19937_64 rng(41);
  const auto m = oracle::random_model(5, rng);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(32), out(32);
  for (auto& v : x) v = g(rng);
  for (const auto& rule : {RateRule::heat_bath(), RateRule::metropolis(), RateRule::uniform(0.2)}) {
    FlipDynamics dyn(m, rule);
    dyn.set_beta(0.8);
    const auto w = oracle::generator(m, 0.8, rule);
    dyn.apply_generator(x, out);
    EXPECT_LT((out - w * x).cwiseAbs().maxCoeff(), 1e-12);
    const auto e = oracle::energies(m);
    Eigen::VectorXd d(32), h0(32);
    for (int s = 0; s < 32; ++s) {
      d(s) = std::exp(0.4 * e[s]);
      h0(s) = e[s] - dyn.centre();
    }
    const Eigen::MatrixXd h = -(d.asDiagonal() * w * d.cwiseInverse().asDiagonal());
    dyn.apply_hamiltonian(x, 0.3, out);
    EXPECT_LT((out - (h * x - 0.15 * h0.cwiseProduct(x))).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(dyn.max_out_rate(), (-w.diagonal()).maxCoeff(), 1e-12);
  }
}

TEST(MasterTimedep, FrozenScheduleReducesToFixedTemperature) {
  const auto m = uniform_chain(4);
  const auto gen = build_generator(m, 0.8, RateRule::metropolis());
  ProbabilityVector p0(16, 0.0);
  p0[3] = 1.0;
  const auto fixed = evolve_master(gen, p0, 5.0, 0.01, 10);
  const auto tr = evolve_master_timedep(m, RateRule::metropolis(), Schedule::frozen(0.8, 5.0), p0,
                                        options(0.01, 50));
  ASSERT_EQ(fixed.states.size(), tr.samples.size());
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    EXPECT_NEAR(fixed.times[k], tr.samples[k].t, 1e-12);
    for (int s = 0; s < 16; ++s) EXPECT_NEAR(fixed.states[k][s], tr.samples[k].state(s), 1e-10);
  }
}

TEST(MasterTimedep, LinearAnnealFindsGroundPair) {
  const auto tr = evolve_master_timedep(uniform_chain(6), RateRule::heat_bath(), Schedule(LinearBeta{0.0, 3.0, 200.0}),
                                        uniform_p(6), options(0.01, 100));
  EXPECT_GE(tr.samples.back().ground_probability, 0.9);
  for (const auto& smp : tr.samples) {
    EXPECT_NEAR(smp.state.sum(), 1.0, 1e-6);
    EXPECT_GE(smp.ground_probability, 0.0);
    EXPECT_LE(smp.ground_probability, 1.0 + 1e-12);
  }
}

TEST(MasterTimedep, GemanGemanConvergesOnFrustratedInstance) {
  // The final ground probability cannot exceed the Boltzmann ground mass at
  // beta(t_final) = log(1e4 + 1) / 8 = 1.15; instance 2 has a ceiling of 0.912.
  const auto m = frustrated_instance(2);
  const Schedule s(GemanGeman{2.0, 4, 1.0, 1e4});
  const auto tr = evolve_master_timedep(m, RateRule::heat_bath(), s, uniform_p(4), options(0.02, 100));
  double prev = -1.0;
  for (const auto& smp : tr.samples)
    if (smp.t >= 1e3) {
      EXPECT_GT(smp.ground_probability, prev) << "t = " << smp.t;
      prev = smp.ground_probability;
    }
  EXPECT_GT(tr.samples.back().ground_probability, 0.8);
  const auto e = oracle::energies(m);
  const auto pi = oracle::boltzmann(m, s.beta(1e4));
  const double e_min = *std::min_element(e.begin(), e.end());
  double ceiling = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] < e_min + 1e-9) ceiling += pi[i];
  EXPECT_GE(tr.samples.back().ground_probability, 0.99 * ceiling);
  EXPECT_LE(tr.samples.back().ground_probability, ceiling + 1e-9);
}

TEST(ImaginaryTime, MatchesTransformedMasterTrajectory) {
  const auto m = uniform_chain(4);
  const auto e = energy_table(m);
  const Schedule s(LinearBeta{0.0, 2.0, 10.0});
  const auto master = evolve_master_timedep(m, RateRule::heat_bath(), s, uniform_p(4), options(1e-3, 100));
  const auto imag =
      evolve_imaginary_schrodinger(m, RateRule::heat_bath(), s, instantaneous_ground(e, 0.0), options(1e-3, 100));
  const auto r = consistency(master, imag, e);
  EXPECT_EQ(r.samples, 101u);
  EXPECT_LE(r.max_cosine_deficit, 1e-6);
}

TEST(ImaginaryTime, TransformationIdentityOnRandomModels) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int n = 3; n <= 6; ++n) {
    const auto m = oracle::random_model(n, rng);
    const auto e = energy_table(m);
    ProbabilityVector p0(state_count(n));
    double z = 0.0;
    for (auto& x : p0) z += x = u(rng);
    for (auto& x : p0) x /= z;
    const Eigen::VectorXd phi0 =
        to_wavefunction(Eigen::Map<const Eigen::VectorXd>(p0.data(), p0.size()), e, 0.1);
    for (const auto& rule : {RateRule::heat_bath(), RateRule::metropolis()})
      for (const Schedule& s : {Schedule(ExponentialBeta{0.1, 0.4, 4.0}), Schedule(GemanGeman{1.0, n, 3.0, 4.0})}) {
        if (s.beta(0.0) != 0.1 && std::holds_alternative<GemanGeman>(s.variant())) {
          // Geman-Geman starts at log(3)/n; map the same P(0) at that beta
          const Eigen::VectorXd phi_g =
              to_wavefunction(Eigen::Map<const Eigen::VectorXd>(p0.data(), p0.size()), e, s.beta(0.0));
          const auto a = evolve_master_timedep(m, rule, s, p0, options(1e-3, 40));
          const auto b = evolve_imaginary_schrodinger(m, rule, s, phi_g, options(1e-3, 40));
          EXPECT_LE(consistency(a, b, e).max_cosine_deficit, 1e-6) << "n = " << n << " " << s.to_string();
          continue;
        }
        const auto a = evolve_master_timedep(m, rule, s, p0, options(1e-3, 40));
        const auto b = evolve_imaginary_schrodinger(m, rule, s, phi0, options(1e-3, 40));
        EXPECT_LE(consistency(a, b, e).max_cosine_deficit, 1e-6) << "n = " << n << " " << s.to_string();
      }
  }
}

TEST(ImaginaryTime, ConsistencyIsFourthOrderInDt) {
  const auto m = uniform_chain(4);
  const auto e = energy_table(m);
  const Schedule s(LinearBeta{0.0, 2.0, 10.0});
  std::vector<double> angle;
  for (double dt : {0.02, 0.01, 0.005, 0.0025, 0.00125}) {
    const auto a = evolve_master_timedep(m, RateRule::heat_bath(), s, uniform_p(4), options(dt, 100));
    const auto b =
        evolve_imaginary_schrodinger(m, RateRule::heat_bath(), s, instantaneous_ground(e, 0.0), options(dt, 100));
    angle.push_back(consistency(a, b, e).max_angle);
  }
  for (std::size_t k = 1; k < angle.size(); ++k) {
    const double ratio = angle[k - 1] / angle[k];
    EXPECT_GE(ratio, 16.0 / std::sqrt(2.0)) << "dt step " << k;
    EXPECT_LE(ratio, 16.0 * std::sqrt(2.0)) << "dt step " << k;
  }
}

TEST(ImaginaryTime, FrozenBetaConvergesToGround) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::VectorXd phi0(16);
  for (auto& x : phi0) x = u(rng);
  const auto m = uniform_chain(4);
  const auto tr =
      evolve_imaginary_schrodinger(m, RateRule::heat_bath(), Schedule::frozen(0.5, 80.0), phi0, options(0.01, 20));
  EXPECT_GE(tr.samples.back().overlap, 1 - 1e-8);
  for (const auto& smp : tr.samples) EXPECT_NEAR(smp.state.norm(), 1.0, 1e-12);
  // late decrements approach zero: the ground energy of H is zero
  EXPECT_NEAR(tr.samples.back().log_norm_decrement, 0.0, 1e-8);
}

TEST(ImaginaryTime, OmittedTermMattersOnlyForFastSchedules) {
  const auto m = uniform_chain(4);
  const auto g0 = instantaneous_ground(energy_table(m), 0.0);
  auto run = [&](double t_final, bool term) {
    return evolve_imaginary_schrodinger(m, RateRule::heat_bath(), Schedule(LinearBeta{0.0, 0.5, t_final}), g0,
                                        options(0.005, 100, term));
  };
  const double fast = max_deficit(run(1.0, true), run(1.0, false));
  const double slow = max_deficit(run(1e3, true), run(1e3, false));
  EXPECT_GT(fast, 1e-3);
  EXPECT_LT(slow, 1e-6);
  EXPECT_FALSE(run(1.0, false).beta_dot_term);
}

TEST(RealTime, FrozenGroundStateIsStationary) {
  const auto m = uniform_chain(4);
  const Eigen::VectorXcd g = instantaneous_ground(energy_table(m), 0.6).cast<std::complex<double>>();
  const auto tr = evolve_real_schrodinger(m, RateRule::heat_bath(), Schedule::frozen(0.6, 50.0), g, options(0.01, 50));
  for (const auto& smp : tr.samples) {
    EXPECT_GE(smp.overlap, 1 - 1e-8);
    EXPECT_NEAR(smp.amplitude.norm(), 1.0, 1e-6);
  }
}

TEST(RealTime, TwoLevelOscillationPeriod) {
  const auto m = uniform_chain(3, 0.8);
  const double beta = 0.7;
  const auto es = mapped_eig(m, beta, RateRule::metropolis());
  // lowest level and the next level that is separated from it
  Eigen::Index k = 1;
  while (es.eigenvalues()(k) - es.eigenvalues()(0) < 1e-6) ++k;
  const double gap = es.eigenvalues()(k) - es.eigenvalues()(0);
  const Eigen::VectorXcd phi0 = ((es.eigenvectors().col(0) + es.eigenvectors().col(k)) / std::sqrt(2.0))
                                    .cast<std::complex<double>>();
  const double period = 2 * std::numbers::pi / gap;
  const double t_final = 3.3 * period;
  const int n_samples = 2000;
  const auto tr = evolve_real_schrodinger(m, RateRule::metropolis(), Schedule::frozen(beta, t_final), phi0,
                                          options(0.002, n_samples));
  std::vector<double> crossings;
  double prev = 0.0;
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    const auto& smp = tr.samples[i];
    const double f = std::norm(phi0.dot(smp.amplitude)) - 0.5;
    EXPECT_NEAR(f + 0.5, std::pow(std::cos(0.5 * gap * smp.t), 2), 1e-6);
    if (i > 0 && prev > 0.0 && f <= 0.0) {
      const double t0 = tr.samples[i - 1].t;
      crossings.push_back(t0 + (smp.t - t0) * prev / (prev - f));
    }
    prev = f;
  }
  ASSERT_GE(crossings.size(), 3u);
  const double measured = (crossings.back() - crossings.front()) / (crossings.size() - 1);
  EXPECT_NEAR(measured, period, 0.01 * period);
}

TEST(RealTime, AdiabaticRegimes) {
  const auto m = uniform_chain(4);
  const auto rule = RateRule::heat_bath();
  double min_gap = INFINITY;
  for (double b = 0.0; b <= 0.5 + 1e-12; b += 0.01) {
    const auto ev = mapped_eig(m, b, rule).eigenvalues();
    min_gap = std::min(min_gap, ev(1) - ev(0));
  }
  const double slow_t = 500.0, fast_t = 0.1;
  ASSERT_GT(slow_t, 20.0 / (min_gap * min_gap));
  ASSERT_LT(fast_t, 0.1 / min_gap);
  const Eigen::VectorXcd g0 = instantaneous_ground(energy_table(m), 0.0).cast<std::complex<double>>();
  const auto slow = evolve_real_schrodinger(m, rule, Schedule(LinearBeta{0.0, 0.5, slow_t}), g0, options(0.005, 100));
  const auto fast = evolve_real_schrodinger(m, rule, Schedule(LinearBeta{0.0, 0.5, fast_t}), g0, options(0.005, 20));
  EXPECT_GE(slow.samples.back().overlap, 0.99);
  EXPECT_LT(fast.samples.back().overlap, 0.9);
  for (const auto& smp : slow.samples) EXPECT_NEAR(smp.amplitude.norm(), 1.0, 1e-6);
}

TEST(AnnealGuards, Rejections) {
  const auto m = uniform_chain(4);
  const Schedule s(LinearBeta{0.0, 1.0, 1.0});
  EXPECT_THROW(evolve_master_timedep(uniform_chain(11), RateRule::heat_bath(), s, uniform_p(11)), std::invalid_argument);
  EXPECT_THROW(evolve_master_timedep(m, RateRule::heat_bath(), s, uniform_p(4), options(0.05, 10)),
               std::invalid_argument);
  EXPECT_THROW(evolve_master_timedep(m, RateRule::heat_bath(), s, uniform_p(3)), std::invalid_argument);
  EXPECT_THROW(evolve_imaginary_schrodinger(m, RateRule::heat_bath(), s, Eigen::VectorXd::Zero(16)),
               std::invalid_argument);
  EXPECT_THROW(evolve_real_schrodinger(m, RateRule::heat_bath(), s, Eigen::VectorXcd::Ones(8)), std::invalid_argument);
  EXPECT_THROW(evolve_master_timedep(m, RateRule::heat_bath(), s, uniform_p(4), options(-1.0, 10)),
               std::invalid_argument);
}
