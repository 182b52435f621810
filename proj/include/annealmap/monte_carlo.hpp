#pragma once

// Single-flip Monte Carlo as a stochastic realization of the master equation.
// One sweep is N random-site attempts and counts as one unit of schedule time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "annealmap/markov.hpp"
#include "annealmap/schedule.hpp"

namespace annealmap {

struct SeedOutcome {
  std::uint64_t seed = 0;
  StateIndex final_state = 0;
  double final_energy = 0.0;
  bool success = false;
};

struct McReport {
  RateRule rule;
  std::string schedule;
  std::size_t n_sweeps = 0;
  std::size_t n_seeds = 0;
  std::uint64_t seed0 = 0;
  double ground_energy = 0.0;
  double success_fraction = 0.0;
  double acceptance_rate = 0.0;
  std::vector<double> energy_trace;  // seed-averaged energy after each sweep
  std::vector<SeedOutcome> outcomes;
};

namespace detail {

inline void require_mc_rule(const RateRule& rule) {
  if (rule.kind == RateKind::Uniform)
    throw std::invalid_argument("Monte Carlo: rule must be heatbath or metropolis");
}

/// Walker state with incremental energy bookkeeping.
class Walker {
 public:
  Walker(const IsingModel& m, RateRule rule, std::uint64_t seed)
      : m_(m), rule_(rule), rng_(seed), site_(0, m.n_spins() - 1) {
    std::uniform_int_distribution<StateIndex> start(0, state_count(m.n_spins()) - 1);
    s_ = start(rng_);
    e_ = m.energy(s_);
  }

  /// N attempts at inverse temperature beta; returns accepted count.
  std::size_t sweep(double beta) {
    std::size_t acc = 0;
    for (int a = 0; a < m_.n_spins(); ++a) {
      const int j = site_(rng_);
      const double d = m_.flip_delta(s_, j);
      if (unit_(rng_) < local_rate(rule_, beta, d).rate) {
        s_ = flip(s_, j);
        e_ += d;
        ++acc;
      }
    }
    return acc;
  }

  StateIndex state() const { return s_; }
  double energy() const { return e_; }

 private:
  const IsingModel& m_;
  RateRule rule_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<int> site_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  StateIndex s_ = 0;
  double e_ = 0.0;
};

inline unsigned worker_count(std::size_t jobs) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(jobs, hw));
}

}  // namespace detail

inline double exhaustive_ground_energy(const IsingModel& m) {
  require_enumerable(m, "exhaustive_ground_energy");
  const auto e = energy_table(m);
  return *std::min_element(e.begin(), e.end());
}

/// Seed i uses mt19937_64(seed0 + i); sweep k runs at beta(k + 1/2). Seeds run
/// in parallel but each owns its generator, so results do not depend on
/// scheduling.
inline McReport mc_simulated_annealing(const IsingModel& model, const RateRule& rule,
                                       const Schedule& schedule, std::size_t n_sweeps,
                                       std::size_t n_seeds, std::uint64_t seed0,
                                       std::optional<double> ground_energy = std::nullopt) {
  detail::require_mc_rule(rule);
  if (n_seeds < 1) throw std::invalid_argument("mc_simulated_annealing: n_seeds must be >= 1");
  if (!ground_energy) {
    if (model.n_spins() > kMaxEnumerableSpins)
      throw std::invalid_argument("mc_simulated_annealing: N > " +
                                  std::to_string(kMaxEnumerableSpins) +
                                  " requires a supplied ground energy");
    ground_energy = exhaustive_ground_energy(model);
  }
  const double eg = *ground_energy;
  const double tol = 1e-9 * std::max(1.0, std::abs(eg));

  std::vector<double> betas(n_sweeps);
  for (std::size_t k = 0; k < n_sweeps; ++k) betas[k] = schedule.beta(static_cast<double>(k) + 0.5);

  McReport r;
  r.rule = rule;
  r.schedule = schedule.to_string();
  r.n_sweeps = n_sweeps;
  r.n_seeds = n_seeds;
  r.seed0 = seed0;
  r.ground_energy = eg;
  r.outcomes.resize(n_seeds);
  std::vector<std::vector<double>> traces(n_seeds, std::vector<double>(n_sweeps));
  std::vector<std::size_t> accepted(n_seeds, 0);

  auto run = [&](std::size_t i) {
    detail::Walker w(model, rule, seed0 + i);
    for (std::size_t k = 0; k < n_sweeps; ++k) {
      accepted[i] += w.sweep(betas[k]);
      traces[i][k] = w.energy();
    }
    // recompute to shed accumulated rounding from the incremental updates
    const double e = model.energy(w.state());
    r.outcomes[i] = {seed0 + i, w.state(), e, std::abs(e - eg) <= tol};
  };
  const unsigned workers = detail::worker_count(n_seeds);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n_seeds; i += workers) run(i);
    });
  for (auto& th : pool) th.join();

  r.energy_trace.assign(n_sweeps, 0.0);
  std::size_t succ = 0, acc = 0;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    for (std::size_t k = 0; k < n_sweeps; ++k) r.energy_trace[k] += traces[i][k] / n_seeds;
    succ += r.outcomes[i].success;
    acc += accepted[i];
  }
  r.success_fraction = static_cast<double>(succ) / n_seeds;
  const double attempts = static_cast<double>(n_seeds) * n_sweeps * model.n_spins();
  r.acceptance_rate = attempts > 0 ? acc / attempts : 0.0;
  return r;
}

/// Fixed-beta chain; `observe(state, energy)` is called after each of the
/// n_sweeps sweeps following burn_in. Returns the acceptance rate.
template <class Observer>
double mc_run_fixed_beta(const IsingModel& model, const RateRule& rule, double beta,
                         std::size_t burn_in, std::size_t n_sweeps, std::uint64_t seed,
                         Observer&& observe) {
  detail::require_mc_rule(rule);
  detail::Walker w(model, rule, seed);
  for (std::size_t k = 0; k < burn_in; ++k) w.sweep(beta);
  std::size_t acc = 0;
  for (std::size_t k = 0; k < n_sweeps; ++k) {
    acc += w.sweep(beta);
    observe(w.state(), w.energy());
  }
  const double attempts = static_cast<double>(n_sweeps) * model.n_spins();
  return attempts > 0 ? acc / attempts : 0.0;
}

/// Empirical state distribution over n_sweeps post-burn-in sweeps.
inline ProbabilityVector mc_equilibrium_histogram(const IsingModel& model, const RateRule& rule,
                                                  double beta, std::size_t n_sweeps,
                                                  std::uint64_t seed, std::size_t burn_in = 1000) {
  require_enumerable(model, "mc_equilibrium_histogram");
  if (n_sweeps < 1) throw std::invalid_argument("mc_equilibrium_histogram: n_sweeps must be >= 1");
  ProbabilityVector h(model.dim(), 0.0);
  mc_run_fixed_beta(model, rule, beta, burn_in, n_sweeps, seed,
                    [&](StateIndex s, double) { h[s] += 1.0; });
  for (auto& x : h) x /= static_cast<double>(n_sweeps);
  return h;
}

}  // namespace annealmap
