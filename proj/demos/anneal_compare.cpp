// The same linear anneal through the master equation and the imaginary-time
// flow, with and without the beta-dot term.
#include <cstdio>

#include "annealmap/anneal.hpp"

using namespace annealmap;

int main() {
  const auto model = uniform_chain(4);
  const auto rule = RateRule::heat_bath();
  const auto e = energy_table(model);
  AnnealOptions opt;
  opt.dt = 1e-3;
  opt.n_intervals = 10;
  for (double t_final : {1.0, 10.0, 100.0}) {
    const Schedule s(LinearBeta{0.0, 2.0, t_final});
    const auto m = evolve_master_timedep(model, rule, s, boltzmann_from_energies(e, 0.0), opt);
    const auto im = evolve_imaginary_schrodinger(model, rule, s, instantaneous_ground(e, 0.0), opt);
    opt.include_beta_dot_term = false;
    const auto approx = evolve_imaginary_schrodinger(model, rule, s, instantaneous_ground(e, 0.0), opt);
    opt.include_beta_dot_term = true;
    std::printf("T = %6.1f  P_ground = %.6f  master/imag deficit = %.2e  without term: %.2e\n",
                t_final, m.samples.back().ground_probability, consistency(m, im, e).max_cosine_deficit,
                consistency(m, approx, e).max_cosine_deficit);
  }
}
