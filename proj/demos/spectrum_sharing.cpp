// Heat-bath chain: eigenvalues of -W next to the explicit transverse-field
// Hamiltonian and the free-fermion prediction.
#include <cstdio>

#include "annealmap/bridge.hpp"
#include "annealmap/fermion.hpp"

using namespace annealmap;

int main() {
  const int n = 6;
  const double k = 0.5;
  const auto gen = build_generator(uniform_chain(n), k, RateRule::heat_bath());
  const auto w = spectrum_of_generator(gen).eigenvalues;
  const auto h = spectrum_of_matrix(chain_heatbath_hamiltonian(n, k).matrix).eigenvalues;
  const auto f = many_body_spectrum(FermionChainParams::make(n, k));
  std::printf("%4s %14s %14s %14s\n", "i", "-eig(W)", "eig(H)", "fermions");
  for (std::size_t i = 0; i < 12; ++i)
    std::printf("%4zu %14.10f %14.10f %14.10f\n", i, -w[w.size() - 1 - i], h[i], f[i]);
  std::printf("gap %.12f   1 - tanh 2K = %.12f\n", h[1] - h[0], 1.0 - std::tanh(2.0 * k));
}
