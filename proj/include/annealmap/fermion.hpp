#pragma once

// Jordan-Wigner solution of the heat-bath chain Hamiltonian.
//
// After the rotation x -> z, z -> -x the chain becomes quadratic in fermions:
//   H = C + J1 sum (a_j - a_j^+)(a_{j+1} + a_{j+1}^+)
//         + J2 sum (a_{j-1} - a_{j-1}^+)(a_{j+1} + a_{j+1}^+)
//         - Gamma sum (a_j^+ a_j - a_j a_j^+)
// with C = N/2, J1 = tanh(2K)/2, J2 = sinh^2 K / (2 cosh 2K),
// Gamma = cosh^2 K / (2 cosh 2K). Even fermion number pairs with antiperiodic
// momenta, odd fermion number with periodic momenta.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annealmap/bridge.hpp"
#include "annealmap/spectral.hpp"

namespace annealmap {

inline constexpr int kMaxFermionEnumeration = 16;

struct FermionChainParams {
  int n = 0;
  double k = 0.0;
  double c = 0.0;      // N/2
  double j1 = 0.0;     // tanh(2K)/2
  double j2 = 0.0;     // sinh^2 K / (2 cosh 2K)
  double gamma = 0.0;  // cosh^2 K / (2 cosh 2K)

  static FermionChainParams make(int n, double k) {
    if (n < 2 || n % 2 != 0)
      throw std::invalid_argument("fermion chain: n must be even and >= 2, got " +
                                  std::to_string(n));
    if (!(k >= 0.0) || k > 350.0)
      throw std::invalid_argument("fermion chain: K must lie in [0, 350]");
    FermionChainParams p;
    p.n = n;
    p.k = k;
    p.c = 0.5 * n;
    const double ch2 = std::cosh(2.0 * k);
    p.j1 = 0.5 * std::tanh(2.0 * k);
    p.j2 = std::sinh(k) * std::sinh(k) / (2.0 * ch2);
    p.gamma = std::cosh(k) * std::cosh(k) / (2.0 * ch2);
    return p;
  }
};

enum class Sector { Even, Odd };

inline std::string to_string(Sector s) { return s == Sector::Even ? "even" : "odd"; }

/// Even sector (antiperiodic): p = pi (2k+1) / N. Odd sector (periodic): p = 2 pi k / N.
inline std::vector<double> momentum_grid(Sector sector, int n) {
  if (n < 1) throw std::invalid_argument("momentum_grid: n must be positive");
  std::vector<double> p(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    p[static_cast<std::size_t>(k)] = sector == Sector::Even
                                         ? std::numbers::pi * (2.0 * k + 1.0) / n
                                         : 2.0 * std::numbers::pi * k / n;
  return p;
}

/// |Gamma + J1 e^{ip} + J2 e^{2ip}|.
inline double dispersion_modulus(double k, double p) {
  const auto fp = FermionChainParams::make(2, k);
  using C = std::complex<double>;
  const C z = fp.gamma + fp.j1 * std::polar(1.0, p) + fp.j2 * std::polar(1.0, 2.0 * p);
  return std::abs(z);
}

/// eps_p = (1 + tanh(2K) cos p) / 2, the nonnegative root.
inline double dispersion(double k, double p) {
  if (!(k >= 0.0)) throw std::invalid_argument("dispersion: K must be >= 0");
  const double eps = 0.5 * (1.0 + std::tanh(2.0 * k) * std::cos(p));
  if (std::abs(eps - dispersion_modulus(k, p)) > 1e-12)
    throw std::logic_error("dispersion: cosine and modulus forms disagree");
  return eps;
}

namespace detail {
// Every subset sum sum_{i in S} 2 e_i together with the subset parity.
inline void subset_energies(const std::vector<double>& eps, double offset, int parity,
                            std::vector<double>& out) {
  const std::size_t n = eps.size();
  std::vector<double> sums(std::size_t{1} << n, 0.0);
  for (std::size_t m = 1; m < sums.size(); ++m) {
    const int low = std::countr_zero(m);
    sums[m] = sums[m & (m - 1)] + 2.0 * eps[static_cast<std::size_t>(low)];
  }
  for (std::size_t m = 0; m < sums.size(); ++m)
    if ((std::popcount(m) & 1) == parity) out.push_back(offset + sums[m]);
}
}  // namespace detail

/// Sorted 2^N many-body energies: even-size subsets of the antiperiodic grid
/// plus odd-size subsets of the periodic grid, each excitation costing 2 eps_p.
inline std::vector<double> many_body_spectrum(const FermionChainParams& fp) {
  if (fp.n > kMaxFermionEnumeration)
    throw std::invalid_argument("many_body_spectrum: n capped at " +
                                std::to_string(kMaxFermionEnumeration));
  std::vector<double> even, odd;
  for (double p : momentum_grid(Sector::Even, fp.n)) even.push_back(dispersion(fp.k, p));
  for (double p : momentum_grid(Sector::Odd, fp.n)) odd.push_back(dispersion(fp.k, p));
  std::vector<double> out;
  out.reserve(state_count(fp.n));
  detail::subset_energies(even, 0.0, 0, out);
  detail::subset_energies(odd, 0.0, 1, out);
  if (out.size() != state_count(fp.n)) throw std::logic_error("many_body_spectrum: state count");
  std::sort(out.begin(), out.end());
  return out;
}

/// C - sum over the antiperiodic grid of eps_p (the vacuum energy; zero).
inline double fermion_ground_energy(const FermionChainParams& fp) {
  double e = fp.c;
  for (double p : momentum_grid(Sector::Even, fp.n)) e -= dispersion(fp.k, p);
  return e;
}

/// min over the periodic grid of 2 eps_p; equals 1 - tanh 2K for even n.
inline double finite_gap(const FermionChainParams& fp) {
  double g = std::numeric_limits<double>::infinity();
  for (double p : momentum_grid(Sector::Odd, fp.n)) g = std::min(g, 2.0 * dispersion(fp.k, p));
  return g;
}

// ---------------------------------------------------------------------------
// Random couplings

/// Site-dependent quadratic-form couplings of the random heat-bath chain:
/// j1[j] on bond (j, j+1), j2[j] connecting j-1 and j+1, gamma[j] on site j.
/// Uniform couplings reproduce FermionChainParams' J1, J2, Gamma.
struct SiteCouplings {
  std::vector<double> j1, j2, gamma;
};

inline SiteCouplings site_couplings(std::span<const double> couplings, double beta) {
  const int n = static_cast<int>(couplings.size());
  const auto co = random_chain_coefficients(couplings, beta);
  SiteCouplings sc;
  for (int j = 0; j < n; ++j) {
    const auto a = static_cast<std::size_t>(j);
    const auto b = static_cast<std::size_t>(wrap(j + 1, n));
    sc.j1.push_back(0.5 * (co.left[b] + co.right[a]));
    sc.j2.push_back(0.5 * co.dressed[a]);
    sc.gamma.push_back(0.5 * co.transverse[a]);
  }
  return sc;
}

struct SingleParticleResult {
  Eigen::MatrixXd block;          // [[A, B], [-B, -A]], 2N x 2N
  std::vector<double> spectrum;   // all 2N eigenvalues, ascending
  std::vector<double> energies;   // positive half, ascending
};

/// Block matrix of the quadratic form with A_jj = -Gamma_j, A_{j,j+1} = -J1_j/2,
/// A_{j-1,j+1} = -J2_j/2 and B_{j,j+1} = -J1_j/2, B_{j-1,j+1} = -J2_j/2 (B
/// antisymmetric). Wrapped indices pick up a minus sign in the Even
/// (antiperiodic) sector.
inline SingleParticleResult random_single_particle_matrix(std::span<const double> couplings,
                                                          double beta,
                                                          Sector sector = Sector::Odd) {
  const int n = static_cast<int>(couplings.size());
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("random_single_particle_matrix: need even length >= 4");
  const auto sc = site_couplings(couplings, beta);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n), b = Eigen::MatrixXd::Zero(n, n);
  auto bond = [&](int i, int k, double value) {
    const double sign = (sector == Sector::Even && (i < 0 || i >= n || k < 0 || k >= n)) ? -1.0 : 1.0;
    const int ii = wrap(i, n), kk = wrap(k, n);
    a(ii, kk) += sign * value;
    a(kk, ii) += sign * value;
    b(ii, kk) += sign * value;
    b(kk, ii) -= sign * value;
  };
  for (int j = 0; j < n; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    a(j, j) -= sc.gamma[jj];
    bond(j, j + 1, -0.5 * sc.j1[jj]);
    bond(j - 1, j + 1, -0.5 * sc.j2[jj]);
  }
  SingleParticleResult r;
  r.block.resize(2 * n, 2 * n);
  r.block << a, b, -b, -a;
  const auto dec = eig_sym(r.block, false);
  r.spectrum.assign(dec.values.data(), dec.values.data() + dec.values.size());
  r.energies.assign(r.spectrum.begin() + n, r.spectrum.end());
  return r;
}

/// Many-body spectrum of the random chain from both sectors' single-particle
/// energies: vacuum energy C - sum eps plus 2 eps per excitation, even subsets
/// from the antiperiodic block and odd subsets from the periodic block.
inline std::vector<double> random_many_body_spectrum(std::span<const double> couplings,
                                                     double beta) {
  const int n = static_cast<int>(couplings.size());
  if (n > kMaxFermionEnumeration)
    throw std::invalid_argument("random_many_body_spectrum: n capped at " +
                                std::to_string(kMaxFermionEnumeration));
  std::vector<double> out;
  for (Sector sector : {Sector::Even, Sector::Odd}) {
    const auto sp = random_single_particle_matrix(couplings, beta, sector);
    double vacuum = 0.5 * n;
    for (double e : sp.energies) vacuum -= e;
    detail::subset_energies(sp.energies, vacuum, sector == Sector::Even ? 0 : 1, out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace annealmap
