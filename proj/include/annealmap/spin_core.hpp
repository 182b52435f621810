#pragma once

// Ising models with arbitrary multibody diagonal couplings, configuration
// indexing, energies, flip deltas and Boltzmann weights.
//
// Configuration convention: a state is an integer index in [0, 2^N). Bit i of
// the index equal to 0 means sigma_i = +1, bit i equal to 1 means sigma_i = -1.
// All other headers go through the helpers below instead of touching bits.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace annealmap {

using StateIndex = std::uint64_t;

// Models up to this size can be stored; dense constructions have tighter caps.
inline constexpr int kMaxModelSpins = 30;
// Exhaustive enumeration (Boltzmann vectors, energy tables, ground scans).
inline constexpr int kMaxEnumerableSpins = 20;
// Dense 2^N x 2^N matrices.
inline constexpr int kMaxDenseSpins = 12;

using ProbabilityVector = std::vector<double>;

// ---------------------------------------------------------------------------
// Configuration helpers

inline std::size_t state_count(int n_spins) {
  return std::size_t{1} << n_spins;
}

/// Spin value (+1 / -1) at `site`.
inline int spin(StateIndex s, int site) {
  return ((s >> site) & 1U) ? -1 : 1;
}

inline StateIndex flip(StateIndex s, int site) {
  return s ^ (StateIndex{1} << site);
}

/// Complement of every spin (global spin reversal).
inline StateIndex complement(StateIndex s, int n_spins) {
  return s ^ (state_count(n_spins) - 1);
}

/// Bit mask selecting a set of sites.
inline StateIndex site_mask(std::span<const int> sites) {
  StateIndex m = 0;
  for (int i : sites) m |= StateIndex{1} << i;
  return m;
}

/// Product of sigma_i over the sites selected by `mask`.
inline int spin_product(StateIndex s, StateIndex mask) {
  return (std::popcount(s & mask) & 1) ? -1 : 1;
}

/// Number of sites on which two configurations differ.
inline int hamming_distance(StateIndex a, StateIndex b) {
  return std::popcount(a ^ b);
}

/// Sites selected by `mask`, ascending.
inline std::vector<int> mask_sites(StateIndex mask) {
  std::vector<int> out;
  for (int i = 0; mask != 0; ++i, mask >>= 1)
    if (mask & 1U) out.push_back(i);
  return out;
}

/// Spin values (+1/-1) for sites 0..n-1.
inline std::vector<int> decode(StateIndex s, int n_spins) {
  std::vector<int> out(static_cast<std::size_t>(n_spins));
  for (int i = 0; i < n_spins; ++i) out[static_cast<std::size_t>(i)] = spin(s, i);
  return out;
}

inline StateIndex encode(std::span<const int> spins) {
  StateIndex s = 0;
  for (std::size_t i = 0; i < spins.size(); ++i) {
    if (spins[i] == -1)
      s |= StateIndex{1} << i;
    else if (spins[i] != 1)
      throw std::invalid_argument("encode: spin values must be +1 or -1");
  }
  return s;
}

// ---------------------------------------------------------------------------
// IsingModel

/// One diagonal term: coeff * prod_{i in sites} sigma_i. An empty site list is
/// a constant offset.
struct Term {
  std::vector<int> sites;
  double coeff = 0.0;
};

class IsingModel {
 public:
  IsingModel(int n_spins, std::vector<Term> terms, std::string name = {})
      : n_(n_spins), terms_(std::move(terms)), name_(std::move(name)) {
    if (n_ < 1 || n_ > kMaxModelSpins)
      throw std::invalid_argument("IsingModel: n_spins must lie in [1, " +
                                  std::to_string(kMaxModelSpins) + "], got " +
                                  std::to_string(n_));
    site_terms_.resize(static_cast<std::size_t>(n_));
    masks_.reserve(terms_.size());
    std::map<StateIndex, std::size_t> seen;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      auto& sites = terms_[t].sites;
      std::sort(sites.begin(), sites.end());
      if (std::adjacent_find(sites.begin(), sites.end()) != sites.end())
        throw std::invalid_argument("IsingModel: term " + std::to_string(t) +
                                    " repeats a site");
      for (int i : sites)
        if (i < 0 || i >= n_)
          throw std::invalid_argument("IsingModel: site index " + std::to_string(i) +
                                      " out of range [0, " + std::to_string(n_) + ")");
      if (!std::isfinite(terms_[t].coeff))
        throw std::invalid_argument("IsingModel: non-finite coefficient");
      const StateIndex m = site_mask(sites);
      if (!seen.emplace(m, t).second)
        throw std::invalid_argument("IsingModel: two terms share the same site subset");
      masks_.push_back(m);
      for (int i : sites) site_terms_[static_cast<std::size_t>(i)].push_back(t);
    }
  }

  int n_spins() const { return n_; }
  std::size_t dim() const { return state_count(n_); }
  const std::vector<Term>& terms() const { return terms_; }
  const std::string& name() const { return name_; }

  /// H0(sigma) = sum_terms coeff * prod sigma_i.
  double energy(StateIndex s) const {
    double e = 0.0;
    for (std::size_t t = 0; t < terms_.size(); ++t)
      e += terms_[t].coeff * spin_product(s, masks_[t]);
    return e;
  }

  /// H0(flip(s, site)) - H0(s). Only terms touching `site` change sign.
  double flip_delta(StateIndex s, int site) const {
    if (site < 0 || site >= n_)
      throw std::invalid_argument("flip_delta: site " + std::to_string(site) +
                                  " out of range");
    double d = 0.0;
    for (std::size_t t : site_terms_[static_cast<std::size_t>(site)])
      d += terms_[t].coeff * spin_product(s, masks_[t]);
    return -2.0 * d;
  }

  /// Copy of this model with an extra constant term (or the constant shifted).
  IsingModel with_offset(double c) const {
    auto terms = terms_;
    auto it = std::find_if(terms.begin(), terms.end(),
                           [](const Term& t) { return t.sites.empty(); });
    if (it != terms.end())
      it->coeff += c;
    else
      terms.push_back(Term{{}, c});
    return IsingModel(n_, std::move(terms), name_);
  }

  /// True when every term has an even number of sites.
  bool is_even() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const Term& t) { return t.sites.size() % 2 == 0; });
  }

 private:
  int n_;
  std::vector<Term> terms_;
  std::string name_;
  std::vector<StateIndex> masks_;
  std::vector<std::vector<std::size_t>> site_terms_;
};

inline double energy(const IsingModel& m, StateIndex s) { return m.energy(s); }

inline double flip_delta(const IsingModel& m, StateIndex s, int site) {
  return m.flip_delta(s, site);
}

inline void require_enumerable(const IsingModel& m, const char* what) {
  if (m.n_spins() > kMaxEnumerableSpins)
    throw std::invalid_argument(std::string(what) + ": requires N <= " +
                                std::to_string(kMaxEnumerableSpins) + ", got " +
                                std::to_string(m.n_spins()));
}

inline void require_dense(const IsingModel& m, const char* what) {
  if (m.n_spins() > kMaxDenseSpins)
    throw std::invalid_argument(
        std::string(what) + ": dense 2^N x 2^N storage needs N <= " +
        std::to_string(kMaxDenseSpins) + ", got N = " + std::to_string(m.n_spins()) +
        " (" + std::to_string(state_count(m.n_spins())) + " states)");
}

/// All 2^N energies, indexed by configuration.
inline std::vector<double> energy_table(const IsingModel& m) {
  require_enumerable(m, "energy_table");
  std::vector<double> e(m.dim());
  for (StateIndex s = 0; s < m.dim(); ++s) e[s] = m.energy(s);
  return e;
}

/// Configurations whose energy is within `tol` of the minimum.
inline std::vector<StateIndex> ground_states(std::span<const double> energies,
                                             double tol = 1e-9) {
  const double emin = *std::min_element(energies.begin(), energies.end());
  std::vector<StateIndex> out;
  for (std::size_t s = 0; s < energies.size(); ++s)
    if (energies[s] <= emin + tol) out.push_back(s);
  return out;
}

/// Boltzmann distribution from a precomputed energy table. Energies are shifted
/// by their minimum so every exponent is <= 0.
inline ProbabilityVector boltzmann_from_energies(std::span<const double> energies,
                                                 double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("boltzmann: beta must be finite and >= 0");
  const double emin = *std::min_element(energies.begin(), energies.end());
  ProbabilityVector p(energies.size());
  double z = 0.0;
  for (std::size_t s = 0; s < energies.size(); ++s) {
    p[s] = std::exp(-beta * (energies[s] - emin));
    z += p[s];
  }
  for (double& x : p) x /= z;
  return p;
}

inline ProbabilityVector boltzmann(const IsingModel& m, double beta) {
  require_enumerable(m, "boltzmann");
  const auto e = energy_table(m);
  return boltzmann_from_energies(e, beta);
}

/// Periodic chain H0 = -sum_j J_j sigma_{j-1} sigma_j; couplings[j] sits on
/// bond (j-1 mod n, j).
inline IsingModel chain_model(int n, std::span<const double> couplings,
                              std::string name = "chain") {
  if (n < 3)
    throw std::invalid_argument("chain_model: periodic chain needs n >= 3, got " +
                                std::to_string(n));
  if (couplings.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("chain_model: expected " + std::to_string(n) +
                                " couplings, got " + std::to_string(couplings.size()));
  std::vector<Term> terms;
  terms.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int prev = (j + n - 1) % n;
    terms.push_back(Term{{prev, j}, -couplings[static_cast<std::size_t>(j)]});
  }
  return IsingModel(n, std::move(terms), std::move(name));
}

inline IsingModel uniform_chain(int n, double j = 1.0) {
  std::vector<double> c(static_cast<std::size_t>(std::max(n, 0)), j);
  return chain_model(n, c, "uniform-chain");
}

/// Reproducible chain couplings J_j ~ U[lo, hi] from mt19937_64(seed).
inline std::vector<double> seeded_couplings(int n, std::uint64_t seed, double lo = 0.2,
                                            double hi = 1.5) {
  if (n < 1 || !(lo <= hi)) throw std::invalid_argument("seeded_couplings: bad arguments");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> c(static_cast<std::size_t>(n));
  for (auto& x : c) x = u(rng);
  return c;
}

/// Complete-graph pair model H0 = sum_{i<k} J_ik s_i s_k with |J| ~ U[1, 2] and
/// random signs, redrawn until no configuration satisfies every bond.
inline IsingModel frustrated_instance(std::uint64_t seed, int n = 4) {
  if (n < 3 || n > kMaxEnumerableSpins)
    throw std::invalid_argument("frustrated_instance: n must lie in [3, 20]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  std::bernoulli_distribution negative(0.5);
  for (;;) {
    std::vector<Term> terms;
    double satisfied_all = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) {
        const double sign = negative(rng) ? -1.0 : 1.0;
        const double j = sign * mag(rng);
        satisfied_all -= std::abs(j);
        terms.push_back(Term{{i, k}, j});
      }
    IsingModel m(n, std::move(terms), "frustrated-" + std::to_string(seed));
    double e_min = std::numeric_limits<double>::infinity();
    for (StateIndex s = 0; s < m.dim(); ++s) e_min = std::min(e_min, m.energy(s));
    if (e_min > satisfied_all + 1e-9) return m;
  }
}

/// Precomputed H0(flip(s, j)) - H0(s) for every state and site.
class FlipTable {
 public:
  explicit FlipTable(const IsingModel& m) : n_(m.n_spins()), energies_(energy_table(m)) {
    deltas_.resize(energies_.size() * static_cast<std::size_t>(n_));
    for (StateIndex s = 0; s < energies_.size(); ++s)
      for (int j = 0; j < n_; ++j) deltas_[index(s, j)] = m.flip_delta(s, j);
  }
  int n_spins() const { return n_; }
  std::size_t dim() const { return energies_.size(); }
  double delta(StateIndex s, int j) const { return deltas_[index(s, j)]; }
  const std::vector<double>& energies() const { return energies_; }

 private:
  std::size_t index(StateIndex s, int j) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }
  int n_;
  std::vector<double> energies_;
  std::vector<double> deltas_;
};

}  // namespace annealmap
