#pragma once

// Classical generator -> stationary quantum Hamiltonian,
//   H = -exp(b H0 / 2) W exp(-b H0 / 2),
// plus the closed-form transverse-field chain Hamiltonians obtained by
// expanding that transform for periodic nearest-neighbour chains.

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "annealmap/markov.hpp"
#include "annealmap/spectral.hpp"

namespace annealmap {

enum class Provenance { MappedFromGenerator, ExplicitChain, UserSupplied };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::MappedFromGenerator: return "mapped-from-W";
    case Provenance::ExplicitChain: return "explicit-chain";
    case Provenance::UserSupplied: return "user-supplied";
  }
  return "?";
}

struct QuantumHamiltonian {
  Eigen::MatrixXd matrix;  // sigma^z product basis, same indexing as spin_core
  int n_spins = 0;
  Provenance provenance = Provenance::UserSupplied;
  std::optional<double> beta;
  std::optional<RateRule> rule;

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
};

// ---------------------------------------------------------------------------
// Basis-iteration operator assembly. Terms are applied to each basis state
// directly; no Kronecker products are formed.

class OperatorBuilder {
 public:
  explicit OperatorBuilder(int n_spins) : n_(n_spins) {
    if (n_ < 1 || n_ > kMaxDenseSpins)
      throw std::invalid_argument("OperatorBuilder: need 1 <= N <= " +
                                  std::to_string(kMaxDenseSpins));
    const auto d = static_cast<Eigen::Index>(state_count(n_));
    m_ = Eigen::MatrixXd::Zero(d, d);
  }

  int n_spins() const { return n_; }

  /// Adds c * 1.
  OperatorBuilder& constant(double c) {
    m_.diagonal().array() += c;
    return *this;
  }

  /// Adds sum_s f(s) |s><s|.
  OperatorBuilder& diagonal(const std::function<double(StateIndex)>& f) {
    for (StateIndex s = 0; s < state_count(n_); ++s)
      m_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) += f(s);
    return *this;
  }

  /// Adds c(s) sigma^x_site, where c may depend on spins other than `site`.
  OperatorBuilder& transverse(int site, const std::function<double(StateIndex)>& c) {
    for (StateIndex s = 0; s < state_count(n_); ++s)
      m_(static_cast<Eigen::Index>(flip(s, site)), static_cast<Eigen::Index>(s)) += c(s);
    return *this;
  }

  Eigen::MatrixXd build() && { return std::move(m_); }
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  int n_;
  Eigen::MatrixXd m_;
};

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

// sigma^z_i sigma^z_k eigenvalue on basis state s.
inline double zz(StateIndex s, int i, int k) {
  return static_cast<double>(spin(s, i) * spin(s, k));
}

// ---------------------------------------------------------------------------
// Generic mapping

/// Entry-wise H_ab = -exp(b H0(a)/2) W_ab exp(-b H0(b)/2). Off-diagonals come
/// out as -w_ab. Throws std::domain_error if W breaks detailed balance.
inline QuantumHamiltonian classical_to_quantum(const MarkovGenerator& gen) {
  const auto e = energy_table(gen.model());
  const double half_beta = 0.5 * gen.beta();
  const auto& w = gen.matrix();
  Eigen::MatrixXd h(w.rows(), w.cols());
  for (Eigen::Index a = 0; a < w.rows(); ++a)
    for (Eigen::Index b = 0; b < w.cols(); ++b)
      h(a, b) = a == b || w(a, b) == 0.0
                    ? -w(a, b)
                    : -w(a, b) * std::exp(half_beta * (e[static_cast<std::size_t>(a)] -
                                                       e[static_cast<std::size_t>(b)]));
  if (const double asym = asymmetry(h); asym > 1e-8)
    throw std::domain_error(
        "classical_to_quantum: mapped matrix not symmetric (relative asymmetry " +
        std::to_string(asym) + "); the generator fails detailed balance");
  QuantumHamiltonian q;
  q.matrix = 0.5 * (h + h.transpose());
  q.n_spins = gen.n_spins();
  q.provenance = Provenance::MappedFromGenerator;
  q.beta = gen.beta();
  q.rule = gen.rule();
  return q;
}

/// H = sum_{s,s'} w_{ss'} (exp(-b (H0(s') - H0(s)) / 2) |s><s| - |s'><s|),
/// assembled from w and energy differences without forming W.
inline QuantumHamiltonian assemble_direct(const IsingModel& model, double beta,
                                          const RateRule& rule) {
  require_dense(model, "assemble_direct");
  const int n = model.n_spins();
  const auto dim = static_cast<Eigen::Index>(model.dim());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (StateIndex s = 0; s < model.dim(); ++s) {
    const auto si = static_cast<Eigen::Index>(s);
    for (int j = 0; j < n; ++j) {
      const StateIndex t = flip(s, j);
      const auto lr = local_rate(rule, beta, model.flip_delta(s, j), n);
      h(static_cast<Eigen::Index>(t), si) = -lr.w;
      h(si, si) += lr.rate;
    }
  }
  QuantumHamiltonian q;
  q.matrix = std::move(h);
  q.n_spins = n;
  q.provenance = Provenance::MappedFromGenerator;
  q.beta = beta;
  q.rule = rule;
  return q;
}

// ---------------------------------------------------------------------------
// Explicit chain Hamiltonians (J = 1, K = beta J, periodic indices)

namespace detail {
inline void require_even_chain(int n, const char* what) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument(std::string(what) + ": need even n >= 4, got " +
                                std::to_string(n));
  if (n > kMaxDenseSpins)
    throw std::invalid_argument(std::string(what) + ": n exceeds dense cap " +
                                std::to_string(kMaxDenseSpins));
}
inline void require_k(double k, const char* what) {
  if (!(k >= 0.0) || k > 350.0)
    throw std::invalid_argument(std::string(what) + ": K must lie in [0, 350]");
}
inline QuantumHamiltonian explicit_chain(Eigen::MatrixXd m, int n, double beta, RateRule rule) {
  QuantumHamiltonian q;
  q.matrix = std::move(m);
  q.n_spins = n;
  q.provenance = Provenance::ExplicitChain;
  q.beta = beta;
  q.rule = rule;
  return q;
}
}  // namespace detail

/// Heat-bath chain:
///   N/2 - (tanh 2K / 2) sum zz_{j,j+1}
///       - 1/(2 cosh 2K) sum (cosh^2 K - sinh^2 K z_{j-1} z_{j+1}) x_j
inline QuantumHamiltonian chain_heatbath_hamiltonian(int n, double k) {
  detail::require_even_chain(n, "chain_heatbath_hamiltonian");
  detail::require_k(k, "chain_heatbath_hamiltonian");
  const double t2 = std::tanh(2.0 * k);
  const double c2 = std::cosh(k) * std::cosh(k);
  const double s2 = std::sinh(k) * std::sinh(k);
  const double pref = 1.0 / (2.0 * std::cosh(2.0 * k));
  OperatorBuilder op(n);
  op.constant(0.5 * n);
  op.diagonal([&](StateIndex s) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += zz(s, j, wrap(j + 1, n));
    return -0.5 * t2 * acc;
  });
  for (int j = 0; j < n; ++j)
    op.transverse(j, [&, j](StateIndex s) {
      return -pref * (c2 - s2 * zz(s, wrap(j - 1, n), wrap(j + 1, n)));
    });
  return detail::explicit_chain(std::move(op).build(), n, k, RateRule::heat_bath());
}

/// Metropolis chain:
///   N(3 + e^{-4K})/4 - (1 - e^{-4K})/4 sum (2 z_j z_{j+1} + z_{j-1} z_{j+1})
///       - (1 + e^{-2K})/2 sum (1 - tanh K z_{j-1} z_{j+1}) x_j
inline QuantumHamiltonian chain_metropolis_hamiltonian(int n, double k) {
  detail::require_even_chain(n, "chain_metropolis_hamiltonian");
  detail::require_k(k, "chain_metropolis_hamiltonian");
  const double e4 = std::exp(-4.0 * k);
  const double e2 = std::exp(-2.0 * k);
  const double tk = std::tanh(k);
  OperatorBuilder op(n);
  op.constant(0.25 * n * (3.0 + e4));
  op.diagonal([&](StateIndex s) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      acc += 2.0 * zz(s, j, wrap(j + 1, n)) + zz(s, wrap(j - 1, n), wrap(j + 1, n));
    return -0.25 * (1.0 - e4) * acc;
  });
  for (int j = 0; j < n; ++j)
    op.transverse(j, [&, j](StateIndex s) {
      return -0.5 * (1.0 + e2) * (1.0 - tk * zz(s, wrap(j - 1, n), wrap(j + 1, n)));
    });
  return detail::explicit_chain(std::move(op).build(), n, k, RateRule::metropolis());
}

/// Site-dependent coefficients of the random-coupling heat-bath chain, with
/// c_j = cosh(b J_j), s_j = sinh(b J_j), D_j = c_j^2 c_{j+1}^2 - s_j^2 s_{j+1}^2.
/// couplings[j] sits on bond (j-1, j) as in chain_model.
struct RandomChainCoefficients {
  std::vector<double> left;        // c_j s_j / D_j            on z_{j-1} z_j
  std::vector<double> right;       // c_{j+1} s_{j+1} / D_j    on z_j z_{j+1}
  std::vector<double> transverse;  // c_j c_{j+1} / D_j        on x_j
  std::vector<double> dressed;     // s_j s_{j+1} / D_j        on z_{j-1} z_{j+1} x_j
};

inline RandomChainCoefficients random_chain_coefficients(std::span<const double> couplings,
                                                         double beta) {
  const int n = static_cast<int>(couplings.size());
  if (!(beta >= 0.0)) throw std::invalid_argument("random chain: beta must be >= 0");
  for (double j : couplings)
    if (std::abs(beta * j) > 350.0)
      throw std::invalid_argument("random chain: |beta J_j| > 350 overflows cosh");
  std::vector<double> c(couplings.size()), s(couplings.size());
  for (std::size_t j = 0; j < couplings.size(); ++j) {
    c[j] = std::cosh(beta * couplings[j]);
    s[j] = std::sinh(beta * couplings[j]);
  }
  RandomChainCoefficients r;
  for (int j = 0; j < n; ++j) {
    const auto a = static_cast<std::size_t>(j);
    const auto b = static_cast<std::size_t>(wrap(j + 1, n));
    const double d = c[a] * c[a] * c[b] * c[b] - s[a] * s[a] * s[b] * s[b];
    r.left.push_back(c[a] * s[a] / d);
    r.right.push_back(c[b] * s[b] / d);
    r.transverse.push_back(c[a] * c[b] / d);
    r.dressed.push_back(s[a] * s[b] / d);
  }
  return r;
}

/// Random-coupling heat-bath chain:
///   N/2 - 1/2 sum [left_j z_{j-1} z_j + right_j z_j z_{j+1}]
///       - 1/2 sum (transverse_j - dressed_j z_{j-1} z_{j+1}) x_j
inline QuantumHamiltonian chain_random_heatbath_hamiltonian(std::span<const double> couplings,
                                                            double beta) {
  const int n = static_cast<int>(couplings.size());
  detail::require_even_chain(n, "chain_random_heatbath_hamiltonian");
  const auto co = random_chain_coefficients(couplings, beta);
  OperatorBuilder op(n);
  op.constant(0.5 * n);
  op.diagonal([&](StateIndex s) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      acc += co.left[jj] * zz(s, wrap(j - 1, n), j) + co.right[jj] * zz(s, j, wrap(j + 1, n));
    }
    return -0.5 * acc;
  });
  for (int j = 0; j < n; ++j)
    op.transverse(j, [&, j](StateIndex s) {
      const auto jj = static_cast<std::size_t>(j);
      return -0.5 * (co.transverse[jj] - co.dressed[jj] * zz(s, wrap(j - 1, n), wrap(j + 1, n)));
    });
  return detail::explicit_chain(std::move(op).build(), n, beta, RateRule::heat_bath());
}

/// c - J sum z_j z_{j+1} - gamma sum x_j on a periodic chain (user-supplied).
inline QuantumHamiltonian transverse_field_chain(int n, double gamma, double j_coupling = 1.0,
                                                 double c = 0.0) {
  if (n < 2) throw std::invalid_argument("transverse_field_chain: need n >= 2");
  OperatorBuilder op(n);
  op.constant(c);
  op.diagonal([&](StateIndex s) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += zz(s, i, wrap(i + 1, n));
    return -j_coupling * acc;
  });
  for (int i = 0; i < n; ++i) op.transverse(i, [&](StateIndex) { return -gamma; });
  QuantumHamiltonian q;
  q.matrix = std::move(op).build();
  q.n_spins = n;
  q.provenance = Provenance::UserSupplied;
  return q;
}

inline double max_entry_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_entry_difference: shape mismatch");
  return (a - b).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Text dump:
//   # annealmap-hamiltonian v1
//   # n_spins <N>
//   # provenance <tag>
//   # beta <value|none>
//   # rule <rule|none>
//   <dim>
//   <dim rows of dim values>

inline std::string dump_hamiltonian(const QuantumHamiltonian& h) {
  std::ostringstream os;
  os.precision(17);
  os << "# annealmap-hamiltonian v1\n"
     << "# n_spins " << h.n_spins << "\n"
     << "# provenance " << to_string(h.provenance) << "\n"
     << "# beta ";
  if (h.beta) os << *h.beta; else os << "none";
  os << "\n# rule " << (h.rule ? h.rule->to_string() : std::string("none")) << "\n"
     << h.matrix.rows() << "\n";
  for (Eigen::Index a = 0; a < h.matrix.rows(); ++a) {
    for (Eigen::Index b = 0; b < h.matrix.cols(); ++b) os << (b ? " " : "") << h.matrix(a, b);
    os << "\n";
  }
  return os.str();
}

inline QuantumHamiltonian parse_hamiltonian_dump(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  QuantumHamiltonian h;
  h.provenance = Provenance::UserSupplied;
  while (in.peek() == '#' && std::getline(in, line)) {
    std::istringstream ls(line.substr(1));
    std::string key, value;
    ls >> key >> value;
    if (key == "n_spins") h.n_spins = std::stoi(value);
    else if (key == "provenance") {
      if (value == "mapped-from-W") h.provenance = Provenance::MappedFromGenerator;
      else if (value == "explicit-chain") h.provenance = Provenance::ExplicitChain;
    } else if (key == "beta" && value != "none") h.beta = std::stod(value);
    else if (key == "rule" && value != "none") h.rule = RateRule::parse(value);
  }
  Eigen::Index dim = 0;
  if (!(in >> dim) || dim != static_cast<Eigen::Index>(state_count(h.n_spins)))
    throw std::invalid_argument("hamiltonian dump: dimension does not match n_spins");
  h.matrix.resize(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b)
      if (!(in >> h.matrix(a, b))) throw std::invalid_argument("hamiltonian dump: truncated matrix");
  return h;
}

}  // namespace annealmap
