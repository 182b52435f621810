#pragma once

// Quantum Hamiltonian (nonpositive off-diagonals) -> classical Ising energy
// table and Markov generator at unit inverse temperature:
//   H0(s) = -2 log phi0(s),   W = -exp(-H0/2) H exp(H0/2).

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annealmap/bridge.hpp"
#include "annealmap/spectral.hpp"

namespace annealmap {

inline constexpr double kOffDiagonalSignTol = 1e-12;
inline constexpr double kGroundDegeneracyTol = 1e-10;
inline constexpr double kPerronEntryFloor = 1e-300;

namespace detail {

struct SparseRow {
  std::vector<Eigen::Index> cols;
  std::vector<double> weights;  // -H_ab > 0
};

inline std::vector<SparseRow> negative_offdiagonals(const Eigen::MatrixXd& h) {
  std::vector<SparseRow> rows(static_cast<std::size_t>(h.rows()));
  for (Eigen::Index a = 0; a < h.rows(); ++a)
    for (Eigen::Index b = 0; b < h.cols(); ++b)
      if (a != b && h(a, b) < 0.0) {
        rows[static_cast<std::size_t>(a)].cols.push_back(b);
        rows[static_cast<std::size_t>(a)].weights.push_back(-h(a, b));
      }
  return rows;
}

inline bool connected(const std::vector<SparseRow>& rows) {
  if (rows.empty()) return true;
  std::vector<char> seen(rows.size(), 0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!q.empty()) {
    const auto a = q.front();
    q.pop();
    for (auto b : rows[a].cols)
      if (!seen[static_cast<std::size_t>(b)]) {
        seen[static_cast<std::size_t>(b)] = 1;
        ++count;
        q.push(static_cast<std::size_t>(b));
      }
  }
  return count == rows.size();
}

// Gauss-Seidel sweeps on (H - e0) phi = 0. Each update
//   phi_a <- sum_b (-H_ab) phi_b / (H_aa - e0)
// adds positive numbers only, so small entries keep full relative accuracy.
inline int polish_null_vector(const Eigen::MatrixXd& h, double e0,
                              const std::vector<SparseRow>& rows, Eigen::VectorXd& phi,
                              int max_sweeps = 2000) {
  Eigen::VectorXd diag = h.diagonal().array() - e0;
  for (Eigen::Index a = 0; a < diag.size(); ++a)
    if (!(diag(a) > 0.0)) return 0;  // no positive pivot: leave the eigensolver vector
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (Eigen::Index a = 0; a < phi.size(); ++a) {
      const auto& row = rows[static_cast<std::size_t>(a)];
      double acc = 0.0;
      for (std::size_t k = 0; k < row.cols.size(); ++k) acc += row.weights[k] * phi(row.cols[k]);
      const double next = acc / diag(a);
      change = std::max(change, std::abs(next - phi(a)) / next);
      phi(a) = next;
    }
    phi /= phi.maxCoeff();
    if (change < 1e-15) break;
  }
  return sweep;
}

}  // namespace detail

struct PerronResult {
  Eigen::VectorXd vector;  // unit norm, all entries > 0
  double ground_energy = 0.0;
  double gap = 0.0;
  int polish_sweeps = 0;
};

/// Ground eigenvector of a Hamiltonian with nonpositive off-diagonals, signed
/// positive. Rejects positive off-diagonals, a disconnected off-diagonal graph,
/// a (numerically) degenerate ground level and entries below 1e-300.
inline PerronResult perron_ground_state_detailed(const QuantumHamiltonian& q) {
  const auto& h = q.matrix;
  if (h.rows() != h.cols() || h.rows() == 0)
    throw std::invalid_argument("perron_ground_state: matrix must be square and nonempty");
  for (Eigen::Index a = 0; a < h.rows(); ++a)
    for (Eigen::Index b = 0; b < h.cols(); ++b)
      if (a != b && h(a, b) > kOffDiagonalSignTol) {
        std::ostringstream os;
        os << "perron_ground_state: off-diagonal H(" << a << "," << b << ") = " << h(a, b)
           << " > 0; only Hamiltonians with nonpositive off-diagonal elements map to "
              "classical dynamics (an antiferromagnetic fluctuation term is excluded)";
        throw std::domain_error(os.str());
      }
  const auto rows = detail::negative_offdiagonals(h);
  if (!detail::connected(rows))
    throw std::domain_error(
        "perron_ground_state: off-diagonal graph is disconnected; Perron-Frobenius does not apply");
  const auto dec = eig_sym(h, true);
  PerronResult r;
  r.ground_energy = dec.values(0);
  r.gap = h.rows() > 1 ? dec.values(1) - dec.values(0) : std::numeric_limits<double>::infinity();
  if (r.gap < kGroundDegeneracyTol)
    throw std::domain_error("perron_ground_state: ground level is degenerate (gap " +
                            std::to_string(r.gap) + ")");
  Eigen::VectorXd phi = dec.vectors.col(0);
  if (phi.sum() < 0) phi = -phi;
  phi = phi.cwiseMax(0.0);
  r.polish_sweeps = detail::polish_null_vector(h, r.ground_energy, rows, phi);
  phi.normalize();
  if (phi.minCoeff() < kPerronEntryFloor)
    throw std::domain_error("perron_ground_state: ground-vector entry below 1e-300; "
                            "logarithms would be meaningless");
  r.vector = std::move(phi);
  return r;
}

inline Eigen::VectorXd perron_ground_state(const QuantumHamiltonian& q) {
  return perron_ground_state_detailed(q).vector;
}

// ---------------------------------------------------------------------------
// Coupling expansion

/// H0(s) = sum_S J_S prod_{i in S} sigma_i over all 2^N subsets S (subset as a
/// site mask, the empty set included).
struct CouplingExpansion {
  int n_spins = 0;
  std::vector<double> coefficients;     // indexed by subset mask
  std::vector<double> locality_profile; // max |J_S| over |S| = k, k = 0..N
};

/// J_S = 2^{-N} sum_s H0(s) prod_{i in S} sigma_i, by an in-place butterfly
/// (O(N 2^N)).
inline CouplingExpansion extract_couplings(std::span<const double> table) {
  const std::size_t dim = table.size();
  if (dim == 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("extract_couplings: table length must be a power of two");
  const int n = std::countr_zero(dim);
  if (n > 16) throw std::invalid_argument("extract_couplings: N capped at 16");
  std::vector<double> c(table.begin(), table.end());
  // With sigma_i = +1 on bit 0 and -1 on bit 1, the (a + b, a - b) butterfly
  // over bit i multiplies by sigma_i exactly.
  for (std::size_t half = 1; half < dim; half <<= 1)
    for (std::size_t base = 0; base < dim; base += 2 * half)
      for (std::size_t k = base; k < base + half; ++k) {
        const double a = c[k], b = c[k + half];
        c[k] = a + b;
        c[k + half] = a - b;
      }
  const double scale = 1.0 / static_cast<double>(dim);
  for (double& x : c) x *= scale;
  CouplingExpansion ex;
  ex.n_spins = n;
  ex.locality_profile.assign(static_cast<std::size_t>(n + 1), 0.0);
  for (StateIndex mask = 0; mask < dim; ++mask) {
    const auto order = static_cast<std::size_t>(mask_sites(mask).size());
    ex.locality_profile[order] = std::max(ex.locality_profile[order], std::abs(c[mask]));
  }
  ex.coefficients = std::move(c);
  return ex;
}

/// Energy table rebuilt term by term from the expansion.
inline std::vector<double> reconstruct(const CouplingExpansion& ex) {
  const std::size_t dim = state_count(ex.n_spins);
  std::vector<double> out(dim, 0.0);
  for (StateIndex s = 0; s < dim; ++s)
    for (StateIndex mask = 0; mask < dim; ++mask)
      out[s] += ex.coefficients[mask] * spin_product(s, mask);
  return out;
}

/// IsingModel carrying every coefficient with |J_S| > drop_below.
inline IsingModel to_model(const CouplingExpansion& ex, double drop_below = 0.0,
                           std::string name = "reverse-mapped") {
  std::vector<Term> terms;
  for (StateIndex mask = 0; mask < ex.coefficients.size(); ++mask)
    if (std::abs(ex.coefficients[mask]) > drop_below || mask == 0)
      terms.push_back(Term{mask_sites(mask), ex.coefficients[mask]});
  return IsingModel(ex.n_spins, std::move(terms), std::move(name));
}

// ---------------------------------------------------------------------------
// Quantum -> classical

struct GeneratorConditions {
  double min_offdiagonal = 0.0;        // >= 0 expected
  double max_column_sum = 0.0;         // (1..1) W = 0
  double stationarity_residual = 0.0;  // max |W pi| / max |diag W| with pi = e^{-H0}/Z
  double detailed_balance_residual = 0.0;
  bool all_within(double tol) const {
    return min_offdiagonal >= -tol && max_column_sum <= tol && stationarity_residual <= tol &&
           detailed_balance_residual <= tol;
  }
};

struct ReverseMapResult {
  std::vector<double> energy_table;  // H0 at beta = 1
  MarkovGenerator generator;
  double beta_effective = 1.0;
  double energy_shift = 0.0;         // ground energy subtracted from the input
  Eigen::VectorXd ground_vector;
  CouplingExpansion couplings;
  GeneratorConditions conditions;
};

inline GeneratorConditions check_generator_conditions(const Eigen::MatrixXd& w,
                                                      std::span<const double> energies) {
  GeneratorConditions c;
  const auto pi = boltzmann_from_energies(energies, 1.0);
  c.min_offdiagonal = std::numeric_limits<double>::infinity();
  double max_flux = 0.0, worst_flux = 0.0;
  for (Eigen::Index a = 0; a < w.rows(); ++a)
    for (Eigen::Index b = 0; b < w.cols(); ++b) {
      if (a == b) continue;
      c.min_offdiagonal = std::min(c.min_offdiagonal, w(a, b));
      if (b > a) {
        const double fab = w(a, b) * pi[static_cast<std::size_t>(b)];
        const double fba = w(b, a) * pi[static_cast<std::size_t>(a)];
        worst_flux = std::max(worst_flux, std::abs(fab - fba));
        max_flux = std::max({max_flux, std::abs(fab), std::abs(fba)});
      }
    }
  if (w.rows() == 1) c.min_offdiagonal = 0.0;
  c.max_column_sum = max_column_sum(w);
  const Eigen::VectorXd pv =
      Eigen::Map<const Eigen::VectorXd>(pi.data(), static_cast<Eigen::Index>(pi.size()));
  const double scale = std::max(w.diagonal().cwiseAbs().maxCoeff() * pv.maxCoeff(), 1e-300);
  c.stationarity_residual = (w * pv).cwiseAbs().maxCoeff() / scale;
  c.detailed_balance_residual = max_flux > 0.0 ? worst_flux / max_flux : 0.0;
  return c;
}

inline ReverseMapResult quantum_to_classical(const QuantumHamiltonian& q) {
  const int n = q.n_spins;
  if (n < 1 || q.matrix.rows() != static_cast<Eigen::Index>(state_count(n)))
    throw std::invalid_argument("quantum_to_classical: matrix size does not match n_spins");
  const auto pr = perron_ground_state_detailed(q);
  const auto& phi = pr.vector;
  const auto dim = q.matrix.rows();

  std::vector<double> h0(static_cast<std::size_t>(dim));
  for (Eigen::Index s = 0; s < dim; ++s) h0[static_cast<std::size_t>(s)] = -2.0 * std::log(phi(s));

  Eigen::MatrixXd w(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b)
      w(a, b) = a == b ? -(q.matrix(a, a) - pr.ground_energy)
                       : -phi(a) * q.matrix(a, b) / phi(b);
  // -0.0 off-diagonals read as zero rates
  w = w.unaryExpr([](double x) { return x == 0.0 ? 0.0 : x; });

  auto expansion = extract_couplings(h0);
  auto model = to_model(expansion);
  auto conditions = check_generator_conditions(w, h0);
  return ReverseMapResult{std::move(h0),
                          MarkovGenerator(std::move(w), 1.0, std::nullopt, std::move(model)),
                          1.0,
                          pr.ground_energy,
                          phi,
                          std::move(expansion),
                          conditions};
}

/// max_s |(a_s - b_s) - mean(a - b)|: deviation up to an additive constant.
inline double max_deviation_up_to_constant(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("tables differ in length");
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(a.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i] - mean));
  return worst;
}

}  // namespace annealmap
