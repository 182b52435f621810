#pragma once

// Dense symmetric eigendecomposition and spectrum reports.
//
// The nonsymmetric generator W is never decomposed directly; its spectrum is
// read off the isospectral symmetric matrix exp(bH0/2) W exp(-bH0/2).

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annealmap/markov.hpp"

namespace annealmap {

inline constexpr Eigen::Index kMaxEigDim = 4096;

struct EigenDecomposition {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, orthonormal; empty when not requested
};

/// max |M - M^T| / max |M| (0 for the zero matrix).
inline double asymmetry(const Eigen::MatrixXd& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

inline EigenDecomposition eig_sym(const Eigen::MatrixXd& m, bool with_vectors = true) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eig_sym: matrix is not square");
  if (m.rows() > kMaxEigDim)
    throw std::invalid_argument("eig_sym: dimension " + std::to_string(m.rows()) +
                                " exceeds the dense cap " + std::to_string(kMaxEigDim));
  if (m.rows() == 0) return {};
  if (const double a = asymmetry(m); a > 1e-8)
    throw std::invalid_argument("eig_sym: matrix is not symmetric (relative asymmetry " +
                                std::to_string(a) + ")");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      m, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eig_sym: solver did not converge");
  EigenDecomposition out;
  out.values = es.eigenvalues();
  if (with_vectors) out.vectors = es.eigenvectors();
  return out;
}

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending
  double gap = 0.0;
  std::optional<Eigen::VectorXd> ground_vector;
  std::size_t matrix_dim = 0;
};

/// exp(bH0/2) W exp(-bH0/2), symmetrized. Off-diagonals equal the symmetric
/// factor w of the rule; the diagonal is W's.
inline Eigen::MatrixXd symmetrized_generator(const MarkovGenerator& gen) {
  const auto e = energy_table(gen.model());
  const double half_beta = 0.5 * gen.beta();
  const auto& w = gen.matrix();
  Eigen::MatrixXd s(w.rows(), w.cols());
  for (Eigen::Index a = 0; a < w.rows(); ++a)
    for (Eigen::Index b = 0; b < w.cols(); ++b)
      s(a, b) = a == b || w(a, b) == 0.0
                    ? w(a, b)
                    : w(a, b) * std::exp(half_beta * (e[static_cast<std::size_t>(a)] -
                                                         e[static_cast<std::size_t>(b)]));
  if (const double a = asymmetry(s); a > 1e-8)
    throw std::domain_error("generator violates detailed balance: symmetrized form has "
                            "relative asymmetry " + std::to_string(a));
  return 0.5 * (s + s.transpose());
}

/// Eigenvalues of W (all <= 0, ascending), gap = |lambda_1|, and the top
/// eigenvector of the symmetrized form (sqrt of the Boltzmann weights).
inline SpectrumReport spectrum_of_generator(const MarkovGenerator& gen,
                                            bool with_ground_vector = false) {
  const auto dec = eig_sym(symmetrized_generator(gen), with_ground_vector);
  SpectrumReport r;
  r.matrix_dim = gen.dim();
  r.eigenvalues.assign(dec.values.data(), dec.values.data() + dec.values.size());
  const std::size_t n = r.eigenvalues.size();
  r.gap = n > 1 ? r.eigenvalues[n - 1] - r.eigenvalues[n - 2] : 0.0;
  if (with_ground_vector) {
    Eigen::VectorXd g = dec.vectors.col(static_cast<Eigen::Index>(n - 1));
    if (g.sum() < 0) g = -g;
    r.ground_vector = g;
  }
  return r;
}

/// Spectrum of a symmetric Hamiltonian matrix; gap = E_1 - E_0.
inline SpectrumReport spectrum_of_matrix(const Eigen::MatrixXd& h, bool with_ground_vector = false) {
  const auto dec = eig_sym(h, with_ground_vector);
  SpectrumReport r;
  r.matrix_dim = static_cast<std::size_t>(h.rows());
  r.eigenvalues.assign(dec.values.data(), dec.values.data() + dec.values.size());
  r.gap = r.eigenvalues.size() > 1 ? r.eigenvalues[1] - r.eigenvalues[0] : 0.0;
  if (with_ground_vector) {
    Eigen::VectorXd g = dec.vectors.col(0);
    if (g.sum() < 0) g = -g;
    r.ground_vector = g;
  }
  return r;
}

struct SpectrumComparison {
  double max_deviation = 0.0;
  bool matched = false;
};

inline SpectrumComparison compare_spectra(std::vector<double> a, std::vector<double> b,
                                          double tol) {
  if (a.size() != b.size())
    throw std::invalid_argument("compare_spectra: lengths differ (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  SpectrumComparison c;
  for (std::size_t i = 0; i < a.size(); ++i)
    c.max_deviation = std::max(c.max_deviation, std::abs(a[i] - b[i]));
  c.matched = c.max_deviation <= tol;
  return c;
}

inline std::vector<double> negated(std::vector<double> v) {
  for (double& x : v) x = -x;
  return v;
}

/// tau = 1 / |lambda_1|. Throws std::domain_error when lambda_1 vanishes
/// (reducible chain).
inline double relaxation_time(const MarkovGenerator& gen) {
  const auto r = spectrum_of_generator(gen);
  if (r.gap <= 1e-10)
    throw std::domain_error("relaxation_time: lambda_1 = 0, generator is reducible");
  return 1.0 / r.gap;
}

}  // namespace annealmap
