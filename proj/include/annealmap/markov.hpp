#pragma once

// Continuous-time single-spin-flip Markov generators.
//
// W(sigma, sigma') is the rate sigma' -> sigma: columns are sources, rows are
// destinations, and each column sums to zero. Every site is an independent
// flip channel with unit attempt rate.

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annealmap/spin_core.hpp"

namespace annealmap {

enum class RateKind { HeatBath, Metropolis, Uniform };

struct RateRule {
  RateKind kind = RateKind::HeatBath;
  double p = 0.0;  // Uniform only: symmetric factor w = exp(-p N)

  static RateRule heat_bath() { return {RateKind::HeatBath, 0.0}; }
  static RateRule metropolis() { return {RateKind::Metropolis, 0.0}; }
  static RateRule uniform(double p) {
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("uniform rule: p must be positive and finite");
    return {RateKind::Uniform, p};
  }

  /// "heatbath", "metropolis" or "uniform:P".
  static RateRule parse(const std::string& text) {
    if (text == "heatbath" || text == "heat-bath") return heat_bath();
    if (text == "metropolis") return metropolis();
    if (text.rfind("uniform:", 0) == 0) {
      try {
        std::size_t used = 0;
        const double p = std::stod(text.substr(8), &used);
        if (used != text.size() - 8) throw std::invalid_argument("trailing");
        return uniform(p);
      } catch (const std::logic_error&) {
        throw std::invalid_argument("bad uniform rule '" + text + "', expected uniform:P");
      }
    }
    throw std::invalid_argument("unknown rate rule '" + text +
                                "' (heatbath | metropolis | uniform:P)");
  }

  std::string to_string() const {
    switch (kind) {
      case RateKind::HeatBath: return "heatbath";
      case RateKind::Metropolis: return "metropolis";
      case RateKind::Uniform: {
        std::ostringstream os;
        os.precision(17);
        os << "uniform:" << p;
        return os.str();
      }
    }
    return "?";
  }

  friend bool operator==(const RateRule&, const RateRule&) = default;
};

struct LocalRate {
  double rate;  // W(dest, source)
  double w;     // symmetric factor: rate = w * exp(-beta * delta / 2)
};

/// Flip rate for an energy change `delta` = H0(dest) - H0(source).
/// Evaluated through exp(-|x|) forms so beta*delta up to +-700 stays finite.
inline LocalRate local_rate(const RateRule& rule, double beta, double delta,
                            int n_spins = 1) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("local_rate: beta must be finite and >= 0");
  const double x = 0.5 * beta * delta;
  const double ax = std::abs(x);
  switch (rule.kind) {
    case RateKind::HeatBath: {
      // rate = e^{-x} / (e^{x} + e^{-x}),  w = 1 / (e^{x} + e^{-x})
      const double e2 = std::exp(-2.0 * ax);
      const double w = std::exp(-ax) / (1.0 + e2);
      const double rate = x >= 0.0 ? e2 / (1.0 + e2) : 1.0 / (1.0 + e2);
      return {rate, w};
    }
    case RateKind::Metropolis: {
      // w = min(e^{-x}, e^{x}),  rate = min(1, e^{-2x})
      const double w = std::exp(-ax);
      const double rate = x > 0.0 ? std::exp(-2.0 * x) : 1.0;
      return {rate, w};
    }
    case RateKind::Uniform: {
      const double logw = -rule.p * n_spins;
      return {std::exp(logw - x), std::exp(logw)};
    }
  }
  throw std::logic_error("local_rate: unknown rule");
}

class MarkovGenerator {
 public:
  MarkovGenerator(Eigen::MatrixXd matrix, double beta, std::optional<RateRule> rule,
                  IsingModel model)
      : matrix_(std::move(matrix)), beta_(beta), rule_(rule), model_(std::move(model)) {}

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double beta() const { return beta_; }
  /// Empty for generators recovered from a Hamiltonian (no named rule).
  const std::optional<RateRule>& rule() const { return rule_; }
  const IsingModel& model() const { return model_; }
  int n_spins() const { return model_.n_spins(); }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  Eigen::MatrixXd matrix_;
  double beta_;
  std::optional<RateRule> rule_;
  IsingModel model_;
};

inline MarkovGenerator build_generator(const IsingModel& model, double beta,
                                       const RateRule& rule) {
  require_dense(model, "build_generator");
  const int n = model.n_spins();
  const auto dim = static_cast<Eigen::Index>(model.dim());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
  for (StateIndex src = 0; src < model.dim(); ++src) {
    double out = 0.0;
    for (int j = 0; j < n; ++j) {
      const StateIndex dst = flip(src, j);
      const double r = local_rate(rule, beta, model.flip_delta(src, j), n).rate;
      w(static_cast<Eigen::Index>(dst), static_cast<Eigen::Index>(src)) = r;
      out += r;
    }
    w(static_cast<Eigen::Index>(src), static_cast<Eigen::Index>(src)) = -out;
  }
  return MarkovGenerator(std::move(w), beta, rule, model);
}

/// max |W_ab P_b - W_ba P_a| / max flux over a != b, with P the Boltzmann
/// distribution at the generator's beta.
inline double detailed_balance_residual(const MarkovGenerator& gen) {
  const auto p = boltzmann(gen.model(), gen.beta());
  const auto& w = gen.matrix();
  double worst = 0.0, max_flux = 0.0;
  for (Eigen::Index a = 0; a < w.rows(); ++a)
    for (Eigen::Index b = a + 1; b < w.cols(); ++b) {
      const double fab = w(a, b) * p[static_cast<std::size_t>(b)];
      const double fba = w(b, a) * p[static_cast<std::size_t>(a)];
      worst = std::max(worst, std::abs(fab - fba));
      max_flux = std::max({max_flux, std::abs(fab), std::abs(fba)});
    }
  return max_flux > 0.0 ? worst / max_flux : 0.0;
}

/// max_j |sum_i W_ij|.
inline double max_column_sum(const Eigen::MatrixXd& w) {
  return w.colwise().sum().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Fixed-temperature master equation

struct Trajectory {
  std::vector<double> times;
  std::vector<ProbabilityVector> states;
};

inline constexpr double kStabilityLimit = 0.1;

/// Largest dt allowed by dt * max|diag| <= kStabilityLimit.
inline double max_stable_dt(const Eigen::MatrixXd& w) {
  const double d = w.diagonal().cwiseAbs().maxCoeff();
  return d > 0.0 ? kStabilityLimit / d : std::numeric_limits<double>::infinity();
}

/// Fixed-step RK4 for dP/dt = W P. Keeps the sample at t = 0, every
/// `save_every`-th step and the final step.
inline Trajectory evolve_master(const MarkovGenerator& gen, const ProbabilityVector& p0,
                                double t_final, double dt, std::size_t save_every = 1) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_master: dt must be positive");
  if (!(t_final >= 0.0)) throw std::invalid_argument("evolve_master: t_final must be >= 0");
  if (p0.size() != gen.dim())
    throw std::invalid_argument("evolve_master: initial vector has wrong length");
  double mass = 0.0;
  for (double x : p0) {
    if (!(x >= 0.0)) throw std::invalid_argument("evolve_master: negative or NaN probability");
    mass += x;
  }
  if (std::abs(mass - 1.0) > 1e-8)
    throw std::invalid_argument("evolve_master: initial vector does not sum to 1");
  if (save_every == 0) save_every = 1;
  const double dt_max = max_stable_dt(gen.matrix());
  if (dt > dt_max) {
    std::ostringstream os;
    os << "evolve_master: dt = " << dt << " violates dt*max|W_ii| <= " << kStabilityLimit
       << "; use dt <= " << dt_max;
    throw std::invalid_argument(os.str());
  }
  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
  const double h = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;
  const auto& w = gen.matrix();

  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(p0.data(), static_cast<Eigen::Index>(p0.size()));
  Trajectory traj;
  auto save = [&](double t) {
    traj.times.push_back(t);
    traj.states.emplace_back(p.data(), p.data() + p.size());
  };
  save(0.0);
  Eigen::VectorXd k1, k2, k3, k4;
  for (std::size_t step = 1; step <= steps; ++step) {
    k1.noalias() = w * p;
    k2.noalias() = w * (p + 0.5 * h * k1);
    k3.noalias() = w * (p + 0.5 * h * k2);
    k4.noalias() = w * (p + h * k3);
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double total = p.sum();
    if (std::abs(total - 1.0) > 1e-8) {
      std::ostringstream os;
      os << "evolve_master: probability drifted to " << total << " at step " << step;
      throw std::runtime_error(os.str());
    }
    if (step % save_every == 0 || step == steps) save(static_cast<double>(step) * h);
  }
  return traj;
}

/// KL(p || q) with the 0 log 0 = 0 convention.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) d += p[i] * std::log(p[i] / q[i]);
  return d;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

}  // namespace annealmap
