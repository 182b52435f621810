#pragma once

// Time-dependent dynamics under a beta(t) schedule:
//   master:     dP/dt = W(t) P
//   imaginary: -dphi/dt = (H(t) - beta'(t)/2 H0) phi,   phi = exp(beta H0 / 2) P
//   real:     i dphi/dt = (H(t) - beta'(t)/2 H0) phi
// All three share a matrix-free single-flip operator and fixed-step RK4.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annealmap/markov.hpp"
#include "annealmap/schedule.hpp"

namespace annealmap {

inline constexpr int kMaxAnnealSpins = 10;

enum class Engine { Master, Imaginary, Real };

inline std::string to_string(Engine e) {
  switch (e) {
    case Engine::Master: return "master";
    case Engine::Imaginary: return "imaginary";
    case Engine::Real: return "real";
  }
  return "?";
}

inline Engine parse_engine(const std::string& s) {
  if (s == "master") return Engine::Master;
  if (s == "imaginary") return Engine::Imaginary;
  if (s == "real") return Engine::Real;
  throw std::invalid_argument("unknown engine '" + s + "' (master | imaginary | real)");
}

/// Single-flip rates at one beta, applied without forming a matrix.
class FlipDynamics {
 public:
  FlipDynamics(const IsingModel& model, RateRule rule) : table_(model), rule_(rule) {
    if (model.n_spins() > kMaxAnnealSpins)
      throw std::invalid_argument("anneal: N <= " + std::to_string(kMaxAnnealSpins) +
                                  " required, got " + std::to_string(model.n_spins()));
    const auto& e = table_.energies();
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    e_min_ = *lo;
    centre_ = 0.5 * (*lo + *hi);
    half_spread_ = 0.5 * (*hi - *lo);
    const std::size_t cells = table_.dim() * static_cast<std::size_t>(n());
    rate_.resize(cells);
    w_.resize(cells);
    out_.resize(table_.dim());
  }

  int n() const { return table_.n_spins(); }
  std::size_t dim() const { return table_.dim(); }
  const std::vector<double>& energies() const { return table_.energies(); }
  double energy_min() const { return e_min_; }
  /// max |H0 - centre|; the engines apply the beta' term to H0 - centre,
  /// which only changes norms (imaginary) or a global phase (real).
  double half_spread() const { return half_spread_; }
  double centre() const { return centre_; }
  double beta() const { return beta_; }

  void set_beta(double beta) {
    if (beta == beta_) return;
    beta_ = beta;
    max_out_ = 0.0;
    for (StateIndex s = 0; s < dim(); ++s) {
      double out = 0.0;
      for (int j = 0; j < n(); ++j) {
        const auto lr = local_rate(rule_, beta, table_.delta(s, j), n());
        rate_[cell(s, j)] = lr.rate;
        w_[cell(s, j)] = lr.w;
        out += lr.rate;
      }
      out_[s] = out;
      max_out_ = std::max(max_out_, out);
    }
  }

  double max_out_rate() const { return max_out_; }

  /// out = W p.
  template <class Vec>
  void apply_generator(const Vec& p, Vec& out) const {
    for (StateIndex s = 0; s < dim(); ++s) {
      auto acc = -out_[s] * p(idx(s));
      for (int j = 0; j < n(); ++j) {
        const StateIndex t = flip(s, j);
        acc += rate_[cell(t, j)] * p(idx(t));
      }
      out(idx(s)) = acc;
    }
  }

  /// out = (H - beta_dot/2 (H0 - centre)) phi, with H_ss = total out rate
  /// and H_{flip(s,j), s} = -w.
  template <class Vec>
  void apply_hamiltonian(const Vec& phi, double beta_dot, Vec& out) const {
    const auto& e = table_.energies();
    for (StateIndex s = 0; s < dim(); ++s) {
      auto acc = (out_[s] - 0.5 * beta_dot * (e[s] - centre_)) * phi(idx(s));
      for (int j = 0; j < n(); ++j) acc -= w_[cell(s, j)] * phi(idx(flip(s, j)));
      out(idx(s)) = acc;
    }
  }

 private:
  static Eigen::Index idx(StateIndex s) { return static_cast<Eigen::Index>(s); }
  std::size_t cell(StateIndex s, int j) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(n()) + static_cast<std::size_t>(j);
  }

  FlipTable table_;
  RateRule rule_;
  double beta_ = std::numeric_limits<double>::quiet_NaN();
  double max_out_ = 0.0;
  double e_min_ = 0.0, centre_ = 0.0, half_spread_ = 0.0;
  std::vector<double> rate_, w_, out_;
};

struct AnnealOptions {
  double dt = 1e-3;
  int n_intervals = 100;              // samples at t_k = k T / n_intervals, k = 0..n_intervals
  bool include_beta_dot_term = true;  // imaginary / real engines only
};

struct AnnealSample {
  double t = 0.0;
  double beta = 0.0;
  Eigen::VectorXd state;       // P (master) or phi (imaginary); empty for real
  Eigen::VectorXcd amplitude;  // real engine only
  double ground_probability = 0.0;
  double overlap = 0.0;        // |<g(beta)|phi>|^2 / |phi|^2, g = sqrt(Boltzmann)
  double log_norm_decrement = 0.0;
};

struct AnnealTrajectory {
  Engine engine = Engine::Master;
  bool beta_dot_term = true;
  std::vector<AnnealSample> samples;
};

/// Instantaneous ground state of H(beta) for any rule: sqrt of the Boltzmann
/// weights (unit norm).
inline Eigen::VectorXd instantaneous_ground(std::span<const double> energies, double beta) {
  const auto p = boltzmann_from_energies(energies, beta);
  Eigen::VectorXd g(static_cast<Eigen::Index>(p.size()));
  for (std::size_t s = 0; s < p.size(); ++s) g(static_cast<Eigen::Index>(s)) = std::sqrt(p[s]);
  return g;
}

/// phi = exp(beta H0 / 2) P up to a positive factor, evaluated in log space.
inline Eigen::VectorXd to_wavefunction(const Eigen::VectorXd& p, std::span<const double> energies,
                                       double beta) {
  Eigen::VectorXd logs(p.size());
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    logs(s) = p(s) > 0.0 ? std::log(p(s)) + 0.5 * beta * energies[static_cast<std::size_t>(s)]
                         : -std::numeric_limits<double>::infinity();
    top = std::max(top, logs(s));
  }
  return (logs.array() - top).exp().matrix();
}

/// P = exp(-beta H0 / 2) phi, normalized to unit sum.
inline Eigen::VectorXd to_probability(const Eigen::VectorXd& phi, std::span<const double> energies,
                                      double beta) {
  Eigen::VectorXd logs(phi.size());
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < phi.size(); ++s) {
    logs(s) = phi(s) > 0.0 ? std::log(phi(s)) - 0.5 * beta * energies[static_cast<std::size_t>(s)]
                           : -std::numeric_limits<double>::infinity();
    top = std::max(top, logs(s));
  }
  Eigen::VectorXd p = (logs.array() - top).exp().matrix();
  return p / p.sum();
}

namespace detail {

template <class Vec, class Rhs>
void rk4_step(Vec& y, double t, double h, Rhs&& rhs, Vec& k1, Vec& k2, Vec& k3, Vec& k4, Vec& tmp) {
  rhs(t, y, k1);
  tmp = y + (0.5 * h) * k1;
  rhs(t + 0.5 * h, tmp, k2);
  tmp = y + (0.5 * h) * k2;
  rhs(t + 0.5 * h, tmp, k3);
  tmp = y + h * k3;
  rhs(t + h, tmp, k4);
  y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void check_dt(double dt, double bound, double t, const char* engine) {
  if (dt * bound > kStabilityLimit) {
    std::ostringstream os;
    os << engine << ": dt = " << dt << " violates dt * (max attempt rate) <= " << kStabilityLimit
       << " at t = " << t << "; use dt <= " << kStabilityLimit / bound;
    throw std::invalid_argument(os.str());
  }
}

struct StepPlan {
  int steps_per_interval;
  double h;
  double interval;
};

inline StepPlan plan(const Schedule& sched, const AnnealOptions& opt) {
  if (!(opt.dt > 0.0)) throw std::invalid_argument("anneal: dt must be positive");
  if (opt.n_intervals < 1) throw std::invalid_argument("anneal: n_intervals must be >= 1");
  const double interval = sched.t_final() / opt.n_intervals;
  const int m = std::max(1, static_cast<int>(std::ceil(interval / opt.dt - 1e-9)));
  return {m, interval / m, interval};
}

inline double ground_mass(const Eigen::VectorXd& p, const std::vector<StateIndex>& ground) {
  double g = 0.0;
  for (auto s : ground) g += p(static_cast<Eigen::Index>(s));
  return g;
}

}  // namespace detail

inline AnnealTrajectory evolve_master_timedep(const IsingModel& model, const RateRule& rule,
                                              const Schedule& sched, const ProbabilityVector& p0,
                                              const AnnealOptions& opt = {}) {
  FlipDynamics dyn(model, rule);
  if (p0.size() != dyn.dim()) throw std::invalid_argument("evolve_master_timedep: p0 has wrong length");
  const auto ground = ground_states(dyn.energies());
  const auto pl = detail::plan(sched, opt);
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(p0.data(), static_cast<Eigen::Index>(p0.size()));
  const auto n = p.size();
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& out) {
    dyn.set_beta(sched.beta(t));
    dyn.apply_generator(y, out);
  };

  AnnealTrajectory traj;
  traj.engine = Engine::Master;
  traj.beta_dot_term = true;
  auto record = [&](double t) {
    AnnealSample smp;
    smp.t = t;
    smp.beta = sched.beta(t);
    smp.state = p;
    smp.ground_probability = detail::ground_mass(p, ground);
    const auto phi = to_wavefunction(p, dyn.energies(), smp.beta);
    const auto g = instantaneous_ground(dyn.energies(), smp.beta);
    smp.overlap = std::pow(g.dot(phi), 2) / phi.squaredNorm();
    smp.log_norm_decrement = std::log(p.sum());
    traj.samples.push_back(std::move(smp));
  };
  record(0.0);
  for (int k = 0; k < opt.n_intervals; ++k) {
    const double t0 = k * pl.interval;
    for (int m = 0; m < pl.steps_per_interval; ++m) {
      const double t = t0 + m * pl.h;
      dyn.set_beta(sched.beta(t));
      detail::check_dt(pl.h, dyn.max_out_rate(), t, "evolve_master_timedep");
      detail::rk4_step(p, t, pl.h, rhs, k1, k2, k3, k4, tmp);
    }
    const double t1 = (k + 1) * pl.interval;
    if (std::abs(p.sum() - 1.0) > 1e-8) {
      std::ostringstream os;
      os << "evolve_master_timedep: probability drifted to " << p.sum() << " at t = " << t1;
      throw std::runtime_error(os.str());
    }
    record(t1);
  }
  return traj;
}

/// RK4 on -dphi/dt = (H(t) - beta'/2 H0) phi; phi is renormalized after each
/// step and -log of the step's norm ratio is accumulated per sample interval.
inline AnnealTrajectory evolve_imaginary_schrodinger(const IsingModel& model, const RateRule& rule,
                                                     const Schedule& sched,
                                                     const Eigen::VectorXd& phi0,
                                                     const AnnealOptions& opt = {}) {
  FlipDynamics dyn(model, rule);
  if (static_cast<std::size_t>(phi0.size()) != dyn.dim())
    throw std::invalid_argument("evolve_imaginary_schrodinger: phi0 has wrong length");
  if (!(phi0.norm() > 0.0)) throw std::invalid_argument("evolve_imaginary_schrodinger: phi0 is zero");
  const auto ground = ground_states(dyn.energies());
  const auto pl = detail::plan(sched, opt);
  const double term = opt.include_beta_dot_term ? 1.0 : 0.0;
  Eigen::VectorXd phi = phi0.normalized();
  const auto n = phi.size();
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& out) {
    // the last stage can overshoot t_final by roundoff, where beta' drops to 0
    t = std::min(t, sched.t_final());
    dyn.set_beta(sched.beta(t));
    dyn.apply_hamiltonian(y, term * sched.beta_dot(t), out);
    out = -out;
  };

  AnnealTrajectory traj;
  traj.engine = Engine::Imaginary;
  traj.beta_dot_term = opt.include_beta_dot_term;
  double decrement = 0.0;
  auto record = [&](double t) {
    AnnealSample smp;
    smp.t = t;
    smp.beta = sched.beta(t);
    smp.state = phi;
    const auto p = to_probability(phi, dyn.energies(), smp.beta);
    smp.ground_probability = detail::ground_mass(p, ground);
    const auto g = instantaneous_ground(dyn.energies(), smp.beta);
    smp.overlap = std::pow(g.dot(phi), 2) / phi.squaredNorm();
    smp.log_norm_decrement = decrement;
    traj.samples.push_back(std::move(smp));
  };
  record(0.0);
  for (int k = 0; k < opt.n_intervals; ++k) {
    const double t0 = k * pl.interval;
    decrement = 0.0;
    for (int m = 0; m < pl.steps_per_interval; ++m) {
      const double t = t0 + m * pl.h;
      dyn.set_beta(sched.beta(t));
      detail::check_dt(pl.h, dyn.max_out_rate() + 0.5 * term * std::abs(sched.beta_dot(t)) * dyn.half_spread(),
                       t, "evolve_imaginary_schrodinger");
      detail::rk4_step(phi, t, pl.h, rhs, k1, k2, k3, k4, tmp);
      const double norm = phi.norm();
      if (!(norm > 0.0) || !std::isfinite(norm))
        throw std::runtime_error("evolve_imaginary_schrodinger: state vanished or diverged");
      decrement -= std::log(norm);
      phi /= norm;
    }
    record((k + 1) * pl.interval);
  }
  return traj;
}

/// RK4 on i dphi/dt = (H(t) - beta'/2 H0) phi. The norm is not corrected; a
/// drift beyond 1e-4 aborts the run.
inline AnnealTrajectory evolve_real_schrodinger(const IsingModel& model, const RateRule& rule,
                                                const Schedule& sched, const Eigen::VectorXcd& phi0,
                                                const AnnealOptions& opt = {}) {
  FlipDynamics dyn(model, rule);
  if (static_cast<std::size_t>(phi0.size()) != dyn.dim())
    throw std::invalid_argument("evolve_real_schrodinger: phi0 has wrong length");
  if (!(phi0.norm() > 0.0)) throw std::invalid_argument("evolve_real_schrodinger: phi0 is zero");
  const auto ground = ground_states(dyn.energies());
  const auto pl = detail::plan(sched, opt);
  const double term = opt.include_beta_dot_term ? 1.0 : 0.0;
  Eigen::VectorXcd phi = phi0.normalized();
  const auto n = phi.size();
  Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), tmp(n);
  const std::complex<double> minus_i(0.0, -1.0);
  auto rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& out) {
    t = std::min(t, sched.t_final());
    dyn.set_beta(sched.beta(t));
    dyn.apply_hamiltonian(y, term * sched.beta_dot(t), out);
    out *= minus_i;
  };

  AnnealTrajectory traj;
  traj.engine = Engine::Real;
  traj.beta_dot_term = opt.include_beta_dot_term;
  auto record = [&](double t) {
    AnnealSample smp;
    smp.t = t;
    smp.beta = sched.beta(t);
    smp.amplitude = phi;
    const double norm2 = phi.squaredNorm();
    double gp = 0.0;
    for (auto s : ground) gp += std::norm(phi(static_cast<Eigen::Index>(s)));
    smp.ground_probability = gp / norm2;
    const Eigen::VectorXcd g = instantaneous_ground(dyn.energies(), smp.beta).cast<std::complex<double>>();
    smp.overlap = std::norm(g.dot(phi)) / norm2;
    smp.log_norm_decrement = -0.5 * std::log(norm2);
    traj.samples.push_back(std::move(smp));
  };
  record(0.0);
  for (int k = 0; k < opt.n_intervals; ++k) {
    const double t0 = k * pl.interval;
    for (int m = 0; m < pl.steps_per_interval; ++m) {
      const double t = t0 + m * pl.h;
      dyn.set_beta(sched.beta(t));
      detail::check_dt(pl.h, dyn.max_out_rate() + 0.5 * term * std::abs(sched.beta_dot(t)) * dyn.half_spread(),
                       t, "evolve_real_schrodinger");
      detail::rk4_step(phi, t, pl.h, rhs, k1, k2, k3, k4, tmp);
    }
    const double drift = std::abs(phi.norm() - 1.0);
    if (drift > 1e-4) {
      std::ostringstream os;
      os << "evolve_real_schrodinger: norm drifted by " << drift << " by t = " << (k + 1) * pl.interval
         << "; reduce dt (currently " << pl.h << ")";
      throw std::runtime_error(os.str());
    }
    record((k + 1) * pl.interval);
  }
  return traj;
}

struct ConsistencyReport {
  double max_cosine_deficit = 0.0;  // max_k (1 - cos(phi_master(t_k), phi_imag(t_k)))
  double max_angle = 0.0;           // max_k | phi_master/|.| - phi_imag/|.| |
  std::size_t samples = 0;
};

/// Compares exp(beta H0/2) P from the master engine with the imaginary-time
/// state at every shared sample time.
inline ConsistencyReport consistency(const AnnealTrajectory& master, const AnnealTrajectory& imag,
                                     std::span<const double> energies) {
  if (master.samples.size() != imag.samples.size())
    throw std::invalid_argument("consistency: trajectories have different sample counts");
  ConsistencyReport r;
  r.samples = master.samples.size();
  for (std::size_t k = 0; k < master.samples.size(); ++k) {
    const auto& a = master.samples[k];
    const auto& b = imag.samples[k];
    if (std::abs(a.t - b.t) > 1e-12 * std::max(1.0, a.t))
      throw std::invalid_argument("consistency: sample times differ");
    const Eigen::VectorXd u = to_wavefunction(a.state, energies, a.beta).normalized();
    const Eigen::VectorXd v = b.state.normalized();
    r.max_cosine_deficit = std::max(r.max_cosine_deficit, 1.0 - u.dot(v));
    r.max_angle = std::max(r.max_angle, (u - v).norm());
  }
  return r;
}

}  // namespace annealmap
