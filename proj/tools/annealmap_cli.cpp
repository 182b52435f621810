// annealmap: reproducible experiments on the classical-dynamics / quantum
// Hamiltonian correspondence. Exit status 0 = checks pass, 1 = a numeric
// check failed, 2 = usage or validation error.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "annealmap/anneal.hpp"
#include "annealmap/bridge.hpp"
#include "annealmap/fermion.hpp"
#include "annealmap/io.hpp"
#include "annealmap/model_io.hpp"
#include "annealmap/monte_carlo.hpp"
#include "annealmap/reverse_map.hpp"

using namespace annealmap;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;
constexpr int kMaxCliDenseSpins = 10;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Config {
  std::string command;
  std::string model_path;
  std::string hamiltonian_path;
  int chain = 0;
  std::optional<double> k;
  std::string rule = "heatbath";
  std::optional<double> beta;
  std::string schedule;
  double dt = 1e-3;
  std::uint64_t seed = 42;
  std::string out = "annealmap-out";
  std::string format = "csv";
  std::string dump_hamiltonian;
  std::string engines = "master";
  std::size_t seeds = 200;
  std::size_t sweeps = 0;
  std::optional<double> gamma;
  bool random_couplings = false;
  bool frustrated = false;
  int samples = 100;
  bool omit_beta_dot = false;
  double min_success = 0.0;
  std::string state_layout = "long";
  std::optional<double> tol;

  json to_json() const {
    json j;
    j["command"] = command;
    j["model"] = model_path.empty() ? json() : json(model_path);
    j["hamiltonian"] = hamiltonian_path.empty() ? json() : json(hamiltonian_path);
    j["chain"] = chain;
    j["K"] = k ? json(*k) : json();
    j["rule"] = rule;
    j["beta"] = beta ? json(*beta) : json();
    j["schedule"] = schedule.empty() ? json() : json(schedule);
    j["dt"] = dt;
    j["seed"] = seed;
    j["out"] = out;
    j["format"] = format;
    j["engines"] = engines;
    j["seeds"] = seeds;
    j["sweeps"] = sweeps;
    j["gamma"] = gamma ? json(*gamma) : json();
    j["random_couplings"] = random_couplings;
    j["frustrated"] = frustrated;
    j["samples"] = samples;
    j["omit_beta_dot"] = omit_beta_dot;
    j["min_success"] = min_success;
    j["state_layout"] = state_layout;
    j["tol"] = tol ? json(*tol) : json();
    return j;
  }
};

// ---------------------------------------------------------------------------
// Check bookkeeping

struct Checks {
  json list = json::array();
  std::string first_failure;

  void add(const std::string& name, double value, double tol, bool pass) {
    list.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}});
    if (!pass && first_failure.empty()) first_failure = name;
  }
  void at_most(const std::string& name, double value, double tol) {
    add(name, value, tol, value <= tol);
  }
  bool ok() const { return first_failure.empty(); }
};

int finish(const Config& cfg, json report, const Checks& checks) {
  report["config"] = cfg.to_json();
  report["checks"] = checks.list;
  report["pass"] = checks.ok();
  write_atomic(fs::path(cfg.out) / (cfg.command + "_report.json"), report.dump(2) + "\n");
  if (!checks.ok()) {
    std::cerr << cfg.command << ": check failed: " << checks.first_failure << "\n";
    return kExitNumeric;
  }
  std::cout << cfg.command << ": all checks passed (" << checks.list.size() << ")\n";
  return kExitPass;
}

void write_table(const Config& cfg, const std::string& stem, const Table& t) {
  write_atomic(fs::path(cfg.out) / (stem + "." + cfg.format), t.render(cfg.format));
}

// ---------------------------------------------------------------------------
// Model resolution

struct Resolved {
  IsingModel model;
  double beta;
  std::string source;
  bool uniform_chain = false;
  std::vector<double> couplings;  // random chain only
};

Resolved resolve_model(const Config& cfg) {
  const int sources = (!cfg.model_path.empty()) + (cfg.chain > 0) + cfg.frustrated;
  if (sources != 1) throw UsageError("choose exactly one of --model, --chain, --frustrated");
  if (!cfg.model_path.empty()) {
    if (cfg.k) throw UsageError("--K applies to --chain only");
    return {load_model(cfg.model_path), cfg.beta.value_or(1.0), "file:" + cfg.model_path};
  }
  if (cfg.frustrated) {
    if (cfg.k) throw UsageError("--K applies to --chain only");
    return {frustrated_instance(cfg.seed), cfg.beta.value_or(1.0),
            "frustrated:seed=" + std::to_string(cfg.seed)};
  }
  if (cfg.random_couplings) {
    if (cfg.k) throw UsageError("--K does not combine with --random-couplings; use --beta");
    auto c = seeded_couplings(cfg.chain, cfg.seed);
    Resolved r{chain_model(cfg.chain, c, "random-chain"), cfg.beta.value_or(1.0),
               "random-chain:n=" + std::to_string(cfg.chain) + ",seed=" + std::to_string(cfg.seed)};
    r.couplings = std::move(c);
    return r;
  }
  if (cfg.beta) throw UsageError("a uniform --chain takes --K (J = 1, beta = K), not --beta");
  const double k = cfg.k.value_or(0.5);
  Resolved r{uniform_chain(cfg.chain, 1.0), k, "chain:n=" + std::to_string(cfg.chain)};
  r.uniform_chain = true;
  return r;
}

void require_dense_cli(const IsingModel& m) {
  if (m.n_spins() > kMaxCliDenseSpins)
    throw UsageError("N = " + std::to_string(m.n_spins()) + " exceeds the dense limit of " +
                     std::to_string(kMaxCliDenseSpins) + " spins");
}

// ---------------------------------------------------------------------------
// bridge-check

int cmd_bridge_check(const Config& cfg) {
  const auto r = resolve_model(cfg);
  require_dense_cli(r.model);
  const auto rule = RateRule::parse(cfg.rule);
  const double tol = cfg.tol.value_or(1e-9);

  const auto gen = build_generator(r.model, r.beta, rule);
  const auto mapped = classical_to_quantum(gen);
  const auto direct = assemble_direct(r.model, r.beta, rule);
  const auto hs = spectrum_of_matrix(direct.matrix, true);

  // W through its symmetrized form; H assembled independently from the rates.
  const auto ws = spectrum_of_generator(gen);
  const auto& w_eigs = ws.eigenvalues;

  Checks checks;
  checks.at_most("mapped_vs_direct_entrywise", max_entry_difference(mapped.matrix, direct.matrix), 1e-12);
  if (r.uniform_chain && r.model.n_spins() % 2 == 0 && r.model.n_spins() >= 4 &&
      rule.kind != RateKind::Uniform) {
    const auto explicit_h = rule.kind == RateKind::HeatBath
                                ? chain_heatbath_hamiltonian(r.model.n_spins(), r.beta)
                                : chain_metropolis_hamiltonian(r.model.n_spins(), r.beta);
    checks.at_most("explicit_vs_direct_entrywise", max_entry_difference(explicit_h.matrix, direct.matrix),
                   1e-12);
  }
  if (r.couplings.size() >= 4 && r.couplings.size() % 2 == 0 && rule.kind == RateKind::HeatBath) {
    const auto explicit_h = chain_random_heatbath_hamiltonian(r.couplings, r.beta);
    checks.at_most("explicit_random_vs_direct_entrywise",
                   max_entry_difference(explicit_h.matrix, direct.matrix), 1e-12);
  }
  const auto cmp = compare_spectra(negated(w_eigs), hs.eigenvalues, tol);
  checks.at_most("spectrum_H_vs_minus_W", cmp.max_deviation, tol);
  checks.at_most("detailed_balance_residual", detailed_balance_residual(gen), tol);
  checks.at_most("ground_energy", std::abs(hs.eigenvalues.front()), tol);
  checks.at_most("gap_vs_relaxation_rate", std::abs(hs.gap - ws.gap), tol);
  const auto pi = boltzmann(r.model, r.beta);
  double gb = 0.0;
  for (std::size_t s = 0; s < pi.size(); ++s)
    gb = std::max(gb, std::abs(std::pow((*hs.ground_vector)(static_cast<Eigen::Index>(s)), 2) - pi[s]));
  checks.at_most("ground_squared_vs_boltzmann", gb, tol);

  write_table(cfg, "bridge_spectrum_H", spectrum_table(hs.eigenvalues));
  write_table(cfg, "bridge_spectrum_W", spectrum_table(w_eigs));
  if (!cfg.dump_hamiltonian.empty()) write_atomic(cfg.dump_hamiltonian, dump_hamiltonian(direct));
  json report{{"source", r.source},
              {"n_spins", r.model.n_spins()},
              {"beta", r.beta},
              {"rule", rule.to_string()},
              {"gap", hs.gap},
              {"max_spectral_deviation", cmp.max_deviation}};
  return finish(cfg, report, checks);
}

// ---------------------------------------------------------------------------
// fermion-check

int cmd_fermion_check(const Config& cfg) {
  if (cfg.chain <= 0) throw UsageError("fermion-check needs --chain N");
  if (cfg.chain % 2 != 0) throw UsageError("fermion-check needs an even chain length");
  if (cfg.chain < 4 || cfg.chain > kMaxCliDenseSpins)
    throw UsageError("fermion-check needs 4 <= N <= 10");
  const double tol = cfg.tol.value_or(1e-8);
  Checks checks;
  json report;
  if (cfg.random_couplings) {
    if (cfg.k) throw UsageError("--K does not combine with --random-couplings; use --beta");
    const double beta = cfg.beta.value_or(1.0);
    const auto c = seeded_couplings(cfg.chain, cfg.seed);
    Table sp{{"sector", "index", "energy"}, {}};
    double pm = 0.0;
    for (Sector sec : {Sector::Even, Sector::Odd}) {
      const auto r = random_single_particle_matrix(c, beta, sec);
      const std::size_t n = r.spectrum.size();
      for (std::size_t i = 0; i < n; ++i) {
        pm = std::max(pm, std::abs(r.spectrum[i] + r.spectrum[n - 1 - i]));
        sp.add({to_string(sec), i, r.spectrum[i]});
      }
    }
    write_table(cfg, "fermion_single_particle", sp);
    checks.at_most("single_particle_plus_minus_symmetry", pm, tol);
    const auto exact = spectrum_of_matrix(chain_random_heatbath_hamiltonian(c, beta).matrix).eigenvalues;
    const auto recon = random_many_body_spectrum(c, beta);
    checks.at_most("many_body_vs_exact", compare_spectra(recon, exact, tol).max_deviation, tol);
    report = {{"couplings", c}, {"beta", beta}};
  } else {
    if (cfg.beta) throw UsageError("fermion-check takes --K for a uniform chain");
    const double k = cfg.k.value_or(0.5);
    const auto fp = FermionChainParams::make(cfg.chain, k);
    for (Sector sec : {Sector::Even, Sector::Odd}) {
      const auto p = momentum_grid(sec, cfg.chain);
      std::vector<double> eps;
      for (double q : p) eps.push_back(dispersion(k, q));
      write_table(cfg, "fermion_dispersion_" + to_string(sec), dispersion_table(p, eps));
    }
    const auto exact = spectrum_of_matrix(chain_heatbath_hamiltonian(cfg.chain, k).matrix);
    const auto recon = many_body_spectrum(fp);
    write_table(cfg, "fermion_spectrum", spectrum_table(recon));
    const double formula = 1.0 - std::tanh(2.0 * k);
    checks.at_most("many_body_vs_exact", compare_spectra(recon, exact.eigenvalues, tol).max_deviation, tol);
    checks.at_most("gap_vs_formula", std::abs(exact.gap - formula), tol);
    checks.at_most("fermion_gap_vs_formula", std::abs(finite_gap(fp) - formula), tol);
    checks.at_most("ground_energy", std::abs(fermion_ground_energy(fp)), tol);
    report = {{"K", k},
              {"gap_formula", formula},
              {"gap_measured", exact.gap},
              {"gap_fermion", finite_gap(fp)},
              {"J1", fp.j1},
              {"J2", fp.j2},
              {"Gamma", fp.gamma}};
  }
  report["n_spins"] = cfg.chain;
  return finish(cfg, report, checks);
}

// ---------------------------------------------------------------------------
// reverse

int cmd_reverse(const Config& cfg) {
  Checks checks;
  json report;
  const double tol = cfg.tol.value_or(1e-9);
  QuantumHamiltonian q;
  std::optional<MarkovGenerator> source;
  if (!cfg.hamiltonian_path.empty()) {
    q = parse_hamiltonian_dump(read_file(cfg.hamiltonian_path));
    report["source"] = "dump:" + cfg.hamiltonian_path;
  } else if (cfg.gamma) {
    if (cfg.chain < 2) throw UsageError("--gamma needs --chain N");
    if (cfg.chain > kMaxCliDenseSpins) throw UsageError("transverse chain capped at N = 10");
    q = transverse_field_chain(cfg.chain, *cfg.gamma);
    report["source"] = "transverse-chain:n=" + std::to_string(cfg.chain);
    report["gamma"] = *cfg.gamma;
  } else {
    const auto r = resolve_model(cfg);
    require_dense_cli(r.model);
    source.emplace(build_generator(r.model, r.beta, RateRule::parse(cfg.rule)));
    q = classical_to_quantum(*source);
    report["source"] = r.source;
    report["beta"] = r.beta;
    report["rule"] = cfg.rule;
  }
  if (q.n_spins > kMaxCliDenseSpins) throw UsageError("reverse capped at N = 10");
  const auto res = quantum_to_classical(q);
  const auto& c = res.conditions;
  checks.add("offdiagonal_nonnegative", c.min_offdiagonal, tol, c.min_offdiagonal >= -tol);
  checks.at_most("column_sums_zero", c.max_column_sum, tol);
  checks.at_most("stationarity", c.stationarity_residual, tol);
  checks.at_most("detailed_balance", c.detailed_balance_residual, tol);
  if (source) {
    checks.at_most("generator_roundtrip", max_entry_difference(res.generator.matrix(), source->matrix()),
                   cfg.tol.value_or(1e-10));
    auto e = energy_table(source->model());
    for (double& x : e) x *= source->beta();
    checks.at_most("energy_roundtrip_up_to_constant", max_deviation_up_to_constant(res.energy_table, e), tol);
  }
  write_table(cfg, "reverse_couplings", couplings_table(res.couplings));
  write_atomic(fs::path(cfg.out) / "reverse_locality.json", locality_json(res.couplings).dump(2) + "\n");
  report["n_spins"] = q.n_spins;
  report["energy_shift"] = res.energy_shift;
  report["locality_profile"] = locality_json(res.couplings);
  return finish(cfg, report, checks);
}

// ---------------------------------------------------------------------------
// anneal

int cmd_anneal(const Config& cfg) {
  const auto r = resolve_model(cfg);
  const auto rule = RateRule::parse(cfg.rule);
  const auto sched = Schedule::parse(cfg.schedule.empty() ? "linear:0,2,10" : cfg.schedule);
  std::vector<Engine> engines;
  std::stringstream ss(cfg.engines);
  for (std::string item; std::getline(ss, item, ',');) engines.push_back(parse_engine(item));
  if (engines.empty()) throw UsageError("--engines is empty");
  if (cfg.samples < 1) throw UsageError("--samples must be >= 1");

  AnnealOptions opt;
  opt.dt = cfg.dt;
  opt.n_intervals = cfg.samples;
  opt.include_beta_dot_term = !cfg.omit_beta_dot;
  const auto energies = energy_table(r.model);
  const auto p0 = boltzmann_from_energies(energies, sched.beta(0.0));
  const Eigen::VectorXd phi0 = instantaneous_ground(energies, sched.beta(0.0));

  Checks checks;
  json report{{"source", r.source}, {"n_spins", r.model.n_spins()}, {"schedule", sched.to_string()},
              {"rule", rule.to_string()}};
  std::optional<AnnealTrajectory> master, imag;
  for (Engine e : engines) {
    AnnealTrajectory tr;
    switch (e) {
      case Engine::Master: tr = evolve_master_timedep(r.model, rule, sched, p0, opt); break;
      case Engine::Imaginary: tr = evolve_imaginary_schrodinger(r.model, rule, sched, phi0, opt); break;
      case Engine::Real:
        tr = evolve_real_schrodinger(r.model, rule, sched, phi0.cast<std::complex<double>>(), opt);
        break;
    }
    write_table(cfg, "anneal_" + to_string(e), anneal_table(tr));
    const auto& last = tr.samples.back();
    report["final"][to_string(e)] = {{"ground_probability", last.ground_probability},
                                     {"overlap", last.overlap}};
    if (e == Engine::Master) {
      Trajectory states;
      for (const auto& smp : tr.samples) {
        states.times.push_back(smp.t);
        states.states.emplace_back(smp.state.data(), smp.state.data() + smp.state.size());
      }
      write_table(cfg, "anneal_master_states", trajectory_table(states, parse_state_layout(cfg.state_layout)));
      master = std::move(tr);
    }
    if (e == Engine::Imaginary) imag = std::move(tr);
  }
  if (master && imag) {
    const auto c = consistency(*master, *imag, energies);
    report["consistency"] = {{"max_cosine_deficit", c.max_cosine_deficit},
                             {"max_angle", c.max_angle},
                             {"samples", c.samples},
                             {"beta_dot_term", imag->beta_dot_term}};
    checks.at_most("master_vs_imaginary_cosine_deficit", c.max_cosine_deficit, cfg.tol.value_or(1e-6));
  }
  return finish(cfg, report, checks);
}

// ---------------------------------------------------------------------------
// mc

int cmd_mc(const Config& cfg) {
  const auto r = resolve_model(cfg);
  const auto rule = RateRule::parse(cfg.rule);
  Checks checks;
  json report{{"source", r.source}, {"n_spins", r.model.n_spins()}, {"rule", rule.to_string()}};
  if (cfg.schedule.empty()) {
    // frozen beta: empirical distribution against Boltzmann
    require_enumerable(r.model, "mc equilibrium");
    const std::size_t sweeps = cfg.sweeps ? cfg.sweeps : 1000000;
    const auto hist = mc_equilibrium_histogram(r.model, rule, r.beta, sweeps, cfg.seed);
    const auto pi = boltzmann(r.model, r.beta);
    const double tv = total_variation(hist, pi);
    Table t{{"state_index", "empirical", "boltzmann"}, {}};
    for (std::size_t s = 0; s < pi.size(); ++s) t.add({s, hist[s], pi[s]});
    write_table(cfg, "mc_histogram", t);
    report["beta"] = r.beta;
    report["sweeps"] = sweeps;
    report["total_variation"] = tv;
    checks.at_most("total_variation_vs_boltzmann", tv, cfg.tol.value_or(0.02));
    return finish(cfg, report, checks);
  }
  const auto sched = Schedule::parse(cfg.schedule);
  const std::size_t sweeps =
      cfg.sweeps ? cfg.sweeps : static_cast<std::size_t>(std::ceil(sched.t_final()));
  const auto rep = mc_simulated_annealing(r.model, rule, sched, sweeps, cfg.seeds, cfg.seed);
  write_table(cfg, "mc_energy_trace", energy_trace_table(rep));
  report["mc"] = mc_report_json(rep);
  report["success_fraction"] = rep.success_fraction;
  checks.add("success_fraction", rep.success_fraction, cfg.min_success,
             rep.success_fraction >= cfg.min_success);
  return finish(cfg, report, checks);
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"annealmap: classical stochastic dynamics and their quantum Hamiltonians"};
  app.set_config("--config", "", "TOML/INI file with the same keys as the flags");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--model", cfg.model_path, "model JSON {n_spins, terms:[{sites, coeff}]}");
  app.add_option("--hamiltonian", cfg.hamiltonian_path, "Hamiltonian text dump (reverse)");
  app.add_option("--chain", cfg.chain, "built-in periodic chain of N spins");
  app.add_option("--K", cfg.k, "chain coupling K = beta J (J = 1)");
  app.add_option("--rule", cfg.rule, "heatbath | metropolis | uniform:P");
  app.add_option("--beta", cfg.beta, "inverse temperature");
  app.add_option("--schedule", cfg.schedule, "linear:b0,b1,T | exp:b0,rate,T | geman:p,N,T[,t0]");
  app.add_option("--dt", cfg.dt, "RK4 step");
  app.add_option("--seed", cfg.seed, "seed (MC seed0, random couplings, frustrated instance)");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--format", cfg.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--dump-hamiltonian", cfg.dump_hamiltonian, "write the Hamiltonian as a text dump");
  app.add_option("--engines", cfg.engines, "comma list of master,imaginary,real");
  app.add_option("--seeds", cfg.seeds, "number of MC seeds");
  app.add_option("--sweeps", cfg.sweeps, "MC sweeps (default: ceil(t_final), or 1e6 at frozen beta)");
  app.add_option("--gamma", cfg.gamma, "transverse field of the built-in transverse chain (reverse)");
  app.add_flag("--random-couplings", cfg.random_couplings, "seeded random chain couplings");
  app.add_flag("--frustrated", cfg.frustrated, "seeded frustrated complete-graph instance");
  app.add_option("--samples", cfg.samples, "anneal sample intervals");
  app.add_flag("--omit-beta-dot", cfg.omit_beta_dot, "drop the beta-dot H0 / 2 term");
  app.add_option("--min-success", cfg.min_success, "required MC success fraction");
  app.add_option("--state-layout", cfg.state_layout, "long | wide")->check(CLI::IsMember({"long", "wide"}));
  app.add_option("--tol", cfg.tol, "override the command's tolerance");

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Config&);
  };
  const Sub subs[] = {
      {"bridge-check", "W vs H spectra, detailed balance, ground state vs Boltzmann", cmd_bridge_check},
      {"fermion-check", "free-fermion spectrum and gap of the heat-bath chain", cmd_fermion_check},
      {"reverse", "Hamiltonian -> classical generator and coupling expansion", cmd_reverse},
      {"anneal", "time-dependent master / imaginary / real-time evolution", cmd_anneal},
      {"mc", "Monte Carlo annealing or frozen-beta equilibrium", cmd_mc},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (const auto& s : subs) {
    if (!app.got_subcommand(s.name)) continue;
    cfg.command = s.name;
    try {
      return s.run(cfg);
    } catch (const std::invalid_argument& e) {
      std::cerr << s.name << ": usage error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const std::domain_error& e) {
      std::cerr << s.name << ": rejected: " << e.what() << "\n";
      return kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << s.name << ": numeric failure: " << e.what() << "\n";
      return kExitNumeric;
    }
  }
  return kExitUsage;
}
