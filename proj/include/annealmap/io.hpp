#pragma once

// CSV/JSON export. Every file goes through write_atomic (temp + rename).

#include <bit>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "annealmap/anneal.hpp"
#include "annealmap/markov.hpp"
#include "annealmap/monte_carlo.hpp"
#include "annealmap/reverse_map.hpp"
#include "annealmap/spectral.hpp"

namespace annealmap {

namespace fs = std::filesystem;

inline void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Row-oriented table rendered either as CSV or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;

  void add(std::vector<nlohmann::json> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table: row width mismatch");
    rows.push_back(std::move(row));
  }

  std::string csv() const {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c) os << ",";
        if (r[c].is_string())
          os << r[c].get<std::string>();
        else if (r[c].is_number_float())
          os << r[c].get<double>();
        else
          os << r[c].dump();
      }
      os << "\n";
    }
    return os.str();
  }

  nlohmann::json json() const {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json o;
      for (std::size_t c = 0; c < r.size(); ++c) o[columns[c]] = r[c];
      arr.push_back(std::move(o));
    }
    return arr;
  }

  std::string render(const std::string& format) const {
    if (format == "csv") return csv();
    if (format == "json") return json().dump(2) + "\n";
    throw std::invalid_argument("unknown format '" + format + "' (csv | json)");
  }
};

enum class StateLayout { Long, Wide };

inline StateLayout parse_state_layout(const std::string& s) {
  if (s == "long") return StateLayout::Long;
  if (s == "wide") return StateLayout::Wide;
  throw std::invalid_argument("unknown state layout '" + s + "' (long | wide)");
}

inline Table trajectory_table(const Trajectory& tr, StateLayout layout) {
  Table t;
  if (tr.states.empty()) return t;
  const std::size_t dim = tr.states.front().size();
  if (layout == StateLayout::Long) {
    t.columns = {"time", "state_index", "probability"};
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      for (std::size_t s = 0; s < dim; ++s) t.add({tr.times[k], s, tr.states[k][s]});
    return t;
  }
  if (dim > state_count(8)) throw std::invalid_argument("wide trajectory layout needs N <= 8");
  t.columns = {"time"};
  for (std::size_t s = 0; s < dim; ++s) t.columns.push_back("p" + std::to_string(s));
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<nlohmann::json> row{tr.times[k]};
    for (double p : tr.states[k]) row.emplace_back(p);
    t.add(std::move(row));
  }
  return t;
}

inline Table spectrum_table(const std::vector<double>& eigenvalues) {
  Table t{{"index", "eigenvalue"}, {}};
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) t.add({i, eigenvalues[i]});
  return t;
}

inline nlohmann::json spectrum_sidecar(const SpectrumReport& r) {
  return {{"gap", r.gap}, {"matrix_dim", r.matrix_dim}, {"count", r.eigenvalues.size()}};
}

inline Table dispersion_table(const std::vector<double>& p, const std::vector<double>& eps) {
  Table t{{"p", "epsilon"}, {}};
  for (std::size_t i = 0; i < p.size(); ++i) t.add({p[i], eps[i]});
  return t;
}

inline std::string sites_label(StateIndex mask) {
  std::string out;
  for (int i : mask_sites(mask)) out += (out.empty() ? "" : " ") + std::to_string(i);
  return out;
}

/// One row per coefficient with |c| > drop_below (the constant always kept).
inline Table couplings_table(const CouplingExpansion& ex, double drop_below = 1e-14) {
  Table t{{"order", "sites", "coefficient"}, {}};
  for (StateIndex m = 0; m < ex.coefficients.size(); ++m)
    if (m == 0 || std::abs(ex.coefficients[m]) > drop_below)
      t.add({std::popcount(m), sites_label(m), ex.coefficients[m]});
  return t;
}

inline nlohmann::json locality_json(const CouplingExpansion& ex) {
  auto arr = nlohmann::json::array();
  for (std::size_t order = 0; order < ex.locality_profile.size(); ++order)
    arr.push_back({{"order", order}, {"max_abs_coefficient", ex.locality_profile[order]}});
  return arr;
}

inline Table anneal_table(const AnnealTrajectory& tr) {
  Table t{{"t", "beta", "ground_probability", "overlap", "log_norm_decrement"}, {}};
  for (const auto& s : tr.samples)
    t.add({s.t, s.beta, s.ground_probability, s.overlap, s.log_norm_decrement});
  return t;
}

inline nlohmann::json mc_report_json(const McReport& r) {
  nlohmann::json j;
  j["rule"] = r.rule.to_string();
  j["schedule"] = r.schedule;
  j["n_sweeps"] = r.n_sweeps;
  j["n_seeds"] = r.n_seeds;
  j["seed0"] = r.seed0;
  j["ground_energy"] = r.ground_energy;
  j["success_fraction"] = r.success_fraction;
  j["acceptance_rate"] = r.acceptance_rate;
  j["final_mean_energy"] = r.energy_trace.empty() ? nlohmann::json() : nlohmann::json(r.energy_trace.back());
  auto seeds = nlohmann::json::array();
  for (const auto& o : r.outcomes)
    seeds.push_back({{"seed", o.seed}, {"final_state", o.final_state},
                     {"final_energy", o.final_energy}, {"success", o.success}});
  j["outcomes"] = std::move(seeds);
  return j;
}

inline Table energy_trace_table(const McReport& r) {
  Table t{{"sweep", "mean_energy"}, {}};
  for (std::size_t k = 0; k < r.energy_trace.size(); ++k) t.add({k + 1, r.energy_trace[k]});
  return t;
}

}  // namespace annealmap
