#pragma once

// Model files: {"n_spins": N, "name": "...", "terms": [{"sites": [0, 1], "coeff": -1.0}, ...]}

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "annealmap/spin_core.hpp"

namespace annealmap {

inline IsingModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n_spins") || !j.contains("terms"))
    throw std::invalid_argument("model file: expected an object with n_spins and terms");
  const int n = j.at("n_spins").get<int>();
  std::vector<Term> terms;
  for (const auto& t : j.at("terms")) {
    Term term;
    term.sites = t.at("sites").get<std::vector<int>>();
    term.coeff = t.at("coeff").get<double>();
    terms.push_back(std::move(term));
  }
  return IsingModel(n, std::move(terms), j.value("name", std::string{}));
}

inline nlohmann::json model_to_json(const IsingModel& m) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : m.terms()) terms.push_back({{"sites", t.sites}, {"coeff", t.coeff}});
  nlohmann::json j{{"n_spins", m.n_spins()}, {"terms", terms}};
  if (!m.name().empty()) j["name"] = m.name();
  return j;
}

inline IsingModel parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("model file: ") + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model file: ") + e.what());
  }
}

inline IsingModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace annealmap
