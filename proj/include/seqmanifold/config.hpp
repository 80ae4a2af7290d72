#pragma once

// JSON system configuration files.
//
//   {"dim": d,
//    "components": [[{"coeff": c, "powers": [e1, ..., ed]}, ...], ...],
//    "inverse": <same shape as components>,      (optional)
//    "fixed_point": [x1, ..., xd],               (optional)
//    "guess": [x1, ..., xd],                     (optional)
//    "domain_radius": r,                         (optional)
//    "time": T, "steps": n}                      (vector fields only)

#include "seqmanifold/dynsys.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace seqmanifold {

namespace detail {

inline std::vector<std::vector<Monomial>> parse_components(const nlohmann::json& j, int dim) {
  if (!j.is_array()) throw Error(ErrorCode::BadConfig, "components must be an array");
  std::vector<std::vector<Monomial>> comps;
  for (const auto& comp : j) {
    if (!comp.is_array()) throw Error(ErrorCode::BadConfig, "each component must be an array of terms");
    std::vector<Monomial> terms;
    for (const auto& t : comp) {
      if (!t.is_object() || !t.contains("coeff") || !t.contains("powers"))
        throw Error(ErrorCode::BadConfig, "term needs 'coeff' and 'powers'");
      if (!t["coeff"].is_number()) throw Error(ErrorCode::BadConfig, "coeff must be a number");
      Monomial m;
      m.coeff = t["coeff"].get<double>();
      const auto& p = t["powers"];
      if (!p.is_array() || static_cast<int>(p.size()) != dim)
        throw Error(ErrorCode::BadConfig, "powers must list " + std::to_string(dim) + " exponents");
      for (const auto& e : p) {
        if (!e.is_number_integer() || e.get<long long>() < 0)
          throw Error(ErrorCode::BadConfig, "exponents must be nonnegative integers");
        m.powers.push_back(e.get<int>());
      }
      terms.push_back(std::move(m));
    }
    comps.push_back(std::move(terms));
  }
  return comps;
}

inline Vec parse_vector(const nlohmann::json& j, int dim, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw Error(ErrorCode::BadConfig, std::string(what) + " must be an array of length " + std::to_string(dim));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::BadConfig, std::string(what) + " entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

inline PolynomialConfig parse_polynomial_config(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("components"))
    throw Error(ErrorCode::BadConfig, "config needs 'dim' and 'components'");
  if (!j["dim"].is_number_integer() || j["dim"].get<int>() <= 0)
    throw Error(ErrorCode::BadConfig, "dim must be a positive integer");
  const int d = j["dim"].get<int>();
  PolynomialConfig cfg;
  cfg.name = j.value("name", std::string("polynomial"));
  cfg.map = PolynomialMap(d, detail::parse_components(j["components"], d));
  if (j.contains("inverse") && !j["inverse"].is_null())
    cfg.inverse = PolynomialMap(d, detail::parse_components(j["inverse"], d));
  if (j.contains("fixed_point")) cfg.fixed_point = detail::parse_vector(j["fixed_point"], d, "fixed_point");
  if (j.contains("guess")) cfg.guess = detail::parse_vector(j["guess"], d, "guess");
  if (j.contains("domain_radius")) {
    if (!j["domain_radius"].is_number() || j["domain_radius"].get<double>() <= 0.0)
      throw Error(ErrorCode::BadConfig, "domain_radius must be a positive number");
    cfg.domain_radius = j["domain_radius"].get<double>();
  }
  return cfg;
}

inline bool is_vector_field_config(const nlohmann::json& j) {
  return j.is_object() && j.contains("time");
}

inline VectorFieldConfig parse_vector_field_config(const nlohmann::json& j) {
  VectorFieldConfig cfg;
  cfg.field = parse_polynomial_config(j);
  if (!j.contains("time") || !j["time"].is_number())
    throw Error(ErrorCode::BadConfig, "vector field config needs numeric 'time'");
  cfg.time = j["time"].get<double>();
  if (j.contains("steps")) {
    if (!j["steps"].is_number_integer()) throw Error(ErrorCode::BadConfig, "steps must be an integer");
    cfg.steps = j["steps"].get<int>();
  }
  if (cfg.steps < 1) throw Error(ErrorCode::BadConfig, "steps must be >= 1");
  return cfg;
}

/// Loads a map or vector-field config; vector fields become time-T maps.
inline SystemSpec load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadConfig, "cannot open system config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("invalid JSON: ") + e.what());
  }
  if (is_vector_field_config(j)) return time_T_map(parse_vector_field_config(j));
  return make_polynomial_system(parse_polynomial_config(j));
}

}  // namespace seqmanifold
