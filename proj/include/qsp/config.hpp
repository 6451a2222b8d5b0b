#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "qsp/common.hpp"
#include "qsp/ensemble.hpp"
#include "qsp/hilbert.hpp"
#include "qsp/homogenize.hpp"
#include "qsp/models.hpp"
#include "qsp/noise.hpp"
#include "qsp/sde.hpp"

// Declarative experiment configs: one self-contained JSON document holding
// the model (matrices inline or by builtin name), integration settings,
// ensemble size and seed, and the optional sweep/compare sections.
// Parsing is strict - unknown keys are rejected rather than ignored, so a
// typo cannot silently change an experiment.

namespace qsp::config {

using json = nlohmann::json;
using hilbert::Complex;
using hilbert::Matrix;
using hilbert::Vector;

struct ExperimentConfig {
  Eigen::Index dimension = 2;
  models::ModelSpec model;
  Vector initial_state;
  sde::IntegrationConfig integration;
  std::size_t trajectories = 1000;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  std::vector<ensemble::Observable> observables;

  bool has_sweep = false;
  std::vector<double> sweep_taus;
  double sweep_dt_factor = 0.02;          // row dt = tau * dt_factor
  std::vector<double> sweep_times;        // empty: reuse integration samples
  double sweep_master_dt = 1e-4;

  bool has_compare = false;
  std::vector<models::Regime> compare_regimes;
  double compare_master_dt = 1e-4;

  json raw;  // verbatim config, echoed into summary outputs
};

namespace detail {

inline void check_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        ok = true;
        break;
      }
    if (!ok)
      throw config_error("config: unknown key '" + it.key() + "' in " +
                         where);
  }
}

inline double get_double(const json& j, const char* key, double fallback,
                         const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw config_error("config: " + where + "." + key + " must be a number");
  return j[key].get<double>();
}

inline bool get_bool(const json& j, const char* key, bool fallback,
                     const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean())
    throw config_error("config: " + where + "." + key + " must be a boolean");
  return j[key].get<bool>();
}

inline std::string get_string(const json& j, const char* key,
                              const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw config_error("config: " + where + "." + key +
                       " must be present and a string");
  return j[key].get<std::string>();
}

inline std::vector<double> get_double_array(const json& j,
                                            const std::string& where) {
  if (!j.is_array())
    throw config_error("config: " + where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number())
      throw config_error("config: " + where + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline Complex parse_entry(const json& j, const std::string& where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number())
    throw config_error(
        "config: " + where +
        " entries must be numbers or [real, imag] number pairs");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

}  // namespace detail

inline models::Regime parse_regime(const std::string& name) {
  if (name == "colored") return models::Regime::Colored;
  if (name == "stratonovich_white") return models::Regime::StratonovichWhite;
  if (name == "ito_white") return models::Regime::ItoWhite;
  if (name == "naive_ito_white") return models::Regime::NaiveItoWhite;
  throw config_error(
      "config: unknown regime '" + name +
      "' (expected colored, stratonovich_white, ito_white, naive_ito_white)");
}

inline noise::NoiseKind parse_kind(const std::string& name) {
  if (name == "ou") return noise::NoiseKind::OU;
  if (name == "sbm") return noise::NoiseKind::SBM;
  if (name == "white") return noise::NoiseKind::White;
  throw config_error("config: unknown noise kind '" + name +
                     "' (expected ou, sbm, white)");
}

/// Operator from JSON: {"builtin": "pauli_x"|"pauli_y"|"pauli_z"|"identity"}
/// or a row-major nested array whose entries are plain real numbers or
/// [real, imag] pairs.
inline Matrix parse_operator(const json& j, Eigen::Index dim,
                             const std::string& where) {
  if (j.is_object()) {
    detail::check_keys(j, where, {"builtin"});
    const std::string name = detail::get_string(j, "builtin", where);
    if (name == "identity") return Matrix::Identity(dim, dim);
    if (dim != 2)
      throw config_error("config: " + where + ": builtin '" + name +
                         "' requires dimension 2");
    if (name == "pauli_x") return hilbert::pauli_x();
    if (name == "pauli_y") return hilbert::pauli_y();
    if (name == "pauli_z") return hilbert::pauli_z();
    throw config_error("config: " + where + ": unknown builtin operator '" +
                       name + "'");
  }
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim)
    throw config_error("config: " + where + " must be a " +
                       std::to_string(dim) + "x" + std::to_string(dim) +
                       " matrix or a builtin name");
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
      throw config_error("config: " + where + " row " + std::to_string(r) +
                         " has wrong length");
    for (Eigen::Index c = 0; c < dim; ++c)
      m(r, c) = detail::parse_entry(row[static_cast<std::size_t>(c)],
                                    where + " row " + std::to_string(r));
  }
  return m;
}

/// State from JSON: {"builtin": "plus"}, {"basis": k}, or an array of
/// [real, imag] pairs. The result is normalized.
inline Vector parse_state(const json& j, Eigen::Index dim,
                          const std::string& where) {
  Vector v;
  if (j.is_object()) {
    detail::check_keys(j, where, {"builtin", "basis"});
    if (j.contains("builtin")) {
      const std::string name = detail::get_string(j, "builtin", where);
      if (name != "plus")
        throw config_error("config: " + where + ": unknown builtin state '" +
                           name + "'");
      if (dim != 2)
        throw config_error("config: " + where +
                           ": builtin 'plus' requires dimension 2");
      v = hilbert::plus_state();
    } else if (j.contains("basis")) {
      if (!j["basis"].is_number_integer())
        throw config_error("config: " + where + ".basis must be an integer");
      v = hilbert::basis_state(dim, j["basis"].get<Eigen::Index>());
    } else {
      throw config_error("config: " + where +
                         " object needs 'builtin' or 'basis'");
    }
  } else if (j.is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != dim)
      throw config_error("config: " + where + " must have " +
                         std::to_string(dim) + " entries");
    v.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      v(i) = detail::parse_entry(j[static_cast<std::size_t>(i)],
                                 where + " entry " + std::to_string(i));
  } else {
    throw config_error("config: " + where + " must be an object or array");
  }
  const double n = v.norm();
  if (!(n > 0.0))
    throw config_error("config: " + where + " must be a nonzero state");
  return v / n;
}

inline models::NoiseChannel parse_channel(const json& j, Eigen::Index dim,
                                          models::Regime regime,
                                          std::size_t index) {
  const std::string where = "channels[" + std::to_string(index) + "]";
  if (!j.is_object())
    throw config_error("config: " + where + " must be an object");
  detail::check_keys(j, where,
                     {"operator", "kind", "tau", "A", "B", "gamma"});
  if (!j.contains("operator"))
    throw config_error("config: " + where + " needs an 'operator'");
  models::NoiseChannel ch;
  ch.op = parse_operator(j["operator"], dim, where + ".operator");
  if (j.contains("kind")) {
    ch.kind = parse_kind(detail::get_string(j, "kind", where));
  } else if (regime == models::Regime::Colored) {
    throw config_error("config: " + where +
                       ": colored regime requires a noise 'kind' (ou or sbm)");
  } else {
    ch.kind = noise::NoiseKind::White;
  }
  ch.tau = detail::get_double(j, "tau", 0.0, where);
  ch.A = detail::get_double(j, "A", 0.0, where);
  ch.B = detail::get_double(j, "B", 0.0, where);
  ch.gamma = detail::get_double(j, "gamma", 0.0, where);
  // Unstated coefficients default to the fluctuation-dissipation choice,
  // so a config that pins only one side of the relation stays consistent.
  if (regime == models::Regime::Colored) {
    if (!j.contains("gamma") && ch.tau > 0.0)
      ch.gamma = homogenize::effective_coupling(ch.kind, ch.B, ch.tau).gamma;
  } else {
    if (!j.contains("A") && j.contains("gamma")) ch.A = ch.gamma * ch.gamma;
    if (!j.contains("gamma") && j.contains("A")) ch.gamma = std::sqrt(ch.A);
  }
  return ch;
}

inline std::vector<ensemble::Observable> default_observables(
    Eigen::Index dim) {
  std::vector<ensemble::Observable> obs;
  if (dim == 2) {
    obs.push_back({"sigma_x", hilbert::pauli_x()});
    obs.push_back({"sigma_y", hilbert::pauli_y()});
    obs.push_back({"sigma_z", hilbert::pauli_z()});
  } else {
    for (Eigen::Index k = 0; k < dim; ++k) {
      Matrix p = Matrix::Zero(dim, dim);
      p(k, k) = 1.0;
      obs.push_back({"pop_" + std::to_string(k), p});
    }
  }
  return obs;
}

inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object())
    throw config_error("config: top level must be a JSON object");
  detail::check_keys(j, "top level",
                     {"dimension", "regime", "hamiltonian", "initial_state",
                      "channels", "integration", "ensemble", "observables",
                      "sweep", "compare"});

  ExperimentConfig cfg;
  cfg.raw = j;
  if (!j.contains("dimension") || !j["dimension"].is_number_integer())
    throw config_error("config: integer 'dimension' is required");
  cfg.dimension = j["dimension"].get<Eigen::Index>();
  if (cfg.dimension < 2)
    throw config_error("config: dimension must be >= 2");

  cfg.model.regime = parse_regime(detail::get_string(j, "regime", "top level"));
  cfg.model.H = j.contains("hamiltonian")
                    ? parse_operator(j["hamiltonian"], cfg.dimension,
                                     "hamiltonian")
                    : Matrix::Zero(cfg.dimension, cfg.dimension).eval();

  if (j.contains("channels")) {
    if (!j["channels"].is_array())
      throw config_error("config: 'channels' must be an array");
    for (std::size_t k = 0; k < j["channels"].size(); ++k)
      cfg.model.channels.push_back(
          parse_channel(j["channels"][k], cfg.dimension, cfg.model.regime, k));
  }

  cfg.initial_state =
      j.contains("initial_state")
          ? parse_state(j["initial_state"], cfg.dimension, "initial_state")
          : hilbert::basis_state(cfg.dimension, 0);

  if (j.contains("integration")) {
    const json& ji = j["integration"];
    if (!ji.is_object())
      throw config_error("config: 'integration' must be an object");
    detail::check_keys(ji, "integration",
                       {"dt", "t_end", "sample_times", "renormalize"});
    cfg.integration.dt = detail::get_double(ji, "dt", 1e-3, "integration");
    cfg.integration.t_end =
        detail::get_double(ji, "t_end", 1.0, "integration");
    if (ji.contains("sample_times"))
      cfg.integration.sample_times =
          detail::get_double_array(ji["sample_times"],
                                   "integration.sample_times");
    cfg.integration.renormalize =
        detail::get_bool(ji, "renormalize", true, "integration");
  }

  if (j.contains("ensemble")) {
    const json& je = j["ensemble"];
    if (!je.is_object())
      throw config_error("config: 'ensemble' must be an object");
    detail::check_keys(je, "ensemble",
                       {"trajectories", "master_seed", "workers"});
    if (je.contains("trajectories")) {
      if (!je["trajectories"].is_number_integer() ||
          je["trajectories"].get<long long>() < 1)
        throw config_error(
            "config: ensemble.trajectories must be a positive integer");
      cfg.trajectories = je["trajectories"].get<std::size_t>();
    }
    if (je.contains("master_seed")) {
      if (!je["master_seed"].is_number_integer())
        throw config_error("config: ensemble.master_seed must be an integer");
      cfg.master_seed = je["master_seed"].get<std::uint64_t>();
    }
    if (je.contains("workers")) {
      if (!je["workers"].is_number_integer() ||
          je["workers"].get<long long>() < 1)
        throw config_error(
            "config: ensemble.workers must be a positive integer");
      cfg.workers = je["workers"].get<unsigned>();
    }
  }

  if (j.contains("observables")) {
    if (!j["observables"].is_array())
      throw config_error("config: 'observables' must be an array");
    for (std::size_t k = 0; k < j["observables"].size(); ++k) {
      const json& jo = j["observables"][k];
      const std::string where = "observables[" + std::to_string(k) + "]";
      if (!jo.is_object())
        throw config_error("config: " + where + " must be an object");
      detail::check_keys(jo, where, {"name", "operator"});
      if (!jo.contains("operator"))
        throw config_error("config: " + where + " needs an 'operator'");
      cfg.observables.push_back(
          {detail::get_string(jo, "name", where),
           parse_operator(jo["operator"], cfg.dimension, where + ".operator")});
    }
  } else {
    cfg.observables = default_observables(cfg.dimension);
  }

  if (j.contains("sweep")) {
    const json& js = j["sweep"];
    if (!js.is_object())
      throw config_error("config: 'sweep' must be an object");
    detail::check_keys(js, "sweep",
                       {"taus", "dt_factor", "times", "master_dt"});
    if (!js.contains("taus"))
      throw config_error("config: sweep.taus is required");
    cfg.has_sweep = true;
    cfg.sweep_taus = detail::get_double_array(js["taus"], "sweep.taus");
    cfg.sweep_dt_factor =
        detail::get_double(js, "dt_factor", 0.02, "sweep");
    if (js.contains("times"))
      cfg.sweep_times = detail::get_double_array(js["times"], "sweep.times");
    cfg.sweep_master_dt =
        detail::get_double(js, "master_dt", 1e-4, "sweep");
  }

  if (j.contains("compare")) {
    const json& jc = j["compare"];
    if (!jc.is_object())
      throw config_error("config: 'compare' must be an object");
    detail::check_keys(jc, "compare", {"regimes", "master_dt"});
    cfg.has_compare = true;
    if (!jc.contains("regimes") || !jc["regimes"].is_array() ||
        jc["regimes"].empty())
      throw config_error(
          "config: compare.regimes must be a non-empty array of regimes");
    for (const auto& r : jc["regimes"]) {
      if (!r.is_string())
        throw config_error("config: compare.regimes entries must be strings");
      cfg.compare_regimes.push_back(parse_regime(r.get<std::string>()));
    }
    cfg.compare_master_dt =
        detail::get_double(jc, "master_dt", 1e-4, "compare");
  }

  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot read config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error("config: JSON parse failure in " + path + ": " +
                       e.what());
  }
  return parse_config(j);
}

}  // namespace qsp::config
