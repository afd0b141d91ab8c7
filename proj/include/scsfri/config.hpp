// SPDX-License-Identifier: Apache-2.0
//
// scsfri: sparse common-support multipath channel estimation (SCS-FRI)
// Copyright (C) 2026 The scsfri authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Experiment configuration: a JSON key-value tree (see README for the full
// key reference). The parsed document is kept verbatim so that configs
// round-trip losslessly and hash canonically.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "scsfri/channel.hpp"
#include "scsfri/estimator.hpp"
#include "scsfri/pilots.hpp"
#include "scsfri/types.hpp"

namespace scsfri {

using json = nlohmann::json;

struct EstimatorSettings {
  SupportMethod method = SupportMethod::esprit;
  int cadzow_iters = 0;
  int K = 1;
};

struct ExperimentAConfig {
  std::vector<int> antennas{1, 2, 4, 8};
  std::vector<double> snr_db;  // empty: use the top-level grid
};

struct ExperimentBConfig {
  int antennas = 4;
  double base_toa = 0.0;
  double amplitude = 1.0;
  std::vector<double> separations_T{1.0, 2.0};  // in units of the sample step
  std::vector<double> epsilons_T{0.0, 0.02};    // in units of the sample step
  long fisher_draws = 10000;
  std::vector<double> snr_db;
};

struct ExperimentCConfig {
  ScattererScene scene;
  double epsilon = 0.0;        // seconds
  int half_pilot_count = 32;
  std::vector<double> snr_db;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  long trials = 400;
  std::vector<double> snr_db;
  KernelConfig kernel;
  PilotLayout layout;
  std::vector<PathSpec> paths;
  EstimatorSettings estimator;
  double epsilon = 0.0;
  std::optional<ExperimentAConfig> exp_a;
  std::optional<ExperimentBConfig> exp_b;
  std::optional<ExperimentCConfig> exp_c;

  json document;  // parsed source, kept for lossless round-trips

  std::string canonical() const { return document.dump(); }

  /// FNV-1a over the canonical serialization; stamped into every result row.
  std::uint64_t config_hash() const {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
    return h;
  }
};

namespace detail {

template <typename T>
T get_required(const json& j, const std::string& key) {
  if (!j.contains(key)) throw input_error("config: missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw input_error("config: bad value for key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw input_error("config: bad value for key '" + key + "'");
  }
}

inline PilotLayout parse_layout(const json& j) {
  const std::string kind = get_required<std::string>(j, "kind");
  if (kind == "contiguous-dft")
    return PilotLayout::contiguous(get_required<int>(j, "M"));
  if (kind == "scattered-dft")
    return PilotLayout::scattered(get_required<int>(j, "M"),
                                  get_required<int>(j, "D"),
                                  get_or<double>(j, "delay_spread", 0.0));
  if (kind == "wht")
    return PilotLayout::walsh(get_required<int>(j, "n"), get_required<int>(j, "ell"),
                              get_or<double>(j, "delay_spread", 0.0));
  throw input_error("config: unknown pilot layout kind '" + kind + "'");
}

inline std::vector<PathSpec> parse_paths(const json& j) {
  std::vector<PathSpec> paths;
  for (const json& p : j) {
    PathSpec spec;
    spec.toa = get_required<double>(p, "toa");
    spec.expected_amplitude = get_required<double>(p, "amplitude");
    spec.scatterer = get_or<int>(p, "scatterer", -1);
    paths.push_back(spec);
  }
  return paths;
}

inline EstimatorSettings parse_estimator(const json& j) {
  EstimatorSettings s;
  const std::string method = get_or<std::string>(j, "method", "esprit");
  if (method == "prony")
    s.method = SupportMethod::prony;
  else if (method == "esprit")
    s.method = SupportMethod::esprit;
  else
    throw input_error("config: unknown estimator method '" + method + "'");
  s.cadzow_iters = get_or<int>(j, "cadzow_iters", 0);
  s.K = get_required<int>(j, "K");
  return s;
}

inline ScattererScene parse_scene(const json& j) {
  ScattererScene scene;
  const double fc = get_required<double>(j, "carrier_frequency");
  scene.carrier_omega = 2.0 * M_PI * fc;
  scene.wave_speed = get_or<double>(j, "wave_speed", 299792458.0);
  if (j.contains("antenna_circle")) {
    const json& c = j.at("antenna_circle");
    const int count = get_required<int>(c, "count");
    const double radius = get_required<double>(c, "radius");
    for (int i = 0; i < count; ++i) {
      const double ang = 2.0 * M_PI * i / count;
      scene.antennas.emplace_back(radius * std::cos(ang), radius * std::sin(ang));
    }
  } else {
    for (const json& a : j.at("antennas"))
      scene.antennas.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
  }
  for (const json& s : j.at("scatterers")) {
    Scatterer sc;
    sc.azimuth = get_required<double>(s, "azimuth_deg") * M_PI / 180.0;
    sc.kappa = kappa_from_geometry(get_required<double>(s, "distance"),
                                   get_required<double>(s, "width"));
    sc.path.toa = get_required<double>(s, "toa");
    sc.path.expected_amplitude = get_required<double>(s, "amplitude");
    scene.scatterers.push_back(sc);
  }
  return scene;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& doc) {
  using detail::get_or;
  using detail::get_required;
  ExperimentConfig cfg;
  cfg.document = doc;
  cfg.seed = get_required<std::uint64_t>(doc, "seed");
  cfg.trials = get_required<long>(doc, "trials");
  require(cfg.trials >= 1, "config: trials must be >= 1");
  cfg.snr_db = get_required<std::vector<double>>(doc, "snr_db");
  require(!cfg.snr_db.empty(), "config: snr grid must be nonempty");

  const json& k = doc.at("kernel");
  cfg.kernel = KernelConfig(get_required<double>(k, "tau"),
                            get_required<int>(k, "M"),
                            get_required<int>(k, "samples"));
  cfg.layout = detail::parse_layout(doc.at("layout"));
  if (doc.contains("paths")) cfg.paths = detail::parse_paths(doc.at("paths"));
  cfg.estimator = detail::parse_estimator(doc.at("estimator"));
  cfg.epsilon = get_or<double>(doc, "epsilon", 0.0);

  if (doc.contains("experiment_a")) {
    const json& a = doc.at("experiment_a");
    ExperimentAConfig ea;
    ea.antennas = get_or<std::vector<int>>(a, "antennas", ea.antennas);
    ea.snr_db = get_or<std::vector<double>>(a, "snr_db", {});
    cfg.exp_a = ea;
  }
  if (doc.contains("experiment_b")) {
    const json& b = doc.at("experiment_b");
    ExperimentBConfig eb;
    eb.antennas = get_or<int>(b, "antennas", 4);
    eb.base_toa = get_required<double>(b, "base_toa");
    eb.amplitude = get_or<double>(b, "amplitude", 1.0);
    eb.separations_T = get_or<std::vector<double>>(b, "separations_T", eb.separations_T);
    eb.epsilons_T = get_or<std::vector<double>>(b, "epsilons_T", eb.epsilons_T);
    eb.fisher_draws = get_or<long>(b, "fisher_draws", 10000);
    eb.snr_db = get_or<std::vector<double>>(b, "snr_db", {});
    cfg.exp_b = eb;
  }
  if (doc.contains("experiment_c")) {
    const json& c = doc.at("experiment_c");
    ExperimentCConfig ec;
    ec.scene = detail::parse_scene(c.at("scene"));
    ec.epsilon = get_or<double>(c, "epsilon_T", 0.0) * cfg.kernel.sample_step();
    ec.half_pilot_count = get_or<int>(c, "half_pilot_count", 32);
    ec.snr_db = get_or<std::vector<double>>(c, "snr_db", {});
    cfg.exp_c = ec;
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("config: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw input_error("config: parse failure in '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

inline std::string dump_config(const ExperimentConfig& cfg) {
  return cfg.document.dump(2) + "\n";
}

}  // namespace scsfri
