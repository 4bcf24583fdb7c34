#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sawqed/channel.hpp"
#include "sawqed/errors.hpp"
#include "sawqed/idt.hpp"
#include "sawqed/params.hpp"
#include "sawqed/transmon.hpp"

namespace sawqed {

namespace json_io {

using nlohmann::json;

inline void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " must be a JSON object");
}

// Rejects keys outside `allowed` and reports the first one found.
inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) throw ParseError("unknown key '" + item.key() + "' in " + where);
  }
}

inline const json& member(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing key '" + key + "' in " + where);
  return *it;
}

inline double number(const json& j, const std::string& key, const std::string& where) {
  const json& v = member(j, key, where);
  if (!v.is_number()) throw ParseError(where + "." + key + " must be a number");
  return v.get<double>();
}

inline int integer(const json& j, const std::string& key, const std::string& where) {
  const json& v = member(j, key, where);
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<int>(d);
  }
  throw ParseError(where + "." + key + " must be an integer");
}

inline MaterialParams material_from(const json& j) {
  const std::string w = "material";
  expect_object(j, w);
  reject_unknown(j, {"dielectric_constant", "sound_velocity", "electromech_coupling"}, w);
  return {number(j, "dielectric_constant", w), number(j, "sound_velocity", w),
          number(j, "electromech_coupling", w)};
}

inline TransmonParams transmon_from(const json& j) {
  const std::string w = "transmon";
  expect_object(j, w);
  reject_unknown(j, {"ej0", "ec", "squid_area", "dephasing_rate", "acoustic_coupling"}, w);
  return {number(j, "ej0", w), number(j, "ec", w), number(j, "squid_area", w),
          number(j, "dephasing_rate", w), number(j, "acoustic_coupling", w)};
}

inline IdtParams idt_from(const json& j, const std::string& w) {
  expect_object(j, w);
  reject_unknown(j, {"center_frequency", "periods", "finger_overlap", "insertion_loss"}, w);
  IdtParams p;
  p.center_frequency = number(j, "center_frequency", w);
  p.periods = integer(j, "periods", w);
  p.finger_overlap = number(j, "finger_overlap", w);
  p.insertion_loss = j.contains("insertion_loss") ? number(j, "insertion_loss", w) : 1.0;
  return p;
}

inline Geometry geometry_from(const json& j) {
  const std::string w = "geometry";
  expect_object(j, w);
  reject_unknown(j, {"dist_idtA_qubit", "dist_idtB_qubit"}, w);
  return {number(j, "dist_idtA_qubit", w), number(j, "dist_idtB_qubit", w)};
}

inline json to_json(const IdtParams& p) {
  return {{"center_frequency", p.center_frequency},
          {"periods", p.periods},
          {"finger_overlap", p.finger_overlap},
          {"insertion_loss", p.insertion_loss}};
}

}  // namespace json_io

// Parses and validates a device description.
inline DeviceConfig parse_config(const nlohmann::json& j) {
  using namespace json_io;
  const std::string w = "config";
  expect_object(j, w);
  reject_unknown(j, {"material", "transmon", "idt_a", "idt_b", "qdt", "geometry", "rabi_per_sqrt_watt"}, w);
  DeviceConfig cfg;
  cfg.material = material_from(member(j, "material", w));
  cfg.transmon = transmon_from(member(j, "transmon", w));
  cfg.idt_a = idt_from(member(j, "idt_a", w), "idt_a");
  cfg.idt_b = idt_from(member(j, "idt_b", w), "idt_b");
  cfg.qdt = idt_from(member(j, "qdt", w), "qdt");
  cfg.geometry = geometry_from(member(j, "geometry", w));
  cfg.rabi_per_sqrt_watt = number(j, "rabi_per_sqrt_watt", w);
  validate(cfg);
  return cfg;
}

inline DeviceConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline DeviceConfig load_config(const std::string& path) { return parse_config_text(read_text_file(path)); }

inline nlohmann::json to_json(const DeviceConfig& cfg) {
  using json_io::to_json;
  return {{"material",
           {{"dielectric_constant", cfg.material.dielectric_constant},
            {"sound_velocity", cfg.material.sound_velocity},
            {"electromech_coupling", cfg.material.electromech_coupling}}},
          {"transmon",
           {{"ej0", cfg.transmon.ej0},
            {"ec", cfg.transmon.ec},
            {"squid_area", cfg.transmon.squid_area},
            {"dephasing_rate", cfg.transmon.dephasing_rate},
            {"acoustic_coupling", cfg.transmon.acoustic_coupling}}},
          {"idt_a", to_json(cfg.idt_a)},
          {"idt_b", to_json(cfg.idt_b)},
          {"qdt", to_json(cfg.qdt)},
          {"geometry",
           {{"dist_idtA_qubit", cfg.geometry.dist_idtA_qubit},
            {"dist_idtB_qubit", cfg.geometry.dist_idtB_qubit}}},
          {"rabi_per_sqrt_watt", cfg.rabi_per_sqrt_watt}};
}

inline std::string serialize(const DeviceConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

struct DerivedSummary {
  double wavelength = 0.0;            // lambda_0, m
  double idt_bandwidth = 0.0;         // BW_I, Hz
  double qdt_bandwidth = 0.0;         // BW_Q, Hz
  double design_coupling = 0.0;       // Gamma_ac from the transducer formula, Hz
  double max_f01 = 0.0;               // Hz
  double anharmonicity = 0.0;         // Hz
  double transit_a = 0.0;             // IDT A -> qubit, s
  double transit_b = 0.0;             // qubit -> IDT B, s
};

inline DerivedSummary derived_summary(const DeviceConfig& cfg) {
  DerivedSummary d;
  const double fq = cfg.qdt.center_frequency;
  d.wavelength = idt::wavelength(cfg.material.sound_velocity, fq);
  d.idt_bandwidth = idt::bandwidth(cfg.idt_a.center_frequency, cfg.idt_a.periods);
  d.qdt_bandwidth = idt::bandwidth(fq, cfg.qdt.periods);
  d.design_coupling = idt::acoustic_coupling(fq, cfg.material.electromech_coupling, cfg.qdt.periods);
  const auto levels = transmon::level_structure(transmon::FluxBias{0.0}, cfg.transmon);
  d.max_f01 = levels.f01;
  d.anharmonicity = levels.anharmonicity;
  d.transit_a = channel::transit_delay(cfg.geometry.dist_idtA_qubit, cfg.material.sound_velocity);
  d.transit_b = channel::transit_delay(cfg.geometry.dist_idtB_qubit, cfg.material.sound_velocity);
  return d;
}

}  // namespace sawqed
