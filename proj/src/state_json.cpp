#include "homsense/state_json.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "homsense/error.hpp"

namespace homsense {

namespace {

const std::set<std::string> kFields = {"family",    "sigma",     "delta",      "delta_t",    "reflectivity",
                                       "tau_bar",   "omega_bar", "peak_width", "omega0",     "freq_chirp",
                                       "time_chirp", "unit_scale"};

double number(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw InvalidSpec("field '" + key + "' must be a number");
  return v.get<double>();
}

Chirp chirp(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_object()) throw InvalidSpec("field '" + key + "' must be an object {\"c\", \"sign\"}");
  for (const auto& [k, _] : v.items()) {
    if (k != "c" && k != "sign") throw InvalidSpec("unknown field '" + key + "." + k + "'");
  }
  if (!v.contains("c")) throw InvalidSpec("field '" + key + ".c' is required");
  Chirp c;
  c.c = number(v, "c");
  if (v.contains("sign")) {
    if (!v.at("sign").is_string()) throw InvalidSpec("field '" + key + ".sign' must be \"+\" or \"-\"");
    const std::string s = v.at("sign").get<std::string>();
    if (s != "+" && s != "-") throw InvalidSpec("field '" + key + ".sign' must be \"+\" or \"-\"");
    c.positive = s == "+";
  }
  return c;
}

nlohmann::json chirp_json(const Chirp& c) { return {{"c", c.c}, {"sign", c.positive ? "+" : "-"}}; }

}  // namespace

PhaseMatchingSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidSpec("state spec must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!kFields.count(k)) throw InvalidSpec("unknown field '" + k + "'");
  }
  if (!j.contains("family") || !j.at("family").is_string()) throw InvalidSpec("field 'family' must be a string");
  if (!j.contains("sigma")) throw InvalidSpec("field 'sigma' is required");
  PhaseMatchingSpec s;
  s.family = family_from_name(j.at("family").get<std::string>());
  s.sigma = number(j, "sigma");
  if (j.contains("delta")) s.delta = number(j, "delta");
  if (j.contains("delta_t")) s.delta_t = number(j, "delta_t");
  if (j.contains("reflectivity")) s.reflectivity = number(j, "reflectivity");
  if (j.contains("tau_bar")) s.tau_bar = number(j, "tau_bar");
  if (j.contains("omega_bar")) s.omega_bar = number(j, "omega_bar");
  if (j.contains("peak_width")) s.peak_width = number(j, "peak_width");
  if (j.contains("omega0")) s.omega0 = number(j, "omega0");
  if (j.contains("unit_scale")) s.unit_scale = number(j, "unit_scale");
  if (j.contains("freq_chirp") && !j.at("freq_chirp").is_null()) s.freq_chirp = chirp(j, "freq_chirp");
  if (j.contains("time_chirp") && !j.at("time_chirp").is_null()) s.time_chirp = chirp(j, "time_chirp");
  validate(s);
  return s;
}

nlohmann::json spec_to_json(const PhaseMatchingSpec& s) {
  nlohmann::json j;
  j["family"] = family_name(s.family);
  j["sigma"] = s.sigma;
  switch (s.family) {
    case Family::Gaussian:
    case Family::FrequencyCat:
    case Family::TwoColorMixture:
      j["delta"] = s.delta;
      break;
    case Family::TimeCat:
      j["delta_t"] = s.delta_t;
      break;
    case Family::AiryGrid:
    case Family::FrequencyAiryGrid:
      j["reflectivity"] = s.reflectivity;
      j["tau_bar"] = s.tau_bar;
      break;
    case Family::GaussianComb:
      j["omega_bar"] = s.omega_bar;
      j["peak_width"] = s.peak_width;
      break;
  }
  j["omega0"] = s.omega0;
  if (s.freq_chirp) j["freq_chirp"] = chirp_json(*s.freq_chirp);
  if (s.time_chirp) j["time_chirp"] = chirp_json(*s.time_chirp);
  j["unit_scale"] = s.unit_scale;
  return j;
}

PhaseMatchingSpec parse_spec(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidSpec(std::string("malformed JSON: ") + e.what());
  }
  return spec_from_json(j);
}

PhaseMatchingSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidSpec("cannot open state file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

}  // namespace homsense
