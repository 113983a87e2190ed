#pragma once

#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotlab/angles.hpp"
#include "rotlab/circle_map.hpp"
#include "rotlab/denjoy.hpp"
#include "rotlab/errors.hpp"

namespace rotlab {

using ordered_json = nlohmann::ordered_json;

/// Fixed shortest-round-trip float formatting for CSV cells.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                                const std::string& what) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigInvalid(what + ": unknown field '" + it.key() + "'");
  }
}

/// Angle spec: "golden", "sqrt2m1", or a decimal literal in (0, 1).
inline AnglePtr angle_from_spec(const std::string& spec, int depth,
                                unsigned precision_bits) {
  if (spec == "golden")
    return std::make_shared<IrrationalAngle>(IrrationalAngle::golden(depth, precision_bits));
  if (spec == "sqrt2m1")
    return std::make_shared<IrrationalAngle>(
        IrrationalAngle::sqrt2_minus_one(depth, precision_bits));
  if (spec.find_first_not_of("0123456789.") != std::string::npos)
    throw ConfigInvalid("angle spec must be 'golden', 'sqrt2m1', or a decimal in (0,1): got '" +
                        spec + "'");
  try {
    return std::make_shared<IrrationalAngle>(
        IrrationalAngle::from_decimal(spec, depth, precision_bits));
  } catch (const RationalDetected& e) {
    throw ConfigInvalid(std::string("angle '") + spec +
                        "' is rational at working precision (" + e.what() + ")");
  }
}

inline ordered_json gap_table_json(const DenjoyMap& dj) {
  ordered_json arr = ordered_json::array();
  for (const Gap& g : dj.gaps_by_index()) {
    ordered_json rec;
    rec["n"] = g.n;
    rec["a"] = g.a;
    rec["len"] = g.len;
    arr.push_back(rec);
  }
  return arr;
}

inline ordered_json denjoy_to_json(const DenjoyMap& dj) {
  ordered_json j;
  j["family"] = "denjoy";
  j["angle"] = dj.rho().name();
  j["M"] = dj.truncation();
  j["precision_bits"] = dj.rho().precision_bits();
  j["depth"] = dj.rho().depth();
  j["gaps"] = gap_table_json(dj);
  return j;
}

inline DenjoyPtr denjoy_from_json(const ordered_json& j) {
  reject_unknown_keys(j, {"family", "angle", "M", "precision_bits", "depth", "gaps"},
                      "denjoy map");
  if (j.at("family").get<std::string>() != "denjoy")
    throw ConfigInvalid("denjoy map: family mismatch");
  long long M = j.at("M").get<long long>();
  int depth = j.value("depth", IrrationalAngle::kDefaultDepth);
  unsigned bits = j.value("precision_bits", IrrationalAngle::kDefaultPrecisionBits);
  AnglePtr rho = angle_from_spec(j.at("angle").get<std::string>(), depth, bits);
  std::vector<Gap> gaps;
  for (const auto& rec : j.at("gaps")) {
    reject_unknown_keys(rec, {"n", "a", "len"}, "gap record");
    gaps.push_back({rec.at("n").get<long long>(), rec.at("a").get<double>(),
                    rec.at("len").get<double>()});
  }
  return std::make_shared<const DenjoyMap>(
      DenjoyMap::from_table(std::move(rho), M, std::move(gaps)));
}

inline std::vector<FourierMode> modes_from_json(const ordered_json& arr) {
  std::vector<FourierMode> modes;
  for (const auto& rec : arr) {
    reject_unknown_keys(rec, {"m", "sin", "cos"}, "fourier mode");
    FourierMode md;
    md.m = rec.at("m").get<int>();
    md.sin_amp = rec.value("sin", 0.0);
    md.cos_amp = rec.value("cos", 0.0);
    modes.push_back(md);
  }
  return modes;
}

inline ordered_json modes_to_json(const std::vector<FourierMode>& modes) {
  ordered_json arr = ordered_json::array();
  for (const FourierMode& md : modes) {
    ordered_json rec;
    rec["m"] = md.m;
    rec["sin"] = md.sin_amp;
    rec["cos"] = md.cos_amp;
    arr.push_back(rec);
  }
  return arr;
}

/// Map spec: JSON object with a "family" discriminator. Unknown fields are
/// rejected; certificate fields emitted by `tune` are accepted back.
inline CircleMap map_from_json(const ordered_json& j, unsigned precision_bits = 256) {
  if (!j.is_object() || !j.contains("family"))
    throw ConfigInvalid("map spec must be a JSON object with a 'family' field");
  std::string family = j.at("family").get<std::string>();
  int depth = j.value("depth", IrrationalAngle::kDefaultDepth);
  unsigned bits = j.value("precision_bits", precision_bits);
  if (family == "rotation") {
    reject_unknown_keys(j, {"family", "rho", "depth", "precision_bits"}, "rotation map");
    return CircleMap::rotation(angle_from_spec(j.at("rho").get<std::string>(), depth, bits));
  }
  if (family == "arnold") {
    reject_unknown_keys(j,
                        {"family", "a", "eps", "rho", "depth", "precision_bits",
                         "certified_k", "rho_interval"},
                        "arnold map");
    AnglePtr target;
    if (j.contains("rho"))
      target = angle_from_spec(j.at("rho").get<std::string>(), depth, bits);
    return CircleMap::arnold(j.at("a").get<double>(), j.at("eps").get<double>(), target);
  }
  if (family == "conjugated_rotation") {
    reject_unknown_keys(j, {"family", "rho", "h_modes", "depth", "precision_bits"},
                        "conjugated_rotation map");
    return CircleMap::conjugated_rotation(
        modes_from_json(j.at("h_modes")),
        angle_from_spec(j.at("rho").get<std::string>(), depth, bits));
  }
  if (family == "denjoy") return make_circle_map(denjoy_from_json(j));
  throw ConfigInvalid("unknown map family '" + family + "'");
}

inline ordered_json map_to_json(const CircleMap& m) {
  ordered_json j;
  switch (m.family().kind) {
    case FamilyInfo::Kind::Rotation:
      j["family"] = "rotation";
      j["rho"] = m.angle().name();
      break;
    case FamilyInfo::Kind::Arnold:
      j["family"] = "arnold";
      j["a"] = m.family().a;
      j["eps"] = m.family().eps;
      if (m.has_angle()) j["rho"] = m.angle().name();
      break;
    case FamilyInfo::Kind::ConjugatedRotation:
      j["family"] = "conjugated_rotation";
      j["rho"] = m.angle().name();
      j["h_modes"] = modes_to_json(m.family().h_modes);
      break;
    case FamilyInfo::Kind::Denjoy:
      j = denjoy_to_json(*m.family().denjoy);
      break;
  }
  return j;
}

/// Parse --map arguments: inline JSON (starts with '{') or a file path.
inline ordered_json load_json_argument(const std::string& arg) {
  std::string text;
  if (!arg.empty() && arg.front() == '{') {
    text = arg;
  } else {
    std::ifstream in(arg);
    if (!in) throw Error("io: cannot open '" + arg + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigInvalid(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace rotlab
