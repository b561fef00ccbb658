#include "mechd/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mechd/errors.hpp"

namespace mechd {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::InvalidParameter, "config key '" + key + "': " + why);
}

double number(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) bad(path, "missing");
  const auto& v = j.at(key);
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

FamilySpec family(const json& root, const std::string& key) {
  if (!root.contains(key)) bad(key, "missing");
  const auto& j = root.at(key);
  if (!j.is_object()) bad(key, "expected an object");
  FamilySpec s;
  if (!j.contains("type") || !j.at("type").is_string()) bad(key + ".type", "expected a string");
  s.type = j.at("type").get<std::string>();
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (!p.is_object()) bad(key + ".params", "expected an object");
    for (const auto& [name, val] : p.items()) {
      const std::string path = key + ".params." + name;
      if (val.is_number()) {
        s.params[name] = val.get<double>();
      } else if (val.is_array() && (name == "theta" || name == "value")) {
        auto& dst = name == "theta" ? s.knot_theta : s.knot_value;
        for (const auto& x : val) {
          if (!x.is_number()) bad(path, "expected an array of numbers");
          dst.push_back(x.get<double>());
        }
      } else {
        bad(path, "expected a number");
      }
    }
  }
  return s;
}

}  // namespace

EnvConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidParameter, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::InvalidParameter, "config must be a JSON object");

  EnvConfig c;
  c.theta_min = number(root, "theta_min", "theta_min");
  c.theta_max = number(root, "theta_max", "theta_max");
  c.distribution = family(root, "distribution");
  c.utility = family(root, "utility");
  if (root.at("utility").contains("A")) c.cap = number(root.at("utility"), "A", "utility.A");
  c.cost = number(root, "cost", "cost");
  c.alpha = number(root, "alpha", "alpha");
  c.weight = family(root, "welfare_weight");
  if (!root.contains("correlation") || !root.at("correlation").is_string()) {
    bad("correlation", "expected \"negative\" or \"positive\"");
  }
  const auto corr = root.at("correlation").get<std::string>();
  if (corr == "negative") {
    c.correlation = Correlation::Negative;
  } else if (corr == "positive") {
    c.correlation = Correlation::Positive;
  } else {
    bad("correlation", "expected \"negative\" or \"positive\", got \"" + corr + "\"");
  }
  if (root.contains("grid_n")) {
    const auto& g = root.at("grid_n");
    if (!g.is_number_integer() || g.get<long long>() < 2) bad("grid_n", "expected an integer >= 2");
    c.grid_n = static_cast<std::size_t>(g.get<long long>());
  }
  for (const auto& [key, _] : root.items()) {
    static const char* known[] = {"theta_min", "theta_max", "distribution", "utility", "cost",
                                  "alpha",     "welfare_weight", "correlation", "grid_n"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) bad(key, "unknown key");
  }
  return c;
}

EnvConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidParameter, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mechd
