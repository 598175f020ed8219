#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "dforge/errors.hpp"
#include "dforge/nonlinearity.hpp"

namespace dforge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigurationError("key '" + key + "' expects true or false, got '" + v + "'");
}

double parse_number(const std::string& v, const std::string& key) {
  // Numeric fields accept constant expressions such as 16*pi.
  try {
    const auto e = Expression::parse(v, {});
    return e(std::span<const double>{});
  } catch (const ParseError& err) {
    throw ConfigurationError("key '" + key + "': " + err.what());
  }
}

}  // namespace

Preset parse_preset_config(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::vector<std::pair<std::string, std::string>> partials;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigurationError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("f_", 0) == 0) partials.emplace_back(key, value);
    else kv[key] = value;
  }

  auto take = [&](const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  const std::string f = take("f", "");
  if (f.empty()) throw ConfigurationError(origin + ": missing required key 'f'");
  NonlinearitySpec spec(take("name", "custom"), f);
  for (const auto& [key, expr] : partials) spec.supply_partial(key, expr);

  const std::string mode = take("partials", "auto");
  if (mode != "auto" && mode != "supplied")
    throw ConfigurationError(origin + ": 'partials' must be auto or supplied");
  spec.set_auto_partials(mode == "auto");

  const std::string gd = take("g_D", ""), gh = take("g_H", "");
  if (!gd.empty() || !gh.empty()) spec.set_decomposition(gd.empty() ? "0" : gd, gh.empty() ? "0" : gh);
  spec.set_claims(parse_bool(take("claims_A2", "false"), "claims_A2"),
                  parse_bool(take("claims_A3", "false"), "claims_A3"));

  if (const std::string lin = take("linear", ""); !lin.empty()) {
    std::istringstream ls(lin);
    std::array<double, 4> c{};
    // Listed as c3 c2 c1 c0.
    for (int j = 3; j >= 0; --j) {
      std::string tok;
      if (!(ls >> tok)) throw ConfigurationError(origin + ": 'linear' expects four coefficients c3 c2 c1 c0");
      c[static_cast<std::size_t>(j)] = parse_number(tok, "linear");
    }
    spec.set_linear_part(c);
  }

  Preset p{spec, take("data", "exp(-(x - L/2)^2)"), parse_number(take("L", "64*pi"), "L"),
           static_cast<int>(parse_number(take("N", "512"), "N")), take("description", "")};
  // Validate the data expression and the grid eagerly.
  (void)Expression::parse(p.data, {"x", "L"});
  (void)p.default_grid();
  if (!kv.empty()) throw ConfigurationError(origin + ": unknown key '" + kv.begin()->first + "'");
  return p;
}

Preset load_preset_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_preset_config(ss.str(), path);
}

}  // namespace dforge
