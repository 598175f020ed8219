#include <cstdint>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dforge/errors.hpp"
#include "dforge/solver.hpp"

namespace dforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_or_nan(const json& j) { return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN(); }

Termination termination_from(const std::string& s) {
  for (auto t : {Termination::reached_t_end, Termination::blowup_detected, Termination::dispersion_degenerate,
                 Termination::step_underflow})
    if (to_string(t) == s) return t;
  throw ConfigurationError("unknown termination reason '" + s + "'");
}

}  // namespace

void write_trajectory(const Trajectory& traj, const std::string& directory) {
  if (traj.snapshots.empty()) throw ArgumentError("cannot write an empty trajectory");
  fs::create_directories(directory);
  const auto& grid = traj.grid();
  {
    std::ofstream bin(fs::path(directory) / "snapshots.bin", std::ios::binary);
    if (!bin) throw ConfigurationError("cannot write to " + directory);
    for (const auto& u : traj.snapshots)
      bin.write(reinterpret_cast<const char*>(u.values().data()),
                static_cast<std::streamsize>(u.values().size() * sizeof(double)));
  }
  {
    std::ofstream csv(fs::path(directory) / "diagnostics.csv");
    traj.diagnostics.write_csv(csv);
  }
  json m;
  m["preset"] = traj.preset;
  m["epsilon"] = traj.epsilon;
  m["delta"] = finite_or_null(traj.delta);
  m["L"] = grid.length();
  m["N"] = grid.size();
  m["termination"] = to_string(traj.termination);
  m["degenerate_start"] = traj.degenerate_start;
  m["accepted_steps"] = traj.accepted_steps;
  m["rejected_steps"] = traj.rejected_steps;
  m["snapshot_file"] = "snapshots.bin";
  json times = json::array();
  for (const auto& u : traj.snapshots) times.push_back(u.time());
  m["times"] = times;
  std::ofstream(fs::path(directory) / "trajectory.json") << m.dump(2) << '\n';
}

Trajectory read_trajectory(const std::string& directory) {
  std::ifstream in(fs::path(directory) / "trajectory.json");
  if (!in) throw ConfigurationError("no trajectory manifest in " + directory);
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("malformed trajectory manifest: ") + e.what());
  }
  Trajectory traj;
  traj.preset = m.value("preset", "");
  traj.epsilon = m.at("epsilon").get<double>();
  traj.delta = number_or_nan(m.at("delta"));
  traj.termination = termination_from(m.at("termination").get<std::string>());
  traj.degenerate_start = m.value("degenerate_start", false);
  traj.accepted_steps = m.value("accepted_steps", std::size_t{0});
  traj.rejected_steps = m.value("rejected_steps", std::size_t{0});
  const SpectralGrid grid(m.at("L").get<double>(), m.at("N").get<int>());
  std::ifstream bin(fs::path(directory) / m.value("snapshot_file", "snapshots.bin"), std::ios::binary);
  if (!bin) throw ConfigurationError("missing snapshot file in " + directory);
  for (const auto& t : m.at("times")) {
    std::vector<double> v(static_cast<std::size_t>(grid.size()));
    bin.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!bin) throw ConfigurationError("snapshot file is truncated");
    traj.snapshots.emplace_back(grid, std::move(v), t.get<double>());
  }
  std::ifstream csv(fs::path(directory) / "diagnostics.csv");
  std::string line;
  if (csv && std::getline(csv, line)) {
    while (std::getline(csv, line)) {
      std::vector<double> f;
      std::size_t pos = 0;
      while (pos <= line.size()) {
        const auto next = line.find(',', pos);
        const auto cell = line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        f.push_back(std::strtod(cell.c_str(), nullptr));
        if (next == std::string::npos) break;
        pos = next + 1;
      }
      if (f.size() != 11) throw ConfigurationError("malformed diagnostics row");
      traj.diagnostics.rows.push_back({f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9], f[10]});
    }
  }
  return traj;
}

}  // namespace dforge
