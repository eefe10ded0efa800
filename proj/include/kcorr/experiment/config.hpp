#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kcorr/errors.hpp"
#include "kcorr/quantum/space.hpp"

namespace kcorr::experiment {

enum class SystemType { oscillator, harper };
enum class RunMode { classical, quantum_liouville, quantum_pure, quantum_ket };
enum class StorageMode { memory, disk };

inline const char* to_string(SystemType s) { return s == SystemType::oscillator ? "oscillator" : "harper"; }

inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::classical: return "classical";
    case RunMode::quantum_liouville: return "quantum-liouville";
    case RunMode::quantum_pure: return "quantum-pure";
    case RunMode::quantum_ket: return "quantum-ket";
  }
  return "?";
}

inline quantum::QuantumMode quantum_mode(RunMode m) {
  switch (m) {
    case RunMode::quantum_liouville: return quantum::QuantumMode::liouville_density;
    case RunMode::quantum_pure: return quantum::QuantumMode::pure_density;
    case RunMode::quantum_ket: return quantum::QuantumMode::ket;
    case RunMode::classical: break;
  }
  throw ConfigError("classical mode has no quantum space");
}

/// Fully resolved experiment description. Unset optionals take
/// system-specific defaults in `resolve`.
struct ExperimentConfig {
  SystemType system = SystemType::oscillator;
  RunMode mode = RunMode::classical;
  std::optional<double> tau, k, q0, p0, sigma, hbar;
  bool sigma_sqrt_hbar = false; // σ = √ħ, the coherent-state width
  std::optional<int> N;
  double qbar = 0.5;
  double pbar = 0.0;
  std::optional<int> t_max;
  int grid_M = 0;       // 0: automatic
  double window_L = 0;  // 0: automatic (plane only)
  double tol = 1e-8;
  std::filesystem::path output = "run";
  std::vector<int> portrait_times;
  bool portrait_times_set = false;
  int portrait_M = 0;   // 0: automatic
  StorageMode storage = StorageMode::memory;
  double memory_budget_mb = 0; // 0: unlimited
  bool store_basis = false;
  int hilbert_dim = 0;  // 0: automatic truncation (plane)

  bool quantum() const { return mode != RunMode::classical; }
  bool torus() const { return system == SystemType::harper; }

  double tau_v() const { return *tau; }
  double k_v() const { return *k; }
  double q0_v() const { return *q0; }
  double p0_v() const { return *p0; }
  int t_max_v() const { return *t_max; }

  /// ħ in effect: 1/(2πN) on the torus, the configured value on the plane.
  std::optional<double> effective_hbar() const {
    if (torus()) {
      if (N) return 1.0 / (2.0 * std::numbers::pi * *N);
      return std::nullopt;
    }
    return hbar;
  }

  double sigma_v() const {
    if (sigma_sqrt_hbar) {
      const auto h = effective_hbar();
      if (!h) throw ConfigError("sigma = sqrt_hbar needs hbar (plane) or N (torus)");
      return std::sqrt(*h);
    }
    return *sigma;
  }

  /// Fills defaults and checks cross-parameter consistency.
  void resolve() {
    if (system == SystemType::oscillator) {
      tau = tau.value_or(0.1);
      q0 = q0.value_or(1.0);
      p0 = p0.value_or(0.0);
      if (!sigma_sqrt_hbar) sigma = sigma.value_or(0.1);
      t_max = t_max.value_or(250);
      if (k) throw ConfigError("k is a Harper parameter");
      if (N) throw ConfigError("N applies to the torus (harper) only");
      if (quantum() && !hbar) throw ConfigError("quantum oscillator runs need hbar");
      if (!(*tau > 0.0)) throw ConfigError("tau must be positive");
    } else {
      k = k.value_or(0.05);
      q0 = q0.value_or(0.4);
      p0 = p0.value_or(0.5);
      if (!sigma_sqrt_hbar) sigma = sigma.value_or(0.025);
      t_max = t_max.value_or(150);
      if (tau) throw ConfigError("tau is an oscillator parameter");
      if (hbar) throw ConfigError("on the torus hbar is fixed by N; set N instead");
      if (quantum() && !N) throw ConfigError("quantum harper runs need N");
      if (N && *N < 2) throw ConfigError("N must be at least 2");
      if (N && *N > 512 && storage != StorageMode::disk) {
        throw ConfigError("N > 512 needs storage = disk (streamed Krylov vectors)");
      }
      if (qbar < 0 || qbar >= 1 || pbar < 0 || pbar >= 1) throw ConfigError("Floquet phases must lie in [0, 1)");
      if (window_L != 0) throw ConfigError("window_L applies to the plane only");
    }
    if (hilbert_dim != 0 && torus()) throw ConfigError("hilbert_dim applies to the plane only; use N");
    if (hbar && !(*hbar > 0)) throw ConfigError("hbar must be positive");
    if (!(sigma_v() > 0)) throw ConfigError("sigma must be positive");
    if (*t_max < 0) throw ConfigError("t_max must be nonnegative");
    if (!(tol > 0)) throw ConfigError("tol must be positive");
    if (grid_M != 0 && grid_M < 2) throw ConfigError("grid_M must be at least 2");
    if (!portrait_times_set) portrait_times = {0, 1, 5, 20};
    for (int n : portrait_times) {
      if (n < 0) throw ConfigError("portrait times must be nonnegative");
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  double x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
  return x;
}

inline int parse_int(const std::string& key, const std::string& v) {
  int x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_int(key, item));
  }
  return out;
}

} // namespace detail

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and
/// duplicates are errors.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (seen[key]++) throw ConfigError("duplicate key '" + key + "'");
    using namespace detail;
    if (key == "system") {
      if (val == "oscillator") c.system = SystemType::oscillator;
      else if (val == "harper") c.system = SystemType::harper;
      else throw ConfigError("unknown system '" + val + "'");
    } else if (key == "mode") {
      if (val == "classical") c.mode = RunMode::classical;
      else if (val == "quantum-liouville") c.mode = RunMode::quantum_liouville;
      else if (val == "quantum-pure") c.mode = RunMode::quantum_pure;
      else if (val == "quantum-ket") c.mode = RunMode::quantum_ket;
      else throw ConfigError("unknown mode '" + val + "'");
    } else if (key == "tau") c.tau = parse_double(key, val);
    else if (key == "k") c.k = parse_double(key, val);
    else if (key == "q0") c.q0 = parse_double(key, val);
    else if (key == "p0") c.p0 = parse_double(key, val);
    else if (key == "sigma") {
      if (val == "sqrt_hbar") c.sigma_sqrt_hbar = true;
      else c.sigma = parse_double(key, val);
    } else if (key == "hbar") c.hbar = parse_double(key, val);
    else if (key == "N") c.N = parse_int(key, val);
    else if (key == "qbar") c.qbar = parse_double(key, val);
    else if (key == "pbar") c.pbar = parse_double(key, val);
    else if (key == "t_max") c.t_max = parse_int(key, val);
    else if (key == "grid_M") c.grid_M = parse_int(key, val);
    else if (key == "window_L") c.window_L = parse_double(key, val);
    else if (key == "tol") c.tol = parse_double(key, val);
    else if (key == "output") c.output = val;
    else if (key == "portrait_times") {
      c.portrait_times = parse_int_list(key, val);
      c.portrait_times_set = true;
    } else if (key == "portrait_M") c.portrait_M = parse_int(key, val);
    else if (key == "storage") {
      if (val == "memory") c.storage = StorageMode::memory;
      else if (val == "disk") c.storage = StorageMode::disk;
      else throw ConfigError("storage must be memory or disk");
    } else if (key == "memory_budget_mb") c.memory_budget_mb = parse_double(key, val);
    else if (key == "store_basis") c.store_basis = parse_bool(key, val);
    else if (key == "hilbert_dim") c.hilbert_dim = parse_int(key, val);
    else throw ConfigError("unknown key '" + key + "'");
  }
  c.resolve();
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse_config(in);
}

} // namespace kcorr::experiment
