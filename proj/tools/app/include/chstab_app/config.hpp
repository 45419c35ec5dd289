#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <chstab/basis.hpp>
#include <chstab/feedback.hpp>
#include <chstab/io.hpp>

namespace chstab::app {

enum class RunMode { spectrum, synth, simulate_linear, simulate_nonlinear, verify };

std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view text);

enum class InitialKind { random_mass_matched, eigvec, file };

struct InitialSpec {
  InitialKind kind = InitialKind::random_mass_matched;
  int eigvec_index = 1;  // 1-based entry of the unstable basis
  std::filesystem::path file;
  // Unset: 1 for linear runs, 1e-2 for nonlinear runs.
  std::optional<double> amplitude;
};

struct ScenarioConfig {
  // [domain]
  DomainKind domain_kind = DomainKind::interval;
  double length = 0.0;  // interval
  double lx = 0.0;      // rectangle
  double ly = 0.0;
  std::vector<Side> gamma1;

  // [physics]
  double nu = 1.0;
  double l0 = 1.0;
  double gamma0 = 1.0;
  double phi_inf = 0.0;
  std::optional<std::filesystem::path> phi_inf_table;
  double theta_inf = 0.0;

  // [discretization]
  int k = 0;  // 0: 32 on an interval, 64 on a rectangle
  double dt = 0.01;
  double t_final = 80.0;
  double dt_nonlinear = 1e-3;
  double t_final_nonlinear = 0.0;  // 0: 2 ln(100) / c

  // [synthesis]
  std::optional<double> eta1;
  std::optional<double> delta;
  Convention convention;
  bool override_assumptions = false;
  bool zero_gain = false;

  // [run]
  RunMode mode = RunMode::verify;
  std::uint64_t seed = 0;
  InitialSpec initial;
  bool controlled = true;

  int modes() const;
  Domain domain() const;
  // Canonical form of every effective setting; hashed for the output directory.
  Json canonical() const;
  // First 16 hex digits of SHA-256 over canonical().dump().
  std::string hash() const;
};

// Parses an INI file. Unknown sections or keys, malformed numbers and out of
// range values raise ConfigError. Relative paths resolve against the file.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

}  // namespace chstab::app
