#include "chstab_app/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <chstab/errors.hpp>

namespace chstab::app {

std::vector<double> read_numbers(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& ch : line) {
      if (ch == ',' || ch == ';') ch = ' ';
    }
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v)) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
      out.push_back(v);
    }
  }
  return out;
}

namespace {

Equilibrium make_equilibrium(const ScenarioConfig& c, const ModeSet& modes) {
  if (!c.phi_inf_table) return Equilibrium::constant(c.phi_inf, c.theta_inf);
  const std::vector<double> values = read_numbers(*c.phi_inf_table);
  const Transform transform(modes);
  if (static_cast<int>(values.size()) != transform.grid_size()) {
    throw ConfigError("phi_inf_table has " + std::to_string(values.size()) +
                      " values; the collocation grid for K = " + std::to_string(modes.size()) +
                      " has " + std::to_string(transform.grid_size()));
  }
  return Equilibrium::tabulated(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())),
                                c.theta_inf);
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& config, std::optional<int> k_override) {
  ModeSet modes = neumann_modes(config.domain(), k_override.value_or(config.modes()));
  Equilibrium eq = make_equilibrium(config, modes);
  const PhysParams p =
      derive_params(config.nu, config.l0, config.gamma0, effective_slope(eq, modes));
  UnstableBasis basis = unstable_basis(modes, p);
  AssumptionReport report = check_assumptions(modes, p, basis);
  return Scenario{config, std::move(modes), std::move(eq), p, std::move(basis), std::move(report)};
}

SynthesisOptions synthesis_options(const ScenarioConfig& config) {
  SynthesisOptions o;
  o.eta1 = config.eta1;
  o.delta = config.delta;
  o.convention = config.convention;
  o.override_assumptions = config.override_assumptions;
  return o;
}

FeedbackLaw synthesize_law(const Scenario& s) {
  FeedbackLaw law = synthesize(s.modes, s.params, s.basis, s.assumptions, synthesis_options(s.config));
  return s.config.zero_gain ? zero_law(law) : law;
}

ClosedLoopSystem assemble_system(const Scenario& s, const FeedbackLaw& law, bool controlled) {
  return controlled ? assemble_closed_loop(s.modes, s.params, law, s.basis)
                    : assemble_uncontrolled(s.modes, s.params, s.basis);
}

double nonlinear_horizon(const ScenarioConfig& config, const ClosedLoopSystem& system) {
  if (config.t_final_nonlinear > 0.0) return config.t_final_nonlinear;
  const std::optional<double> t = settling_time(system.closed, 0.01);
  if (!t) throw ConfigError("closed loop does not settle; set [discretization] t_final_nonlinear");
  return *t;
}

Vector initial_state(const Scenario& s, bool nonlinear, std::mt19937_64& rng) {
  const int k = s.modes.size();
  const double amplitude = s.config.initial.amplitude.value_or(nonlinear ? 1e-2 : 1.0);
  switch (s.config.initial.kind) {
    case InitialKind::random_mass_matched:
      return random_mass_matched(k, amplitude, rng);
    case InitialKind::eigvec: {
      const int j = s.config.initial.eigvec_index;
      if (j > s.basis.size()) {
        throw ConfigError("eigvec(" + std::to_string(j) + "): the unstable basis has N = " +
                          std::to_string(s.basis.size()));
      }
      return amplitude * s.basis.state(j - 1, k);
    }
    case InitialKind::file: {
      const std::vector<double> v = read_numbers(s.config.initial.file);
      if (static_cast<int>(v.size()) != 2 * k) {
        throw ConfigError("initial_file must hold 2K = " + std::to_string(2 * k) +
                          " coefficients (y then z), found " + std::to_string(v.size()));
      }
      Vector x = Eigen::Map<const Vector>(v.data(), 2 * k);
      if (s.config.initial.amplitude) {
        if (!(x.norm() > 0.0)) throw ConfigError("initial_file is zero; cannot rescale to an amplitude");
        x *= amplitude / x.norm();
      }
      return x;
    }
  }
  return Vector::Zero(2 * k);
}

}  // namespace chstab::app
