#include "chstab_app/run.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <chstab/errors.hpp>
#include <chstab/io.hpp>
#include <chstab/loop.hpp>

#include "chstab_app/scenario.hpp"
#include "chstab_app/verify.hpp"

namespace chstab::app {

namespace {

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

Json spectrum_document(const Scenario& s) {
  const SpectralReport open = spectral_report(assemble_open_loop(s.modes, s.params));
  return Json{{"config_hash", s.config.hash()},
              {"config", s.config.canonical()},
              {"k", s.modes.size()},
              {"params", to_json(s.params)},
              {"modes", to_json(s.modes)},
              {"unstable_basis", to_json(s.basis)},
              {"assumptions", to_json(s.assumptions)},
              {"open_loop", to_json(open)}};
}

struct Synthesized {
  FeedbackLaw law;
  SpectralReport closed;
  bool certified = false;
};

Synthesized synthesize_and_certify(const Scenario& s, const std::filesystem::path& dir) {
  Synthesized out;
  out.law = synthesize_law(s);
  const ClosedLoopSystem sys = assemble_closed_loop(s.modes, s.params, out.law, s.basis);
  out.closed = spectral_report(sys.closed);
  out.certified = out.closed.n_unstable == 0 && out.closed.n_neutral == 1 &&
                  out.closed.decay_margin() >= 1e-3;
  write_json(dir / "law.json", Json{{"config_hash", s.config.hash()},
                                    {"law", to_json(out.law)},
                                    {"certified", out.certified},
                                    {"decay_margin", out.closed.decay_margin()},
                                    {"closed_loop", to_json(out.closed)}});
  return out;
}

Json simulate(const Scenario& s, bool nonlinear, const std::filesystem::path& dir, std::ostream& out) {
  const ScenarioConfig& c = s.config;
  FeedbackLaw law;
  double margin = 0.0;
  if (c.controlled) {
    const Synthesized syn = synthesize_and_certify(s, dir);
    law = syn.law;
    margin = syn.closed.decay_margin();
  }
  std::mt19937_64 rng(c.seed);
  const Vector x0 = initial_state(s, nonlinear, rng);

  Trajectory tr;
  double horizon = c.t_final;
  double dt = c.dt;
  if (nonlinear) {
    horizon = nonlinear_horizon(c, assemble_system(s, law, c.controlled));
    dt = c.dt_nonlinear;
    const NonlinearModel model(s.modes, s.params, law, s.basis, s.equilibrium, c.controlled);
    NonlinearOptions options;
    options.dt = dt;
    tr = integrate_nonlinear(model, x0, horizon, options);
  } else {
    tr = integrate_linear(assemble_system(s, law, c.controlled), x0, horizon, dt);
  }

  std::ofstream csv(dir / "trajectory.csv");
  if (!csv) throw ConfigError("cannot write " + (dir / "trajectory.csv").string());
  write_trajectory_csv(csv, tr);

  double drift = 0.0;
  for (const Vector& x : tr.states) drift = std::max(drift, std::abs(x(0) - x0(0)));
  Json report{{"mode", nonlinear ? "simulate-nonlinear" : "simulate-linear"},
              {"config_hash", c.hash()},
              {"controlled", c.controlled},
              {"horizon", horizon},
              {"dt", dt},
              {"samples", tr.size()},
              {"initial_norm", tr.norm.front()},
              {"final_norm", tr.norm.back()},
              {"final_ratio", tr.norm.front() > 0.0 ? Json(tr.norm.back() / tr.norm.front()) : Json(nullptr)},
              {"mass_drift", drift}};
  if (c.controlled) report["decay_margin"] = margin;
  try {
    report["fit"] = to_json(fit_decay(tr, {0.25 * horizon, horizon}));
  } catch (const ConfigError& e) {
    report["fit"] = nullptr;
    report["fit_error"] = e.what();
  }
  out << "final/initial norm " << format_number(tr.norm.back()) << " / "
      << format_number(tr.norm.front()) << '\n';
  return report;
}

int execute(const ScenarioConfig& config, const std::filesystem::path& dir, std::ostream& out) {
  if (config.mode == RunMode::verify) {
    const VerifyResult r = verify(config, [&](const std::string& line) { out << line << '\n'; });
    write_json(dir / "report.json", r.report);
    out << "verify: " << (r.passed ? "pass" : "fail") << '\n';
    return r.passed ? kOk : kVerifyFailed;
  }

  const Scenario s = build_scenario(config);
  write_json(dir / "spectrum.json", spectrum_document(s));
  out << "N = " << s.basis.size() << ", lambdas:";
  for (const UnstableEntry& e : s.basis.entries) out << ' ' << format_number(e.lambda);
  out << '\n';
  for (const std::string& w : s.basis.warnings) out << "warning: " << w << '\n';

  Json report{{"mode", std::string(to_string(config.mode))},
              {"config_hash", config.hash()},
              {"n", s.basis.size()},
              {"assumptions", to_json(s.assumptions)}};
  int code = kOk;
  switch (config.mode) {
    case RunMode::spectrum:
      break;
    case RunMode::synth: {
      const Synthesized syn = synthesize_and_certify(s, dir);
      report["certified"] = syn.certified;
      report["decay_margin"] = syn.closed.decay_margin();
      out << "closed loop " << (syn.certified ? "certified" : "NOT certified") << ", decay margin "
          << format_number(syn.closed.decay_margin()) << '\n';
      if (!syn.certified) code = kSynthesisFailure;
      break;
    }
    case RunMode::simulate_linear:
      report = simulate(s, false, dir, out);
      break;
    case RunMode::simulate_nonlinear:
      report = simulate(s, true, dir, out);
      break;
    case RunMode::verify:
      break;
  }
  write_json(dir / "report.json", report);
  return code;
}

}  // namespace

int report_error(int code, const std::string& category, const std::string& message,
                 const std::filesystem::path& dir, std::ostream& err) {
  const Json j{{"error", category}, {"exit_code", code}, {"message", message}};
  err << j.dump() << '\n';
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream os(dir / "error.json");
    if (os) os << j.dump(2) << '\n';
  }
  return code;
}

int run(const ScenarioConfig& config, const std::filesystem::path& out_root, std::ostream& out,
        std::ostream& err) {
  const std::filesystem::path dir = out_root / config.hash();
  try {
    std::filesystem::create_directories(dir);
    std::filesystem::remove(dir / "error.json");
    out << "output: " << dir.string() << '\n';
    return execute(config, dir, out);
  } catch (const ConfigError& e) {
    return report_error(kConfigError, e.category(), e.what(), dir, err);
  } catch (const AssumptionError& e) {
    return report_error(kAssumptionFailure, e.category(), e.what(), dir, err);
  } catch (const SynthesisError& e) {
    return report_error(kSynthesisFailure, e.category(), e.what(), dir, err);
  } catch (const DivergenceError& e) {
    return report_error(kDivergence, e.category(), e.what(), dir, err);
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(kConfigError, "config", e.what(), {}, err);
  } catch (const std::exception& e) {
    return report_error(kInternalError, "internal", e.what(), dir, err);
  }
}

}  // namespace chstab::app
