#pragma once

#include <optional>
#include <random>

#include <chstab/basis.hpp>
#include <chstab/feedback.hpp>
#include <chstab/loop.hpp>
#include <chstab/spectrum.hpp>

#include "chstab_app/config.hpp"

namespace chstab::app {

struct Scenario {
  ScenarioConfig config;
  ModeSet modes;
  Equilibrium equilibrium;
  PhysParams params;
  UnstableBasis basis;
  AssumptionReport assumptions;
};

// Reads the phi_inf table (whitespace or comma separated, '#' comments) when
// one is configured; its length must match the collocation grid for K modes.
Scenario build_scenario(const ScenarioConfig& config, std::optional<int> k_override = {});

SynthesisOptions synthesis_options(const ScenarioConfig& config);

// Synthesizes the law; with zero_gain set the coupler is zeroed afterwards.
FeedbackLaw synthesize_law(const Scenario& s);

ClosedLoopSystem assemble_system(const Scenario& s, const FeedbackLaw& law, bool controlled);

// Nonlinear horizon: configured value, or the time after which the linear
// loop keeps every mass-matched state below 1% of its initial norm.
double nonlinear_horizon(const ScenarioConfig& config, const ClosedLoopSystem& system);

Vector initial_state(const Scenario& s, bool nonlinear, std::mt19937_64& rng);

std::vector<double> read_numbers(const std::filesystem::path& path);

}  // namespace chstab::app
