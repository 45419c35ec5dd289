#pragma once

#include <functional>
#include <string>

#include <chstab/io.hpp>

#include "chstab_app/config.hpp"

namespace chstab::app {

struct VerifyResult {
  bool passed = false;
  Json report;  // {"status", "config_hash", "checks": [...]}
};

// Runs the invariant battery on the scenario. Failing checks are report
// entries, not exceptions; `progress` receives one line per check.
VerifyResult verify(const ScenarioConfig& config,
                    const std::function<void(const std::string&)>& progress = {});

}  // namespace chstab::app
