#pragma once

#include <filesystem>
#include <ostream>

#include "chstab_app/config.hpp"

namespace chstab::app {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kAssumptionFailure = 2,
  kSynthesisFailure = 3,
  kDivergence = 4,
  kVerifyFailed = 5,
  kInternalError = 6,
};

// Executes config.mode and writes its artifacts under out_root/<config hash>/.
// Errors are mapped to exit codes and written as JSON to `err` and to
// error.json in the run directory.
int run(const ScenarioConfig& config, const std::filesystem::path& out_root, std::ostream& out,
        std::ostream& err);

// Reports an error that happened before a config was available.
int report_error(int code, const std::string& category, const std::string& message,
                 const std::filesystem::path& dir, std::ostream& err);

}  // namespace chstab::app
