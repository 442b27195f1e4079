#pragma once

#include <filesystem>
#include <iosfwd>

namespace aireml::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitInputError = 2,
  kExitNoConvergence = 3,
};

int cmd_fit(const std::filesystem::path& data_path, const std::filesystem::path& config_path, std::ostream& out,
            std::ostream& err);
int cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_path,
                 std::ostream& out, std::ostream& err);
int cmd_check(const std::filesystem::path& data_path, const std::filesystem::path& config_path, std::ostream& out,
              std::ostream& err);

}  // namespace aireml::cli
