/// @file cli.hpp
/// Command implementations behind the command-line front end, kept separate
/// from argument parsing so tests can drive them directly.
///
/// Exit codes: 0 success, 1 user/config error, 2 safety violation,
/// 3 integration blowup.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace bastion {

struct RunOptions {
  std::string config;   ///< path to a JSON config, or a bundled preset name
  std::string out_dir;  ///< empty: runs/<scenario-name>
  std::optional<double> dt;
  std::optional<double> duration;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const std::string& dir_a, const std::string& dir_b, std::ostream& out,
                std::ostream& err);
int cmd_check(const std::string& csv_path, std::ostream& out, std::ostream& err);
int cmd_oracle(const std::string& config, std::ostream& out, std::ostream& err);

}  // namespace bastion
