#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bosonlc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitProperty = 4;

struct RunOptions {
  std::string subcommand;  // bounds | scan | certify | cluster | selftest
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;  // key.path=value
  std::optional<std::string> out_dir;  // replaces output.dir
  int threads = 1;
  int verbosity = 0;
};

// Runs one experiment and writes its artifacts. Returns the process exit code;
// errors are reported on `err`.
int run_app(const RunOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace bosonlc
