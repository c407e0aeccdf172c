#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cccpde::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, config keys or argument values; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Flat `key = value` file, one entry per line; `#` starts a comment.
/// Surrounding quotes on values are stripped. Malformed lines throw UsageError.
std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path);

/// Runs `cccpde <subcommand> ...`. args[0] is the program name.
/// Returns 0 on success, 1 on runtime errors and 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace cccpde::cli
