#pragma once

#include <stdexcept>
#include <string>

namespace whymine {

// Process exit codes shared by every subcommand.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, numeric = 3 };

// Base error for the toolkit. `code` is a stable machine-readable tag
// (e.g. "too_small", "digest_mismatch") and `exit` the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what, ExitCode exit = ExitCode::data)
      : std::runtime_error(what), code_(std::move(code)), exit_(exit) {}

  const std::string& code() const noexcept { return code_; }
  ExitCode exit_code() const noexcept { return exit_; }

 private:
  std::string code_;
  ExitCode exit_;
};

}  // namespace whymine
