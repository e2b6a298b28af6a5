#pragma once

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlayers {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitInvariant = 2, kExitSolver = 3 };

struct RunConfig {
  std::string command;
  int N = 3;
  std::vector<double> p;  // empty: command default
  int k = 1;
  double a = 0.0, b = 1.0;
  double rel_tol = 1e-11, abs_tol = 1e-13;
  std::string out = ".";
  std::string format = "csv";
  std::string check;

  // Where each field was set: "file:line" for config files, "--flag" for the command line.
  std::map<std::string, std::string> origin;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Apply a JSON config (same keys as the flags) on top of `cfg`. Errors name the line.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source);
void validate_config(const RunConfig& cfg);
// Canonical JSON of the fields that affect results (the output directory is excluded).
std::string canonical_config(const RunConfig& cfg);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlayers
