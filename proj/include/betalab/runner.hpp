#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "betalab/error.hpp"
#include "betalab/io.hpp"

namespace betalab {

/// A config value failed validation; field() names the offending key.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::string command;     // equilibrium | sample | rate | dos-converge | fluctuate | tail-scan
  std::string functional;  // rate only: iv | cali | idos | calj | projection
  std::string potential = "0,0,0.5";
  double beta = 2.0;
  std::vector<int> sizes{100};
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  std::size_t grid = 4096;
  std::filesystem::path out = "out";
  std::optional<double> reg_m;
  unsigned threads = 0;
  std::string measure;  // nu_V | mu_V | path to a CSV or JSON measure
  std::optional<double> c;
  std::string f = "4,-4,1";  // test function coefficients, ascending powers
  double window = 1.0;
  std::vector<double> cutoffs;
  std::size_t cells = 1200;
  double gap_tol = 1e-8;
  std::optional<std::size_t> sweeps;
  std::optional<std::size_t> burn_in;
  std::optional<double> step;
  std::optional<std::filesystem::path> cache;
};

/// Flat "key = value" lines; '#' starts a comment. Keys match the long flag names.
std::map<std::string, std::string> parse_config_text(std::string_view text);

/// Builds and validates a config; unknown keys and bad values throw ConfigError.
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv);

/// The resolved config as flat strings; feeding it back to config_from_map
/// reproduces the same config.
std::map<std::string, std::string> config_to_map(const ExperimentConfig& c);
Json config_to_json(const ExperimentConfig& c);

/// Runs one experiment, writing artifacts under c.out. Returns the exit status:
/// 0 success, 2 invalid input, 3 solver non-convergence, 1 anything else.
int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err);

/// Full command-line entry point (flags, optional --config file; flags win).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace betalab
