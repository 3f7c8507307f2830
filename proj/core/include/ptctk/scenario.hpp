#pragma once

// Batch scenarios: a JSON document selects a map family, a nominal controller,
// a disturbance family with optional randomized sweeps, an input gain and a
// list of horizons. Every (tau, sweep) item runs independently; results land
// in per-item CSV files and one summary JSON document.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ptctk/registry.hpp"
#include "ptctk/sim.hpp"

namespace ptctk {

enum class Mode { prescribed, associated, equivalence, validate_maps };

std::string to_string(Mode mode);
/// Throws ConfigError on an unknown name.
Mode parse_mode(const std::string& name);

/// Invalid or inconsistent scenario description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time-varying bound e(dt) on [0, tau):
///   constant      e = value
///   linear_decay  e = value (1 - dt / tau)
///   exponential   e = value exp(-rate dt)
///   unbounded     e = inf
struct EnvelopeSpec {
  std::string kind = "constant";
  double value = 1.0;
  double rate = 1.0;

  Envelope build(double tau) const;
};

struct StateConstraintConfig {
  EnvelopeSpec zeta;
  double sigma = 1.0;
  double tol = 1e-9;
};

struct InputConstraintConfig {
  EnvelopeSpec upsilon;
  double tol = 1e-9;
};

struct ScenarioConfig {
  std::string name;
  int order = 1;
  Mode mode = Mode::prescribed;

  std::string map_family;
  std::vector<std::pair<double, double>> map_terms;

  std::string controller;
  Params controller_params;

  std::string disturbance = "zero";
  Params disturbance_params;
  int sweeps = 1;
  std::uint64_t seed = 0;

  std::string gain = "constant";
  Params gain_params;

  std::vector<double> x0;
  double t0 = 0.0;
  std::vector<double> tau_list;

  std::optional<StateConstraintConfig> state_constraint;
  std::optional<InputConstraintConfig> input_constraint;
  /// max ||x|| <= overshoot ||x(t0)|| + overshoot_tol on the prescribed run.
  std::optional<double> overshoot;
  double overshoot_tol = 1e-6;
  /// ||x|| at the clamped horizon must not exceed this.
  std::optional<double> terminal_error;
  /// Final mapped-state bound on associated runs.
  std::optional<double> attractivity_varsigma;

  SimOptions sim;
};

/// Parse and validate. Registry names are resolved and every factory is
/// exercised once per horizon, so a config that loads also builds.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
void validate_config(const ScenarioConfig& config);

struct RunOptions {
  std::string output_dir = ".";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<Mode> mode;
};

/// Exit statuses of run_scenario.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

struct ScenarioOutcome {
  int exit_code = kExitPass;
  std::string summary_path;
  std::vector<std::string> csv_paths;
  /// Summary document as written to summary_path.
  std::string summary_json;
};

/// Disturbance parameters of a sweep item: sweep 0 is the nominal set, later
/// sweeps are drawn from a generator seeded by (seed, sweep).
Params sweep_parameters(const ScenarioConfig& config, int sweep);

/// Run every (tau, sweep) item on a pool of `jobs` threads and write outputs.
/// Integration failures mark their item and yield kExitRuntimeError; outputs
/// of the other items are kept. Progress lines go to `log`.
ScenarioOutcome run_scenario(ScenarioConfig config, const RunOptions& options,
                             std::ostream& log);

/// `%g` rendering used in output file names.
std::string tau_label(double tau);

}  // namespace ptctk
