#pragma once

// Name -> factory registries for everything a scenario file can select:
// map families, nominal controllers, disturbance families and input gains.
// Embedding programs may register their own entries before running scenarios.

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "ptctk/controller.hpp"
#include "ptctk/time_maps.hpp"

namespace ptctk {

/// Scenario parameters: every value is a list of numbers (scalars have one).
using Params = std::map<std::string, std::vector<double>>;

double param_scalar(const Params& params, const std::string& key);
double param_scalar(const Params& params, const std::string& key,
                    double fallback);

struct ParamSchema {
  std::string name;
  std::string description;
};

/// What a factory may depend on besides its own parameters.
struct BuildContext {
  int n = 1;
  double t0 = 0.0;
  double tau = 1.0;
  Vector xi0;  // associated-system initial state
};

struct MapEntry {
  std::string description;
  std::vector<ParamSchema> schema;
  std::function<TimeMapPair(const MapFamilyParams&, int max_order)> build;
};

struct ControllerEntry {
  std::string description;
  std::vector<ParamSchema> schema;
  std::function<InfiniteTimeController(const Params&, const BuildContext&)> build;
};

struct DisturbanceEntry {
  std::string description;
  std::vector<ParamSchema> schema;
  std::function<Disturbance(const Params&, const BuildContext&)> build;
  /// Draw another member of the family around the nominal parameters.
  std::function<Params(const Params&, std::mt19937_64&)> sample;
};

struct GainEntry {
  std::string description;
  std::vector<ParamSchema> schema;
  std::function<InputGain(const Params&, const BuildContext&)> build;
};

class Registry {
 public:
  /// Process-wide registry pre-populated with the built-ins.
  static Registry& instance();

  void register_map(const std::string& name, MapEntry entry);
  void register_controller(const std::string& name, ControllerEntry entry);
  void register_disturbance(const std::string& name, DisturbanceEntry entry);
  void register_gain(const std::string& name, GainEntry entry);

  MapEntry map(const std::string& name) const;
  ControllerEntry controller(const std::string& name) const;
  DisturbanceEntry disturbance(const std::string& name) const;
  GainEntry gain(const std::string& name) const;

  std::vector<std::string> map_names() const;
  std::vector<std::string> controller_names() const;
  std::vector<std::string> disturbance_names() const;
  std::vector<std::string> gain_names() const;

  /// Human-readable listing with parameter schemas.
  std::string list_text() const;
  /// Same content as a JSON document.
  std::string list_json() const;

 private:
  Registry();

  mutable std::mutex mutex_;
  std::map<std::string, MapEntry> maps_;
  std::map<std::string, ControllerEntry> controllers_;
  std::map<std::string, DisturbanceEntry> disturbances_;
  std::map<std::string, GainEntry> gains_;
};

}  // namespace ptctk
