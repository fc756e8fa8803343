#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gpata/dra.hpp"
#include "gpata/model.hpp"
#include "gpata/privacy.hpp"

namespace gpata {

// Parse or validation failure; the message starts with the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EstimationMode { kConservative, kAnchor };

// kMedium re-draws one level in 0..3 per device per cycle and applies it to
// every attribute. kHigh and kLow are expanded into the device profiles at
// load time.
enum class PrivacyPreset { kCustom, kHigh, kMedium, kLow };

enum class Scheme { kGpata, kBgta, kCog, kGmxr, kTda, kRandom };

std::string_view to_string(EstimationMode m);
std::string_view to_string(PrivacyPreset p);
std::string_view to_string(Scheme s);
std::string_view to_string(dra::LossPairing p);
EstimationMode parse_estimation(std::string_view s);
PrivacyPreset parse_privacy_preset(std::string_view s);
Scheme parse_scheme(std::string_view s);
dra::LossPairing parse_loss_pairing(std::string_view s);
const std::vector<Scheme>& all_schemes();

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct TaskGenerator {
  int per_cycle = 30;
  Range comp_complexity{0.2, 1.2};  // giga-operations
  Range input_volume{1.0e5, 1.0e6};
  Range output_volume{5.0e4, 5.0e5};
  // trans_complexity = output_volume / bytes_per_trans_unit
  double bytes_per_trans_unit = 1.0e5;
  friend bool operator==(const TaskGenerator&, const TaskGenerator&) = default;
};

struct DeviceGenerator {
  Range cpu_freq{1.0, 4.0};
  Range cpu_usage{0.0, 0.5};
  Range power_comp{1.0, 3.0};
  Range power_trans_per_byte{5.0e-7, 2.0e-6};
  friend bool operator==(const DeviceGenerator&, const DeviceGenerator&) = default;
};

struct DeviceSpec {
  DeviceState state;
  privacy::PrivacyProfile privacy;
  friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;
};

struct ScenarioConfig {
  std::vector<DeviceSpec> devices;  // ascending ids
  std::vector<EdgeServer> servers;  // ascending ids
  privacy::LocationHierarchy hierarchy;
  PrivacyPreset privacy_preset = PrivacyPreset::kCustom;
  TaskGenerator tasks;
  DeviceGenerator device_generator;
  double usage_jitter = 0.1;  // per-cycle +/- drift of each device's usage

  double deadline = 2.0;  // seconds, shared by every task of a cycle
  int cycles = 100;
  std::uint64_t seed = 1;

  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double mu = 0.5;
  double rho = 0.8;
  int negotiation_bound = 20;  // P

  double eta = 0.1;
  double beta = 1.2;
  std::optional<int> thres_high;
  double initial_budget = 100.0;
  double shed_fraction = 0.1;
  dra::LossPairing loss_pairing = dra::LossPairing::kLiteral;

  std::optional<int> claim_round_cap;  // default: tasks in the group
  NetworkModel network;
  int anchor_samples = 16;  // K
  EstimationMode estimation = EstimationMode::kConservative;
  double freq_max = 5.0;
  int tda_exhaustive_bound = 12;  // devices x tasks at or below this are solved exactly
  int bgta_iteration_cap = 1000;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// Throws ConfigError naming the first violated key.
void validate(const ScenarioConfig& config);

nlohmann::json to_json(const ScenarioConfig& config);
// Rejects unknown keys, fills defaults, expands presets and validates.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path);

// Replaces the roster with `count` devices drawn from the device generator
// and placed on uniformly random points of interest.
void regenerate_devices(ScenarioConfig& config, int count, std::uint64_t layout_seed);

void apply_privacy_preset(ScenarioConfig& config, PrivacyPreset preset);

// Three cities with one edge server each, five streets per city and five
// points of interest per street; 15 devices, 30 tasks per cycle, 100 cycles,
// medium privacy.
ScenarioConfig make_reference_scenario(std::uint64_t layout_seed = 2021);

}  // namespace gpata
