#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "isac/hcl_net.hpp"
#include "isac/kinematics.hpp"
#include "isac/params.hpp"

namespace isac {

/// Network and optimizer settings from the [model] config section.
struct ModelSettings {
  int conv_filters = 4;
  int pool_size = 4;
  int pool_stride = 4;
  int lstm_hidden = 64;
  int naive_hidden = 256;
  /// Shared input gain of both networks; see HclConfig::input_gain.
  double input_gain = 3.1622776601683794e5;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 6;
  /// Global-norm bound applied to the batch gradient before each Adam
  /// step; keeps early penalty spikes from poisoning the moment estimates.
  double grad_clip_norm = 1.0;
};

struct DatasetSettings {
  int n_train = 2000;
  int n_test = 2000;
};

struct SweepSettings {
  std::string axis = "power_dbm";
  std::vector<double> values{10.0, 20.0, 30.0};
  std::vector<std::string> methods{"upper_bound", "hcl", "naive", "random"};
};

struct OutputSettings {
  std::string dir = "out";
  bool plots = true;
};

/// Everything an experiment run needs, read from one plain-text file with
/// [section] headers and key = value lines. Physical quantities carry unit
/// suffixes in their key names; powers are configured in dBm and converted
/// at the parsing boundary.
struct ExperimentConfig {
  /// Defaults to the reference scene: three vehicles ahead of the array.
  ExperimentConfig();

  SystemParams system;
  Scenario scenario;
  ModelSettings model;
  DatasetSettings dataset;
  SweepSettings sweep;
  OutputSettings output;

  /// The network architecture implied by the current system block.
  HclConfig hcl_config() const;

  /// Cross-field validation beyond SystemParams::validate().
  void validate() const;
};

/// Parses config text; origin names the source in error messages. Unknown
/// sections or keys raise std::invalid_argument naming the offender.
ExperimentConfig parse_config_text(std::string_view text,
                                   std::string_view origin);
ExperimentConfig parse_config_file(const std::filesystem::path& file);

}  // namespace isac
