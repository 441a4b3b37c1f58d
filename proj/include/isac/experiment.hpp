#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "isac/config.hpp"
#include "isac/csv.hpp"
#include "isac/training.hpp"

namespace isac {

/// Deterministic 64-bit seed for a named purpose under a master seed;
/// distinct (name, index) pairs give decorrelated seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                          std::uint64_t index = 0);

/// Returns a copy of the configuration with one sweep axis applied:
///   power_dbm   -> power budget (converted to watts)
///   n_antennas  -> transmit and receive array sizes
///   n_vehicles  -> vehicle count (positions extended on the default road)
///   velocity    -> road-speed window, keeping its width
///   tau         -> history length
///   lambda      -> all three penalty weights
///   gamma       -> both bound tolerances
/// Throws std::invalid_argument for an unknown axis.
ExperimentConfig apply_axis(const ExperimentConfig& base,
                            const std::string& axis, double value);

struct SweepOptions {
  bool projection = true;  ///< scale beams back to the budget at inference
  bool timing = false;     ///< record real training seconds (non-reproducible)
};

/// Runs the configured sweep: per axis value, regenerate datasets and
/// retrain every learned method, then evaluate all methods on the shared
/// test set. All randomness descends from the master seed through named
/// substreams, so the returned rows are deterministic (train_seconds stays
/// zero unless options.timing is set).
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg,
                                 std::uint64_t seed,
                                 const SweepOptions& options = {});

/// Writes the standard charts for a result set next to the CSV: sum rate,
/// both root-CRLB curves (log scale). Returns the written file names.
std::vector<std::filesystem::path> write_sweep_plots(
    std::span<const ResultRow> rows, const std::filesystem::path& dir);

/// Multiply-accumulate counts of the network per forward pass:
/// the convolutional term tau*K*sum_l(n_{l-1} s_l^2 n_l a_l b_l), the
/// recurrent term 4*tau*(k1*k2 + k2^2 + k2), and the offline total
/// iterations * examples * (both terms).
struct ComplexityReport {
  long long conv_per_pass = 0;
  long long lstm_per_pass = 0;
  long long online_total = 0;
  long long offline_total = 0;
  int kappa1 = 0;  ///< LSTM input width (concatenated feature size)
  int kappa2 = 0;  ///< LSTM hidden size
  std::string text;  ///< human-readable binding of every symbol
};
ComplexityReport complexity_report(const HclConfig& cfg, int iterations,
                                   long long n_examples);

}  // namespace isac
