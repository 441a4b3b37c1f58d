#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

#include "isac/baselines.hpp"
#include "isac/hcl_net.hpp"
#include "isac/kinematics.hpp"
#include "isac/objective.hpp"
#include "isac/optim.hpp"
#include "isac/params.hpp"

namespace isac {

/// One supervised-free training or evaluation unit: the estimated channel
/// history the model may look at, and the ground truth of the slot the
/// beamformer is produced for. The truth never feeds the model input; it
/// only scores the output.
struct Example {
  EstimatedHistory history;
  TruthSlot truth;
};

struct Dataset {
  std::vector<Example> examples;
  std::uint64_t seed = 0;
  SystemParams params;
  Scenario scenario;
};

/// n_examples independent trajectory windows with perturbed histories,
/// deterministic per (p, sc, seed): example i draws from its own named
/// substream, so datasets with different seeds are disjoint streams.
Dataset generate_dataset(const SystemParams& p, const Scenario& sc,
                         int n_examples, std::uint64_t seed);

/// Text serialization of a dataset; numbers use shortest round-trip
/// formatting so identical datasets serialize to identical bytes.
void save_dataset(const Dataset& data, const std::filesystem::path& file);
Dataset load_dataset(const std::filesystem::path& file);

/// Checks internal consistency: every truth snapshot must equal the channel
/// rebuilt from its states to 1e-10, and history shapes must agree with
/// params. Throws std::runtime_error naming the first offending example.
void validate_dataset(const Dataset& data);

/// A trainable beamforming model: builds its differentiable forward pass on
/// a caller-owned tape and decodes raw outputs into beamformers.
class Model {
 public:
  virtual ~Model() = default;
  virtual std::string name() const = 0;
  virtual ParameterSet init(Rng& rng) const = 0;
  virtual ad::Value forward(ad::Graph& g, std::span<const ad::Value> params,
                            const Example& ex) const = 0;
  virtual BeamformingMatrix decode(const ad::Tensor& raw) const = 0;
};

/// The history-driven convolutional-LSTM model.
class HclModel : public Model {
 public:
  explicit HclModel(HclConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }
  std::string name() const override { return "hcl"; }
  ParameterSet init(Rng& rng) const override { return hcl_init(cfg_, rng); }
  ad::Value forward(ad::Graph& g, std::span<const ad::Value> params,
                    const Example& ex) const override {
    return hcl_forward(g, params, map_input(ex.history, cfg_), cfg_);
  }
  BeamformingMatrix decode(const ad::Tensor& raw) const override {
    return map_output(raw, cfg_);
  }
  const HclConfig& config() const { return cfg_; }

 private:
  HclConfig cfg_;
};

/// The single-snapshot dense model over the latest estimated channel.
class NaiveModel : public Model {
 public:
  explicit NaiveModel(NaiveNetConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
  }
  std::string name() const override { return "naive"; }
  ParameterSet init(Rng& rng) const override { return naive_init(cfg_, rng); }
  ad::Value forward(ad::Graph& g, std::span<const ad::Value> params,
                    const Example& ex) const override {
    return naive_forward(g, params,
                         naive_map_input(ex.history.snapshots.back(), cfg_),
                         cfg_);
  }
  BeamformingMatrix decode(const ad::Tensor& raw) const override {
    HclConfig shape;
    shape.n_tx = cfg_.n_tx;
    shape.k_vehicles = cfg_.k_vehicles;
    return map_output(raw, shape);
  }

 private:
  NaiveNetConfig cfg_;
};

struct EpochStats {
  double total = 0;          ///< full-train-set objective after the epoch
  double sum_rate_term = 0;
  double angle_penalty = 0;
  double dist_penalty = 0;
  double power_penalty = 0;
  double seconds = 0;        ///< wall time of the epoch
};

struct TrainingReport {
  std::vector<EpochStats> epochs;
};

struct TrainOptions {
  AdamConfig adam;
  int epochs = 6;
  int batch_size = 32;
  /// Global-norm gradient clip applied before each Adam step; <= 0 turns
  /// clipping off.
  double grad_clip_norm = 1.0;
};

/// Mini-batch Adam on the negated batch objective. Each epoch shuffles the
/// example order with its own seeded substream; every batch shares one tape
/// because the objective couples examples through batch-mean hinge terms.
/// Aborts with std::runtime_error naming the batch when the cost turns
/// non-finite. Fully deterministic per (model, data, options, seed) apart
/// from the reported wall times.
std::pair<ParameterSet, TrainingReport> train(const Model& model,
                                              const Dataset& data,
                                              const TrainOptions& opt,
                                              std::uint64_t seed);

/// Runs the model on one example without touching gradients. When project
/// is set, the beamformer is scaled back to the power budget whenever it
/// exceeds it.
BeamformingMatrix predict(const Model& model, const ParameterSet& params,
                          const Example& ex, const SystemParams& p,
                          bool project);

struct EvalMetrics {
  double mean_sum_rate = 0;
  double mean_crlb_angle = 0;  ///< unsaturated; +inf if any beam is blind
  double sqrt_crlb_angle = 0;  ///< sqrt of the mean
  double mean_crlb_dist = 0;
  double sqrt_crlb_dist = 0;
  double violation_rate_angle = 0;  ///< share of examples over the tolerance
  double violation_rate_dist = 0;
  double mean_power_w = 0;
};

struct EvalOptions {
  /// Replaces the measured sum rate (used by the interference-free bound).
  std::function<double(const Example&, const BeamformingMatrix&)>
      rate_override;
  /// When nonempty, writes one CSV row per example.
  std::filesystem::path per_example_csv;
};

/// Scores a beamformer provider on every example of a dataset. The provider
/// receives the example index and the example. Violation rates count
/// examples whose per-vehicle mean bound exceeds the configured tolerance.
EvalMetrics evaluate(
    const std::function<BeamformingMatrix(int, const Example&)>& beamformer,
    const Dataset& data, const SystemParams& p, const EvalOptions& opt = {});

}  // namespace isac
