#pragma once

#include <span>
#include <vector>

#include "isac/autodiff.hpp"
#include "isac/channel.hpp"
#include "isac/kinematics.hpp"
#include "isac/optim.hpp"
#include "isac/rng.hpp"

namespace isac {

/// Architecture of the history-driven beamforming network: per-vehicle
/// convolutional feature extractors applied at every history slot, a
/// concatenation across vehicles, one LSTM cell threaded over the history,
/// and a linear head producing the real encoding of the beamformer.
struct HclConfig {
  int tau = 6;          ///< history slots fed to the network
  int k_vehicles = 3;
  int n_tx = 32;
  int conv_filters = 4;
  int conv_kernel = 3;  ///< square kernel; width degenerates on 1-wide input
  int pool_size = 4;    ///< pooling window along the antenna axis
  int pool_stride = 4;
  int lstm_hidden = 64;

  /// Fixed gain applied to the packed input before the first layer.
  /// Channel amplitudes are around 1e-6..1e-5 W^(1/2); the default
  /// expresses them in units of the receiver noise amplitude
  /// (1/sqrt(1e-11 W)) so first-layer activations are O(1) under the
  /// uniform fan-in/fan-out initialization.
  double input_gain = 3.1622776601683794e5;

  /// Throws std::invalid_argument on nonpositive dimensions or pool
  /// settings that do not tile the antenna axis (size must equal stride).
  void validate() const;

  int flatten_dim() const { return (n_tx / pool_stride) * conv_filters; }
  int concat_dim() const { return k_vehicles * flatten_dim(); }
  int output_dim() const { return n_tx * 2 * k_vehicles; }
};

/// Packs an estimated channel history into the network input tensor of
/// shape [tau, K, n_tx, 2]: [l, k, m, 0] and [l, k, m, 1] are the real and
/// imaginary parts of antenna m of vehicle k at history slot l, oldest
/// slot first. Pure rearrangement. Throws on shape mismatch.
ad::Tensor map_input(const EstimatedHistory& history, const HclConfig& cfg);

/// Fresh parameters: per-vehicle conv kernels/biases, the four LSTM gate
/// blocks acting on [step input; hidden], and the linear head. Weights are
/// uniform Glorot draws from rng, biases zero except the forget gate's,
/// which starts at one. Insertion order is the order hcl_forward expects.
ParameterSet hcl_init(const HclConfig& cfg, Rng& rng);

/// Optional capture of intermediate activations for tests.
struct HclTrace {
  std::vector<ad::Tensor> concat_steps;  ///< concat layer value per slot
};

/// Runs the network on one packed input. params must come from
/// parameter_leaves/parameter_constants over a set shaped like hcl_init's.
/// Returns the raw output of shape [n_tx, 2K]. Throws std::invalid_argument
/// on any parameter/config mismatch.
ad::Value hcl_forward(ad::Graph& g, std::span<const ad::Value> params,
                      const ad::Tensor& input, const HclConfig& cfg,
                      HclTrace* trace = nullptr);

/// Decodes the raw network output: column k of W is raw[:, k] + i raw[:, K+k].
/// The result's recorded power is exactly the sum of squares of raw.
BeamformingMatrix map_output(const ad::Tensor& raw, const HclConfig& cfg);

}  // namespace isac
