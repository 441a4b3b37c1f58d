#pragma once

#include <Eigen/Dense>
#include <span>

#include "isac/autodiff.hpp"
#include "isac/channel.hpp"
#include "isac/optim.hpp"
#include "isac/params.hpp"
#include "isac/rng.hpp"

namespace isac {

/// Classic single-constraint water-filling: p_k = max(0, mu - 1/gains_k)
/// with mu fixed by an active-set iteration so the powers sum to the
/// budget. Throws std::invalid_argument unless every gain is positive and
/// the budget is positive.
std::vector<double> waterfilling(std::span<const double> gains,
                                 double total_power);

/// Interference-free benchmark with perfect knowledge of the current
/// channel: per-user matched beams carrying water-filled powers, and the
/// rate each user would get on its own parallel channel. The rate
/// deliberately ignores cross-terms, so it upper-bounds what any feasible
/// beamformer achieves on the same channel.
struct UpperBound {
  BeamformingMatrix w;
  double rate = 0;  ///< sum over users of log2(1 + p_k ||h_k||^2 / sigma_k^2)
};
UpperBound upper_bound(const ChannelSnapshot& h_true, const SystemParams& p);

/// Isotropic random benchmark: i.i.d. standard complex Gaussian entries
/// rescaled so the squared Frobenius norm equals the power budget exactly.
BeamformingMatrix random_beamformer(const SystemParams& p, Rng& rng);

/// Single-snapshot learned benchmark: a dense ReLU stack that maps the
/// flattened latest estimated channel straight to the beamformer encoding.
struct NaiveNetConfig {
  int n_tx = 32;
  int k_vehicles = 3;
  int hidden = 256;  ///< width of each of the two hidden layers

  /// Fixed gain applied to the flattened input; same role and default as
  /// HclConfig::input_gain (channel amplitudes in receiver-noise units).
  double input_gain = 3.1622776601683794e5;

  void validate() const;
  int input_dim() const { return 2 * k_vehicles * n_tx; }
  int output_dim() const { return 2 * k_vehicles * n_tx; }
};

/// Flattens one estimated snapshot into the dense-net input: all real
/// parts first (vehicle-major, antennas within a vehicle), then all
/// imaginary parts in the same order. Throws on shape mismatch.
ad::Tensor naive_map_input(const Eigen::MatrixXcd& last_snapshot,
                           const NaiveNetConfig& cfg);

/// Glorot-initialized dense stack parameters, biases zero; insertion order
/// is the order naive_forward expects.
ParameterSet naive_init(const NaiveNetConfig& cfg, Rng& rng);

/// input -> 2x(dense+ReLU) -> linear head, reshaped to [n_tx, 2K] so the
/// output decodes through the same mapping as the main network.
ad::Value naive_forward(ad::Graph& g, std::span<const ad::Value> params,
                        const ad::Tensor& input, const NaiveNetConfig& cfg);

}  // namespace isac
