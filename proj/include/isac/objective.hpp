#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "isac/autodiff.hpp"
#include "isac/channel.hpp"
#include "isac/kinematics.hpp"
#include "isac/params.hpp"

namespace isac {

/// Ground truth of one prediction slot: the channel the beamformer will
/// actually face and the vehicle states it is judged against.
struct TruthSlot {
  ChannelSnapshot channel;           ///< n_tx x K channel at the slot
  std::vector<VehicleState> states;  ///< K true states at the slot
};

/// Penalty-form objective of a batch: the communication term minus the
/// hinge penalties for the sensing bounds and the power budget.
struct PenaltyBreakdown {
  double sum_rate_term = 0;   ///< batch mean of the per-example sum rate
  double angle_penalty = 0;   ///< lambda1 * hinge(batch-mean angle bound)^2
  double dist_penalty = 0;    ///< lambda2 * hinge(batch-mean dist bound)^2
  double power_penalty = 0;   ///< lambda3 * batch mean of squared power hinges
  double total = 0;           ///< sum_rate_term - the three penalties
  double mean_crlb_angle = 0; ///< batch mean of saturated angle bounds
  double mean_crlb_dist = 0;  ///< batch mean of saturated distance bounds
  double power_used_w = 0;    ///< batch mean of ||W||_F^2
};

/// Evaluates the batch objective numerically. The angle and distance terms
/// hinge the batch means against their tolerances; the power term averages
/// per-example squared hinges. Estimation bounds are saturated at
/// p.crlb_cap so the value stays finite when a beam is orthogonal to its
/// vehicle. Throws std::invalid_argument on an empty batch or mismatched
/// array lengths.
PenaltyBreakdown batch_objective(std::span<const TruthSlot> examples,
                                 std::span<const BeamformingMatrix> ws,
                                 const SystemParams& p);

/// Per-constraint slack of one example: (angle tolerance - mean angle bound,
/// distance tolerance - mean distance bound, budget - ||W||_F^2), with the
/// bounds saturated at p.crlb_cap. Nonnegative entries mean feasible.
struct FeasibilitySlack {
  double angle = 0;
  double dist = 0;
  double power = 0;
};
FeasibilitySlack feasibility_report(const BeamformingMatrix& w,
                                    const TruthSlot& example,
                                    const SystemParams& p);

/// Handles into the differentiable batch cost. cost = -total is the scalar
/// to minimize; the other handles expose the same decomposition as
/// PenaltyBreakdown for inspection and testing.
struct CostGraph {
  ad::Value cost;
  ad::Value total;
  ad::Value sum_rate_term;
  ad::Value angle_penalty;
  ad::Value dist_penalty;
  ad::Value power_penalty;
  ad::Value mean_crlb_angle;
  ad::Value mean_crlb_dist;
};

/// Builds the batch objective on a tape. raw_ws[i] is the real encoding of
/// example i's beamformer: shape [n_tx, 2K], real parts of the K columns
/// first, imaginary parts second. The value of the returned cost equals
/// -batch_objective(...).total for beamformers decoded from the same
/// tensors; its gradient flows back into every raw_ws entry.
CostGraph build_batch_cost(ad::Graph& g, std::span<const TruthSlot> examples,
                           std::span<const ad::Value> raw_ws,
                           const SystemParams& p);

}  // namespace isac
