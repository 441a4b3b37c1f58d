#pragma once

#include <Eigen/Dense>
#include <vector>

#include "isac/channel.hpp"
#include "isac/params.hpp"
#include "isac/rng.hpp"

namespace isac {

/// State of one vehicle at one slot. The roadside array sits at the origin
/// with its axis along x; vehicles travel on a straight road parallel to x
/// at constant y > 0, in the -x direction for positive speed.
struct VehicleState {
  double theta = 0;         ///< angle from the array axis, rad, in (0, pi)
  double dist = 0;          ///< distance to the array, m, > 0
  double speed = 0;         ///< road speed over the current slot, m/s
  double radial_speed = 0;  ///< range rate magnitude speed * cos(theta)
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();  ///< cartesian (x, y)
};

/// Road geometry and speed range shared by all vehicles.
struct Scenario {
  std::vector<Eigen::Vector2d> mean_positions;  ///< one (x, y) per vehicle
  double v_min_mps = 8.0;
  double v_max_mps = 8.25;
  /// Gaussian jitter applied to each start position; the default models
  /// one meter of placement uncertainty per axis. Zero pins the means.
  double pos_jitter_std_m = 1.0;
};

/// Vehicle states at slot 0. Positions are the configured means plus
/// optional jitter; speeds are drawn uniformly from the scenario range.
std::vector<VehicleState> init_scenario(const SystemParams& p,
                                        const Scenario& sc, Rng& rng);

/// Advances one vehicle by one slot. The slot speed v is redrawn uniformly
/// from the scenario range; the new distance and angle follow the
/// law-of-cosines recursion
///   d_n^2 = d^2 + (v dT)^2 - 2 d v dT cos(theta)
///   theta_n = theta + asin(v dT sin(theta) / d_n)
/// with the asin argument clamped into [-1, 1] when it overshoots by at most
/// 1e-12; larger overshoots raise std::domain_error.
VehicleState step(const VehicleState& s, const SystemParams& p,
                  const Scenario& sc, Rng& rng);

/// Range rate v cos(theta) of a state.
double radial_velocity(const VehicleState& s);

/// True states for slots n - tau .. n, oldest first
/// (slots.size() == history_len + 1).
struct TrajectoryWindow {
  std::vector<std::vector<VehicleState>> slots;  ///< slots[t][k]
};

/// Simulates history_len + 1 consecutive slots from a fresh scenario.
TrajectoryWindow simulate_window(const SystemParams& p, const Scenario& sc,
                                 Rng& rng);

/// Estimated channel history for slots n - tau .. n - 1, oldest first.
/// Snapshot t is rebuilt from the stored noisy angle/distance estimates.
struct EstimatedHistory {
  std::vector<Eigen::MatrixXcd> snapshots;  ///< tau matrices, n_tx x K
  Eigen::MatrixXd theta_est;                ///< tau x K, rad
  Eigen::MatrixXd dist_est;                 ///< tau x K, m
};

/// Applies multiplicative Gaussian errors of the configured NMSE to the
/// first history_len slots of the window and rebuilds the channel snapshots
/// from the perturbed parameters.
EstimatedHistory perturb_history(const TrajectoryWindow& w,
                                 const SystemParams& p, Rng& rng);

/// Exact channel matrix for a set of true states.
ChannelSnapshot snapshot_from_states(const std::vector<VehicleState>& states,
                                     const SystemParams& p, int slot);

}  // namespace isac
