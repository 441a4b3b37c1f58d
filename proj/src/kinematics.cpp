#include "isac/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace isac {

namespace {

VehicleState state_from_polar(double theta, double dist, double speed) {
  VehicleState s;
  s.theta = theta;
  s.dist = dist;
  s.speed = speed;
  s.radial_speed = speed * std::cos(theta);
  s.pos = {dist * std::cos(theta), dist * std::sin(theta)};
  return s;
}

}  // namespace

std::vector<VehicleState> init_scenario(const SystemParams& p,
                                        const Scenario& sc, Rng& rng) {
  if (static_cast<int>(sc.mean_positions.size()) != p.n_vehicles)
    throw std::invalid_argument("init_scenario: one mean position per vehicle");
  std::vector<VehicleState> out;
  out.reserve(sc.mean_positions.size());
  for (const auto& mean : sc.mean_positions) {
    Eigen::Vector2d pos = mean;
    if (sc.pos_jitter_std_m > 0) {
      pos.x() += sc.pos_jitter_std_m * rng.normal();
      pos.y() += sc.pos_jitter_std_m * rng.normal();
    }
    if (!(pos.y() > 0))
      throw std::invalid_argument("init_scenario: vehicles must have y > 0");
    double speed = rng.uniform(sc.v_min_mps, sc.v_max_mps);
    out.push_back(state_from_polar(std::atan2(pos.y(), pos.x()), pos.norm(),
                                   speed));
  }
  return out;
}

VehicleState step(const VehicleState& s, const SystemParams& p,
                  const Scenario& sc, Rng& rng) {
  const double v = rng.uniform(sc.v_min_mps, sc.v_max_mps);
  const double disp = v * p.slot_s;
  const double d2 =
      s.dist * s.dist + disp * disp - 2.0 * s.dist * disp * std::cos(s.theta);
  if (!(d2 > 0))
    throw std::domain_error("step: vehicle reached the array origin");
  const double dn = std::sqrt(d2);
  double arg = disp * std::sin(s.theta) / dn;
  if (arg > 1.0 || arg < -1.0) {
    if (std::abs(arg) - 1.0 > 1e-12)
      throw std::domain_error("step: asin argument out of range");
    arg = arg > 0 ? 1.0 : -1.0;
  }
  const double theta_n = s.theta + std::asin(arg);
  return state_from_polar(theta_n, dn, v);
}

double radial_velocity(const VehicleState& s) {
  return s.speed * std::cos(s.theta);
}

TrajectoryWindow simulate_window(const SystemParams& p, const Scenario& sc,
                                 Rng& rng) {
  TrajectoryWindow w;
  w.slots.resize(p.history_len + 1);
  w.slots[0] = init_scenario(p, sc, rng);
  for (int t = 1; t <= p.history_len; ++t) {
    auto& slot = w.slots[t];
    slot.reserve(w.slots[t - 1].size());
    for (const auto& s : w.slots[t - 1]) slot.push_back(step(s, p, sc, rng));
  }
  return w;
}

EstimatedHistory perturb_history(const TrajectoryWindow& w,
                                 const SystemParams& p, Rng& rng) {
  const int tau = p.history_len;
  if (static_cast<int>(w.slots.size()) < tau)
    throw std::invalid_argument("perturb_history: window shorter than history");
  const int k = static_cast<int>(w.slots.front().size());
  const double sigma = std::sqrt(p.history_nmse);

  EstimatedHistory h;
  h.theta_est.resize(tau, k);
  h.dist_est.resize(tau, k);
  h.snapshots.reserve(tau);
  for (int t = 0; t < tau; ++t) {
    Eigen::MatrixXcd snap(p.n_tx, k);
    for (int j = 0; j < k; ++j) {
      const VehicleState& s = w.slots[t][j];
      double theta = s.theta * (1.0 + sigma * rng.normal());
      double dist = s.dist * (1.0 + sigma * rng.normal());
      // Guards against (astronomically unlikely) sign flips at large NMSE.
      dist = std::max(dist, 0.01 * s.dist);
      h.theta_est(t, j) = theta;
      h.dist_est(t, j) = dist;
      snap.col(j) = channel_vector(theta, dist, p);
    }
    h.snapshots.push_back(std::move(snap));
  }
  return h;
}

ChannelSnapshot snapshot_from_states(const std::vector<VehicleState>& states,
                                     const SystemParams& p, int slot) {
  ChannelSnapshot snap;
  snap.slot = slot;
  snap.h.resize(p.n_tx, static_cast<int>(states.size()));
  for (int k = 0; k < static_cast<int>(states.size()); ++k)
    snap.h.col(k) = channel_vector(states[k].theta, states[k].dist, p);
  return snap;
}

}  // namespace isac
