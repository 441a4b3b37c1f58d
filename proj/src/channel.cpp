#include "isac/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isac {

void SystemParams::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (n_tx < 2) fail("n_tx must be >= 2");
  if (n_rx < 1) fail("n_rx must be >= 1");
  if (n_vehicles < 1) fail("n_vehicles must be >= 1");
  if (!(carrier_hz > 0)) fail("carrier_hz must be positive");
  if (!(wave_speed_mps > 0)) fail("wave_speed_mps must be positive");
  if (!(slot_s > 0)) fail("slot_s must be positive");
  if (!(pathloss_exp > 0)) fail("pathloss_exp must be positive");
  if (!(pathloss_ref > 0)) fail("pathloss_ref must be positive");
  if (!(ref_dist_m > 0)) fail("ref_dist_m must be positive");
  if (!(noise_echo_w > 0)) fail("noise_echo_w must be positive");
  if (!(noise_rx_w > 0)) fail("noise_rx_w must be positive");
  if (!noise_rx_w_per_vehicle.empty()) {
    if (static_cast<int>(noise_rx_w_per_vehicle.size()) != n_vehicles)
      fail("noise_rx_w_per_vehicle must have one entry per vehicle");
    for (double v : noise_rx_w_per_vehicle)
      if (!(v > 0)) fail("per-vehicle noise power must be positive");
  }
  if (!(mf_gain > 0)) fail("mf_gain must be positive");
  if (!(delay_res_s > 0)) fail("delay_res_s must be positive");
  if (!(doppler_res_hz > 0)) fail("doppler_res_hz must be positive");
  if (!(echo_obs_var > 0)) fail("echo_obs_var must be positive");
  if (!(power_budget_w > 0)) fail("power_budget_w must be positive");
  if (!(crlb_angle_max > 0)) fail("crlb_angle_max must be positive");
  if (!(crlb_dist_max > 0)) fail("crlb_dist_max must be positive");
  if (penalty_angle < 0 || penalty_dist < 0 || penalty_power < 0)
    fail("penalty weights must be non-negative");
  if (history_len < 1) fail("history_len must be >= 1");
  if (!(history_nmse >= 0)) fail("history_nmse must be non-negative");
  if (!(crlb_cap > 0)) fail("crlb_cap must be positive");
}

Eigen::VectorXcd steering_vector(double theta_rad, int n) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be >= 1");
  if (!std::isfinite(theta_rad))
    throw std::invalid_argument("steering_vector: theta must be finite");
  const double c = std::cos(theta_rad);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::VectorXcd a(n);
  for (int m = 0; m < n; ++m) {
    double phase = -std::numbers::pi * m * c;
    a(m) = std::polar(scale, phase);
  }
  return a;
}

double path_loss(double dist_m, const SystemParams& p) {
  if (!(dist_m > 0) || !std::isfinite(dist_m))
    throw std::invalid_argument("path_loss: distance must be positive");
  return p.pathloss_ref * std::pow(dist_m / p.ref_dist_m, -p.pathloss_exp);
}

std::complex<double> reflection_coeff(std::complex<double> rcs, double dist_m) {
  if (!(dist_m > 0) || !std::isfinite(dist_m))
    throw std::invalid_argument("reflection_coeff: distance must be positive");
  return rcs / (2.0 * dist_m);
}

Eigen::VectorXcd channel_vector(double theta_rad, double dist_m,
                                const SystemParams& p) {
  double gain = std::sqrt(static_cast<double>(p.n_tx) * path_loss(dist_m, p));
  return gain * steering_vector(theta_rad, p.n_tx);
}

BeamformingMatrix make_beamformer(Eigen::MatrixXcd w) {
  BeamformingMatrix b;
  b.power_used_w = w.squaredNorm();
  b.w = std::move(w);
  return b;
}

BeamformingMatrix project_power(const BeamformingMatrix& w, double budget_w) {
  if (w.power_used_w <= budget_w) return w;
  double s = std::sqrt(budget_w / w.power_used_w);
  BeamformingMatrix b;
  b.w = s * w.w;
  b.power_used_w = budget_w;
  return b;
}

double sinr(const ChannelSnapshot& h, const BeamformingMatrix& w, int k,
            const SystemParams& p) {
  const int kk = static_cast<int>(h.h.cols());
  if (k < 0 || k >= kk) throw std::invalid_argument("sinr: vehicle index");
  if (w.w.rows() != h.h.rows() || w.w.cols() != h.h.cols())
    throw std::invalid_argument("sinr: shape mismatch");
  const Eigen::VectorXcd hk = h.h.col(k);
  double signal = std::norm(hk.dot(w.w.col(k)));  // dot() conjugates hk
  double interference = 0.0;
  for (int j = 0; j < kk; ++j) {
    if (j == k) continue;
    interference += std::norm(hk.dot(w.w.col(j)));
  }
  return signal / (interference + p.noise_rx_for(k));
}

double sum_rate(const ChannelSnapshot& h, const BeamformingMatrix& w,
                const SystemParams& p) {
  double rate = 0.0;
  for (int k = 0; k < h.h.cols(); ++k) rate += std::log2(1.0 + sinr(h, w, k, p));
  return rate;
}

}  // namespace isac
