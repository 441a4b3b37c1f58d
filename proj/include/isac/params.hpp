#pragma once

#include <complex>
#include <vector>

namespace isac {

/// Static description of the link: a roadside unit with a uniform linear
/// array (half-wavelength spacing) serving K single-antenna vehicles on a
/// straight road, plus the mono-static echo path used for sensing.
///
/// Everything is stored in linear SI units (watts, meters, seconds, radians).
struct SystemParams {
  int n_tx = 32;        ///< transmit antennas, >= 2
  int n_rx = 32;        ///< receive antennas, >= 1
  int n_vehicles = 3;   ///< vehicles K, >= 1

  double carrier_hz = 30e9;        ///< carrier frequency f_c
  double wave_speed_mps = 2.998e8; ///< propagation speed c
  double slot_s = 0.02;            ///< slot length used by the kinematic model

  double pathloss_exp = 2.55;  ///< exponent of the distance power law
  double pathloss_ref = 1e-7;  ///< linear path loss at the reference distance
  double ref_dist_m = 1.0;     ///< reference distance for pathloss_ref

  std::complex<double> rcs = {10.0, 10.0};  ///< combined RCS/fading coefficient

  double noise_echo_w = 1e-11;  ///< echo receiver noise power sigma_z^2
  double noise_rx_w = 1e-11;    ///< vehicle receiver noise power sigma_k^2
  /// Optional per-vehicle receiver noise override; empty means shared value.
  std::vector<double> noise_rx_w_per_vehicle;

  double mf_gain = 10.0;        ///< matched-filtering gain xi
  double delay_res_s = 2e-6;    ///< delay resolution constant rho_nu
  double doppler_res_hz = 2e-6; ///< Doppler resolution constant rho_mu
  double echo_obs_var = 1e-10;  ///< variance sigma_r^2 of the filtered echo

  double power_budget_w = 1.0;  ///< transmit power budget P

  double crlb_angle_max = 0.01;  ///< angle CRLB threshold gamma_theta [rad^2]
  double crlb_dist_max = 0.01;   ///< distance CRLB threshold gamma_d [m^2]
  double penalty_angle = 1e3;    ///< penalty weight on the angle constraint
  double penalty_dist = 1e3;     ///< penalty weight on the distance constraint
  double penalty_power = 1e3;    ///< penalty weight on the power constraint

  int history_len = 6;         ///< channel snapshots fed to the predictor
  double history_nmse = 0.01;  ///< NMSE of estimated angle/distance history

  /// Saturation applied to CRLB values inside the differentiable objective.
  /// Analysis paths report unsaturated values (infinity when SNR is zero).
  double crlb_cap = 1e6;

  /// Receiver noise power for vehicle k, honoring the per-vehicle override.
  double noise_rx_for(int k) const {
    if (!noise_rx_w_per_vehicle.empty()) return noise_rx_w_per_vehicle.at(k);
    return noise_rx_w;
  }

  /// Throws std::invalid_argument when any field is out of range.
  void validate() const;
};

}  // namespace isac
