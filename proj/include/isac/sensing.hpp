#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <span>
#include <vector>

#include "isac/channel.hpp"
#include "isac/kinematics.hpp"
#include "isac/params.hpp"

namespace isac {

/// Matched-filter output SNR of the echo from vehicle k. The mono-static
/// array gain is G^2 = n_tx * n_rx; echoes of the other vehicles act as
/// interference through the receive response a(theta_k).
double echo_snr(std::span<const VehicleState> states,
                const BeamformingMatrix& w, int k, const SystemParams& p);

/// Variance of the delay estimate, delay_res^2 / snr.
/// Returns +infinity when snr == 0 (unobservable target, flagged value).
double delay_variance(double snr, const SystemParams& p);

/// Variance of the Doppler estimate, doppler_res^2 / snr.
double doppler_variance(double snr, const SystemParams& p);

/// Sensitivity of the filtered echo to the angle:
///   -sqrt(n_rx) * beta * xi * sum_{m=2}^{n_tx} w_m e^{i pi (m-1) cos theta}
///                                  * i pi (m-1) * sin theta
/// with beta evaluated at the true distance of the same slot.
std::complex<double> dr_dtheta(const VehicleState& s,
                               const Eigen::VectorXcd& w_k,
                               const SystemParams& p);

/// Angle estimation bound sigma_r^2 / |dr_dtheta|^2.
/// Returns +infinity when the sensitivity vanishes.
double crlb_angle(const VehicleState& s, const Eigen::VectorXcd& w_k,
                  const SystemParams& p);

/// Distance estimation bound delay_variance(snr) * c^2 / 4.
double crlb_distance(double snr, const SystemParams& p);

/// Angle and distance bounds of vehicle k under beamformer w, with the
/// delay variance taken at the vehicle's echo SNR.
struct CrlbPair {
  double angle;  ///< rad^2
  double dist;   ///< m^2
};
CrlbPair crlb_pair(std::span<const VehicleState> states,
                   const BeamformingMatrix& w, int k, const SystemParams& p);

/// Saturates a bound at p.crlb_cap; used inside differentiable objectives.
double cap_crlb(double value, const SystemParams& p);

/// Fisher information of (theta, d, v_r) for vehicle k, built numerically:
/// the Jacobian of the observation mean map
///   g = [ G beta xi a(theta)^H w_k,  2 d / c,  2 f_c v_r / c ]
/// is formed by central differences with the given steps, and
/// F = Re{ J^H Sigma^{-1} J } with Sigma = diag(sigma_r^2, delay and Doppler
/// variances at the vehicle's echo SNR). The echo amplitude beta is treated
/// as a known constant evaluated at the true distance, so delay alone
/// carries distance information.
Eigen::Matrix3d numerical_fim(std::span<const VehicleState> states,
                              const BeamformingMatrix& w, int k,
                              const SystemParams& p,
                              std::array<double, 3> steps = {1e-6, 1e-4,
                                                             1e-4});

}  // namespace isac
