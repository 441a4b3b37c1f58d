#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>

#include "isac/params.hpp"

namespace isac {

/// Unit-norm response of an n-element half-wavelength ULA toward angle
/// theta (radians from the array axis). Element m (0-based) equals
/// exp(-i pi m cos theta) / sqrt(n).
Eigen::VectorXcd steering_vector(double theta_rad, int n);

/// Distance power law alpha(d) = pathloss_ref * (d / ref_dist)^(-exponent).
double path_loss(double dist_m, const SystemParams& p);

/// Round-trip reflection coefficient beta = rcs / (2 d).
std::complex<double> reflection_coeff(std::complex<double> rcs, double dist_m);

/// Downlink channel h = sqrt(n_tx) * sqrt(alpha(d)) * a(theta), so that
/// ||h||^2 = n_tx * alpha(d).
Eigen::VectorXcd channel_vector(double theta_rad, double dist_m,
                                const SystemParams& p);

/// Channel matrix for one slot; column k is the channel of vehicle k.
struct ChannelSnapshot {
  Eigen::MatrixXcd h;  ///< n_tx x K
  int slot = 0;        ///< slot index the snapshot belongs to
};

/// Transmit beamformer; column k carries the stream of vehicle k.
struct BeamformingMatrix {
  Eigen::MatrixXcd w;        ///< n_tx x K
  double power_used_w = 0;   ///< squared Frobenius norm of w
};

/// Wraps a matrix and records its transmit power.
BeamformingMatrix make_beamformer(Eigen::MatrixXcd w);

/// Scales w to the power budget when it exceeds it; no-op otherwise.
BeamformingMatrix project_power(const BeamformingMatrix& w, double budget_w);

/// Receive SINR of vehicle k under beamformer w.
double sinr(const ChannelSnapshot& h, const BeamformingMatrix& w, int k,
            const SystemParams& p);

/// Sum over vehicles of log2(1 + SINR_k), in bit/s/Hz.
double sum_rate(const ChannelSnapshot& h, const BeamformingMatrix& w,
                const SystemParams& p);

}  // namespace isac
