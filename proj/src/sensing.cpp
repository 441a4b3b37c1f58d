#include "isac/sensing.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace isac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double array_gain_sq(const SystemParams& p) {
  return static_cast<double>(p.n_tx) * static_cast<double>(p.n_rx);
}

}  // namespace

double echo_snr(std::span<const VehicleState> states,
                const BeamformingMatrix& w, int k, const SystemParams& p) {
  const int kk = static_cast<int>(states.size());
  if (k < 0 || k >= kk) throw std::invalid_argument("echo_snr: vehicle index");
  if (w.w.cols() != kk || w.w.rows() != p.n_tx)
    throw std::invalid_argument("echo_snr: shape mismatch");
  const double g2 = array_gain_sq(p);
  const Eigen::VectorXcd a_k = steering_vector(states[k].theta, p.n_tx);
  auto beam_gain = [&](int i) { return std::norm(a_k.dot(w.w.col(i))); };
  const double beta2_k =
      std::norm(reflection_coeff(p.rcs, states[k].dist));
  double num = g2 * beta2_k * beam_gain(k);
  double den = p.noise_echo_w;
  for (int i = 0; i < kk; ++i) {
    if (i == k) continue;
    double beta2_i = std::norm(reflection_coeff(p.rcs, states[i].dist));
    den += g2 * beta2_i * beam_gain(i);
  }
  return num / den;
}

double delay_variance(double snr, const SystemParams& p) {
  if (snr < 0 || std::isnan(snr))
    throw std::invalid_argument("delay_variance: snr must be >= 0");
  if (snr == 0) return kInf;
  return p.delay_res_s * p.delay_res_s / snr;
}

double doppler_variance(double snr, const SystemParams& p) {
  if (snr < 0 || std::isnan(snr))
    throw std::invalid_argument("doppler_variance: snr must be >= 0");
  if (snr == 0) return kInf;
  return p.doppler_res_hz * p.doppler_res_hz / snr;
}

std::complex<double> dr_dtheta(const VehicleState& s,
                               const Eigen::VectorXcd& w_k,
                               const SystemParams& p) {
  if (w_k.size() != p.n_tx)
    throw std::invalid_argument("dr_dtheta: beam length mismatch");
  const std::complex<double> beta = reflection_coeff(p.rcs, s.dist);
  const double c = std::cos(s.theta);
  const double st = std::sin(s.theta);
  std::complex<double> sum = 0.0;
  for (int m = 1; m < p.n_tx; ++m) {  // element 1-based index m+1; m phases
    std::complex<double> phase = std::polar(1.0, std::numbers::pi * m * c);
    sum += w_k(m) * phase * std::complex<double>(0.0, std::numbers::pi * m) *
           st;
  }
  return -std::sqrt(static_cast<double>(p.n_rx)) * beta * p.mf_gain * sum;
}

double crlb_angle(const VehicleState& s, const Eigen::VectorXcd& w_k,
                  const SystemParams& p) {
  double sens = std::norm(dr_dtheta(s, w_k, p));
  if (sens == 0) return kInf;
  return p.echo_obs_var / sens;
}

double crlb_distance(double snr, const SystemParams& p) {
  double var = delay_variance(snr, p);
  return var * p.wave_speed_mps * p.wave_speed_mps / 4.0;
}

CrlbPair crlb_pair(std::span<const VehicleState> states,
                   const BeamformingMatrix& w, int k, const SystemParams& p) {
  CrlbPair out;
  out.angle = crlb_angle(states[k], w.w.col(k), p);
  out.dist = crlb_distance(echo_snr(states, w, k, p), p);
  return out;
}

double cap_crlb(double value, const SystemParams& p) {
  return std::min(value, p.crlb_cap);
}

Eigen::Matrix3d numerical_fim(std::span<const VehicleState> states,
                              const BeamformingMatrix& w, int k,
                              const SystemParams& p,
                              std::array<double, 3> steps) {
  const VehicleState& s = states[k];
  const Eigen::VectorXcd w_k = w.w.col(k);
  const std::complex<double> beta = reflection_coeff(p.rcs, s.dist);
  const double g = std::sqrt(array_gain_sq(p));
  const double c = p.wave_speed_mps;

  auto echo_mean = [&](double theta) {
    return g * beta * p.mf_gain * steering_vector(theta, p.n_tx).dot(w_k);
  };

  // Central differences of the observation mean map; rows are the filtered
  // echo, the delay and the Doppler shift.
  Eigen::Matrix3cd jac = Eigen::Matrix3cd::Zero();
  jac(0, 0) = (echo_mean(s.theta + steps[0]) - echo_mean(s.theta - steps[0])) /
              (2.0 * steps[0]);
  auto delay = [&](double d) { return 2.0 * d / c; };
  jac(1, 1) = (delay(s.dist + steps[1]) - delay(s.dist - steps[1])) /
              (2.0 * steps[1]);
  auto doppler = [&](double vr) { return 2.0 * vr * p.carrier_hz / c; };
  jac(2, 2) =
      (doppler(s.radial_speed + steps[2]) - doppler(s.radial_speed - steps[2])) /
      (2.0 * steps[2]);

  const double snr = echo_snr(states, w, k, p);
  Eigen::Vector3d var(p.echo_obs_var, delay_variance(snr, p),
                      doppler_variance(snr, p));
  Eigen::Matrix3d fim = Eigen::Matrix3d::Zero();
  for (int r = 0; r < 3; ++r)
    for (int cc = 0; cc < 3; ++cc) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < 3; ++i)
        acc += std::conj(jac(i, r)) * jac(i, cc) / var(i);
      fim(r, cc) = acc.real();
    }
  return fim;
}

}  // namespace isac
