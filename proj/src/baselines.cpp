#include "isac/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isac {

std::vector<double> waterfilling(std::span<const double> gains,
                                 double total_power) {
  if (gains.empty()) throw std::invalid_argument("waterfilling: no gains");
  if (!(total_power > 0))
    throw std::invalid_argument("waterfilling: budget must be positive");
  for (std::size_t k = 0; k < gains.size(); ++k)
    if (!(gains[k] > 0) || !std::isfinite(gains[k]))
      throw std::invalid_argument("waterfilling: gain " + std::to_string(k) +
                                  " must be positive and finite");

  // Active-set iteration: water level over the currently active users,
  // dropping any user whose inverse gain sits above the level.
  std::vector<bool> active(gains.size(), true);
  double mu = 0;
  for (;;) {
    double inv_sum = 0;
    int n_active = 0;
    for (std::size_t k = 0; k < gains.size(); ++k)
      if (active[k]) {
        inv_sum += 1.0 / gains[k];
        ++n_active;
      }
    if (n_active == 0)
      throw std::invalid_argument("waterfilling: no feasible allocation");
    mu = (total_power + inv_sum) / n_active;
    bool dropped = false;
    for (std::size_t k = 0; k < gains.size(); ++k)
      if (active[k] && mu - 1.0 / gains[k] <= 0) {
        active[k] = false;
        dropped = true;
      }
    if (!dropped) break;
  }
  std::vector<double> powers(gains.size(), 0.0);
  for (std::size_t k = 0; k < gains.size(); ++k)
    if (active[k]) powers[k] = mu - 1.0 / gains[k];
  return powers;
}

UpperBound upper_bound(const ChannelSnapshot& h_true, const SystemParams& p) {
  const int k_count = static_cast<int>(h_true.h.cols());
  std::vector<double> gains(k_count);
  for (int k = 0; k < k_count; ++k)
    gains[k] = h_true.h.col(k).squaredNorm() / p.noise_rx_for(k);
  std::vector<double> powers = waterfilling(gains, p.power_budget_w);

  Eigen::MatrixXcd w(h_true.h.rows(), k_count);
  UpperBound out;
  for (int k = 0; k < k_count; ++k) {
    double norm = h_true.h.col(k).norm();
    w.col(k) = std::sqrt(powers[k]) / norm * h_true.h.col(k);
    out.rate += std::log2(1.0 + powers[k] * gains[k]);
  }
  out.w = make_beamformer(std::move(w));
  return out;
}

BeamformingMatrix random_beamformer(const SystemParams& p, Rng& rng) {
  Eigen::MatrixXcd w(p.n_tx, p.n_vehicles);
  for (int k = 0; k < p.n_vehicles; ++k)
    for (int m = 0; m < p.n_tx; ++m) w(m, k) = rng.cnormal();
  w *= std::sqrt(p.power_budget_w) / w.norm();
  return make_beamformer(std::move(w));
}

void NaiveNetConfig::validate() const {
  if (n_tx <= 0 || k_vehicles <= 0 || hidden <= 0)
    throw std::invalid_argument("naive net dimensions must be positive");
  if (!(input_gain > 0))
    throw std::invalid_argument("input_gain must be positive");
}

ad::Tensor naive_map_input(const Eigen::MatrixXcd& last_snapshot,
                           const NaiveNetConfig& cfg) {
  cfg.validate();
  if (last_snapshot.rows() != cfg.n_tx ||
      last_snapshot.cols() != cfg.k_vehicles)
    throw std::invalid_argument(
        "snapshot is " + std::to_string(last_snapshot.rows()) + "x" +
        std::to_string(last_snapshot.cols()) + ", expected " +
        std::to_string(cfg.n_tx) + "x" + std::to_string(cfg.k_vehicles));
  ad::Tensor out = ad::Tensor::zeros({cfg.input_dim()});
  const int half = cfg.k_vehicles * cfg.n_tx;
  for (int k = 0; k < cfg.k_vehicles; ++k)
    for (int m = 0; m < cfg.n_tx; ++m) {
      out[k * cfg.n_tx + m] = last_snapshot(m, k).real();
      out[half + k * cfg.n_tx + m] = last_snapshot(m, k).imag();
    }
  return out;
}

namespace {

ad::Tensor glorot_dense(int rows, int cols, Rng& rng) {
  ad::Tensor t = ad::Tensor::zeros({rows, cols});
  const double b = std::sqrt(6.0 / (rows + cols));
  for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-b, b);
  return t;
}

}  // namespace

ParameterSet naive_init(const NaiveNetConfig& cfg, Rng& rng) {
  cfg.validate();
  ParameterSet params;
  params.add("fc1.weight", glorot_dense(cfg.hidden, cfg.input_dim(), rng));
  params.add("fc1.bias", ad::Tensor::zeros({cfg.hidden}));
  params.add("fc2.weight", glorot_dense(cfg.hidden, cfg.hidden, rng));
  params.add("fc2.bias", ad::Tensor::zeros({cfg.hidden}));
  params.add("fc3.weight", glorot_dense(cfg.output_dim(), cfg.hidden, rng));
  params.add("fc3.bias", ad::Tensor::zeros({cfg.output_dim()}));
  return params;
}

ad::Value naive_forward(ad::Graph& g, std::span<const ad::Value> params,
                        const ad::Tensor& input, const NaiveNetConfig& cfg) {
  cfg.validate();
  if (params.size() != 6)
    throw std::invalid_argument("expected 6 parameters, got " +
                                std::to_string(params.size()));
  if (input.shape != std::vector<int>{cfg.input_dim()})
    throw std::invalid_argument("input has shape " +
                                ad::shape_str(input.shape) + ", expected " +
                                ad::shape_str({cfg.input_dim()}));
  ad::Tensor scaled = input;
  scaled.data *= cfg.input_gain;
  ad::Value x = g.constant(std::move(scaled));
  x = ad::relu(ad::add(ad::matmul(params[0], x), params[1]));
  x = ad::relu(ad::add(ad::matmul(params[2], x), params[3]));
  x = ad::add(ad::matmul(params[4], x), params[5]);
  return ad::reshape(x, {cfg.n_tx, 2 * cfg.k_vehicles});
}

}  // namespace isac
