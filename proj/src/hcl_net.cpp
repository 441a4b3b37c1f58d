#include "isac/hcl_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isac {

namespace {

using ad::Graph;
using ad::Tensor;
using ad::Value;

void positive(int v, const char* what) {
  if (v <= 0)
    throw std::invalid_argument(std::string(what) + " must be positive, got " +
                                std::to_string(v));
}

/// Uniform Glorot fill: bound sqrt(6 / (fan_in + fan_out)).
Tensor glorot(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  const double b = std::sqrt(6.0 / (fan_in + fan_out));
  for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-b, b);
  return t;
}

}  // namespace

void HclConfig::validate() const {
  positive(tau, "tau");
  positive(k_vehicles, "k_vehicles");
  positive(n_tx, "n_tx");
  positive(conv_filters, "conv_filters");
  positive(conv_kernel, "conv_kernel");
  positive(pool_size, "pool_size");
  positive(pool_stride, "pool_stride");
  positive(lstm_hidden, "lstm_hidden");
  if (!(input_gain > 0))
    throw std::invalid_argument("input_gain must be positive");
  if (pool_size != pool_stride)
    throw std::invalid_argument(
        "pool_size must equal pool_stride so pooled windows tile the "
        "antenna axis");
  if (n_tx < pool_size)
    throw std::invalid_argument("n_tx smaller than the pooling window");
}

ad::Tensor map_input(const EstimatedHistory& history, const HclConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(history.snapshots.size()) != cfg.tau)
    throw std::invalid_argument(
        "history has " + std::to_string(history.snapshots.size()) +
        " snapshots, expected " + std::to_string(cfg.tau));
  Tensor out = Tensor::zeros({cfg.tau, cfg.k_vehicles, cfg.n_tx, 2});
  for (int l = 0; l < cfg.tau; ++l) {
    const Eigen::MatrixXcd& h = history.snapshots[l];
    if (h.rows() != cfg.n_tx || h.cols() != cfg.k_vehicles)
      throw std::invalid_argument(
          "snapshot " + std::to_string(l) + " is " + std::to_string(h.rows()) +
          "x" + std::to_string(h.cols()) + ", expected " +
          std::to_string(cfg.n_tx) + "x" + std::to_string(cfg.k_vehicles));
    for (int k = 0; k < cfg.k_vehicles; ++k)
      for (int m = 0; m < cfg.n_tx; ++m) {
        int base = (((l * cfg.k_vehicles) + k) * cfg.n_tx + m) * 2;
        out[base] = h(m, k).real();
        out[base + 1] = h(m, k).imag();
      }
  }
  return out;
}

ParameterSet hcl_init(const HclConfig& cfg, Rng& rng) {
  cfg.validate();
  ParameterSet params;
  const int f = cfg.conv_filters, kk = cfg.conv_kernel;
  for (int k = 0; k < cfg.k_vehicles; ++k) {
    std::string stem = "conv" + std::to_string(k);
    params.add(stem + ".kernel",
               glorot({f, kk, kk, 2}, kk * kk * 2, kk * kk * f, rng));
    params.add(stem + ".bias", Tensor::zeros({f}));
  }
  const int d = cfg.concat_dim(), h = cfg.lstm_hidden;
  const char* gates[] = {"i", "f", "o", "g"};
  for (const char* gate : gates) {
    params.add(std::string("lstm.w_") + gate,
               glorot({h, d + h}, d + h, h, rng));
    params.add(std::string("lstm.b_") + gate,
               std::string(gate) == "f" ? Tensor::full({h}, 1.0)
                                        : Tensor::zeros({h}));
  }
  params.add("fc.weight",
             glorot({cfg.output_dim(), h}, h, cfg.output_dim(), rng));
  params.add("fc.bias", Tensor::zeros({cfg.output_dim()}));
  return params;
}

namespace {

void expect_shape(const Value& v, std::vector<int> shape, const char* what) {
  if (v.val().shape != shape)
    throw std::invalid_argument(std::string(what) + " has shape " +
                                ad::shape_str(v.val().shape) + ", expected " +
                                ad::shape_str(shape));
}

}  // namespace

ad::Value hcl_forward(ad::Graph& g, std::span<const ad::Value> params,
                      const ad::Tensor& input, const HclConfig& cfg,
                      HclTrace* trace) {
  cfg.validate();
  const int k_count = cfg.k_vehicles, nt = cfg.n_tx, f = cfg.conv_filters;
  const int kk = cfg.conv_kernel, h = cfg.lstm_hidden, d = cfg.concat_dim();
  if (static_cast<int>(params.size()) != 2 * k_count + 10)
    throw std::invalid_argument(
        "expected " + std::to_string(2 * k_count + 10) + " parameters, got " +
        std::to_string(params.size()));
  if (input.shape != std::vector<int>{cfg.tau, k_count, nt, 2})
    throw std::invalid_argument("input has shape " +
                                ad::shape_str(input.shape) + ", expected " +
                                ad::shape_str({cfg.tau, k_count, nt, 2}));
  for (int k = 0; k < k_count; ++k) {
    expect_shape(params[2 * k], {f, kk, kk, 2}, "conv kernel");
    expect_shape(params[2 * k + 1], {f}, "conv bias");
  }
  ad::LstmParams lstm{params[2 * k_count],     params[2 * k_count + 1],
                      params[2 * k_count + 2], params[2 * k_count + 3],
                      params[2 * k_count + 4], params[2 * k_count + 5],
                      params[2 * k_count + 6], params[2 * k_count + 7]};
  expect_shape(lstm.w_i, {h, d + h}, "lstm gate weight");
  expect_shape(lstm.b_i, {h}, "lstm gate bias");
  Value fc_w = params[2 * k_count + 8];
  Value fc_b = params[2 * k_count + 9];
  expect_shape(fc_w, {cfg.output_dim(), h}, "head weight");
  expect_shape(fc_b, {cfg.output_dim()}, "head bias");

  Value hidden = g.constant(Tensor::zeros({h}));
  Value cell = g.constant(Tensor::zeros({h}));
  for (int l = 0; l < cfg.tau; ++l) {
    std::vector<Value> blocks;
    blocks.reserve(k_count);
    for (int k = 0; k < k_count; ++k) {
      // The (l, k) slab of the input is contiguous: an n_tx-tall, 1-wide,
      // 2-channel image.
      Tensor img = Tensor::zeros({nt, 1, 2});
      int base = ((l * k_count) + k) * nt * 2;
      for (int i = 0; i < nt * 2; ++i)
        img[i] = cfg.input_gain * input[base + i];
      Value x = g.constant(std::move(img));
      Value conv = ad::relu(
          ad::conv2d(x, params[2 * k], params[2 * k + 1], ad::Pad::same));
      Value pooled =
          ad::maxpool2d(conv, cfg.pool_size, 1, cfg.pool_stride, 1);
      blocks.push_back(ad::reshape(pooled, {cfg.flatten_dim()}));
    }
    Value step = ad::concat(blocks, 0);
    if (trace) trace->concat_steps.push_back(step.val());
    auto [h_next, c_next] = ad::lstm_cell(step, hidden, cell, lstm);
    hidden = h_next;
    cell = c_next;
  }
  Value out = ad::add(ad::matmul(fc_w, hidden), fc_b);
  return ad::reshape(out, {nt, 2 * k_count});
}

BeamformingMatrix map_output(const ad::Tensor& raw, const HclConfig& cfg) {
  const int nt = cfg.n_tx, k_count = cfg.k_vehicles;
  if (raw.shape != std::vector<int>{nt, 2 * k_count})
    throw std::invalid_argument("raw output has shape " +
                                ad::shape_str(raw.shape) + ", expected " +
                                ad::shape_str({nt, 2 * k_count}));
  Eigen::MatrixXcd w(nt, k_count);
  for (int m = 0; m < nt; ++m)
    for (int k = 0; k < k_count; ++k)
      w(m, k) = std::complex<double>(raw[m * 2 * k_count + k],
                                     raw[m * 2 * k_count + k_count + k]);
  return make_beamformer(std::move(w));
}

}  // namespace isac
