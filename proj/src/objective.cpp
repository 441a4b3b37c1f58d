#include "isac/objective.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "isac/sensing.hpp"

namespace isac {

namespace {

double hinge(double x) { return x > 0 ? x : 0.0; }

void check_batch(std::size_t n_examples, std::size_t n_ws) {
  if (n_examples == 0) throw std::invalid_argument("empty batch");
  if (n_examples != n_ws)
    throw std::invalid_argument(
        "batch size mismatch: " + std::to_string(n_examples) +
        " examples vs " + std::to_string(n_ws) + " beamformers");
}

}  // namespace

PenaltyBreakdown batch_objective(std::span<const TruthSlot> examples,
                                 std::span<const BeamformingMatrix> ws,
                                 const SystemParams& p) {
  check_batch(examples.size(), ws.size());
  const double n = static_cast<double>(examples.size());

  PenaltyBreakdown out;
  double power_hinge_sq = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const TruthSlot& ex = examples[i];
    out.sum_rate_term += sum_rate(ex.channel, ws[i], p);
    const int k_count = static_cast<int>(ex.states.size());
    for (int k = 0; k < k_count; ++k) {
      CrlbPair b = crlb_pair(ex.states, ws[i], k, p);
      out.mean_crlb_angle += cap_crlb(b.angle, p) / k_count;
      out.mean_crlb_dist += cap_crlb(b.dist, p) / k_count;
    }
    out.power_used_w += ws[i].power_used_w;
    double h = hinge(ws[i].power_used_w - p.power_budget_w);
    power_hinge_sq += h * h;
  }
  out.sum_rate_term /= n;
  out.mean_crlb_angle /= n;
  out.mean_crlb_dist /= n;
  out.power_used_w /= n;

  double ha = hinge(out.mean_crlb_angle - p.crlb_angle_max);
  double hd = hinge(out.mean_crlb_dist - p.crlb_dist_max);
  out.angle_penalty = p.penalty_angle * ha * ha;
  out.dist_penalty = p.penalty_dist * hd * hd;
  out.power_penalty = p.penalty_power * power_hinge_sq / n;
  out.total = out.sum_rate_term - out.angle_penalty - out.dist_penalty -
              out.power_penalty;
  return out;
}

FeasibilitySlack feasibility_report(const BeamformingMatrix& w,
                                    const TruthSlot& example,
                                    const SystemParams& p) {
  const int k_count = static_cast<int>(example.states.size());
  if (k_count == 0) throw std::invalid_argument("example has no vehicles");
  double mean_angle = 0, mean_dist = 0;
  for (int k = 0; k < k_count; ++k) {
    CrlbPair b = crlb_pair(example.states, w, k, p);
    mean_angle += cap_crlb(b.angle, p) / k_count;
    mean_dist += cap_crlb(b.dist, p) / k_count;
  }
  FeasibilitySlack s;
  s.angle = p.crlb_angle_max - mean_angle;
  s.dist = p.crlb_dist_max - mean_dist;
  s.power = p.power_budget_w - w.power_used_w;
  return s;
}

namespace {

using ad::Graph;
using ad::Tensor;
using ad::Value;

/// Row-major [rows, cols] constant from a lambda(r, c).
template <typename F>
Value const_matrix(Graph& g, int rows, int cols, F f) {
  Tensor t = Tensor::zeros({rows, cols});
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) t[r * cols + c] = f(r, c);
  return g.constant(std::move(t));
}

template <typename F>
Value const_vector(Graph& g, int n, F f) {
  Tensor t = Tensor::zeros({n});
  for (int i = 0; i < n; ++i) t[i] = f(i);
  return g.constant(std::move(t));
}

/// Main diagonal of a square matrix as a vector: (M .* I) * ones.
Value diag_of(Value m, Value identity, Value ones) {
  return matmul(mul(m, identity), ones);
}

/// Per-example pieces of the cost, each reshaped to rank 1 for stacking.
struct ExampleTerms {
  Value rate;        // [1]
  Value crlb_angle;  // [K], saturated
  Value crlb_dist;   // [K], saturated
  Value power_sq;    // [1], squared power hinge
};

ExampleTerms example_terms(Graph& g, const TruthSlot& ex, Value raw,
                           const SystemParams& p, Value identity,
                           Value ones) {
  const int nt = p.n_tx;
  const int k_count = static_cast<int>(ex.states.size());
  if (ex.channel.h.rows() != nt ||
      ex.channel.h.cols() != k_count)
    throw std::invalid_argument("truth channel shape does not match states");
  const Tensor& rawv = raw.val();
  if (rawv.rank() != 2 || rawv.shape[0] != nt ||
      rawv.shape[1] != 2 * k_count)
    throw std::invalid_argument(
        "raw beamformer tensor must be [n_tx, 2K], got " +
        ad::shape_str(rawv.shape));

  // Products of the conjugated rows with W = Wr + i Wi, both halves at once:
  // matmul(Re, raw) = [Re*Wr | Re*Wi], matmul(Im, raw) = [Im*Wr | Im*Wi].
  auto complex_row_products = [&](auto re_f, auto im_f) {
    Value re = const_matrix(g, k_count, nt, re_f);
    Value im = const_matrix(g, k_count, nt, im_f);
    return std::pair{matmul(re, raw), matmul(im, raw)};
  };
  auto split = [&](Value m, int half) {
    return slice(m, 1, half * k_count, k_count);
  };

  // |h_k^H w_j|^2 -> receive powers.
  auto [hre_w, him_w] = complex_row_products(
      [&](int k, int m) { return ex.channel.h(m, k).real(); },
      [&](int k, int m) { return ex.channel.h(m, k).imag(); });
  Value re_hw = add(split(hre_w, 0), split(him_w, 1));
  Value im_hw = sub(split(hre_w, 1), split(him_w, 0));
  Value rx_pow = add(square(re_hw), square(im_hw));  // [K,K]

  Value rx_diag = diag_of(rx_pow, identity, ones);
  Value rx_rows = matmul(rx_pow, ones);
  Value rx_noise =
      const_vector(g, k_count, [&](int k) { return p.noise_rx_for(k); });
  Value sinr = divide(rx_diag, add(sub(rx_rows, rx_diag), rx_noise));
  Value rate = sum(log2(add_scalar(sinr, 1.0)));

  // |a(theta_k)^H w_j|^2 -> echo powers, weighted per reflecting vehicle.
  std::vector<Eigen::VectorXcd> steer(k_count);
  for (int k = 0; k < k_count; ++k)
    steer[k] = steering_vector(ex.states[k].theta, nt);
  auto [are_w, aim_w] = complex_row_products(
      [&](int k, int m) { return steer[k](m).real(); },
      [&](int k, int m) { return steer[k](m).imag(); });
  Value re_aw = add(split(are_w, 0), split(aim_w, 1));
  Value im_aw = sub(split(are_w, 1), split(aim_w, 0));
  Value echo_pow = add(square(re_aw), square(im_aw));  // [K,K]

  const double g2 = static_cast<double>(p.n_tx) * p.n_rx;
  std::vector<double> echo_gain(k_count);
  for (int i = 0; i < k_count; ++i)
    echo_gain[i] =
        g2 * std::norm(reflection_coeff(p.rcs, ex.states[i].dist));
  Value weighted = mul(echo_pow, const_matrix(g, k_count, k_count,
                                              [&](int, int i) {
                                                return echo_gain[i];
                                              }));
  Value echo_diag = diag_of(weighted, identity, ones);
  Value echo_rows = matmul(weighted, ones);
  Value echo_noise =
      const_vector(g, k_count, [&](int) { return p.noise_echo_w; });
  Value snr = divide(echo_diag, add(sub(echo_rows, echo_diag), echo_noise));

  // Distance bound: delay variance at the echo SNR, scaled to meters^2.
  const double dist_num =
      p.delay_res_s * p.delay_res_s * p.wave_speed_mps * p.wave_speed_mps / 4;
  Value crlb_d = clamp_max(
      divide(const_vector(g, k_count, [&](int) { return dist_num; }), snr),
      p.crlb_cap);

  // Angle bound: observation variance over the squared sensitivity of the
  // matched echo to the angle. The sensitivity is linear in column k of W:
  //   dr_k = pref_k * sum_m w_mk * (i pi m sin theta) e^{i pi m cos theta}.
  auto sens = [&](int k, int m) {
    const VehicleState& s = ex.states[k];
    double phase = std::numbers::pi * m * std::cos(s.theta);
    std::complex<double> e(std::cos(phase), std::sin(phase));
    return std::complex<double>(0, std::numbers::pi * m * std::sin(s.theta)) *
           e;
  };
  auto [sre_w, sim_w] = complex_row_products(
      [&](int k, int m) { return sens(k, m).real(); },
      [&](int k, int m) { return sens(k, m).imag(); });
  Value dr_re = diag_of(sub(split(sre_w, 0), split(sim_w, 1)), identity, ones);
  Value dr_im = diag_of(add(split(sre_w, 1), split(sim_w, 0)), identity, ones);
  Value dr_sq = add(square(dr_re), square(dr_im));  // [K]
  Value pref_sq = const_vector(g, k_count, [&](int k) {
    return p.n_rx * std::norm(reflection_coeff(p.rcs, ex.states[k].dist)) *
           p.mf_gain * p.mf_gain;
  });
  Value obs_var =
      const_vector(g, k_count, [&](int) { return p.echo_obs_var; });
  Value crlb_a =
      clamp_max(divide(obs_var, mul(pref_sq, dr_sq)), p.crlb_cap);

  ExampleTerms t{reshape(rate, {1}), crlb_a, crlb_d,
                 reshape(square(ramp(add_scalar(sum(square(raw)),
                                                -p.power_budget_w))),
                         {1})};
  return t;
}

}  // namespace

CostGraph build_batch_cost(ad::Graph& g, std::span<const TruthSlot> examples,
                           std::span<const ad::Value> raw_ws,
                           const SystemParams& p) {
  check_batch(examples.size(), raw_ws.size());
  const int k_count = static_cast<int>(examples[0].states.size());
  Value identity = const_matrix(
      g, k_count, k_count, [](int r, int c) { return r == c ? 1.0 : 0.0; });
  Value ones = const_vector(g, k_count, [](int) { return 1.0; });

  std::vector<Value> rates, angles, dists, powers;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (static_cast<int>(examples[i].states.size()) != k_count)
      throw std::invalid_argument("examples disagree on vehicle count");
    ExampleTerms t =
        example_terms(g, examples[i], raw_ws[i], p, identity, ones);
    rates.push_back(t.rate);
    angles.push_back(t.crlb_angle);
    dists.push_back(t.crlb_dist);
    powers.push_back(t.power_sq);
  }

  CostGraph c;
  c.sum_rate_term = mean(concat(rates, 0));
  c.mean_crlb_angle = mean(concat(angles, 0));
  c.mean_crlb_dist = mean(concat(dists, 0));
  c.angle_penalty = ad::scale(
      square(ramp(add_scalar(c.mean_crlb_angle, -p.crlb_angle_max))),
      p.penalty_angle);
  c.dist_penalty = ad::scale(
      square(ramp(add_scalar(c.mean_crlb_dist, -p.crlb_dist_max))),
      p.penalty_dist);
  c.power_penalty = ad::scale(mean(concat(powers, 0)), p.penalty_power);
  c.total = sub(sub(sub(c.sum_rate_term, c.angle_penalty), c.dist_penalty),
                c.power_penalty);
  c.cost = neg(c.total);
  return c;
}

}  // namespace isac
