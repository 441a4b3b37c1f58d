#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "isac/hcl_net.hpp"
#include "isac/objective.hpp"
#include "isac/rng.hpp"
#include "isac/sensing.hpp"

using namespace isac;
namespace ad = isac::ad;
using std::numbers::pi;

namespace {

VehicleState polar_state(double theta, double dist, double speed) {
  VehicleState s;
  s.theta = theta;
  s.dist = dist;
  s.speed = speed;
  s.radial_speed = speed * std::cos(theta);
  s.pos = {dist * std::cos(theta), dist * std::sin(theta)};
  return s;
}

TruthSlot slot_from_states(std::vector<VehicleState> states,
                           const SystemParams& p) {
  TruthSlot t;
  t.channel = snapshot_from_states(states, p, 0);
  t.states = std::move(states);
  return t;
}

/// Test parameters with sensing noise scaled so the angle and distance
/// hinges are active (and smooth) for order-one beams on an 8-element array.
SystemParams active_params() {
  SystemParams p;
  p.n_tx = 8;
  p.n_rx = 8;
  p.n_vehicles = 3;
  p.echo_obs_var = 1e5;
  p.delay_res_s = 1e-3;
  p.crlb_angle_max = 0.01;
  p.crlb_dist_max = 0.01;
  return p;
}

std::vector<VehicleState> reference_states(Rng& rng) {
  return {polar_state(rng.uniform(0.6, 1.1), rng.uniform(18.0, 28.0), 8.0),
          polar_state(rng.uniform(0.5, 0.9), rng.uniform(28.0, 38.0), 8.1),
          polar_state(rng.uniform(0.4, 0.7), rng.uniform(38.0, 48.0), 8.2)};
}

HclConfig shape_config(const SystemParams& p) {
  HclConfig cfg;
  cfg.n_tx = p.n_tx;
  cfg.k_vehicles = p.n_vehicles;
  return cfg;
}

ad::Tensor random_raw(const SystemParams& p, Rng& rng, double scale) {
  ad::Tensor raw = ad::Tensor::zeros({p.n_tx, 2 * p.n_vehicles});
  for (int i = 0; i < raw.size(); ++i) raw[i] = scale * rng.normal();
  return raw;
}

struct Batch {
  std::vector<TruthSlot> examples;
  std::vector<ad::Tensor> raws;
  std::vector<BeamformingMatrix> ws;
};

Batch make_batch(const SystemParams& p, int n, Rng& rng, double scale) {
  Batch b;
  HclConfig shape = shape_config(p);
  for (int i = 0; i < n; ++i) {
    b.examples.push_back(slot_from_states(reference_states(rng), p));
    b.raws.push_back(random_raw(p, rng, scale));
    b.ws.push_back(map_output(b.raws.back(), shape));
  }
  return b;
}

double graph_cost(const SystemParams& p, std::span<const TruthSlot> examples,
                  std::span<const ad::Tensor> raws) {
  ad::Graph g;
  std::vector<ad::Value> vs;
  for (const auto& r : raws) vs.push_back(g.leaf(r));
  return build_batch_cost(g, examples, vs, p).cost.val().item();
}

}  // namespace

TEST_CASE("power hinges with hand-computed values") {
  SystemParams p;
  p.n_tx = 2;
  p.n_vehicles = 1;
  p.power_budget_w = 1.0;
  // Make the sensing hinges inactive so only power contributes.
  p.crlb_angle_max = 1e7;
  p.crlb_dist_max = 1e7;
  p.crlb_cap = 1e6;

  VehicleState s = polar_state(0.9, 20.0, 8.0);
  TruthSlot slot = slot_from_states({s}, p);

  // ||W||^2 = 2: hinge = 1, penalty = 1e3 * 1^2 = 1000.
  Eigen::MatrixXcd wm(2, 1);
  wm << 1.0, 1.0;
  std::vector<TruthSlot> ex{slot};
  std::vector<BeamformingMatrix> ws{make_beamformer(wm)};
  PenaltyBreakdown b = batch_objective(ex, ws, p);
  CHECK(b.power_penalty == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(b.power_used_w == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.angle_penalty == 0.0);
  CHECK(b.dist_penalty == 0.0);
  CHECK(b.total ==
        doctest::Approx(b.sum_rate_term - 1000.0).epsilon(1e-12));

  // ||W||^2 = 1 + 1e-3: penalty = 1e3 * (1e-3)^2 = 1e-3.
  wm << std::sqrt((1.0 + 1e-3) / 2.0), std::sqrt((1.0 + 1e-3) / 2.0);
  std::vector<BeamformingMatrix> ws2{make_beamformer(wm)};
  PenaltyBreakdown b2 = batch_objective(ex, ws2, p);
  CHECK(b2.power_penalty == doctest::Approx(1e-3).epsilon(1e-9));

  // Under budget: no penalty at all.
  wm << 0.5, 0.5;
  std::vector<BeamformingMatrix> ws3{make_beamformer(wm)};
  CHECK(batch_objective(ex, ws3, p).power_penalty == 0.0);
}

TEST_CASE("sensing penalties hinge the batch means") {
  SystemParams p = active_params();
  Rng rng(2);
  Batch b = make_batch(p, 3, rng, 0.4);
  PenaltyBreakdown pb = batch_objective(b.examples, b.ws, p);

  // Recompute the means from the closed-form bounds directly.
  double ma = 0, md = 0, rate = 0;
  for (std::size_t i = 0; i < b.examples.size(); ++i) {
    for (int k = 0; k < p.n_vehicles; ++k) {
      CrlbPair c = crlb_pair(b.examples[i].states, b.ws[i], k, p);
      ma += cap_crlb(c.angle, p);
      md += cap_crlb(c.dist, p);
    }
    rate += sum_rate(b.examples[i].channel, b.ws[i], p);
  }
  ma /= 3.0 * p.n_vehicles;
  md /= 3.0 * p.n_vehicles;
  rate /= 3.0;
  CHECK(pb.mean_crlb_angle == doctest::Approx(ma).epsilon(1e-12));
  CHECK(pb.mean_crlb_dist == doctest::Approx(md).epsilon(1e-12));
  CHECK(pb.sum_rate_term == doctest::Approx(rate).epsilon(1e-12));

  auto hinge = [](double v) { return v > 0 ? v : 0.0; };
  CHECK(pb.angle_penalty ==
        doctest::Approx(p.penalty_angle *
                        std::pow(hinge(ma - p.crlb_angle_max), 2))
            .epsilon(1e-12));
  CHECK(pb.dist_penalty ==
        doctest::Approx(p.penalty_dist *
                        std::pow(hinge(md - p.crlb_dist_max), 2))
            .epsilon(1e-12));
  CHECK(pb.total == doctest::Approx(pb.sum_rate_term - pb.angle_penalty -
                                    pb.dist_penalty - pb.power_penalty)
                        .epsilon(1e-12));
}

TEST_CASE("batch couples examples through the mean, not per-example hinges") {
  SystemParams p = active_params();
  Rng rng(3);
  Batch b = make_batch(p, 2, rng, 0.4);

  std::vector<TruthSlot> first{b.examples[0]}, second{b.examples[1]};
  std::vector<BeamformingMatrix> w1{b.ws[0]}, w2{b.ws[1]};
  PenaltyBreakdown pa = batch_objective(first, w1, p);
  PenaltyBreakdown pb = batch_objective(second, w2, p);
  PenaltyBreakdown both = batch_objective(b.examples, b.ws, p);

  // The angle/distance terms hinge the pooled mean...
  double pooled = (pa.mean_crlb_angle + pb.mean_crlb_angle) / 2.0;
  CHECK(both.mean_crlb_angle == doctest::Approx(pooled).epsilon(1e-12));
  CHECK(both.angle_penalty ==
        doctest::Approx(p.penalty_angle *
                        std::pow(std::max(0.0, pooled - p.crlb_angle_max), 2))
            .epsilon(1e-12));
  // ...while the power term averages per-example squared hinges.
  CHECK(both.power_penalty ==
        doctest::Approx((pa.power_penalty + pb.power_penalty) / 2.0)
            .epsilon(1e-12));
}

TEST_CASE("graph cost equals the numeric objective") {
  SystemParams p = active_params();
  Rng rng(4);
  Batch b = make_batch(p, 3, rng, 0.4);
  PenaltyBreakdown pb = batch_objective(b.examples, b.ws, p);

  ad::Graph g;
  std::vector<ad::Value> vs;
  for (const auto& r : b.raws) vs.push_back(g.leaf(r));
  CostGraph cg = build_batch_cost(g, b.examples, vs, p);

  CHECK(cg.cost.val().item() ==
        doctest::Approx(-pb.total).epsilon(1e-10));
  CHECK(cg.total.val().item() == doctest::Approx(pb.total).epsilon(1e-10));
  CHECK(cg.sum_rate_term.val().item() ==
        doctest::Approx(pb.sum_rate_term).epsilon(1e-10));
  CHECK(cg.angle_penalty.val().item() ==
        doctest::Approx(pb.angle_penalty).epsilon(1e-10));
  CHECK(cg.dist_penalty.val().item() ==
        doctest::Approx(pb.dist_penalty).epsilon(1e-10));
  CHECK(cg.power_penalty.val().item() ==
        doctest::Approx(pb.power_penalty).epsilon(1e-10));
  CHECK(cg.mean_crlb_angle.val().item() ==
        doctest::Approx(pb.mean_crlb_angle).epsilon(1e-10));
  CHECK(cg.mean_crlb_dist.val().item() ==
        doctest::Approx(pb.mean_crlb_dist).epsilon(1e-10));
}

TEST_CASE("cost gradient matches finite differences") {
  SystemParams p = active_params();
  // Unit penalty weights and a delay resolution that puts the distance
  // bound at order one keep all cost terms on comparable scales, so the
  // finite-difference probes are not drowned in rounding noise.
  p.penalty_angle = 1.0;
  p.penalty_dist = 1.0;
  p.penalty_power = 1.0;
  p.delay_res_s = 5e-9;
  Rng rng(5);
  Batch b = make_batch(p, 2, rng, 0.4);

  // Keep the check meaningful: all three hinges must be active and well
  // away from their kinks, and no bound may sit near the saturation cap.
  PenaltyBreakdown pb = batch_objective(b.examples, b.ws, p);
  REQUIRE(pb.mean_crlb_angle - p.crlb_angle_max > 1e-3);
  REQUIRE(pb.mean_crlb_dist - p.crlb_dist_max > 1e-3);
  REQUIRE(pb.power_penalty > 0.0);
  REQUIRE(pb.mean_crlb_angle < 1e5 / (2.0 * p.n_vehicles));
  REQUIRE(pb.mean_crlb_dist < 1e5 / (2.0 * p.n_vehicles));

  ad::Graph g;
  std::vector<ad::Value> vs;
  for (const auto& r : b.raws) vs.push_back(g.leaf(r));
  CostGraph cg = build_batch_cost(g, b.examples, vs, p);
  g.backward(cg.cost);

  auto f = [&](std::span<const ad::Tensor> raws) {
    return graph_cost(p, b.examples, raws);
  };
  std::vector<ad::Tensor> fd = ad::finite_diff_gradient(f, b.raws, 1e-6);
  for (std::size_t i = 0; i < b.raws.size(); ++i) {
    const ad::Tensor& an = g.grad(vs[i]);
    for (int j = 0; j < an.size(); ++j) {
      double denom = std::max({std::abs(fd[i][j]), std::abs(an[j]), 1e-3});
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(an[j] - fd[i][j]) / denom < 1e-4);
    }
  }
}

TEST_CASE("blind beams keep the gradient finite") {
  SystemParams p = active_params();
  Rng rng(6);
  Batch b = make_batch(p, 1, rng, 0.4);
  // Silence vehicle 1's beam: its bounds saturate at the cap (infinite in
  // truth), and every gradient must still come back finite.
  for (int m = 0; m < p.n_tx; ++m) {
    b.raws[0][m * 6 + 1] = 0.0;
    b.raws[0][m * 6 + 4] = 0.0;
  }
  HclConfig shape = shape_config(p);
  b.ws[0] = map_output(b.raws[0], shape);

  CrlbPair blind = crlb_pair(b.examples[0].states, b.ws[0], 1, p);
  REQUIRE(std::isinf(blind.angle));

  PenaltyBreakdown pb = batch_objective(b.examples, b.ws, p);
  CHECK(std::isfinite(pb.total));

  ad::Graph g;
  std::vector<ad::Value> vs{g.leaf(b.raws[0])};
  CostGraph cg = build_batch_cost(g, b.examples, vs, p);
  CHECK(std::isfinite(cg.cost.val().item()));
  CHECK(cg.cost.val().item() == doctest::Approx(-pb.total).epsilon(1e-10));
  g.backward(cg.cost);
  const ad::Tensor& gr = g.grad(vs[0]);
  for (int j = 0; j < gr.size(); ++j) {
    CAPTURE(j);
    CHECK(std::isfinite(gr[j]));
  }
}

TEST_CASE("larger penalty weights never help a violating batch") {
  SystemParams p = active_params();
  Rng rng(7);
  Batch b = make_batch(p, 2, rng, 0.5);
  PenaltyBreakdown soft = batch_objective(b.examples, b.ws, p);
  REQUIRE(soft.angle_penalty > 0.0);

  SystemParams hard = p;
  hard.penalty_angle *= 10;
  hard.penalty_dist *= 10;
  hard.penalty_power *= 10;
  PenaltyBreakdown strict = batch_objective(b.examples, b.ws, hard);
  CHECK(strict.total < soft.total);
  CHECK(strict.sum_rate_term == doctest::Approx(soft.sum_rate_term));
}

TEST_CASE("feasible batches are penalty-free and weight-independent") {
  SystemParams p = active_params();
  p.crlb_angle_max = 1e7;  // looser than the cap: always satisfied
  p.crlb_dist_max = 1e7;
  Rng rng(8);
  Batch b = make_batch(p, 2, rng, 0.05);  // far under the power budget
  PenaltyBreakdown pb = batch_objective(b.examples, b.ws, p);
  REQUIRE(pb.angle_penalty == 0.0);
  REQUIRE(pb.dist_penalty == 0.0);
  REQUIRE(pb.power_penalty == 0.0);

  SystemParams q = p;
  q.penalty_angle = 1.0;
  q.penalty_dist = 1.0;
  q.penalty_power = 1.0;
  CHECK(batch_objective(b.examples, b.ws, q).total == pb.total);
  CHECK(pb.total == pb.sum_rate_term);
}

TEST_CASE("feasibility slack of aligned and blind beams") {
  SystemParams p;
  p.n_vehicles = 1;
  VehicleState s = polar_state(pi / 2, 20.0, 8.0);
  TruthSlot slot = slot_from_states({s}, p);

  Eigen::MatrixXcd aligned =
      steering_vector(s.theta, p.n_tx) * std::sqrt(p.power_budget_w);
  FeasibilitySlack ok = feasibility_report(make_beamformer(aligned), slot, p);
  CHECK(ok.angle == doctest::Approx(p.crlb_angle_max).epsilon(1e-9));
  CHECK(ok.dist == doctest::Approx(p.crlb_dist_max).epsilon(1e-4));
  CHECK(std::abs(ok.power) < 1e-12);

  Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(p.n_tx, 1);
  FeasibilitySlack bad = feasibility_report(make_beamformer(zero), slot, p);
  CHECK(bad.angle == doctest::Approx(p.crlb_angle_max - p.crlb_cap));
  CHECK(bad.dist == doctest::Approx(p.crlb_dist_max - p.crlb_cap));
  CHECK(bad.power == doctest::Approx(p.power_budget_w));
}

TEST_CASE("shape errors are rejected") {
  SystemParams p = active_params();
  Rng rng(9);
  Batch b = make_batch(p, 2, rng, 0.4);
  std::vector<TruthSlot> none;
  std::vector<BeamformingMatrix> no_w;
  CHECK_THROWS_AS(batch_objective(none, no_w, p), std::invalid_argument);
  std::vector<BeamformingMatrix> short_w{b.ws[0]};
  CHECK_THROWS_AS(batch_objective(b.examples, short_w, p),
                  std::invalid_argument);

  ad::Graph g;
  std::vector<ad::Value> wrong{
      g.leaf(ad::Tensor::zeros({p.n_tx, 2 * p.n_vehicles})),
      g.leaf(ad::Tensor::zeros({p.n_tx + 1, 2 * p.n_vehicles}))};
  CHECK_THROWS_AS(build_batch_cost(g, b.examples, wrong, p),
                  std::invalid_argument);
}
