#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "isac/hcl_net.hpp"
#include "isac/rng.hpp"

using namespace isac;
namespace ad = isac::ad;

namespace {

EstimatedHistory random_history(int tau, int k, int nt, Rng& rng) {
  EstimatedHistory h;
  h.theta_est.setZero(tau, k);
  h.dist_est.setZero(tau, k);
  for (int t = 0; t < tau; ++t) {
    Eigen::MatrixXcd snap(nt, k);
    for (int r = 0; r < nt; ++r)
      for (int c = 0; c < k; ++c) snap(r, c) = rng.cnormal();
    h.snapshots.push_back(snap);
  }
  return h;
}

HclConfig small_config() {
  HclConfig cfg;
  cfg.tau = 2;
  cfg.k_vehicles = 3;
  cfg.n_tx = 8;
  cfg.lstm_hidden = 8;
  return cfg;
}

ParameterSet zeroed(const ParameterSet& src) {
  ParameterSet out;
  for (int i = 0; i < src.size(); ++i)
    out.add(src.name(i), ad::Tensor::zeros(src.value(i).shape));
  return out;
}

}  // namespace

TEST_CASE("input packing splits real and imaginary parts") {
  HclConfig cfg;
  cfg.tau = 1;
  cfg.k_vehicles = 1;
  cfg.n_tx = 2;
  cfg.pool_size = 2;
  cfg.pool_stride = 2;

  EstimatedHistory h;
  h.theta_est.setZero(1, 1);
  h.dist_est.setZero(1, 1);
  Eigen::MatrixXcd snap(2, 1);
  snap << std::complex<double>(1.0, 2.0), std::complex<double>(3.0, -1.0);
  h.snapshots.push_back(snap);

  ad::Tensor in = map_input(h, cfg);
  REQUIRE(in.shape == std::vector<int>{1, 1, 2, 2});
  CHECK(in[0] == 1.0);
  CHECK(in[1] == 2.0);
  CHECK(in[2] == 3.0);
  CHECK(in[3] == -1.0);
}

TEST_CASE("input packing is oldest first") {
  HclConfig cfg = small_config();
  Rng rng(3);
  EstimatedHistory h = random_history(cfg.tau, cfg.k_vehicles, cfg.n_tx, rng);
  ad::Tensor in = map_input(h, cfg);
  REQUIRE(in.shape ==
          std::vector<int>{cfg.tau, cfg.k_vehicles, cfg.n_tx, 2});
  // Slot l, vehicle k, antenna m: flat ((l*K + k)*nt + m)*2.
  for (int l = 0; l < cfg.tau; ++l)
    for (int k = 0; k < cfg.k_vehicles; ++k)
      for (int m = 0; m < cfg.n_tx; ++m) {
        int base = ((l * cfg.k_vehicles + k) * cfg.n_tx + m) * 2;
        CHECK(in[base] == h.snapshots[l](m, k).real());
        CHECK(in[base + 1] == h.snapshots[l](m, k).imag());
      }
}

TEST_CASE("input packing rejects mismatched histories") {
  HclConfig cfg = small_config();
  Rng rng(4);
  EstimatedHistory short_h =
      random_history(cfg.tau - 1, cfg.k_vehicles, cfg.n_tx, rng);
  CHECK_THROWS_AS(map_input(short_h, cfg), std::invalid_argument);
  EstimatedHistory wrong_nt =
      random_history(cfg.tau, cfg.k_vehicles, cfg.n_tx + 1, rng);
  CHECK_THROWS_AS(map_input(wrong_nt, cfg), std::invalid_argument);
}

TEST_CASE("output decoding pairs column k with column K+k") {
  HclConfig cfg;
  cfg.n_tx = 2;
  cfg.k_vehicles = 2;
  ad::Tensor raw = ad::Tensor::of({2, 4}, {1, 2, 3, 4,  //
                                           5, 6, 7, 8});
  BeamformingMatrix w = map_output(raw, cfg);
  REQUIRE(w.w.rows() == 2);
  REQUIRE(w.w.cols() == 2);
  CHECK(w.w(0, 0) == std::complex<double>(1, 3));
  CHECK(w.w(0, 1) == std::complex<double>(2, 4));
  CHECK(w.w(1, 0) == std::complex<double>(5, 7));
  CHECK(w.w(1, 1) == std::complex<double>(6, 8));
  // Recorded power is exactly the sum of squares of the raw entries.
  CHECK(w.power_used_w == doctest::Approx(raw.data.square().sum()).epsilon(1e-15));
  CHECK_THROWS_AS(map_output(ad::Tensor::zeros({2, 3}), cfg),
                  std::invalid_argument);
}

TEST_CASE("parameter inventory") {
  HclConfig cfg = small_config();
  Rng rng(5);
  ParameterSet ps = hcl_init(cfg, rng);
  REQUIRE(ps.size() == 2 * cfg.k_vehicles + 10);
  CHECK(ps.at("conv0.kernel").shape ==
        std::vector<int>{cfg.conv_filters, 3, 3, 2});
  CHECK(ps.at("conv2.bias").shape == std::vector<int>{cfg.conv_filters});
  int d = cfg.concat_dim(), hh = cfg.lstm_hidden;
  CHECK(ps.at("lstm.w_f").shape == std::vector<int>{hh, d + hh});
  CHECK(ps.at("lstm.b_g").shape == std::vector<int>{hh});
  CHECK(ps.at("fc.weight").shape == std::vector<int>{cfg.output_dim(), hh});
  CHECK(ps.at("fc.bias").shape == std::vector<int>{cfg.output_dim()});

  // Biases start at zero except the forget gate's, which starts open.
  CHECK(ps.at("conv1.bias").data.abs().maxCoeff() == 0.0);
  CHECK(ps.at("fc.bias").data.abs().maxCoeff() == 0.0);
  CHECK(ps.at("lstm.b_i").data.abs().maxCoeff() == 0.0);
  CHECK(ps.at("lstm.b_f").data.minCoeff() == 1.0);
  CHECK(ps.at("lstm.b_f").data.maxCoeff() == 1.0);

  // Weight draws live inside their uniform Glorot bounds.
  double limit = std::sqrt(6.0 / (d + hh + hh));
  CHECK(ps.at("lstm.w_i").data.abs().maxCoeff() <= limit);
  CHECK(ps.at("lstm.w_i").data.abs().maxCoeff() > 0.0);
}

TEST_CASE("initialization is seed-deterministic") {
  HclConfig cfg = small_config();
  Rng r1(42), r2(42), r3(43);
  ParameterSet a = hcl_init(cfg, r1);
  ParameterSet b = hcl_init(cfg, r2);
  ParameterSet c = hcl_init(cfg, r3);
  bool same = true, differs = false;
  for (int i = 0; i < a.size(); ++i) {
    same = same && (a.value(i).data == b.value(i).data).all();
    differs = differs || (a.value(i).data != c.value(i).data).any();
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("zero parameters produce a silent beamformer") {
  HclConfig cfg = small_config();
  Rng rng(6);
  ParameterSet ps = zeroed(hcl_init(cfg, rng));
  EstimatedHistory h = random_history(cfg.tau, cfg.k_vehicles, cfg.n_tx, rng);
  ad::Graph g;
  std::vector<ad::Value> leaves = parameter_constants(g, ps);
  ad::Value raw = hcl_forward(g, leaves, map_input(h, cfg), cfg);
  CHECK(raw.val().data.abs().maxCoeff() == 0.0);
}

TEST_CASE("forward output shape across array sizes") {
  for (int nt : {4, 8, 16, 32, 48}) {
    HclConfig cfg;
    cfg.tau = 2;
    cfg.k_vehicles = 2;
    cfg.n_tx = nt;
    cfg.lstm_hidden = 8;
    cfg.validate();
    CHECK(cfg.flatten_dim() == (nt / 4) * 4);
    Rng rng(7);
    ParameterSet ps = hcl_init(cfg, rng);
    EstimatedHistory h = random_history(cfg.tau, cfg.k_vehicles, nt, rng);
    ad::Graph g;
    std::vector<ad::Value> leaves = parameter_constants(g, ps);
    ad::Value raw = hcl_forward(g, leaves, map_input(h, cfg), cfg);
    CHECK(raw.val().shape == std::vector<int>{nt, 2 * cfg.k_vehicles});
    BeamformingMatrix w = map_output(raw.val(), cfg);
    CHECK(w.w.rows() == nt);
  }
}

TEST_CASE("reference geometry widths") {
  HclConfig cfg;  // defaults: 32 antennas, 3 vehicles, 4 filters, pool 4
  CHECK(cfg.flatten_dim() == 32);
  CHECK(cfg.concat_dim() == 96);
  CHECK(cfg.output_dim() == 192);
  Rng rng(8);
  ParameterSet ps = hcl_init(cfg, rng);
  EstimatedHistory h = random_history(cfg.tau, cfg.k_vehicles, cfg.n_tx, rng);
  ad::Graph g;
  std::vector<ad::Value> leaves = parameter_constants(g, ps);
  HclTrace trace;
  ad::Value raw = hcl_forward(g, leaves, map_input(h, cfg), cfg, &trace);
  REQUIRE(trace.concat_steps.size() == std::size_t(cfg.tau));
  for (const auto& t : trace.concat_steps)
    CHECK(t.shape == std::vector<int>{96});
  CHECK(raw.val().shape == std::vector<int>{32, 6});
}

TEST_CASE("per-vehicle branches are isolated before the concat") {
  HclConfig cfg = small_config();
  Rng rng(9);
  ParameterSet ps = hcl_init(cfg, rng);
  EstimatedHistory h = random_history(cfg.tau, cfg.k_vehicles, cfg.n_tx, rng);

  auto concat_trace = [&](const EstimatedHistory& hist) {
    ad::Graph g;
    std::vector<ad::Value> leaves = parameter_constants(g, ps);
    HclTrace trace;
    hcl_forward(g, leaves, map_input(hist, cfg), cfg, &trace);
    return trace.concat_steps;
  };

  std::vector<ad::Tensor> base = concat_trace(h);
  EstimatedHistory mut = h;
  for (int t = 0; t < cfg.tau; ++t)
    for (int m = 0; m < cfg.n_tx; ++m)
      mut.snapshots[t](m, 1) = rng.cnormal();
  std::vector<ad::Tensor> moved = concat_trace(mut);

  const int fd = cfg.flatten_dim();
  for (int t = 0; t < cfg.tau; ++t) {
    bool mid_changed = false;
    for (int j = 0; j < fd; ++j) {
      // Vehicle 0 and vehicle 2 blocks must be untouched.
      CHECK(base[t][j] == moved[t][j]);
      CHECK(base[t][2 * fd + j] == moved[t][2 * fd + j]);
      mid_changed = mid_changed || base[t][fd + j] != moved[t][fd + j];
    }
    CHECK(mid_changed);
  }
}

TEST_CASE("configuration validation") {
  HclConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  HclConfig bad = cfg;
  bad.pool_stride = 2;  // window and stride must tile the antenna axis
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.n_tx = 2;  // smaller than the pooling window
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.lstm_hidden = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  // Forward rejects a parameter list that does not match the architecture.
  Rng rng(10);
  ParameterSet ps = hcl_init(cfg, rng);
  HclConfig other = cfg;
  other.lstm_hidden = 16;
  EstimatedHistory h = random_history(cfg.tau, cfg.k_vehicles, cfg.n_tx, rng);
  ad::Graph g;
  std::vector<ad::Value> leaves = parameter_constants(g, ps);
  CHECK_THROWS_AS(hcl_forward(g, leaves, map_input(h, other), other),
                  std::invalid_argument);
}
