#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "isac/config.hpp"
#include "isac/csv.hpp"
#include "isac/experiment.hpp"
#include "isac/svg.hpp"
#include "isac/text.hpp"
#include "isac/units.hpp"

using namespace isac;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_occurrences(const std::string& hay, const std::string& pat) {
  std::size_t n = 0;
  for (std::size_t at = hay.find(pat); at != std::string::npos;
       at = hay.find(pat, at + pat.size()))
    ++n;
  return n;
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

std::string what_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

ResultRow sample_row(double rate, double crlb_a, double crlb_d) {
  ResultRow r;
  r.seed = 5;
  r.axis_name = "power_dbm";
  r.axis_value = 30.0;
  r.method = "hcl";
  r.mean_sum_rate = rate;
  r.mean_crlb_theta = crlb_a;
  r.sqrt_crlb_theta = std::sqrt(crlb_a);
  r.mean_crlb_dist = crlb_d;
  r.sqrt_crlb_dist = std::sqrt(crlb_d);
  r.violation_rate_theta = 0.25;
  r.violation_rate_dist = 0.0;
  r.mean_power_w = 1.0;
  r.train_seconds = 0.0;
  return r;
}

}  // namespace

TEST_CASE("default configuration describes the reference scene") {
  ExperimentConfig cfg;
  CHECK(cfg.system.n_tx == 32);
  CHECK(cfg.system.n_rx == 32);
  CHECK(cfg.system.n_vehicles == 3);
  CHECK(cfg.system.power_budget_w == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(cfg.scenario.mean_positions.size() == 3);
  CHECK(cfg.scenario.mean_positions[0].x() == 15.0);
  CHECK(cfg.scenario.mean_positions[1].x() == 25.0);
  CHECK(cfg.scenario.mean_positions[2].x() == 35.0);
  CHECK(cfg.scenario.mean_positions[2].y() == 20.0);
  CHECK_NOTHROW(cfg.validate());

  HclConfig net = cfg.hcl_config();
  CHECK(net.tau == cfg.system.history_len);
  CHECK(net.k_vehicles == 3);
  CHECK(net.n_tx == 32);
  CHECK(net.lstm_hidden == 64);
  CHECK_NOTHROW(net.validate());
}

TEST_CASE("configuration text round-trips every section") {
  const char* text = R"(# experiment description file
[system]
n_tx = 16
n_rx = 8
n_vehicles = 2
carrier_hz = 28e9
wave_speed_mps = 3e8
slot_s = 0.01          # slot length
pathloss_exp = 2.4
pathloss_ref = 2e-7
ref_dist_m = 2
rcs_re = 4
rcs_im = -3
noise_echo_dbm = -70
noise_rx_dbm = -80, -75
mf_gain = 8
delay_res_s = 1e-6
doppler_res_hz = 3e-6
echo_obs_var = 5e-10
power_budget_dbm = 30
crlb_angle_max = 0.02
crlb_dist_max = 0.03
penalty_angle = 100
penalty_dist = 200
penalty_power = 300
history_len = 4
history_nmse = 0.02
crlb_cap = 1e5

[scenario]
mean_positions_m = 10 20; 30 20
v_min_mps = 7
v_max_mps = 7.5
pos_jitter_std_m = 0.1

[model]
conv_filters = 4
pool_size = 4
pool_stride = 4
lstm_hidden = 32
naive_hidden = 64
learning_rate = 0.002
batch_size = 16
epochs = 3

[dataset]
n_train = 100
n_test = 50

[sweep]
axis = n_antennas
values = 8, 16, 32
methods = upper_bound, hcl

[output]
dir = results
plots = off
)";
  ExperimentConfig cfg = parse_config_text(text, "inline");
  CHECK(cfg.system.n_tx == 16);
  CHECK(cfg.system.n_rx == 8);
  CHECK(cfg.system.n_vehicles == 2);
  CHECK(cfg.system.carrier_hz == 28e9);
  CHECK(cfg.system.wave_speed_mps == 3e8);
  CHECK(cfg.system.slot_s == 0.01);
  CHECK(cfg.system.pathloss_exp == 2.4);
  CHECK(cfg.system.pathloss_ref == 2e-7);
  CHECK(cfg.system.ref_dist_m == 2.0);
  CHECK(cfg.system.rcs == std::complex<double>(4.0, -3.0));
  CHECK(cfg.system.noise_echo_w == doctest::Approx(1e-10).epsilon(1e-12));
  REQUIRE(cfg.system.noise_rx_w_per_vehicle.size() == 2);
  CHECK(cfg.system.noise_rx_w_per_vehicle[0] ==
        doctest::Approx(1e-11).epsilon(1e-12));
  CHECK(cfg.system.noise_rx_w_per_vehicle[1] ==
        doctest::Approx(3.1622776601683794e-11).epsilon(1e-12));
  CHECK(cfg.system.mf_gain == 8.0);
  CHECK(cfg.system.delay_res_s == 1e-6);
  CHECK(cfg.system.doppler_res_hz == 3e-6);
  CHECK(cfg.system.echo_obs_var == 5e-10);
  CHECK(cfg.system.power_budget_w == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cfg.system.crlb_angle_max == 0.02);
  CHECK(cfg.system.crlb_dist_max == 0.03);
  CHECK(cfg.system.penalty_angle == 100.0);
  CHECK(cfg.system.penalty_dist == 200.0);
  CHECK(cfg.system.penalty_power == 300.0);
  CHECK(cfg.system.history_len == 4);
  CHECK(cfg.system.history_nmse == 0.02);
  CHECK(cfg.system.crlb_cap == 1e5);

  REQUIRE(cfg.scenario.mean_positions.size() == 2);
  CHECK(cfg.scenario.mean_positions[0] == Eigen::Vector2d(10, 20));
  CHECK(cfg.scenario.mean_positions[1] == Eigen::Vector2d(30, 20));
  CHECK(cfg.scenario.v_min_mps == 7.0);
  CHECK(cfg.scenario.v_max_mps == 7.5);
  CHECK(cfg.scenario.pos_jitter_std_m == 0.1);

  CHECK(cfg.model.lstm_hidden == 32);
  CHECK(cfg.model.naive_hidden == 64);
  CHECK(cfg.model.learning_rate == 0.002);
  CHECK(cfg.model.batch_size == 16);
  CHECK(cfg.model.epochs == 3);
  CHECK(cfg.dataset.n_train == 100);
  CHECK(cfg.dataset.n_test == 50);
  CHECK(cfg.sweep.axis == "n_antennas");
  CHECK(cfg.sweep.values == std::vector<double>{8.0, 16.0, 32.0});
  CHECK(cfg.sweep.methods ==
        std::vector<std::string>{"upper_bound", "hcl"});
  CHECK(cfg.output.dir == "results");
  CHECK(cfg.output.plots == false);

  HclConfig net = cfg.hcl_config();
  CHECK(net.tau == 4);
  CHECK(net.n_tx == 16);
  CHECK(net.lstm_hidden == 32);
}

TEST_CASE("shared knobs and defaults derived at parse time") {
  // 'penalty' sets all three weights at once.
  ExperimentConfig cfg =
      parse_config_text("[system]\npenalty = 7\n", "inline");
  CHECK(cfg.system.penalty_angle == 7.0);
  CHECK(cfg.system.penalty_dist == 7.0);
  CHECK(cfg.system.penalty_power == 7.0);

  // Without explicit values, the Doppler resolution mirrors the delay
  // resolution and the echo variance follows the gain and noise floor.
  cfg = parse_config_text(
      "[system]\ndelay_res_s = 4e-6\nnoise_echo_dbm = -90\n", "inline");
  CHECK(cfg.system.doppler_res_hz == 4e-6);
  CHECK(cfg.system.echo_obs_var ==
        doctest::Approx(cfg.system.mf_gain * 1e-12).epsilon(1e-12));

  // Vehicle count without explicit positions extends the default road.
  cfg = parse_config_text("[system]\nn_vehicles = 5\n", "inline");
  REQUIRE(cfg.scenario.mean_positions.size() == 5);
  CHECK(cfg.scenario.mean_positions[4] == Eigen::Vector2d(55, 20));
}

TEST_CASE("configuration errors name the offender and the line") {
  auto msg = [](const char* text) {
    return what_of([&] { parse_config_text(text, "test.ini"); });
  };
  std::string m = msg("[system]\nbogus_key = 3\n");
  CHECK(m.find("test.ini:2:") != std::string::npos);
  CHECK(m.find("bogus_key") != std::string::npos);

  m = msg("[warp]\n");
  CHECK(m.find("test.ini:1:") != std::string::npos);
  CHECK(m.find("warp") != std::string::npos);

  m = msg("[system]\nn_tx\n");
  CHECK(m.find("key = value") != std::string::npos);

  m = msg("n_tx = 4\n");
  CHECK(m.find("before any section") != std::string::npos);

  m = msg("[system]\nn_tx = many\n");
  CHECK(m.find("test.ini:2:") != std::string::npos);

  m = msg("[scenario]\nmean_positions_m = 10\n");
  CHECK(m.find("pair") != std::string::npos);

  m = msg("[output]\nplots = maybe\n");
  CHECK(m.find("on/off") != std::string::npos);

  // Cross-field validation: positions must match the vehicle count.
  m = msg("[system]\nn_vehicles = 3\n[scenario]\nmean_positions_m = 10 20\n");
  CHECK(m.find("positions") != std::string::npos);

  CHECK_THROWS_AS(parse_config_file("/nonexistent/isac.ini"),
                  std::runtime_error);
}

TEST_CASE("power unit conversions") {
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dbm_to_watt(-80.0) == doctest::Approx(1e-11).epsilon(1e-12));
  CHECK(watt_to_dbm(1.0) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(db_to_linear(3.0) == doctest::Approx(1.9952623149688795).epsilon(1e-12));
  CHECK(linear_to_db(db_to_linear(-4.2)) ==
        doctest::Approx(-4.2).epsilon(1e-12));
}

TEST_CASE("derived seeds are stable and mutually distinct") {
  std::set<std::uint64_t> seen;
  for (const char* name : {"train-data", "test-data", "init", "shuffle"})
    for (std::uint64_t idx : {0u, 1u, 2u})
      seen.insert(derive_seed(42, name, idx));
  CHECK(seen.size() == 12);
  CHECK(derive_seed(42, "train-data", 0) == derive_seed(42, "train-data", 0));
  CHECK(derive_seed(42, "train-data", 0) != derive_seed(43, "train-data", 0));
}

TEST_CASE("sweep axes rewrite the intended knobs") {
  ExperimentConfig base;

  ExperimentConfig c = apply_axis(base, "power_dbm", 20.0);
  CHECK(c.system.power_budget_w == doctest::Approx(0.1).epsilon(1e-12));

  c = apply_axis(base, "n_antennas", 16.0);
  CHECK(c.system.n_tx == 16);
  CHECK(c.system.n_rx == 16);

  c = apply_axis(base, "n_vehicles", 5.0);
  CHECK(c.system.n_vehicles == 5);
  REQUIRE(c.scenario.mean_positions.size() == 5);
  CHECK(c.scenario.mean_positions[3] == Eigen::Vector2d(45, 20));
  c = apply_axis(base, "n_vehicles", 2.0);
  CHECK(c.scenario.mean_positions.size() == 2);

  c = apply_axis(base, "velocity", 10.0);
  CHECK(c.scenario.v_min_mps == 10.0);
  CHECK(c.scenario.v_max_mps == doctest::Approx(10.25).epsilon(1e-12));

  c = apply_axis(base, "tau", 3.0);
  CHECK(c.system.history_len == 3);

  c = apply_axis(base, "lambda", 10.0);
  CHECK(c.system.penalty_angle == 10.0);
  CHECK(c.system.penalty_dist == 10.0);
  CHECK(c.system.penalty_power == 10.0);

  c = apply_axis(base, "gamma", 0.5);
  CHECK(c.system.crlb_angle_max == 0.5);
  CHECK(c.system.crlb_dist_max == 0.5);

  CHECK_THROWS_AS(apply_axis(base, "bandwidth", 1.0), std::invalid_argument);
}

TEST_CASE("results files round-trip exactly and validate") {
  std::vector<ResultRow> rows;
  rows.push_back(sample_row(4.0 / 3.0, 1e-7, 0.1));
  rows.back().method = "upper_bound";
  rows.push_back(sample_row(2.5, 1e-300, 5e-324));
  rows.push_back(sample_row(0.30000000000000004, 0.25, 1e6));
  rows.back().method = "random";
  rows.back().axis_value = -12.5;
  rows.back().train_seconds = 1.5;

  fs::path f = temp_file("isac_results.csv");
  write_results_csv(rows, f);
  std::string bytes = slurp(f);
  write_results_csv(rows, f);
  CHECK(bytes == slurp(f));
  CHECK(bytes.rfind("# isac-results 1", 0) == 0);

  std::vector<ResultRow> back = read_results_csv(f);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].axis_name == rows[i].axis_name);
    CHECK(back[i].axis_value == rows[i].axis_value);
    CHECK(back[i].method == rows[i].method);
    CHECK(back[i].mean_sum_rate == rows[i].mean_sum_rate);
    CHECK(back[i].mean_crlb_theta == rows[i].mean_crlb_theta);
    CHECK(back[i].sqrt_crlb_theta == rows[i].sqrt_crlb_theta);
    CHECK(back[i].mean_crlb_dist == rows[i].mean_crlb_dist);
    CHECK(back[i].sqrt_crlb_dist == rows[i].sqrt_crlb_dist);
    CHECK(back[i].violation_rate_theta == rows[i].violation_rate_theta);
    CHECK(back[i].violation_rate_dist == rows[i].violation_rate_dist);
    CHECK(back[i].mean_power_w == rows[i].mean_power_w);
    CHECK(back[i].train_seconds == rows[i].train_seconds);
  }
  CHECK_NOTHROW(validate_results(back));
  fs::remove(f);
}

TEST_CASE("result validation catches inconsistent rows") {
  std::vector<ResultRow> rows = {sample_row(2.0, 1e-6, 1e-4)};
  CHECK_NOTHROW(validate_results(rows));

  std::vector<ResultRow> bad = rows;
  bad[0].sqrt_crlb_theta *= 1.001;
  CHECK_THROWS_AS(validate_results(bad), std::runtime_error);

  bad = rows;
  bad[0].method = "psycho";
  CHECK_THROWS_AS(validate_results(bad), std::runtime_error);

  bad = rows;
  bad[0].violation_rate_dist = 1.5;
  CHECK_THROWS_AS(validate_results(bad), std::runtime_error);

  bad = rows;
  bad[0].violation_rate_theta = -0.1;
  CHECK_THROWS_AS(validate_results(bad), std::runtime_error);
}

TEST_CASE("results reader rejects malformed files") {
  fs::path f = temp_file("isac_bad.csv");
  auto write = [&](const std::string& text) {
    std::ofstream out(f, std::ios::binary);
    out << text;
  };

  write("not a results file\n");
  CHECK_THROWS_AS(read_results_csv(f), std::runtime_error);

  write("# isac-results 9000\nseed\n");
  CHECK_THROWS_AS(read_results_csv(f), std::runtime_error);

  // Truncated data row.
  std::vector<ResultRow> rows = {sample_row(1.0, 1e-6, 1e-4)};
  write_results_csv(rows, f);
  std::string good = slurp(f);
  std::size_t last_comma = good.rfind(',');
  write(good.substr(0, last_comma) + "\n");
  CHECK_THROWS_AS(read_results_csv(f), std::runtime_error);

  CHECK_THROWS_AS(read_results_csv("/nonexistent/results.csv"),
                  std::runtime_error);
  fs::remove(f);
}

TEST_CASE("line charts are deterministic and honor the log-axis rule") {
  std::vector<Series> series;
  series.push_back({"alpha", {{1, 1}, {2, 4}, {3, 9}}});
  series.push_back({"beta", {{1, 2}, {2, 3}, {3, 5}}});
  series.push_back({"gamma", {{1, 0.5}, {2, 0.25}, {3, 0.125}}});
  series.push_back({"delta", {{1, 1}, {2, 1}, {3, 1}}});

  ChartOptions opt;
  opt.title = "demo < & >";
  opt.x_label = "x";
  opt.y_label = "y";
  fs::path f = temp_file("isac_chart.svg");
  write_line_chart(series, opt, f);
  std::string bytes = slurp(f);
  CHECK(count_occurrences(bytes, "<polyline") == 4);
  CHECK(bytes.find("<svg ") != std::string::npos);
  CHECK(bytes.find("demo &lt; &amp; &gt;") != std::string::npos);
  // Labels land in the legend.
  CHECK(bytes.find("alpha") != std::string::npos);
  CHECK(bytes.find("delta") != std::string::npos);

  write_line_chart(series, opt, f);
  CHECK(bytes == slurp(f));

  opt.log_y = true;
  CHECK_NOTHROW(write_line_chart(series, opt, f));
  series.push_back({"zero", {{1, 0.0}}});
  CHECK_THROWS_AS(write_line_chart(series, opt, f), std::invalid_argument);

  std::vector<Series> empty;
  CHECK_THROWS_AS(write_line_chart(empty, ChartOptions{}, f),
                  std::invalid_argument);
  fs::remove(f);
}

TEST_CASE("operation count report") {
  HclConfig cfg;  // 32 antennas, 3 vehicles, 6 slots, 4 filters, hidden 64
  ComplexityReport r = complexity_report(cfg, 6, 2000);
  CHECK(r.kappa1 == 96);
  CHECK(r.kappa2 == 64);
  CHECK(r.lstm_per_pass == 247296);
  CHECK(r.conv_per_pass == 6LL * 3 * (2 * 9 * 4 * 32));
  CHECK(r.online_total == r.conv_per_pass + r.lstm_per_pass);
  CHECK(r.offline_total == 6LL * 2000 * r.online_total);
  CHECK(r.text.find("247296") != std::string::npos);
  CHECK(r.text.find("k1=96") != std::string::npos);
  CHECK(r.text.find("k2=64") != std::string::npos);
  CHECK_THROWS_AS(complexity_report(cfg, -1, 10), std::invalid_argument);
}

TEST_CASE("sweep runner produces a deterministic grid of results") {
  const char* text = R"(
[system]
n_tx = 4
n_rx = 4
n_vehicles = 2
history_len = 2

[model]
lstm_hidden = 8
naive_hidden = 8
batch_size = 4
epochs = 1

[dataset]
n_train = 6
n_test = 4

[sweep]
axis = power_dbm
values = 20, 30
methods = upper_bound, hcl, naive, random
)";
  ExperimentConfig cfg = parse_config_text(text, "inline");
  std::vector<ResultRow> rows = run_sweep(cfg, 3);
  REQUIRE(rows.size() == 8);
  CHECK_NOTHROW(validate_results(rows));

  int i = 0;
  for (double value : {20.0, 30.0})
    for (const char* method : {"upper_bound", "hcl", "naive", "random"}) {
      CHECK(rows[i].axis_value == value);
      CHECK(rows[i].method == method);
      CHECK(rows[i].axis_name == "power_dbm");
      CHECK(rows[i].seed == 3);
      CHECK(std::isfinite(rows[i].mean_sum_rate));
      CHECK(rows[i].train_seconds == 0.0);  // timing off by default
      ++i;
    }

  // The interference-free bound dominates everything at the same point.
  for (int v = 0; v < 2; ++v)
    for (int m = 1; m < 4; ++m)
      CHECK(rows[4 * v].mean_sum_rate >= rows[4 * v + m].mean_sum_rate - 1e-9);

  // Bitwise repeatability, through files.
  fs::path f1 = temp_file("isac_sweep_a.csv");
  fs::path f2 = temp_file("isac_sweep_b.csv");
  write_results_csv(rows, f1);
  write_results_csv(run_sweep(cfg, 3), f2);
  CHECK(slurp(f1) == slurp(f2));

  // Plots: one chart per standard metric, written where asked.
  fs::path dir = fs::temp_directory_path() / "isac_plots";
  fs::create_directories(dir);
  std::vector<fs::path> files = write_sweep_plots(rows, dir);
  REQUIRE(files.size() == 3);
  CHECK(files[0].filename() == "rate_vs_power_dbm.svg");
  CHECK(files[1].filename() == "rmse_theta_vs_power_dbm.svg");
  CHECK(files[2].filename() == "rmse_dist_vs_power_dbm.svg");
  for (const fs::path& p : files) {
    CHECK(fs::exists(p));
    CHECK(slurp(p).find("<svg ") != std::string::npos);
  }
  fs::remove(f1);
  fs::remove(f2);
  fs::remove_all(dir);
}
