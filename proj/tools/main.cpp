// Experiment runner for the predictive beamforming simulator: dataset
// generation, training, evaluation, parameter sweeps, plotting, direct
// bound queries and the operation-count report, all driven by one config
// file and one master seed.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "isac/baselines.hpp"
#include "isac/experiment.hpp"
#include "isac/sensing.hpp"
#include "isac/text.hpp"
#include "isac/units.hpp"

namespace fs = std::filesystem;
using namespace isac;

namespace {

constexpr int kExitNonFinite = 2;

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir;
  bool no_plots = false;
  bool no_projection = false;
  bool timing = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty())
    cfg = parse_config_file(args.config_path);
  else
    cfg.validate();
  if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
  if (args.no_plots) cfg.output.plots = false;
  return cfg;
}

fs::path ensure_out_dir(const ExperimentConfig& cfg) {
  fs::path dir = cfg.output.dir;
  fs::create_directories(dir);
  return dir;
}

bool row_finite(const ResultRow& r) {
  return std::isfinite(r.mean_sum_rate) && std::isfinite(r.mean_crlb_theta) &&
         std::isfinite(r.mean_crlb_dist) && std::isfinite(r.mean_power_w);
}

int check_rows(const std::vector<ResultRow>& rows) {
  for (const ResultRow& r : rows)
    if (!row_finite(r)) {
      std::cerr << "non-finite metric for method '" << r.method << "' at "
                << r.axis_name << " = " << fmt(r.axis_value) << "\n";
      return kExitNonFinite;
    }
  return 0;
}

std::unique_ptr<Model> make_model(const ExperimentConfig& cfg,
                                  const std::string& method) {
  if (method == "hcl") return std::make_unique<HclModel>(cfg.hcl_config());
  if (method == "naive") {
    NaiveNetConfig ncfg;
    ncfg.n_tx = cfg.system.n_tx;
    ncfg.k_vehicles = cfg.system.n_vehicles;
    ncfg.hidden = cfg.model.naive_hidden;
    ncfg.input_gain = cfg.model.input_gain;
    return std::make_unique<NaiveModel>(ncfg);
  }
  throw std::invalid_argument("method must be hcl or naive, got '" + method +
                              "'");
}

TrainOptions train_options(const ExperimentConfig& cfg) {
  TrainOptions opt;
  opt.adam.lr = cfg.model.learning_rate;
  opt.batch_size = cfg.model.batch_size;
  opt.epochs = cfg.model.epochs;
  opt.grad_clip_norm = cfg.model.grad_clip_norm;
  return opt;
}

int cmd_generate(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  fs::path dir = ensure_out_dir(cfg);
  Dataset train_data =
      generate_dataset(cfg.system, cfg.scenario, cfg.dataset.n_train,
                       derive_seed(args.seed, "train-data", 0));
  Dataset test_data =
      generate_dataset(cfg.system, cfg.scenario, cfg.dataset.n_test,
                       derive_seed(args.seed, "test-data", 0));
  validate_dataset(train_data);
  validate_dataset(test_data);
  save_dataset(train_data, dir / "train.dataset");
  save_dataset(test_data, dir / "test.dataset");
  std::cout << "wrote " << (dir / "train.dataset").string() << " ("
            << train_data.examples.size() << " examples) and "
            << (dir / "test.dataset").string() << " ("
            << test_data.examples.size() << " examples)\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& method) {
  ExperimentConfig cfg = load_config(args);
  fs::path dir = ensure_out_dir(cfg);
  Dataset train_data =
      generate_dataset(cfg.system, cfg.scenario, cfg.dataset.n_train,
                       derive_seed(args.seed, "train-data", 0));
  std::unique_ptr<Model> model = make_model(cfg, method);
  auto [params, report] = train(*model, train_data, train_options(cfg),
                                derive_seed(args.seed, "train-" + method, 0));
  fs::path ckpt = dir / (method + ".checkpoint");
  save_checkpoint(params, ckpt);

  fs::path log = dir / (method + "_training.csv");
  std::ofstream out(log);
  out << "epoch,total,sum_rate_term,angle_penalty,dist_penalty,power_penalty,"
         "seconds\n";
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const EpochStats& s = report.epochs[e];
    out << (e + 1) << "," << fmt(s.total) << "," << fmt(s.sum_rate_term)
        << "," << fmt(s.angle_penalty) << "," << fmt(s.dist_penalty) << ","
        << fmt(s.power_penalty) << ","
        << (args.timing ? fmt(s.seconds) : std::string("0")) << "\n";
  }
  std::cout << "wrote " << ckpt.string() << " and " << log.string() << "\n";
  if (!std::isfinite(report.epochs.back().total)) return kExitNonFinite;
  return 0;
}

ResultRow make_row_for_eval(std::uint64_t seed, const std::string& method,
                            const EvalMetrics& m) {
  ResultRow r;
  r.seed = seed;
  r.axis_name = "single";
  r.axis_value = 0;
  r.method = method;
  r.mean_sum_rate = m.mean_sum_rate;
  r.mean_crlb_theta = m.mean_crlb_angle;
  r.sqrt_crlb_theta = m.sqrt_crlb_angle;
  r.mean_crlb_dist = m.mean_crlb_dist;
  r.sqrt_crlb_dist = m.sqrt_crlb_dist;
  r.violation_rate_theta = m.violation_rate_angle;
  r.violation_rate_dist = m.violation_rate_dist;
  r.mean_power_w = m.mean_power_w;
  r.train_seconds = 0;
  return r;
}

int cmd_evaluate(const CommonArgs& args, const std::string& method,
                 const std::string& checkpoint) {
  ExperimentConfig cfg = load_config(args);
  fs::path dir = ensure_out_dir(cfg);
  const SystemParams& p = cfg.system;
  Dataset test_data =
      generate_dataset(p, cfg.scenario, cfg.dataset.n_test,
                       derive_seed(args.seed, "test-data", 0));

  EvalMetrics metrics;
  EvalOptions eopt;
  eopt.per_example_csv = dir / (method + "_per_example.csv");
  if (method == "upper_bound") {
    eopt.rate_override = [&](const Example& ex, const BeamformingMatrix&) {
      return upper_bound(ex.truth.channel, p).rate;
    };
    metrics = evaluate(
        [&](int, const Example& ex) {
          return upper_bound(ex.truth.channel, p).w;
        },
        test_data, p, eopt);
  } else if (method == "random") {
    std::uint64_t rseed = derive_seed(args.seed, "random-beams", 0);
    metrics = evaluate(
        [&](int i, const Example&) {
          Rng rng = Rng::substream(rseed, "w", i);
          return random_beamformer(p, rng);
        },
        test_data, p, eopt);
  } else {
    std::unique_ptr<Model> model = make_model(cfg, method);
    ParameterSet params = load_checkpoint(checkpoint);
    metrics = evaluate(
        [&](int, const Example& ex) {
          return predict(*model, params, ex, p, !args.no_projection);
        },
        test_data, p, eopt);
  }

  std::vector<ResultRow> rows{make_row_for_eval(args.seed, method, metrics)};
  write_results_csv(rows, dir / (method + "_metrics.csv"));
  std::cout << method << ": mean rate " << fmt(metrics.mean_sum_rate)
            << " bit/s/Hz, rmse(theta) " << fmt(metrics.sqrt_crlb_angle)
            << " rad, rmse(dist) " << fmt(metrics.sqrt_crlb_dist)
            << " m, mean power " << fmt(metrics.mean_power_w) << " W\n";
  std::cout << "wrote " << (dir / (method + "_metrics.csv")).string()
            << " and " << eopt.per_example_csv.string() << "\n";
  return check_rows(rows);
}

int cmd_sweep(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  fs::path dir = ensure_out_dir(cfg);
  SweepOptions sopt;
  sopt.projection = !args.no_projection;
  sopt.timing = args.timing;
  std::vector<ResultRow> rows = run_sweep(cfg, args.seed, sopt);
  validate_results(rows);
  fs::path csv = dir / "results.csv";
  write_results_csv(rows, csv);
  std::cout << "wrote " << csv.string() << " (" << rows.size() << " rows)\n";
  int rc = check_rows(rows);
  if (rc != 0) return rc;
  if (cfg.output.plots) {
    for (const fs::path& f : write_sweep_plots(rows, dir))
      std::cout << "wrote " << f.string() << "\n";
  }
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& out_dir) {
  std::vector<ResultRow> rows = read_results_csv(csv);
  validate_results(rows);
  if (rows.empty()) throw std::runtime_error("no rows in " + csv);
  fs::path dir =
      out_dir.empty() ? fs::path(csv).parent_path() : fs::path(out_dir);
  if (!dir.empty()) fs::create_directories(dir);
  for (const fs::path& f : write_sweep_plots(rows, dir))
    std::cout << "wrote " << f.string() << "\n";
  return 0;
}

int cmd_crlb(const CommonArgs& args, double theta_rad, double dist_m,
             double speed_mps) {
  ExperimentConfig cfg = load_config(args);
  SystemParams p = cfg.system;
  p.n_vehicles = 1;
  p.noise_rx_w_per_vehicle.clear();

  VehicleState s;
  s.theta = theta_rad;
  s.dist = dist_m;
  s.speed = speed_mps;
  s.radial_speed = speed_mps * std::cos(theta_rad);
  s.pos = {dist_m * std::cos(theta_rad), dist_m * std::sin(theta_rad)};

  // Fully steered beam at the configured budget: w = sqrt(P) a(theta)
  // maximizes both |h^H w| and the echo gain |a^H(theta) w|.
  Eigen::MatrixXcd w =
      steering_vector(theta_rad, p.n_tx) * std::sqrt(p.power_budget_w);
  BeamformingMatrix bm = make_beamformer(w);
  std::vector<VehicleState> states{s};
  CrlbPair b = crlb_pair(states, bm, 0, p);
  double snr = echo_snr(states, bm, 0, p);
  std::cout << "echo snr: " << fmt(snr) << "\n";
  std::cout << "crlb(theta): " << fmt(b.angle) << " rad^2, rmse "
            << fmt(std::sqrt(b.angle)) << " rad\n";
  std::cout << "crlb(dist):  " << fmt(b.dist) << " m^2,  rmse "
            << fmt(std::sqrt(b.dist)) << " m\n";
  if (!std::isfinite(b.angle) || !std::isfinite(b.dist))
    return kExitNonFinite;
  return 0;
}

int cmd_complexity(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  ComplexityReport r = complexity_report(
      cfg.hcl_config(), cfg.model.epochs,
      static_cast<long long>(cfg.dataset.n_train));
  std::cout << r.text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive beamforming simulator and benchmark harness"};
  // Let global flags (--seed, --no-plots, ...) appear after the subcommand.
  app.fallthrough();
  app.require_subcommand(1);

  CommonArgs args;
  app.add_option("--config", args.config_path, "experiment config file");
  app.add_option("--seed", args.seed, "master seed (default 1)");
  app.add_option("--out", args.out_dir, "output directory override");
  app.add_flag("--no-plots", args.no_plots, "skip SVG chart generation");
  app.add_flag("--no-projection", args.no_projection,
               "disable inference-time power projection");
  app.add_flag("--timing", args.timing,
               "record real training seconds (breaks byte determinism)");

  auto* generate = app.add_subcommand("generate", "write datasets to disk");
  auto* train_cmd = app.add_subcommand("train", "train one learned method");
  std::string method = "hcl";
  train_cmd->add_option("--method", method, "hcl or naive");
  auto* eval_cmd =
      app.add_subcommand("evaluate", "evaluate one method on the test set");
  std::string eval_method = "hcl";
  std::string checkpoint;
  eval_cmd->add_option("--method", eval_method,
                       "upper_bound, hcl, naive or random");
  eval_cmd->add_option("--checkpoint", checkpoint,
                       "parameters for hcl/naive");
  auto* sweep = app.add_subcommand("sweep", "run the configured sweep");
  auto* plot = app.add_subcommand("plot", "charts from an existing CSV");
  std::string plot_csv, plot_dir;
  plot->add_option("--csv", plot_csv, "results CSV")->required();
  plot->add_option("--dir", plot_dir, "output directory (default: CSV's)");
  auto* crlb =
      app.add_subcommand("crlb", "closed-form bounds for one vehicle");
  double theta = 0.927295218001612, dist = 25.0, speed = 8.0;
  crlb->add_option("--theta-rad", theta, "angle from the array axis");
  crlb->add_option("--dist-m", dist, "distance");
  crlb->add_option("--speed-mps", speed, "road speed");
  auto* complexity =
      app.add_subcommand("complexity", "operation-count report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(args);
    if (train_cmd->parsed()) return cmd_train(args, method);
    if (eval_cmd->parsed()) {
      if ((eval_method == "hcl" || eval_method == "naive") &&
          checkpoint.empty())
        throw std::invalid_argument("--checkpoint is required for " +
                                    eval_method);
      return cmd_evaluate(args, eval_method, checkpoint);
    }
    if (sweep->parsed()) return cmd_sweep(args);
    if (plot->parsed()) return cmd_plot(plot_csv, plot_dir);
    if (crlb->parsed()) return cmd_crlb(args, theta, dist, speed);
    if (complexity->parsed()) return cmd_complexity(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
