#include "isac/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "isac/baselines.hpp"
#include "isac/svg.hpp"
#include "isac/text.hpp"
#include "isac/units.hpp"

namespace isac {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                          std::uint64_t index) {
  return mix64(seed ^ mix64(fnv1a(name) + 0x9e3779b97f4a7c15ull * index));
}

ExperimentConfig apply_axis(const ExperimentConfig& base,
                            const std::string& axis, double value) {
  ExperimentConfig cfg = base;
  if (axis == "power_dbm") {
    cfg.system.power_budget_w = dbm_to_watt(value);
  } else if (axis == "n_antennas") {
    cfg.system.n_tx = static_cast<int>(value);
    cfg.system.n_rx = static_cast<int>(value);
  } else if (axis == "n_vehicles") {
    int k = static_cast<int>(value);
    cfg.system.n_vehicles = k;
    auto& pos = cfg.scenario.mean_positions;
    if (static_cast<int>(pos.size()) > k) pos.resize(k);
    for (int i = static_cast<int>(pos.size()); i < k; ++i)
      pos.push_back({15.0 + 10.0 * i, 20.0});
    if (!cfg.system.noise_rx_w_per_vehicle.empty())
      cfg.system.noise_rx_w_per_vehicle.resize(k, cfg.system.noise_rx_w);
  } else if (axis == "velocity") {
    double width = base.scenario.v_max_mps - base.scenario.v_min_mps;
    cfg.scenario.v_min_mps = value;
    cfg.scenario.v_max_mps = value + width;
  } else if (axis == "tau") {
    cfg.system.history_len = static_cast<int>(value);
  } else if (axis == "lambda") {
    cfg.system.penalty_angle = value;
    cfg.system.penalty_dist = value;
    cfg.system.penalty_power = value;
  } else if (axis == "gamma") {
    cfg.system.crlb_angle_max = value;
    cfg.system.crlb_dist_max = value;
  } else {
    throw std::invalid_argument("unknown sweep axis: " + axis);
  }
  cfg.validate();
  return cfg;
}

namespace {

double report_seconds(const TrainingReport& report) {
  double total = 0;
  for (const EpochStats& e : report.epochs) total += e.seconds;
  return total;
}

ResultRow make_row(std::uint64_t seed, const std::string& axis, double value,
                   const std::string& method, const EvalMetrics& m,
                   double train_seconds) {
  ResultRow r;
  r.seed = seed;
  r.axis_name = axis;
  r.axis_value = value;
  r.method = method;
  r.mean_sum_rate = m.mean_sum_rate;
  r.mean_crlb_theta = m.mean_crlb_angle;
  r.sqrt_crlb_theta = m.sqrt_crlb_angle;
  r.mean_crlb_dist = m.mean_crlb_dist;
  r.sqrt_crlb_dist = m.sqrt_crlb_dist;
  r.violation_rate_theta = m.violation_rate_angle;
  r.violation_rate_dist = m.violation_rate_dist;
  r.mean_power_w = m.mean_power_w;
  r.train_seconds = train_seconds;
  return r;
}

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg,
                                 std::uint64_t seed,
                                 const SweepOptions& options) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (std::size_t iv = 0; iv < cfg.sweep.values.size(); ++iv) {
    const double value = cfg.sweep.values[iv];
    const ExperimentConfig point = apply_axis(cfg, cfg.sweep.axis, value);
    const SystemParams& p = point.system;

    Dataset train_data =
        generate_dataset(p, point.scenario, point.dataset.n_train,
                         derive_seed(seed, "train-data", iv));
    Dataset test_data =
        generate_dataset(p, point.scenario, point.dataset.n_test,
                         derive_seed(seed, "test-data", iv));

    TrainOptions topt;
    topt.adam.lr = point.model.learning_rate;
    topt.batch_size = point.model.batch_size;
    topt.epochs = point.model.epochs;
    topt.grad_clip_norm = point.model.grad_clip_norm;

    for (const std::string& method : cfg.sweep.methods) {
      EvalMetrics metrics;
      double seconds = 0;
      if (method == "upper_bound") {
        EvalOptions eopt;
        eopt.rate_override = [&](const Example& ex, const BeamformingMatrix&) {
          return upper_bound(ex.truth.channel, p).rate;
        };
        metrics = evaluate(
            [&](int, const Example& ex) {
              return upper_bound(ex.truth.channel, p).w;
            },
            test_data, p, eopt);
      } else if (method == "hcl" || method == "naive") {
        std::unique_ptr<Model> model;
        if (method == "hcl") {
          model = std::make_unique<HclModel>(point.hcl_config());
        } else {
          NaiveNetConfig ncfg;
          ncfg.n_tx = p.n_tx;
          ncfg.k_vehicles = p.n_vehicles;
          ncfg.hidden = point.model.naive_hidden;
          ncfg.input_gain = point.model.input_gain;
          model = std::make_unique<NaiveModel>(ncfg);
        }
        auto [params, report] =
            train(*model, train_data, topt,
                  derive_seed(seed, "train-" + method, iv));
        if (options.timing) seconds = report_seconds(report);
        metrics = evaluate(
            [&](int, const Example& ex) {
              return predict(*model, params, ex, p, options.projection);
            },
            test_data, p);
      } else if (method == "random") {
        std::uint64_t rseed = derive_seed(seed, "random-beams", iv);
        metrics = evaluate(
            [&](int i, const Example&) {
              Rng rng = Rng::substream(rseed, "w", i);
              return random_beamformer(p, rng);
            },
            test_data, p);
      } else {
        throw std::invalid_argument("unknown method: " + method);
      }
      rows.push_back(
          make_row(seed, cfg.sweep.axis, value, method, metrics, seconds));
    }
  }
  return rows;
}

std::vector<std::filesystem::path> write_sweep_plots(
    std::span<const ResultRow> rows, const std::filesystem::path& dir) {
  if (rows.empty()) throw std::invalid_argument("no rows to plot");
  const std::string axis = rows[0].axis_name;

  auto series_for = [&](auto metric) {
    std::vector<Series> out;
    for (const ResultRow& r : rows) {
      auto it = std::find_if(out.begin(), out.end(), [&](const Series& s) {
        return s.label == r.method;
      });
      if (it == out.end()) {
        out.push_back({r.method, {}});
        it = out.end() - 1;
      }
      it->points.push_back({r.axis_value, metric(r)});
    }
    return out;
  };

  std::vector<std::filesystem::path> written;
  {
    ChartOptions opt;
    opt.title = "Mean sum rate vs " + axis;
    opt.x_label = axis;
    opt.y_label = "bit/s/Hz";
    auto path = dir / ("rate_vs_" + axis + ".svg");
    write_line_chart(
        series_for([](const ResultRow& r) { return r.mean_sum_rate; }), opt,
        path);
    written.push_back(path);
  }
  {
    ChartOptions opt;
    opt.title = "Root angle bound vs " + axis;
    opt.x_label = axis;
    opt.y_label = "rad";
    opt.log_y = true;
    auto path = dir / ("rmse_theta_vs_" + axis + ".svg");
    write_line_chart(
        series_for([](const ResultRow& r) { return r.sqrt_crlb_theta; }), opt,
        path);
    written.push_back(path);
  }
  {
    ChartOptions opt;
    opt.title = "Root distance bound vs " + axis;
    opt.x_label = axis;
    opt.y_label = "m";
    opt.log_y = true;
    auto path = dir / ("rmse_dist_vs_" + axis + ".svg");
    write_line_chart(
        series_for([](const ResultRow& r) { return r.sqrt_crlb_dist; }), opt,
        path);
    written.push_back(path);
  }
  return written;
}

ComplexityReport complexity_report(const HclConfig& cfg, int iterations,
                                   long long n_examples) {
  cfg.validate();
  if (iterations < 0 || n_examples < 0)
    throw std::invalid_argument("complexity inputs must be nonnegative");
  ComplexityReport r;
  // One conv layer per vehicle module: 2 input planes, s x s kernel,
  // conv_filters output planes, n_tx x 1 output cells.
  const long long n0 = 2, s = cfg.conv_kernel, n1 = cfg.conv_filters;
  const long long a = cfg.n_tx, b = 1;
  const long long conv_one = n0 * s * s * n1 * a * b;
  r.kappa1 = cfg.concat_dim();
  r.kappa2 = cfg.lstm_hidden;
  r.conv_per_pass = static_cast<long long>(cfg.tau) * cfg.k_vehicles *
                    conv_one;
  r.lstm_per_pass =
      4ll * cfg.tau *
      (static_cast<long long>(r.kappa1) * r.kappa2 +
       static_cast<long long>(r.kappa2) * r.kappa2 + r.kappa2);
  r.online_total = r.conv_per_pass + r.lstm_per_pass;
  r.offline_total = static_cast<long long>(iterations) * n_examples *
                    r.online_total;

  std::ostringstream os;
  os << "convolution: tau*K*(n0*s^2*n1*a*b) = " << cfg.tau << "*"
     << cfg.k_vehicles << "*(" << n0 << "*" << s << "^2*" << n1 << "*" << a
     << "*" << b << ") = " << r.conv_per_pass << " ops/pass\n";
  os << "recurrence:  4*tau*(k1*k2 + k2^2 + k2), k1=" << r.kappa1
     << ", k2=" << r.kappa2 << " -> " << r.lstm_per_pass << " ops/pass\n";
  os << "online per decision: " << r.online_total << " ops\n";
  os << "offline: iterations*examples*online = " << iterations << "*"
     << n_examples << "*" << r.online_total << " = " << r.offline_total
     << " ops\n";
  r.text = os.str();
  return r;
}

}  // namespace isac
