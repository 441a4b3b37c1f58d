#include "isac/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "isac/sensing.hpp"
#include "isac/text.hpp"

namespace isac {

Dataset generate_dataset(const SystemParams& p, const Scenario& sc,
                         int n_examples, std::uint64_t seed) {
  if (n_examples < 1)
    throw std::invalid_argument("n_examples must be at least 1");
  p.validate();
  Dataset data;
  data.seed = seed;
  data.params = p;
  data.scenario = sc;
  data.examples.reserve(n_examples);
  for (int i = 0; i < n_examples; ++i) {
    Rng rng = Rng::substream(seed, "example", i);
    TrajectoryWindow window = simulate_window(p, sc, rng);
    Example ex;
    ex.history = perturb_history(window, p, rng);
    ex.truth.states = window.slots.back();
    ex.truth.channel =
        snapshot_from_states(ex.truth.states, p, p.history_len);
    data.examples.push_back(std::move(ex));
  }
  return data;
}

namespace {

void write_matrix(std::ostream& out, const Eigen::MatrixXcd& m) {
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r)
      out << " " << fmt(m(r, c).real()) << " " << fmt(m(r, c).imag());
}

Eigen::MatrixXcd read_matrix(std::istream& in, int rows, int cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      std::string re, im;
      if (!(in >> re >> im)) throw std::runtime_error("truncated matrix");
      m(r, c) = {parse_double(re), parse_double(im)};
    }
  return m;
}

}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  const SystemParams& p = data.params;
  out << "isac-dataset 1\n";
  out << data.seed << " " << data.examples.size() << " " << p.n_tx << " "
      << p.n_vehicles << " " << p.history_len << " " << fmt(p.pathloss_exp)
      << " " << fmt(p.pathloss_ref) << " " << fmt(p.ref_dist_m) << "\n";
  for (const Example& ex : data.examples) {
    for (const VehicleState& s : ex.truth.states)
      out << fmt(s.theta) << " " << fmt(s.dist) << " " << fmt(s.speed) << " "
          << fmt(s.radial_speed) << " " << fmt(s.pos.x()) << " "
          << fmt(s.pos.y()) << "\n";
    out << "truth";
    write_matrix(out, ex.truth.channel.h);
    out << "\n";
    for (int t = 0; t < p.history_len; ++t) {
      out << "est";
      for (int k = 0; k < p.n_vehicles; ++k)
        out << " " << fmt(ex.history.theta_est(t, k)) << " "
            << fmt(ex.history.dist_est(t, k));
      write_matrix(out, ex.history.snapshots[t]);
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

Dataset load_dataset(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string magic, version;
  in >> magic >> version;
  if (magic != "isac-dataset" || version != "1")
    throw std::runtime_error("unrecognized dataset header in " +
                             file.string());
  Dataset data;
  std::size_t n = 0;
  int n_tx = 0, k_count = 0, tau = 0;
  std::string exp, ref, ref_d;
  if (!(in >> data.seed >> n >> n_tx >> k_count >> tau >> exp >> ref >> ref_d))
    throw std::runtime_error("malformed dataset dimensions");
  data.params.n_tx = n_tx;
  data.params.n_vehicles = k_count;
  data.params.history_len = tau;
  data.params.pathloss_exp = parse_double(exp);
  data.params.pathloss_ref = parse_double(ref);
  data.params.ref_dist_m = parse_double(ref_d);
  data.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Example ex;
    ex.truth.states.resize(k_count);
    for (VehicleState& s : ex.truth.states) {
      std::string th, d, v, rv, x, y;
      if (!(in >> th >> d >> v >> rv >> x >> y))
        throw std::runtime_error("truncated states");
      s.theta = parse_double(th);
      s.dist = parse_double(d);
      s.speed = parse_double(v);
      s.radial_speed = parse_double(rv);
      s.pos = {parse_double(x), parse_double(y)};
    }
    std::string tag;
    if (!(in >> tag) || tag != "truth")
      throw std::runtime_error("missing truth marker");
    ex.truth.channel.h = read_matrix(in, n_tx, k_count);
    ex.truth.channel.slot = tau;
    ex.history.snapshots.resize(tau);
    ex.history.theta_est.resize(tau, k_count);
    ex.history.dist_est.resize(tau, k_count);
    for (int t = 0; t < tau; ++t) {
      if (!(in >> tag) || tag != "est")
        throw std::runtime_error("missing history marker");
      for (int k = 0; k < k_count; ++k) {
        std::string th, d;
        if (!(in >> th >> d)) throw std::runtime_error("truncated estimates");
        ex.history.theta_est(t, k) = parse_double(th);
        ex.history.dist_est(t, k) = parse_double(d);
      }
      ex.history.snapshots[t] = read_matrix(in, n_tx, k_count);
    }
    data.examples.push_back(std::move(ex));
  }
  return data;
}

void validate_dataset(const Dataset& data) {
  const SystemParams& p = data.params;
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    const Example& ex = data.examples[i];
    auto fail = [&](const std::string& why) {
      return std::runtime_error("dataset example " + std::to_string(i) +
                                ": " + why);
    };
    if (static_cast<int>(ex.truth.states.size()) != p.n_vehicles)
      throw fail("state count mismatch");
    if (static_cast<int>(ex.history.snapshots.size()) != p.history_len)
      throw fail("history length mismatch");
    ChannelSnapshot rebuilt =
        snapshot_from_states(ex.truth.states, p, ex.truth.channel.slot);
    double err = (rebuilt.h - ex.truth.channel.h).cwiseAbs().maxCoeff();
    if (!(err <= 1e-10))
      throw fail("truth channel deviates from its states by " + fmt(err));
    for (const Eigen::MatrixXcd& s : ex.history.snapshots)
      if (s.rows() != p.n_tx || s.cols() != p.n_vehicles)
        throw fail("history snapshot shape mismatch");
  }
}

namespace {

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

/// Full-dataset objective under the current parameters, without projection;
/// this is exactly what the optimizer sees.
PenaltyBreakdown dataset_objective(const Model& model,
                                   const ParameterSet& params,
                                   const Dataset& data) {
  std::vector<TruthSlot> truths;
  std::vector<BeamformingMatrix> ws;
  truths.reserve(data.examples.size());
  ws.reserve(data.examples.size());
  for (const Example& ex : data.examples) {
    truths.push_back(ex.truth);
    ws.push_back(predict(model, params, ex, data.params, false));
  }
  return batch_objective(truths, ws, data.params);
}

}  // namespace

std::pair<ParameterSet, TrainingReport> train(const Model& model,
                                              const Dataset& data,
                                              const TrainOptions& opt,
                                              std::uint64_t seed) {
  if (opt.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (opt.batch_size < 1)
    throw std::invalid_argument("batch size must be >= 1");
  if (data.examples.empty()) throw std::invalid_argument("empty dataset");

  Rng init_rng = Rng::substream(seed, "init", 0);
  ParameterSet params = model.init(init_rng);
  TrainingReport report;

  const int n = static_cast<int>(data.examples.size());
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng = Rng::substream(seed, "shuffle", epoch);
    std::vector<int> order = shuffled_indices(n, shuffle_rng);

    for (int start = 0; start < n; start += opt.batch_size) {
      const int count = std::min(opt.batch_size, n - start);
      ad::Graph g;
      std::vector<ad::Value> leaves = parameter_leaves(g, params);
      std::vector<TruthSlot> truths;
      std::vector<ad::Value> raws;
      truths.reserve(count);
      raws.reserve(count);
      for (int b = 0; b < count; ++b) {
        const Example& ex = data.examples[order[start + b]];
        raws.push_back(model.forward(g, leaves, ex));
        truths.push_back(ex.truth);
      }
      CostGraph cost = build_batch_cost(g, truths, raws, data.params);
      double c = cost.cost.val().item();
      if (!std::isfinite(c))
        throw std::runtime_error(
            "non-finite cost " + fmt(c) + " at epoch " +
            std::to_string(epoch) + ", batch " +
            std::to_string(start / opt.batch_size));
      g.backward(cost.cost);
      std::vector<ad::Tensor> grads;
      grads.reserve(leaves.size());
      for (const ad::Value& leaf : leaves) grads.push_back(g.grad(leaf));
      if (opt.grad_clip_norm > 0) {
        double sq = 0;
        for (const ad::Tensor& t : grads) sq += t.data.square().sum();
        // Rescaling instead of skipping keeps the step direction; the
        // penalty terms can spike by many orders of magnitude when a beam
        // is near-orthogonal to its vehicle, and unclipped spikes would
        // dominate the Adam second moments for thousands of steps.
        if (sq > opt.grad_clip_norm * opt.grad_clip_norm) {
          const double s = opt.grad_clip_norm / std::sqrt(sq);
          for (ad::Tensor& t : grads) t.data *= s;
        }
      }
      params.adam_step(grads, opt.adam);
    }

    PenaltyBreakdown stats = dataset_objective(model, params, data);
    EpochStats es;
    es.total = stats.total;
    es.sum_rate_term = stats.sum_rate_term;
    es.angle_penalty = stats.angle_penalty;
    es.dist_penalty = stats.dist_penalty;
    es.power_penalty = stats.power_penalty;
    es.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
    report.epochs.push_back(es);
  }
  return {std::move(params), std::move(report)};
}

BeamformingMatrix predict(const Model& model, const ParameterSet& params,
                          const Example& ex, const SystemParams& p,
                          bool project) {
  ad::Graph g;
  std::vector<ad::Value> consts = parameter_constants(g, params);
  ad::Value raw = model.forward(g, consts, ex);
  BeamformingMatrix w = model.decode(raw.val());
  if (project) w = project_power(w, p.power_budget_w);
  return w;
}

EvalMetrics evaluate(
    const std::function<BeamformingMatrix(int, const Example&)>& beamformer,
    const Dataset& data, const SystemParams& p, const EvalOptions& opt) {
  const int n = static_cast<int>(data.examples.size());
  if (n == 0) throw std::invalid_argument("empty dataset");

  std::ofstream csv;
  if (!opt.per_example_csv.empty()) {
    csv.open(opt.per_example_csv);
    if (!csv)
      throw std::runtime_error("cannot open " +
                               opt.per_example_csv.string());
    csv << "example,sum_rate,mean_crlb_theta,mean_crlb_dist,power_w\n";
  }

  EvalMetrics m;
  for (int i = 0; i < n; ++i) {
    const Example& ex = data.examples[i];
    BeamformingMatrix w = beamformer(i, ex);
    double rate = opt.rate_override ? opt.rate_override(ex, w)
                                    : sum_rate(ex.truth.channel, w, p);
    const int k_count = static_cast<int>(ex.truth.states.size());
    double crlb_a = 0, crlb_d = 0;
    for (int k = 0; k < k_count; ++k) {
      CrlbPair b = crlb_pair(ex.truth.states, w, k, p);
      crlb_a += b.angle / k_count;
      crlb_d += b.dist / k_count;
    }
    m.mean_sum_rate += rate / n;
    m.mean_crlb_angle += crlb_a / n;
    m.mean_crlb_dist += crlb_d / n;
    if (crlb_a > p.crlb_angle_max) m.violation_rate_angle += 1.0 / n;
    if (crlb_d > p.crlb_dist_max) m.violation_rate_dist += 1.0 / n;
    m.mean_power_w += w.power_used_w / n;
    if (csv.is_open())
      csv << i << "," << fmt(rate) << "," << fmt(crlb_a) << ","
          << fmt(crlb_d) << "," << fmt(w.power_used_w) << "\n";
  }
  m.sqrt_crlb_angle = std::sqrt(m.mean_crlb_angle);
  m.sqrt_crlb_dist = std::sqrt(m.mean_crlb_dist);
  return m;
}

}  // namespace isac
