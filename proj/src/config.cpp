#include "isac/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "isac/text.hpp"
#include "isac/units.hpp"

namespace isac {

ExperimentConfig::ExperimentConfig() {
  scenario.mean_positions = {{15.0, 20.0}, {25.0, 20.0}, {35.0, 20.0}};
}

HclConfig ExperimentConfig::hcl_config() const {
  HclConfig cfg;
  cfg.tau = system.history_len;
  cfg.k_vehicles = system.n_vehicles;
  cfg.n_tx = system.n_tx;
  cfg.conv_filters = model.conv_filters;
  cfg.pool_size = model.pool_size;
  cfg.pool_stride = model.pool_stride;
  cfg.lstm_hidden = model.lstm_hidden;
  cfg.input_gain = model.input_gain;
  return cfg;
}

void ExperimentConfig::validate() const {
  system.validate();
  hcl_config().validate();
  if (static_cast<int>(scenario.mean_positions.size()) != system.n_vehicles)
    throw std::invalid_argument(
        "scenario lists " + std::to_string(scenario.mean_positions.size()) +
        " positions for " + std::to_string(system.n_vehicles) + " vehicles");
  if (!(scenario.v_min_mps <= scenario.v_max_mps))
    throw std::invalid_argument("velocity range is inverted");
  if (model.learning_rate <= 0 || model.batch_size < 1 || model.epochs < 1 ||
      model.naive_hidden < 1)
    throw std::invalid_argument("model settings out of range");
  if (dataset.n_train < 1 || dataset.n_test < 1)
    throw std::invalid_argument("dataset sizes must be positive");
  if (sweep.values.empty())
    throw std::invalid_argument("sweep value list is empty");
  if (sweep.methods.empty())
    throw std::invalid_argument("sweep method list is empty");
  for (const std::string& m : sweep.methods)
    if (m != "upper_bound" && m != "hcl" && m != "naive" && m != "random")
      throw std::invalid_argument("unknown method: " + m);
}

namespace {

bool parse_bool(std::string_view v, std::string_view key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw std::invalid_argument("key '" + std::string(key) +
                              "' expects on/off, got '" + std::string(v) +
                              "'");
}

std::vector<double> parse_double_list(std::string_view v) {
  std::vector<double> out;
  for (const std::string& tok : split_list(v, ','))
    out.push_back(parse_double(tok));
  return out;
}

struct Parser {
  ExperimentConfig cfg;
  std::string origin;
  bool saw_echo_obs_var = false;
  bool saw_doppler_res = false;
  bool saw_positions = false;

  [[noreturn]] void fail(int line_no, const std::string& why) const {
    throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                ": " + why);
  }

  void system_key(std::string_view key, std::string_view value, int ln) {
    SystemParams& p = cfg.system;
    if (key == "n_tx") p.n_tx = static_cast<int>(parse_int(value));
    else if (key == "n_rx") p.n_rx = static_cast<int>(parse_int(value));
    else if (key == "n_vehicles")
      p.n_vehicles = static_cast<int>(parse_int(value));
    else if (key == "carrier_hz") p.carrier_hz = parse_double(value);
    else if (key == "wave_speed_mps") p.wave_speed_mps = parse_double(value);
    else if (key == "slot_s") p.slot_s = parse_double(value);
    else if (key == "pathloss_exp") p.pathloss_exp = parse_double(value);
    else if (key == "pathloss_ref") p.pathloss_ref = parse_double(value);
    else if (key == "ref_dist_m") p.ref_dist_m = parse_double(value);
    else if (key == "rcs_re")
      p.rcs = {parse_double(value), p.rcs.imag()};
    else if (key == "rcs_im")
      p.rcs = {p.rcs.real(), parse_double(value)};
    else if (key == "noise_echo_dbm")
      p.noise_echo_w = dbm_to_watt(parse_double(value));
    else if (key == "noise_rx_dbm") {
      std::vector<double> vals = parse_double_list(value);
      if (vals.empty()) fail(ln, "noise_rx_dbm needs at least one value");
      if (vals.size() == 1) {
        p.noise_rx_w = dbm_to_watt(vals[0]);
        p.noise_rx_w_per_vehicle.clear();
      } else {
        p.noise_rx_w_per_vehicle.clear();
        for (double d : vals)
          p.noise_rx_w_per_vehicle.push_back(dbm_to_watt(d));
      }
    } else if (key == "mf_gain") p.mf_gain = parse_double(value);
    else if (key == "delay_res_s") p.delay_res_s = parse_double(value);
    else if (key == "doppler_res_hz") {
      p.doppler_res_hz = parse_double(value);
      saw_doppler_res = true;
    } else if (key == "echo_obs_var") {
      p.echo_obs_var = parse_double(value);
      saw_echo_obs_var = true;
    } else if (key == "power_budget_dbm")
      p.power_budget_w = dbm_to_watt(parse_double(value));
    else if (key == "crlb_angle_max") p.crlb_angle_max = parse_double(value);
    else if (key == "crlb_dist_max") p.crlb_dist_max = parse_double(value);
    else if (key == "penalty_angle") p.penalty_angle = parse_double(value);
    else if (key == "penalty_dist") p.penalty_dist = parse_double(value);
    else if (key == "penalty_power") p.penalty_power = parse_double(value);
    else if (key == "penalty") {
      double v = parse_double(value);
      p.penalty_angle = p.penalty_dist = p.penalty_power = v;
    } else if (key == "history_len")
      p.history_len = static_cast<int>(parse_int(value));
    else if (key == "history_nmse") p.history_nmse = parse_double(value);
    else if (key == "crlb_cap") p.crlb_cap = parse_double(value);
    else fail(ln, "unknown key '" + std::string(key) + "' in [system]");
  }

  void scenario_key(std::string_view key, std::string_view value, int ln) {
    Scenario& sc = cfg.scenario;
    if (key == "mean_positions_m") {
      sc.mean_positions.clear();
      for (const std::string& pair : split_list(value, ';')) {
        std::istringstream ps(pair);
        double x = 0, y = 0;
        std::string extra;
        if (!(ps >> x >> y) || ps >> extra)
          fail(ln, "position '" + pair + "' is not an 'x y' pair");
        sc.mean_positions.push_back({x, y});
      }
      saw_positions = true;
    } else if (key == "v_min_mps") sc.v_min_mps = parse_double(value);
    else if (key == "v_max_mps") sc.v_max_mps = parse_double(value);
    else if (key == "pos_jitter_std_m")
      sc.pos_jitter_std_m = parse_double(value);
    else fail(ln, "unknown key '" + std::string(key) + "' in [scenario]");
  }

  void model_key(std::string_view key, std::string_view value, int ln) {
    ModelSettings& m = cfg.model;
    if (key == "conv_filters")
      m.conv_filters = static_cast<int>(parse_int(value));
    else if (key == "pool_size")
      m.pool_size = static_cast<int>(parse_int(value));
    else if (key == "pool_stride")
      m.pool_stride = static_cast<int>(parse_int(value));
    else if (key == "lstm_hidden")
      m.lstm_hidden = static_cast<int>(parse_int(value));
    else if (key == "naive_hidden")
      m.naive_hidden = static_cast<int>(parse_int(value));
    else if (key == "input_gain") m.input_gain = parse_double(value);
    else if (key == "grad_clip_norm") m.grad_clip_norm = parse_double(value);
    else if (key == "learning_rate") m.learning_rate = parse_double(value);
    else if (key == "batch_size")
      m.batch_size = static_cast<int>(parse_int(value));
    else if (key == "epochs") m.epochs = static_cast<int>(parse_int(value));
    else fail(ln, "unknown key '" + std::string(key) + "' in [model]");
  }

  void dataset_key(std::string_view key, std::string_view value, int ln) {
    if (key == "n_train")
      cfg.dataset.n_train = static_cast<int>(parse_int(value));
    else if (key == "n_test")
      cfg.dataset.n_test = static_cast<int>(parse_int(value));
    else fail(ln, "unknown key '" + std::string(key) + "' in [dataset]");
  }

  void sweep_key(std::string_view key, std::string_view value, int ln) {
    if (key == "axis") cfg.sweep.axis = std::string(value);
    else if (key == "values") cfg.sweep.values = parse_double_list(value);
    else if (key == "methods") cfg.sweep.methods = split_list(value, ',');
    else fail(ln, "unknown key '" + std::string(key) + "' in [sweep]");
  }

  void output_key(std::string_view key, std::string_view value, int ln) {
    if (key == "dir") cfg.output.dir = std::string(value);
    else if (key == "plots") cfg.output.plots = parse_bool(value, key);
    else fail(ln, "unknown key '" + std::string(key) + "' in [output]");
  }
};

}  // namespace

ExperimentConfig parse_config_text(std::string_view text,
                                   std::string_view origin) {
  Parser ps;
  ps.origin = std::string(origin);
  std::string section;
  int ln = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++ln;
    std::string_view line = trim(raw);
    if (!line.empty()) {
      std::size_t hash = line.find('#');
      if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') ps.fail(ln, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "system" && section != "scenario" &&
          section != "model" && section != "dataset" && section != "sweep" &&
          section != "output")
        ps.fail(ln, "unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      ps.fail(ln, "expected key = value, got '" + std::string(line) + "'");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) ps.fail(ln, "empty key");
    if (section.empty())
      ps.fail(ln, "key '" + std::string(key) + "' appears before any section");
    try {
      if (section == "system") ps.system_key(key, value, ln);
      else if (section == "scenario") ps.scenario_key(key, value, ln);
      else if (section == "model") ps.model_key(key, value, ln);
      else if (section == "dataset") ps.dataset_key(key, value, ln);
      else if (section == "sweep") ps.sweep_key(key, value, ln);
      else ps.output_key(key, value, ln);
    } catch (const std::invalid_argument& e) {
      std::string what = e.what();
      if (what.rfind(ps.origin + ":", 0) == 0) throw;
      ps.fail(ln, what);
    }
  }

  SystemParams& p = ps.cfg.system;
  if (!ps.saw_doppler_res) p.doppler_res_hz = p.delay_res_s;
  if (!ps.saw_echo_obs_var) p.echo_obs_var = p.mf_gain * p.noise_echo_w;
  if (!ps.saw_positions &&
      static_cast<int>(ps.cfg.scenario.mean_positions.size()) !=
          p.n_vehicles) {
    ps.cfg.scenario.mean_positions.clear();
    for (int k = 0; k < p.n_vehicles; ++k)
      ps.cfg.scenario.mean_positions.push_back({15.0 + 10.0 * k, 20.0});
  }
  ps.cfg.validate();
  return ps.cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), file.string());
}

}  // namespace isac
