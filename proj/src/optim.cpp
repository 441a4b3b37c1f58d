#include "isac/optim.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "isac/text.hpp"

namespace isac {

int ParameterSet::add(std::string name, ad::Tensor init) {
  if (name.empty()) throw std::invalid_argument("parameter name is empty");
  if (find(name) >= 0)
    throw std::invalid_argument("duplicate parameter name: " + name);
  Entry e;
  e.name = std::move(name);
  e.m = ad::Tensor::zeros(init.shape);
  e.v = ad::Tensor::zeros(init.shape);
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  return static_cast<int>(entries_.size()) - 1;
}

int ParameterSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return static_cast<int>(i);
  return -1;
}

const ad::Tensor& ParameterSet::at(std::string_view name) const {
  int i = find(name);
  if (i < 0)
    throw std::invalid_argument("unknown parameter: " + std::string(name));
  return entries_[i].value;
}

void ParameterSet::adam_step(std::span<const ad::Tensor> grads,
                             const AdamConfig& cfg) {
  if (static_cast<int>(grads.size()) != size())
    throw std::invalid_argument(
        "adam_step: got " + std::to_string(grads.size()) +
        " gradients for " + std::to_string(size()) + " parameters");
  for (int i = 0; i < size(); ++i)
    if (!grads[i].same_shape(entries_[i].value))
      throw std::invalid_argument(
          "adam_step: gradient shape " + ad::shape_str(grads[i].shape) +
          " does not match parameter '" + entries_[i].name + "' " +
          ad::shape_str(entries_[i].value.shape));

  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(step_count_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(step_count_));
  for (int i = 0; i < size(); ++i) {
    Entry& e = entries_[i];
    e.m.data = cfg.beta1 * e.m.data + (1.0 - cfg.beta1) * grads[i].data;
    e.v.data =
        cfg.beta2 * e.v.data + (1.0 - cfg.beta2) * grads[i].data.square();
    e.value.data -=
        cfg.lr * (e.m.data / bc1) / ((e.v.data / bc2).sqrt() + cfg.eps);
  }
}

void save_checkpoint(const ParameterSet& params,
                     const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  out << "isac-params 1\n" << params.size() << "\n";
  for (int i = 0; i < params.size(); ++i) {
    const ad::Tensor& t = params.value(i);
    out << params.name(i) << " " << t.rank();
    for (int d : t.shape) out << " " << d;
    out << "\n";
    for (int j = 0; j < t.size(); ++j) {
      if (j) out << " ";
      out << fmt(t[j]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::vector<ad::Value> parameter_leaves(ad::Graph& g,
                                        const ParameterSet& params) {
  std::vector<ad::Value> out;
  out.reserve(params.size());
  for (int i = 0; i < params.size(); ++i) out.push_back(g.leaf(params.value(i)));
  return out;
}

std::vector<ad::Value> parameter_constants(ad::Graph& g,
                                           const ParameterSet& params) {
  std::vector<ad::Value> out;
  out.reserve(params.size());
  for (int i = 0; i < params.size(); ++i)
    out.push_back(g.constant(params.value(i)));
  return out;
}

ParameterSet load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  auto bad = [&](const std::string& why) {
    return std::runtime_error("malformed checkpoint " + file.string() + ": " +
                              why);
  };
  std::string line;
  if (!std::getline(in, line) || line != "isac-params 1")
    throw bad("unrecognized header");
  if (!std::getline(in, line)) throw bad("missing parameter count");
  int count = parse_int(trim(line));
  if (count < 0) throw bad("negative parameter count");

  ParameterSet params;
  for (int p = 0; p < count; ++p) {
    if (!std::getline(in, line)) throw bad("truncated descriptor");
    std::istringstream desc(line);
    std::string name;
    int rank = -1;
    if (!(desc >> name >> rank) || rank < 0) throw bad("bad descriptor: " + line);
    std::vector<int> shape(rank);
    for (int& d : shape)
      if (!(desc >> d) || d < 0) throw bad("bad shape in: " + line);
    if (!std::getline(in, line)) throw bad("truncated values for " + name);
    std::vector<std::string> toks = split_list(trim(line), ' ');
    ad::Tensor t = ad::Tensor::zeros(shape);
    if (static_cast<int>(toks.size()) != t.size())
      throw bad("expected " + std::to_string(t.size()) + " values for " +
                name + ", got " + std::to_string(toks.size()));
    for (int j = 0; j < t.size(); ++j) t[j] = parse_double(toks[j]);
    params.add(std::move(name), std::move(t));
  }
  return params;
}

}  // namespace isac
