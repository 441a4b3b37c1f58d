#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "isac/autodiff.hpp"

namespace isac {

/// First-order optimizer settings; defaults are the common Adam choices.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// An ordered collection of named tensors plus their Adam moment estimates.
/// Order is the order of insertion and defines the gradient layout expected
/// by adam_step; names must be unique and non-empty.
class ParameterSet {
 public:
  int add(std::string name, ad::Tensor init);

  int size() const { return static_cast<int>(entries_.size()); }
  const std::string& name(int i) const { return entries_.at(i).name; }
  const ad::Tensor& value(int i) const { return entries_.at(i).value; }
  ad::Tensor& value(int i) { return entries_.at(i).value; }
  /// Index of a name, or -1 when absent.
  int find(std::string_view name) const;
  const ad::Tensor& at(std::string_view name) const;

  std::int64_t step_count() const { return step_count_; }

  /// One bias-corrected Adam update from per-parameter gradients, given in
  /// insertion order. Throws std::invalid_argument on count/shape mismatch.
  void adam_step(std::span<const ad::Tensor> grads, const AdamConfig& cfg);

 private:
  struct Entry {
    std::string name;
    ad::Tensor value;
    ad::Tensor m;
    ad::Tensor v;
  };
  std::vector<Entry> entries_;
  std::int64_t step_count_ = 0;
};

/// Plain-text parameter snapshot. Values are written with shortest
/// round-trip formatting, so save followed by load reproduces every double
/// bit for bit. Optimizer moments are not part of a checkpoint.
void save_checkpoint(const ParameterSet& params,
                     const std::filesystem::path& file);
ParameterSet load_checkpoint(const std::filesystem::path& file);

/// One differentiable leaf per parameter, in insertion order, so that
/// leaf gradients line up with the gradient layout of adam_step.
std::vector<ad::Value> parameter_leaves(ad::Graph& g,
                                        const ParameterSet& params);

/// Constant (non-differentiable) nodes for inference-only forward passes.
std::vector<ad::Value> parameter_constants(ad::Graph& g,
                                           const ParameterSet& params);

}  // namespace isac
