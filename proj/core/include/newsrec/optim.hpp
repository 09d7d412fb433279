#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "newsrec/tensor.hpp"

namespace newsrec {

// A named trainable tensor. The gradient accumulator lives inside the
// value tensor and is engaged by the trainer before the first step.
struct Parameter {
  std::string name;
  Tensor value;
};

// Registry of trainable parameters with stable insertion order. Parameter
// addresses stay valid for the lifetime of the registry.
class ParamRegistry {
 public:
  ParamRegistry() = default;
  ParamRegistry(const ParamRegistry&) = delete;
  ParamRegistry& operator=(const ParamRegistry&) = delete;
  ParamRegistry(ParamRegistry&&) = default;
  ParamRegistry& operator=(ParamRegistry&&) = default;

  Parameter& create(std::string name, Tensor init);
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  size_t size() const { return params_.size(); }
  int64_t total_values() const;

  const std::vector<std::unique_ptr<Parameter>>& entries() const {
    return params_;
  }
  std::vector<std::unique_ptr<Parameter>>& entries() { return params_; }

  void ensure_grads();
  void zero_grads();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> index_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment state aligned with the registry's insertion order.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const ParamRegistry& params, AdamConfig cfg = {});

  int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

  friend void adam_step(ParamRegistry& params, AdamState& state, double lr);

 private:
  AdamConfig cfg_;
  int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// One Adam update over every parameter; requires every parameter to carry
// an engaged gradient accumulator. Gradients are zeroed afterwards.
void adam_step(ParamRegistry& params, AdamState& state, double lr);

}  // namespace newsrec
