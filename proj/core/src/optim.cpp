#include "newsrec/optim.hpp"

#include <cmath>

#include "newsrec/error.hpp"

namespace newsrec {

Parameter& ParamRegistry::create(std::string name, Tensor init) {
  if (index_.count(name)) {
    throw InvariantError("parameter registered twice: " + name);
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = std::move(init);
  Parameter& ref = *p;
  index_.emplace(std::move(name), p.get());
  params_.push_back(std::move(p));
  return ref;
}

Parameter* ParamRegistry::find(std::string_view name) {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : it->second;
}

const Parameter* ParamRegistry::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : it->second;
}

int64_t ParamRegistry::total_values() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p->value.numel();
  return n;
}

void ParamRegistry::ensure_grads() {
  for (auto& p : params_) p->value.ensure_grad();
}

void ParamRegistry::zero_grads() {
  for (auto& p : params_) {
    p->value.ensure_grad();
    p->value.zero_grad();
  }
}

AdamState::AdamState(const ParamRegistry& params, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params.entries()) {
    m_.emplace_back(static_cast<size_t>(p->value.numel()), 0.0);
    v_.emplace_back(static_cast<size_t>(p->value.numel()), 0.0);
  }
}

void adam_step(ParamRegistry& params, AdamState& state, double lr) {
  if (state.m_.size() != params.size()) {
    throw InvariantError("adam_step: state does not match registry");
  }
  for (const auto& p : params.entries()) {
    if (!p->value.has_grad()) {
      throw InvariantError("adam_step: parameter '" + p->name +
                           "' has no accumulated gradient");
    }
  }
  state.step_ += 1;
  const double b1 = state.cfg_.beta1;
  const double b2 = state.cfg_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step_));
  for (size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params.entries()[k];
    auto& g = p.value.grad();
    auto& m = state.m_[k];
    auto& v = state.v_[k];
    double* w = p.value.data();
    for (size_t i = 0; i < g.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + state.cfg_.eps);
      g[i] = 0.0;
    }
  }
}

}  // namespace newsrec
