#include "aclab/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace aclab {

OptimState::OptimState(const ParamSet& params, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& e : params) {
    m_.add(e.name, Tensor::zeros(e.tensor.shape));
    v_.add(e.name, Tensor::zeros(e.tensor.shape));
  }
}

void adam_update(ParamSet& params, const GradMap& grads, OptimState& state) {
  for (const auto& e : params)
    if (grads.find(e.name) == grads.end())
      throw std::invalid_argument("adam_update: missing gradient for parameter '" + e.name + "'");

  state.step_ += 1;
  const auto& cfg = state.cfg_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_));

  for (auto& e : params) {
    const Tensor& g = grads.at(e.name);
    if (!g.same_shape(e.tensor))
      throw std::invalid_argument("adam_update: gradient shape " + shape_str(g.shape) +
                                  " != parameter shape " + shape_str(e.tensor.shape) + " for '" +
                                  e.name + "'");
    Tensor& m = state.m_.get(e.name);
    Tensor& v = state.v_.get(e.name);
    for (std::size_t i = 0; i < e.tensor.data.size(); ++i) {
      const double gi = g.data[i];
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * gi;
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      e.tensor.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace aclab
