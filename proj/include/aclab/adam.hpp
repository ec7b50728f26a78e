#pragma once

#include <cstdint>

#include "aclab/paramset.hpp"
#include "aclab/tape.hpp"

namespace aclab {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;  // GAN-conventional
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-parameter first/second moment accumulators plus step counter. Moments
// shape-match the parameters they were built for.
class OptimState {
 public:
  OptimState() = default;
  OptimState(const ParamSet& params, AdamConfig cfg = {});

  const AdamConfig& config() const { return cfg_; }
  std::int64_t step() const { return step_; }

  const ParamSet& first_moment() const { return m_; }
  const ParamSet& second_moment() const { return v_; }

  friend void adam_update(ParamSet& params, const GradMap& grads, OptimState& state);

 private:
  AdamConfig cfg_;
  ParamSet m_;
  ParamSet v_;
  std::int64_t step_ = 0;
};

// Bias-corrected adaptive-moment step, applied in parameter iteration order.
// Rejects gradient maps that do not cover every parameter.
void adam_update(ParamSet& params, const GradMap& grads, OptimState& state);

}  // namespace aclab
