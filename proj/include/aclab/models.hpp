#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "aclab/paramset.hpp"
#include "aclab/tape.hpp"

namespace aclab {

enum class Role { generator, discriminator, mapper };

const char* role_name(Role r);

// Architecture knobs shared by the three network families. Per-level widths
// double from base_width; depth is the number of down/up levels. The
// discriminator head is built for a fixed training resolution (image_h,
// image_w) and rejects anything else.
struct ArchSpec {
  int channels = 1;
  int base_width = 8;
  int depth = 2;
  int ksize = 3;
  double leaky_slope = 0.2;
  int image_h = 16;
  int image_w = 16;
};

// He fan-in scaled normal weights, zero biases; fully determined by
// (spec, role, seed).
ParamSet init_params(const ArchSpec& spec, Role role, std::uint64_t seed);

// Closed-form parameter count for a role, matching init_params exactly.
std::int64_t param_count(const ArchSpec& spec, Role role);

using ParamVars = std::map<std::string, Var>;

ParamVars register_params(Tape& tape, const ParamSet& ps);     // with gradients
ParamVars register_constants(Tape& tape, const ParamSet& ps);  // frozen

// Taped forwards (pure functions of params and input).
// Generator: encoder (conv+leaky-relu+pool per level), bottleneck, decoder
// (upsample+skip concat+conv), final sigmoid; output shape == input shape.
Var generator_forward(Tape& tape, const ParamVars& pv, Var x, const ArchSpec& spec);

// Discriminator: conv+leaky-relu+pool blocks, flatten, dense. The logit
// variant exists so losses can be built overflow-free; probability is
// sigmoid(logit).
Var discriminator_logit(Tape& tape, const ParamVars& pv, Var img, const ArchSpec& spec);
Var discriminator_forward(Tape& tape, const ParamVars& pv, Var img, const ArchSpec& spec);

// Mapper: encoder-decoder without skip connections, final sigmoid.
Var mapper_forward(Tape& tape, const ParamVars& pv, Var y, const ArchSpec& spec);

// Convenience no-grad evaluation on a scratch tape.
Tensor generator_apply(const ParamSet& ps, const Tensor& x, const ArchSpec& spec);
double discriminator_apply(const ParamSet& ps, const Tensor& img, const ArchSpec& spec);
double discriminator_logit_apply(const ParamSet& ps, const Tensor& img, const ArchSpec& spec);
Tensor mapper_apply(const ParamSet& ps, const Tensor& y, const ArchSpec& spec);

}  // namespace aclab
