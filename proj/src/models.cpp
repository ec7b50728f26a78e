#include "aclab/models.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "aclab/rng.hpp"

namespace aclab {

const char* role_name(Role r) {
  switch (r) {
    case Role::generator: return "generator";
    case Role::discriminator: return "discriminator";
    case Role::mapper: return "mapper";
  }
  return "?";
}

namespace {

int level_width(const ArchSpec& s, int level) { return s.base_width << level; }

struct ConvShape {
  std::string name;
  int in_ch;
  int out_ch;
};

// Layer tables; init, forwards and param_count all derive from these so they
// cannot drift apart.
std::vector<ConvShape> generator_convs(const ArchSpec& s) {
  std::vector<ConvShape> convs;
  int in_ch = s.channels;
  for (int l = 0; l < s.depth; ++l) {
    convs.push_back({"enc" + std::to_string(l + 1), in_ch, level_width(s, l)});
    in_ch = level_width(s, l);
  }
  convs.push_back({"bott", in_ch, level_width(s, s.depth)});
  for (int l = s.depth - 1; l >= 0; --l)
    convs.push_back({"dec" + std::to_string(l + 1), level_width(s, l + 1) + level_width(s, l),
                     level_width(s, l)});
  convs.push_back({"out", s.base_width, s.channels});
  return convs;
}

std::vector<ConvShape> mapper_convs(const ArchSpec& s) {
  std::vector<ConvShape> convs;
  int in_ch = s.channels;
  for (int l = 0; l < s.depth; ++l) {
    convs.push_back({"enc" + std::to_string(l + 1), in_ch, level_width(s, l)});
    in_ch = level_width(s, l);
  }
  convs.push_back({"bott", in_ch, level_width(s, s.depth)});
  for (int l = s.depth - 1; l >= 0; --l)
    convs.push_back({"dec" + std::to_string(l + 1), level_width(s, l + 1), level_width(s, l)});
  convs.push_back({"out", s.base_width, s.channels});
  return convs;
}

std::vector<ConvShape> discriminator_convs(const ArchSpec& s) {
  std::vector<ConvShape> convs;
  int in_ch = s.channels;
  for (int l = 0; l <= s.depth; ++l) {
    convs.push_back({"c" + std::to_string(l + 1), in_ch, level_width(s, l)});
    in_ch = level_width(s, l);
  }
  return convs;
}

int discriminator_flat_dim(const ArchSpec& s) {
  const int blocks = s.depth + 1;
  const int div = 1 << blocks;
  if (s.image_h % div != 0 || s.image_w % div != 0)
    throw std::invalid_argument("discriminator: training resolution " + std::to_string(s.image_h) +
                                "x" + std::to_string(s.image_w) + " not divisible by " +
                                std::to_string(div));
  return level_width(s, s.depth) * (s.image_h / div) * (s.image_w / div);
}

void check_generator_input(const Tensor& x, const ArchSpec& s, const char* who) {
  if (x.shape.size() != 3 || x.shape[0] != s.channels)
    throw std::invalid_argument(std::string(who) + ": expected [" + std::to_string(s.channels) +
                                ",H,W] input, got " + shape_str(x.shape));
  const int div = 1 << s.depth;
  if (x.shape[1] % div != 0 || x.shape[2] % div != 0)
    throw std::invalid_argument(std::string(who) + ": spatial dims " + shape_str(x.shape) +
                                " not divisible by " + std::to_string(div));
}

Var conv_block(const ParamVars& pv, Var x, const std::string& name, double slope) {
  const auto w = pv.find(name + ".w");
  const auto b = pv.find(name + ".b");
  if (w == pv.end() || b == pv.end())
    throw std::invalid_argument("forward: missing parameters for layer '" + name + "'");
  Var y = conv2d_same(x, w->second, b->second);
  return leaky_relu(y, slope);
}

Var conv_plain(const ParamVars& pv, Var x, const std::string& name) {
  const auto w = pv.find(name + ".w");
  const auto b = pv.find(name + ".b");
  if (w == pv.end() || b == pv.end())
    throw std::invalid_argument("forward: missing parameters for layer '" + name + "'");
  return conv2d_same(x, w->second, b->second);
}

}  // namespace

ParamSet init_params(const ArchSpec& spec, Role role, std::uint64_t seed) {
  SplitMix64 rng = substream(seed, std::string("init:") + role_name(role));
  ParamSet ps;
  auto add_conv = [&](const ConvShape& c) {
    const int fan_in = c.in_ch * spec.ksize * spec.ksize;
    const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
    Tensor w = Tensor::zeros({c.out_ch, c.in_ch, spec.ksize, spec.ksize});
    for (auto& v : w.data) v = std_dev * rng.next_normal();
    ps.add(c.name + ".w", std::move(w));
    ps.add(c.name + ".b", Tensor::zeros({c.out_ch}));
  };

  switch (role) {
    case Role::generator:
      for (const auto& c : generator_convs(spec)) add_conv(c);
      break;
    case Role::mapper:
      for (const auto& c : mapper_convs(spec)) add_conv(c);
      break;
    case Role::discriminator: {
      for (const auto& c : discriminator_convs(spec)) add_conv(c);
      const int n = discriminator_flat_dim(spec);
      const double std_dev = std::sqrt(2.0 / static_cast<double>(n));
      Tensor w = Tensor::zeros({1, n});
      for (auto& v : w.data) v = std_dev * rng.next_normal();
      ps.add("fc.w", std::move(w));
      ps.add("fc.b", Tensor::zeros({1}));
      break;
    }
  }
  return ps;
}

std::int64_t param_count(const ArchSpec& spec, Role role) {
  auto conv_params = [&](const std::vector<ConvShape>& convs) {
    std::int64_t n = 0;
    for (const auto& c : convs)
      n += static_cast<std::int64_t>(c.out_ch) * c.in_ch * spec.ksize * spec.ksize + c.out_ch;
    return n;
  };
  switch (role) {
    case Role::generator: return conv_params(generator_convs(spec));
    case Role::mapper: return conv_params(mapper_convs(spec));
    case Role::discriminator:
      return conv_params(discriminator_convs(spec)) + discriminator_flat_dim(spec) + 1;
  }
  return 0;
}

ParamVars register_params(Tape& tape, const ParamSet& ps) {
  ParamVars pv;
  for (const auto& e : ps) pv.emplace(e.name, tape.param(e.name, e.tensor));
  return pv;
}

ParamVars register_constants(Tape& tape, const ParamSet& ps) {
  ParamVars pv;
  for (const auto& e : ps) pv.emplace(e.name, tape.constant(e.tensor));
  return pv;
}

Var generator_forward(Tape& tape, const ParamVars& pv, Var x, const ArchSpec& spec) {
  check_generator_input(tape.value(x), spec, "generator_forward");
  std::vector<Var> skips;
  Var h = x;
  for (int l = 0; l < spec.depth; ++l) {
    h = conv_block(pv, h, "enc" + std::to_string(l + 1), spec.leaky_slope);
    skips.push_back(h);
    h = pool_avg2(h);
  }
  h = conv_block(pv, h, "bott", spec.leaky_slope);
  for (int l = spec.depth - 1; l >= 0; --l) {
    h = upsample_nearest2(h);
    h = concat_ch(h, skips[static_cast<std::size_t>(l)]);
    h = conv_block(pv, h, "dec" + std::to_string(l + 1), spec.leaky_slope);
  }
  h = conv_plain(pv, h, "out");
  return sigmoid(h);
}

Var mapper_forward(Tape& tape, const ParamVars& pv, Var y, const ArchSpec& spec) {
  check_generator_input(tape.value(y), spec, "mapper_forward");
  Var h = y;
  for (int l = 0; l < spec.depth; ++l) {
    h = conv_block(pv, h, "enc" + std::to_string(l + 1), spec.leaky_slope);
    h = pool_avg2(h);
  }
  h = conv_block(pv, h, "bott", spec.leaky_slope);
  for (int l = spec.depth - 1; l >= 0; --l) {
    h = upsample_nearest2(h);
    h = conv_block(pv, h, "dec" + std::to_string(l + 1), spec.leaky_slope);
  }
  h = conv_plain(pv, h, "out");
  return sigmoid(h);
}

Var discriminator_logit(Tape& tape, const ParamVars& pv, Var img, const ArchSpec& spec) {
  const Tensor& v = tape.value(img);
  if (v.shape.size() != 3 || v.shape[0] != spec.channels || v.shape[1] != spec.image_h ||
      v.shape[2] != spec.image_w)
    throw std::invalid_argument("discriminator: expected [" + std::to_string(spec.channels) + "," +
                                std::to_string(spec.image_h) + "," + std::to_string(spec.image_w) +
                                "] input, got " + shape_str(v.shape));
  Var h = img;
  for (int l = 0; l <= spec.depth; ++l) {
    h = conv_block(pv, h, "c" + std::to_string(l + 1), spec.leaky_slope);
    h = pool_avg2(h);
  }
  const auto w = pv.find("fc.w");
  const auto b = pv.find("fc.b");
  if (w == pv.end() || b == pv.end())
    throw std::invalid_argument("discriminator: missing dense head parameters");
  return as_scalar(dense(h, w->second, b->second));
}

Var discriminator_forward(Tape& tape, const ParamVars& pv, Var img, const ArchSpec& spec) {
  return sigmoid(discriminator_logit(tape, pv, img, spec));
}

Tensor generator_apply(const ParamSet& ps, const Tensor& x, const ArchSpec& spec) {
  Tape tape;
  ParamVars pv = register_constants(tape, ps);
  Var out = generator_forward(tape, pv, tape.constant(x), spec);
  return tape.value(out);
}

double discriminator_apply(const ParamSet& ps, const Tensor& img, const ArchSpec& spec) {
  Tape tape;
  ParamVars pv = register_constants(tape, ps);
  Var out = discriminator_forward(tape, pv, tape.constant(img), spec);
  return tape.value(out).data[0];
}

double discriminator_logit_apply(const ParamSet& ps, const Tensor& img, const ArchSpec& spec) {
  Tape tape;
  ParamVars pv = register_constants(tape, ps);
  Var out = discriminator_logit(tape, pv, tape.constant(img), spec);
  return tape.value(out).data[0];
}

Tensor mapper_apply(const ParamSet& ps, const Tensor& y, const ArchSpec& spec) {
  Tape tape;
  ParamVars pv = register_constants(tape, ps);
  Var out = mapper_forward(tape, pv, tape.constant(y), spec);
  return tape.value(out);
}

}  // namespace aclab
