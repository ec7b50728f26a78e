#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "aclab/adam.hpp"
#include "aclab/continual.hpp"
#include "aclab/rng.hpp"
#include "support/gradcheck.hpp"

using namespace aclab;
namespace fs = std::filesystem;

namespace {

ArchSpec tiny_spec() {
  ArchSpec s;
  s.base_width = 2;
  s.image_h = 8;
  s.image_w = 8;
  return s;
}

std::vector<Pair> tiny_pairs(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Pair> pairs;
  for (int i = 0; i < n; ++i)
    pairs.emplace_back(gradcheck::random_tensor({1, 8, 8}, rng, 0.0, 1.0),
                       gradcheck::random_tensor({1, 8, 8}, rng, 0.2, 0.8));
  return pairs;
}

// Single-parameter linear model y = theta*x used as an independently
// checkable Fisher target.
FisherSnapshot scalar_fisher(double theta, const std::vector<std::pair<double, double>>& data) {
  FisherSnapshot snap;
  snap.theta_star = {theta};
  snap.fisher = {0.0};
  for (const auto& [x, y] : data) {
    const double g = 2.0 * (theta * x - y) * x;  // d/dtheta (theta*x - y)^2
    snap.fisher[0] += g * g;
  }
  snap.fisher[0] /= static_cast<double>(data.size());
  snap.sample_count = static_cast<int>(data.size());
  return snap;
}

}  // namespace

TEST_CASE("scalar-model Fisher: hand value 0.36") {
  // theta=0.3, single datum (x=1, y=0), per-sample loss (theta*x - y)^2:
  // gradient 0.6, squared 0.36.
  FisherSnapshot snap = scalar_fisher(0.3, {{1.0, 0.0}});
  CHECK(snap.fisher[0] == doctest::Approx(0.36).epsilon(1e-12));

  // Cross-check the same gradient by central differences.
  const double theta = 0.3, eps = 1e-5;
  auto loss = [&](double t) { return (t * 1.0 - 0.0) * (t * 1.0 - 0.0); };
  const double fd = (loss(theta + eps) - loss(theta - eps)) / (2 * eps);
  CHECK(gradcheck::rel_err(fd, 0.6) < 1e-9);
}

TEST_CASE("estimate_diag_fisher on the generator") {
  const ArchSpec spec = tiny_spec();
  ParamSet gen = init_params(spec, Role::generator, 17);
  auto pairs = tiny_pairs(4, 3);

  SUBCASE("m=2 equals elementwise mean of squared per-sample gradients") {
    FisherSnapshot snap = estimate_diag_fisher(gen, pairs, 2, spec, 1);
    // Brute force per sample.
    std::vector<std::vector<double>> gs;
    for (int i = 0; i < 2; ++i) {
      Tape tape;
      ParamVars pv = register_params(tape, gen);
      Var out = generator_forward(tape, pv, tape.constant(pairs[i].first), spec);
      GradMap g = tape.backward(sq_norm_to(out, pairs[i].second));
      std::vector<double> flat;
      for (const auto& e : gen)
        for (double v : g.at(e.name).data) flat.push_back(v);
      gs.push_back(std::move(flat));
    }
    for (std::size_t j = 0; j < snap.fisher.size(); ++j) {
      const double expect = 0.5 * (gs[0][j] * gs[0][j] + gs[1][j] * gs[1][j]);
      CHECK(snap.fisher[j] == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(snap.theta_star == gen.flatten());
  }

  SUBCASE("perfect fit gives an all-zero Fisher") {
    // Make the dataset the generator's own outputs: residuals vanish.
    std::vector<Pair> fitted;
    for (const auto& [x, y] : pairs) fitted.emplace_back(x, generator_apply(gen, x, spec));
    FisherSnapshot snap = estimate_diag_fisher(gen, fitted, static_cast<int>(fitted.size()), spec, 1);
    for (double f : snap.fisher) CHECK(f == 0.0);
  }

  SUBCASE("rejects empty data and bad sample counts") {
    CHECK_THROWS_AS(estimate_diag_fisher(gen, {}, 1, spec, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_diag_fisher(gen, pairs, 99, spec, 1), std::invalid_argument);
  }

  SUBCASE("fisher entries are non-negative and permute with parameter order") {
    FisherSnapshot snap = estimate_diag_fisher(gen, pairs, 3, spec, 1);
    for (double f : snap.fisher) CHECK(f >= 0.0);

    ParamSet permuted;
    std::vector<std::size_t> order(gen.size());
    for (std::size_t i = 0; i < gen.size(); ++i) order[i] = gen.size() - 1 - i;
    for (std::size_t i : order) permuted.add(gen.entry(i).name, gen.entry(i).tensor);
    FisherSnapshot psnap = estimate_diag_fisher(permuted, pairs, 3, spec, 1);

    std::map<std::string, std::vector<double>> by_name, by_name_p;
    std::size_t off = 0;
    for (const auto& e : gen) {
      by_name[e.name] = {snap.fisher.begin() + off, snap.fisher.begin() + off + e.tensor.data.size()};
      off += e.tensor.data.size();
    }
    off = 0;
    for (const auto& e : permuted) {
      by_name_p[e.name] = {psnap.fisher.begin() + off,
                           psnap.fisher.begin() + off + e.tensor.data.size()};
      off += e.tensor.data.size();
    }
    CHECK(by_name == by_name_p);
  }
}

TEST_CASE("distill_penalty basics") {
  FisherSnapshot snap;
  snap.theta_star = {1.0, -2.0};
  snap.fisher = {2.0, 4.0};

  ParamSet at_star;
  at_star.add("w", Tensor({2}, {1.0, -2.0}));
  CHECK(distill_penalty(at_star, snap) == 0.0);

  ParamSet moved;
  moved.add("w", Tensor({2}, {1.1, -2.2}));
  CHECK(distill_penalty(moved, snap) == doctest::Approx(0.09).epsilon(1e-12));

  ParamSet wrong;
  wrong.add("w", Tensor({3}, {0.0, 0.0, 0.0}));
  CHECK_THROWS_AS(distill_penalty(wrong, snap), std::invalid_argument);
}

TEST_CASE("penalty gradient equals F(theta - theta*) within 1e-8") {
  SplitMix64 rng(41);
  ParamSet ps;
  ps.add("a", gradcheck::random_tensor({4, 3}, rng));
  ps.add("b", gradcheck::random_tensor({8}, rng));
  FisherSnapshot snap;
  snap.theta_star = gradcheck::random_tensor({20}, rng).data;
  snap.fisher = gradcheck::random_tensor({20}, rng, 0.0, 5.0).data;

  Tape tape;
  ParamVars pv = register_params(tape, ps);
  Var penalty = distill_penalty_node(tape, pv, ps, snap);
  GradMap grads = tape.backward(penalty);

  const auto flat = ps.flatten();
  std::size_t j = 0;
  for (const auto& e : ps)
    for (double gv : grads.at(e.name).data) {
      const double expect = snap.fisher[j] * (flat[j] - snap.theta_star[j]);
      CHECK(gradcheck::rel_err(gv, expect) < 1e-12);
      ++j;
    }

  auto loss_of = [&](const ParamSet& p) {
    Tape t;
    ParamVars v = register_params(t, p);
    return t.value(distill_penalty_node(t, v, p, snap)).data[0];
  };
  CHECK(gradcheck::max_grad_err(loss_of, ps, grads) < 1e-8);
}

TEST_CASE("penalty is non-negative and scales linearly in lambda_prime") {
  SplitMix64 rng(43);
  const ArchSpec spec = tiny_spec();
  ParamSet gen = init_params(spec, Role::generator, 5);
  ParamSet disc = init_params(spec, Role::discriminator, 5);
  auto pairs = tiny_pairs(3, 9);
  FisherSnapshot snap = estimate_diag_fisher(gen, pairs, 2, spec, 1);
  for (auto& v : gen.get("out.b").data) v += 0.25;  // move away from the anchor

  CHECK(distill_penalty(gen, snap) > 0.0);

  LossWeights w1{.lambda_adv = 0.0, .lambda_prime = 1.0};
  LossWeights w2{.lambda_adv = 0.0, .lambda_prime = 2.0};
  const LossBreakdown b1 = total_loss(pairs, gen, disc, &snap, w1, spec);
  const LossBreakdown b2 = total_loss(pairs, gen, disc, &snap, w2, spec);
  CHECK(b1.feature == b2.feature);
  CHECK(b2.total - b2.mse == doctest::Approx(2.0 * (b1.total - b1.mse)).epsilon(1e-12));
}

TEST_CASE("one anchoring step strictly decreases the penalty") {
  const ArchSpec spec = tiny_spec();
  ParamSet gen = init_params(spec, Role::generator, 31);
  auto pairs = tiny_pairs(3, 7);
  FisherSnapshot snap = estimate_diag_fisher(gen, pairs, 3, spec, 1);
  for (auto& e : gen)
    for (auto& v : e.tensor.data) v += 0.05;

  const double before = distill_penalty(gen, snap);
  REQUIRE(before > 0.0);
  Tape tape;
  ParamVars pv = register_params(tape, gen);
  Var loss = scale(distill_penalty_node(tape, pv, gen, snap), 5.0);
  GradMap grads = tape.backward(loss);
  OptimState opt(gen, {.lr = 1e-3});
  adam_update(gen, grads, opt);
  CHECK(distill_penalty(gen, snap) < before);
}

TEST_CASE("total_loss component structure") {
  const ArchSpec spec = tiny_spec();
  ParamSet gen = init_params(spec, Role::generator, 2);
  ParamSet disc = init_params(spec, Role::discriminator, 2);
  auto pairs = tiny_pairs(3, 21);

  SUBCASE("lambda=0, lambda_prime=0 collapses to the content loss") {
    LossWeights w{.lambda_adv = 0.0, .lambda_prime = 0.0};
    const LossBreakdown b = total_loss(pairs, gen, disc, nullptr, w, spec);
    CHECK(b.total == b.mse);
    CHECK(b.feature == 0.0);
  }

  SUBCASE("missing snapshot zeroes the feature component") {
    LossWeights w{.lambda_adv = 0.5, .lambda_prime = 5.0};
    const LossBreakdown b = total_loss(pairs, gen, disc, nullptr, w, spec);
    CHECK(b.feature == 0.0);
    CHECK(b.total == doctest::Approx(b.mse + 0.5 * b.adv).epsilon(1e-12));
  }

  SUBCASE("perfect generator with D = 0.5 gives lambda*log2 plus anchor term") {
    // Fit targets to the generator's own outputs and zero the dense head.
    std::vector<Pair> fitted;
    for (const auto& [x, y] : pairs) fitted.emplace_back(x, generator_apply(gen, x, spec));
    for (auto& v : disc.get("fc.w").data) v = 0.0;
    disc.get("fc.b").data[0] = 0.0;
    FisherSnapshot snap = estimate_diag_fisher(gen, tiny_pairs(3, 22), 2, spec, 1);
    LossWeights w{.lambda_adv = 0.25, .lambda_prime = 5.0};
    const LossBreakdown b = total_loss(fitted, gen, disc, &snap, w, spec);
    CHECK(b.mse == 0.0);
    CHECK(b.adv == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(b.total ==
          doctest::Approx(0.25 * std::log(2.0) + 5.0 * b.feature).epsilon(1e-12));
  }

  SUBCASE("empty batch is rejected") {
    LossWeights w;
    CHECK_THROWS_AS(total_loss({}, gen, disc, nullptr, w, spec), std::invalid_argument);
  }
}

TEST_CASE("end-to-end total_loss gradient matches finite differences on sampled params") {
  const ArchSpec spec = tiny_spec();
  ParamSet gen = init_params(spec, Role::generator, 13);
  ParamSet disc = init_params(spec, Role::discriminator, 13);
  auto pairs = tiny_pairs(2, 33);
  FisherSnapshot snap = estimate_diag_fisher(gen, pairs, 2, spec, 1);
  for (auto& v : gen.get("bott.b").data) v += 0.1;
  LossWeights w{.lambda_adv = 0.2, .lambda_prime = 3.0};

  GradMap grads;
  total_loss(pairs, gen, disc, &snap, w, spec, &grads);
  auto loss_of = [&](const ParamSet& p) {
    return total_loss(pairs, p, disc, &snap, w, spec).total;
  };

  SplitMix64 rng(57);
  double worst = 0.0;
  for (int probe = 0; probe < 10; ++probe) {
    const auto& entry = gen.entry(rng.next_below(gen.size()));
    const std::size_t idx = rng.next_below(entry.tensor.data.size());
    const double num = gradcheck::fd_grad(loss_of, gen, entry.name, idx);
    worst = std::max(worst, gradcheck::rel_err(grads.at(entry.name).data[idx], num));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("fisher snapshot serialization round-trips") {
  const ArchSpec spec = tiny_spec();
  ParamSet gen = init_params(spec, Role::generator, 3);
  FisherSnapshot snap = estimate_diag_fisher(gen, tiny_pairs(3, 5), 2, spec, 4);
  const std::string path = (fs::temp_directory_path() / "aclab_fisher.acls").string();
  save_fisher_snapshot(snap, path);
  FisherSnapshot loaded = load_fisher_snapshot(path);
  CHECK(loaded.theta_star == snap.theta_star);
  CHECK(loaded.fisher == snap.fisher);
  CHECK(loaded.source_task == 4);
  CHECK(loaded.sample_count == 2);
  fs::remove(path);
}
