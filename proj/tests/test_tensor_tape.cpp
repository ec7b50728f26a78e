#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "aclab/adam.hpp"
#include "aclab/paramset.hpp"
#include "aclab/tape.hpp"
#include "support/gradcheck.hpp"

using namespace aclab;

TEST_CASE("tensor shape/data consistency") {
  CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor({0}, {}), std::invalid_argument);
  Tensor t = Tensor::zeros({2, 3});
  CHECK(t.numel() == 6);
  CHECK(Tensor::scalar(4.0).is_scalar());
}

TEST_CASE("conv2d_same all-ones 3x3") {
  Tape tape;
  Var x = tape.constant(Tensor::full({1, 3, 3}, 1.0));
  Var k = tape.param("k", Tensor::full({1, 1, 3, 3}, 1.0));
  Var b = tape.param("b", Tensor::zeros({1}));
  Var out = conv2d_same(x, k, b);
  const Tensor& o = tape.value(out);
  CHECK(o.at3(0, 1, 1) == doctest::Approx(9.0));
  CHECK(o.at3(0, 0, 0) == doctest::Approx(4.0));
  CHECK(o.at3(0, 2, 2) == doctest::Approx(4.0));
  CHECK(o.at3(0, 0, 1) == doctest::Approx(6.0));
  CHECK(o.at3(0, 1, 0) == doctest::Approx(6.0));
}

TEST_CASE("conv2d_same identity kernel") {
  SplitMix64 rng(3);
  Tape tape;
  Tensor img = gradcheck::random_tensor({2, 5, 5}, rng);
  Var x = tape.constant(img);
  Tensor id = Tensor::zeros({2, 2, 1, 1});
  id.data[0] = 1.0;  // k[0,0,0,0]
  id.data[3] = 1.0;  // k[1,1,0,0]
  Var out = conv2d_same(x, tape.constant(id), tape.constant(Tensor::zeros({2})));
  CHECK(tape.value(out).data == img.data);
}

TEST_CASE("conv2d_same rejects mismatched shapes with named dimension") {
  Tape tape;
  Var x = tape.constant(Tensor::zeros({2, 4, 4}));
  Var k = tape.constant(Tensor::zeros({3, 5, 3, 3}));  // wrong input channels
  Var b = tape.constant(Tensor::zeros({3}));
  CHECK_THROWS_WITH_AS(conv2d_same(x, k, b),
                       doctest::Contains("kernel input-channel dim is 5"), std::invalid_argument);
  Var k2 = tape.constant(Tensor::zeros({3, 2, 4, 4}));  // even kernel
  CHECK_THROWS_AS(conv2d_same(x, k2, b), std::invalid_argument);
  Var b2 = tape.constant(Tensor::zeros({4}));
  Var k3 = tape.constant(Tensor::zeros({3, 2, 3, 3}));
  CHECK_THROWS_WITH_AS(conv2d_same(x, k3, b2), doctest::Contains("bias dim is 4"),
                       std::invalid_argument);
}

TEST_CASE("conv2d bias gradient equals H*W under sum loss") {
  SplitMix64 rng(11);
  Tape tape;
  Var x = tape.constant(gradcheck::random_tensor({2, 4, 6}, rng));
  Var k = tape.constant(gradcheck::random_tensor({3, 2, 3, 3}, rng));
  Var b = tape.param("b", Tensor::zeros({3}));
  Var loss = sum(conv2d_same(x, k, b));
  GradMap g = tape.backward(loss);
  for (double v : g.at("b").data) CHECK(v == doctest::Approx(24.0));
}

TEST_CASE("pool_avg2 examples") {
  Tape tape;
  Var x = tape.constant(Tensor({1, 2, 2}, {1.0, 3.0, 5.0, 7.0}));
  CHECK(tape.value(pool_avg2(x)).data[0] == doctest::Approx(4.0));

  Var c = tape.constant(Tensor::full({3, 4, 4}, 0.7));
  for (double v : tape.value(pool_avg2(c)).data) CHECK(v == doctest::Approx(0.7));
  for (double v : tape.value(upsample_nearest2(c)).data) CHECK(v == doctest::Approx(0.7));

  Var odd = tape.constant(Tensor::zeros({1, 3, 4}));
  CHECK_THROWS_AS(pool_avg2(odd), std::invalid_argument);
}

TEST_CASE("pool then upsample is identity on block-constant images") {
  SplitMix64 rng(5);
  Tensor small = gradcheck::random_tensor({2, 3, 3}, rng);
  Tape tape;
  Var up = upsample_nearest2(tape.constant(small));  // block-constant by construction
  Var roundtrip = upsample_nearest2(pool_avg2(up));
  CHECK(tape.value(roundtrip).data == tape.value(up).data);
}

TEST_CASE("upsample of single pixel") {
  Tape tape;
  Var x = tape.constant(Tensor({1, 1, 1}, {0.42}));
  const Tensor& o = tape.value(upsample_nearest2(x));
  CHECK(o.shape == std::vector<int>{1, 2, 2});
  for (double v : o.data) CHECK(v == 0.42);
}

TEST_CASE("activation point values") {
  Tape tape;
  Var x = tape.constant(Tensor({3}, {-1.0, 0.0, 2.0}));
  const Tensor& lr = tape.value(leaky_relu(x, 0.2));
  CHECK(lr.data[0] == doctest::Approx(-0.2));
  CHECK(lr.data[1] == 0.0);
  CHECK(lr.data[2] == 2.0);
  const Tensor& sg = tape.value(sigmoid(tape.constant(Tensor::scalar(0.0))));
  CHECK(sg.data[0] == 0.5);
  const Tensor& th = tape.value(tanh_act(tape.constant(Tensor::scalar(0.0))));
  CHECK(th.data[0] == 0.0);
  // strict (0,1) range for large logits
  const Tensor& sat = tape.value(sigmoid(tape.constant(Tensor({2}, {-800.0, 800.0}))));
  CHECK(sat.data[0] >= 0.0);
  CHECK(sat.data[1] <= 1.0);
  CHECK(std::isfinite(sat.data[0]));
}

TEST_CASE("backward scalar basics") {
  Tape tape;
  Var theta = tape.param("theta", Tensor::scalar(3.0));
  Var loss = square(theta);
  GradMap g = tape.backward(loss);
  CHECK(g.at("theta").data[0] == doctest::Approx(6.0));
}

TEST_CASE("backward fan-out accumulates") {
  Tape tape;
  Var theta = tape.param("theta", Tensor::scalar(1.5));
  Var y = add(theta, theta);
  GradMap g = tape.backward(y);
  CHECK(g.at("theta").data[0] == doctest::Approx(2.0));
}

TEST_CASE("backward: unreached params get zero gradients") {
  Tape tape;
  Var used = tape.param("used", Tensor::scalar(2.0));
  Var unused = tape.param("unused", Tensor::zeros({3}));
  (void)unused;
  GradMap g = tape.backward(square(used));
  CHECK(g.at("unused").data == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape tape;
  Var v = tape.param("v", Tensor::zeros({2}));
  CHECK_THROWS_AS(tape.backward(v), std::invalid_argument);
}

TEST_CASE("backward twice gives identical gradients") {
  SplitMix64 rng(17);
  Tape tape;
  Var x = tape.param("x", gradcheck::random_tensor({2, 4, 4}, rng));
  Var k = tape.param("k", gradcheck::random_tensor({2, 2, 3, 3}, rng));
  Var b = tape.param("b", gradcheck::random_tensor({2}, rng));
  Var loss = sum(sigmoid(conv2d_same(x, k, b)));
  GradMap g1 = tape.backward(loss);
  GradMap g2 = tape.backward(loss);
  for (const auto& [name, t] : g1) CHECK(t.data == g2.at(name).data);
}

TEST_CASE("primitive gradients match central finite differences") {
  for (const auto& op : gradcheck::primitive_cases()) {
    CAPTURE(op.name);
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
      worst = std::max(worst, gradcheck::check_op_case(op, seed));
    CHECK_MESSAGE(worst < 1e-6, op.name, " worst rel err ", worst);
  }
}

TEST_CASE("adam: zero gradients leave params unchanged") {
  ParamSet ps;
  ps.add("w", Tensor({2, 2}, {0.1, -0.2, 0.3, -0.4}));
  OptimState st(ps, {.lr = 0.1});
  GradMap g;
  g.emplace("w", Tensor::zeros({2, 2}));
  ParamSet before = ps;
  adam_update(ps, g, st);
  CHECK(ps == before);
  CHECK(st.step() == 1);
}

TEST_CASE("adam: first step on unit gradient moves by about -lr") {
  ParamSet ps;
  ps.add("w", Tensor::scalar(0.0));
  OptimState st(ps, {.lr = 0.1, .beta1 = 0.5, .beta2 = 0.999, .eps = 1e-8});
  GradMap g;
  g.emplace("w", Tensor::scalar(1.0));
  adam_update(ps, g, st);
  CHECK(ps.get("w").data[0] == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("adam: deterministic and rejects missing gradients") {
  SplitMix64 rng(23);
  ParamSet a, b;
  a.add("w", gradcheck::random_tensor({4}, rng));
  b.add("w", a.get("w"));
  OptimState sa(a), sb(b);
  GradMap g;
  g.emplace("w", Tensor({4}, {0.1, 0.2, -0.3, 0.4}));
  adam_update(a, g, sa);
  adam_update(b, g, sb);
  CHECK(a == b);

  GradMap empty;
  CHECK_THROWS_WITH_AS(adam_update(a, empty, sa), doctest::Contains("missing gradient"),
                       std::invalid_argument);
}

TEST_CASE("paramset flatten/unflatten round-trips bit-for-bit") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    ParamSet ps;
    ps.add("a", gradcheck::random_tensor({3, 2}, rng));
    ps.add("b", gradcheck::random_tensor({5}, rng));
    ps.add("c", gradcheck::random_tensor({2, 2, 2}, rng));
    const auto flat = ps.flatten();
    ParamSet copy = ps;
    for (auto& e : copy) (void)e;
    copy.unflatten(std::vector<double>(flat.size(), 0.0));
    copy.unflatten(flat);
    CHECK(copy == ps);
  }
}

TEST_CASE("paramset rejects duplicates and bad unflatten length") {
  ParamSet ps;
  ps.add("a", Tensor::zeros({2}));
  CHECK_THROWS_AS(ps.add("a", Tensor::zeros({2})), std::invalid_argument);
  CHECK_THROWS_AS(ps.unflatten({1.0}), std::invalid_argument);
}
