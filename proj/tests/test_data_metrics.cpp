#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "aclab/data.hpp"
#include "aclab/image_io.hpp"
#include "aclab/metrics.hpp"
#include "support/gradcheck.hpp"
#include "support/reference_metrics.hpp"

using namespace aclab;
namespace fs = std::filesystem;

TEST_CASE("psnr closed-form cases") {
  Tensor a = Tensor::full({1, 8, 8}, 0.5);
  CHECK(psnr(a, a) == 99.0);

  Tensor b = Tensor::full({1, 8, 8}, 0.6);  // uniform difference 0.1 -> MSE 0.01
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));

  // halving the MSE raises PSNR by 10*log10(2)
  Tensor c = a;
  Tensor d = a;
  for (std::size_t i = 0; i < c.data.size(); i += 2) c.data[i] += 0.1;  // half the pixels differ
  for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] += 0.1;
  CHECK(psnr(a, c) - psnr(a, d) == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));

  CHECK_THROWS_AS(psnr(a, Tensor::zeros({1, 4, 4})), std::invalid_argument);
}

TEST_CASE("psnr is strictly decreasing in MSE and non-negative on [0,1] images") {
  SplitMix64 rng(12);
  Tensor base = gradcheck::random_tensor({1, 8, 8}, rng, 0.0, 1.0);
  double prev = psnr(base, base);
  for (double step : {0.02, 0.05, 0.1, 0.3, 0.6}) {
    Tensor noisy = base;
    for (auto& v : noisy.data) v = std::min(1.0, v + step);
    const double p = psnr(base, noisy);
    CHECK(p < prev);
    CHECK(p >= 0.0);
    prev = p;
  }
}

TEST_CASE("ssim exact and closed-form cases") {
  SplitMix64 rng(21);
  Tensor x = gradcheck::random_tensor({1, 16, 16}, rng, 0.0, 1.0);
  CHECK(ssim(x, x) == 1.0);

  // constant images 0.2 vs 0.8: zero variances leave (2*0.16+C1)/(0.68+C1)
  Tensor a = Tensor::full({1, 16, 16}, 0.2);
  Tensor b = Tensor::full({1, 16, 16}, 0.8);
  const double expect = (2.0 * 0.2 * 0.8 + 1e-4) / (0.2 * 0.2 + 0.8 * 0.8 + 1e-4);
  CHECK(ssim(a, b) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(ssim(a, b) == doctest::Approx(0.4707).epsilon(1e-4));

  CHECK_THROWS_AS(ssim(Tensor::zeros({1, 6, 6}), Tensor::zeros({1, 6, 6})), std::invalid_argument);

  // SSIM == 1 iff identical (up to 1e-12)
  Tensor y = x;
  y.data[40] += 1e-4;
  CHECK(ssim(x, y) < 1.0 - 1e-12);
}

TEST_CASE("ssim symmetry and joint transposition invariance") {
  SplitMix64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor a = gradcheck::random_tensor({1, 12, 12}, rng, 0.0, 1.0);
    Tensor b = gradcheck::random_tensor({1, 12, 12}, rng, 0.0, 1.0);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-15));

    auto transpose = [](const Tensor& t) {
      Tensor out = Tensor::zeros({t.shape[0], t.shape[2], t.shape[1]});
      for (int c = 0; c < t.shape[0]; ++c)
        for (int y = 0; y < t.shape[1]; ++y)
          for (int x = 0; x < t.shape[2]; ++x) out.at3(c, x, y) = t.at3(c, y, x);
      return out;
    };
    CHECK(ssim(transpose(a), transpose(b)) == doctest::Approx(ssim(a, b)).epsilon(1e-12));
    CHECK(psnr(transpose(a), transpose(b)) == doctest::Approx(psnr(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("metrics agree with the brute-force references") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int ch = trial % 2 == 0 ? 1 : 3;
    Tensor a = gradcheck::random_tensor({ch, 16, 16}, rng, 0.0, 1.0);
    Tensor b = gradcheck::random_tensor({ch, 16, 16}, rng, 0.0, 1.0);
    CHECK(std::fabs(psnr(a, b) - refmetrics::ref_psnr(a, b)) < 1e-9);
    CHECK(std::fabs(ssim(a, b) - refmetrics::ref_ssim(a, b)) < 1e-9);
  }
}

TEST_CASE("dfd generator structure") {
  SUBCASE("same seed reproduces the dataset bit-for-bit") {
    TaskSpec a = gen_dfd_like(1, 8, 4, 99);
    TaskSpec b = gen_dfd_like(1, 8, 4, 99);
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) {
      CHECK(a.train[i].first.data == b.train[i].first.data);
      CHECK(a.train[i].second.data == b.train[i].second.data);
    }
  }

  SUBCASE("values stay in range and splits use different streams") {
    for (int t = 1; t <= 4; ++t) {
      TaskSpec task = gen_dfd_like(t, 4, 4, 7);
      for (const auto& [x, y] : task.train)
        for (std::size_t i = 0; i < x.data.size(); ++i) {
          CHECK(x.data[i] >= 0.0);
          CHECK(x.data[i] <= 1.0);
          CHECK(y.data[i] >= 0.0);
          CHECK(y.data[i] <= 1.0);
        }
      CHECK_FALSE(task.train[0].second.data == task.test[0].second.data);
    }
    CHECK_THROWS_AS(gen_dfd_like(5, 4, 4, 7), std::invalid_argument);
  }

  SUBCASE("T2 distortion is exactly one 6x6 zero block") {
    TaskSpec task = gen_dfd_like(2, 32, 1, 3);
    for (const auto& [x, y] : task.train) {
      int zeros_differing = 0, other_diffs = 0;
      int min_y = 99, max_y = -1, min_x = 99, max_x = -1;
      for (int yy = 0; yy < 16; ++yy)
        for (int xx = 0; xx < 16; ++xx) {
          if (x.at3(0, yy, xx) != y.at3(0, yy, xx)) {
            if (x.at3(0, yy, xx) == 0.0) {
              ++zeros_differing;
              min_y = std::min(min_y, yy);
              max_y = std::max(max_y, yy);
              min_x = std::min(min_x, xx);
              max_x = std::max(max_x, xx);
            } else
              ++other_diffs;
          }
        }
      CHECK(other_diffs == 0);
      CHECK(max_y - min_y <= 5);
      CHECK(max_x - min_x <= 5);
      // the block itself is all zero (clean pixels are never exactly 0 there)
      int in_block_zero = 0;
      for (int yy = min_y; yy < min_y + 6 && yy < 16; ++yy)
        for (int xx = min_x; xx < min_x + 6 && xx < 16; ++xx)
          if (x.at3(0, yy, xx) == 0.0) ++in_block_zero;
      CHECK(in_block_zero == 36);
    }
  }

  SUBCASE("T3 distorts more than T1 on at least 95% of shared bases") {
    SplitMix64 rng(31);
    int stronger = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
      Tensor clean = dfd_base_face(rng);
      SplitMix64 unused(0);
      Tensor x1 = dfd_distort(clean, 1, unused);
      Tensor x3 = dfd_distort(clean, 3, unused);
      double m1 = 0.0, m3 = 0.0;
      for (std::size_t j = 0; j < clean.data.size(); ++j) {
        m1 += (x1.data[j] - clean.data[j]) * (x1.data[j] - clean.data[j]);
        m3 += (x3.data[j] - clean.data[j]) * (x3.data[j] - clean.data[j]);
      }
      if (m3 > m1) ++stronger;
    }
    CHECK(stronger >= 950);
  }
}

TEST_CASE("gld generator structure") {
  SUBCASE("task 1 input is the untouched base scene") {
    TaskSpec task = gen_gld_like(1, 4, 1, 55);
    SplitMix64 rng = substream(55, "gld:task1:train");
    for (const auto& [x, y] : task.train) {
      Tensor base = gld_base_scene(rng);
      CHECK(x.data == base.data);
      CHECK(y.data == gld_style(base, 1).data);
    }
  }

  SUBCASE("styles are not involutions on these scenes") {
    SplitMix64 rng(66);
    int differing = 0;
    for (int i = 0; i < 100; ++i) {
      Tensor base = gld_base_scene(rng);
      Tensor once = gld_style(base, 2);
      Tensor twice = gld_style(once, 2);
      if (once.data != twice.data) ++differing;
    }
    CHECK(differing == 100);
  }

  SUBCASE("outputs clipped to [0,1] for every style") {
    SplitMix64 rng(67);
    for (int i = 0; i < 50; ++i) {
      Tensor base = gld_base_scene(rng);
      for (int s = 1; s <= 3; ++s)
        for (double v : gld_style(base, s).data) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
    }
    CHECK_THROWS_AS(gen_gld_like(4, 2, 2, 1), std::invalid_argument);
  }
}

TEST_CASE("image io round trip within quantization error") {
  SplitMix64 rng(71);
  const auto dir = fs::temp_directory_path() / "aclab_img_io";
  fs::create_directories(dir);
  for (int ch : {1, 3}) {
    Tensor img = gradcheck::random_tensor({ch, 16, 16}, rng, 0.0, 1.0);
    const std::string path = (dir / (ch == 1 ? "t.pgm" : "t.ppm")).string();
    save_image(img, path);
    Tensor back = load_image(path);
    REQUIRE(back.shape == img.shape);
    for (std::size_t i = 0; i < img.data.size(); ++i)
      CHECK(std::fabs(back.data[i] - img.data[i]) <= 1.0 / 65535.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("image loader rejects malformed files") {
  const auto dir = fs::temp_directory_path() / "aclab_img_bad";
  fs::create_directories(dir);
  const std::string good_path = (dir / "good.pgm").string();
  save_image(Tensor::full({1, 4, 4}, 0.5), good_path);

  std::ifstream is(good_path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  is.close();

  const std::string bad_magic_path = (dir / "bad_magic.pgm").string();
  std::ofstream(bad_magic_path, std::ios::binary) << ("PX" + bytes.substr(2));
  CHECK_THROWS_WITH_AS(load_image(bad_magic_path), doctest::Contains("bad magic"),
                       std::runtime_error);

  const std::string trunc_path = (dir / "trunc.pgm").string();
  std::ofstream(trunc_path, std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS_WITH_AS(load_image(trunc_path), doctest::Contains("byte offset"),
                       std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("task directory and manifest round trip") {
  const auto dir = (fs::temp_directory_path() / "aclab_task_dir").string();
  fs::remove_all(dir);
  TaskSpec task = gen_dfd_like(2, 5, 3, 123);
  save_task_dir(task, dir);

  TaskManifest m = load_manifest(dir + "/manifest.tsv");
  CHECK(m.suite == Suite::dfd_like);
  CHECK(m.task_id == 2);
  CHECK(m.seed == 123);
  CHECK(m.train_files.size() == 5);
  CHECK(m.test_files.size() == 3);

  const std::string copy = dir + "/manifest_copy.tsv";
  save_manifest(m, copy);
  CHECK(load_manifest(copy) == m);

  auto train = load_pairs(dir, m, Split::train);
  REQUIRE(train.size() == 5);
  for (std::size_t i = 0; i < train.size(); ++i)
    for (std::size_t j = 0; j < train[i].first.data.size(); ++j)
      CHECK(std::fabs(train[i].first.data[j] - task.train[i].first.data[j]) <= 1.0 / 65535.0);
  fs::remove_all(dir);
}
