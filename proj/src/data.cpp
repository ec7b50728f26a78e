#include "aclab/data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aclab {

const char* suite_name(Suite s) { return s == Suite::dfd_like ? "dfd" : "gld"; }
const char* metric_name(Metric m) { return m == Metric::psnr ? "psnr" : "ssim"; }

Suite parse_suite(const std::string& s) {
  if (s == "dfd") return Suite::dfd_like;
  if (s == "gld") return Suite::gld_like;
  throw std::invalid_argument("unknown suite '" + s + "' (expected dfd or gld)");
}

int task_count(Suite s) { return s == Suite::dfd_like ? 4 : 3; }

namespace {

constexpr int kSize = 16;

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// 5x5 truncated Gaussian blur, kernel renormalized; image borders use the
// sum of in-bounds weights so flat regions stay flat.
Tensor gaussian_blur5(const Tensor& img, double sigma) {
  double k[5][5];
  double ksum = 0.0;
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx) {
      const double w = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
      k[dy + 2][dx + 2] = w;
      ksum += w;
    }
  for (auto& row : k)
    for (auto& w : row) w /= ksum;

  const int C = img.shape[0], H = img.shape[1], W = img.shape[2];
  Tensor out = Tensor::zeros(img.shape);
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double acc = 0.0, wsum = 0.0;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
            acc += k[dy + 2][dx + 2] * img.at3(c, yy, xx);
            wsum += k[dy + 2][dx + 2];
          }
        out.at3(c, y, x) = acc / wsum;
      }
  return out;
}

}  // namespace

Tensor dfd_base_face(SplitMix64& rng) {
  Tensor img = Tensor::zeros({1, kSize, kSize});
  const double bg = rng.next_uniform(0.80, 0.92);
  const double cx = 7.5 + rng.next_uniform(-1.5, 1.5);
  const double cy = 7.5 + rng.next_uniform(-1.5, 1.5);
  const double ax = rng.next_uniform(4.5, 6.5);   // horizontal semi-axis
  const double ay = rng.next_uniform(5.0, 7.0);   // vertical semi-axis
  const double head = rng.next_uniform(0.50, 0.68);
  const double eye = rng.next_uniform(0.05, 0.16);
  const double mouth = rng.next_uniform(0.10, 0.30);
  const double eye_dx = rng.next_uniform(1.8, 2.8);
  const double eye_dy = rng.next_uniform(1.5, 2.5);
  const double mouth_dy = rng.next_uniform(2.4, 3.6);
  const int mouth_half = 1 + static_cast<int>(rng.next_below(2));  // half-width 1 or 2

  for (int y = 0; y < kSize; ++y)
    for (int x = 0; x < kSize; ++x) {
      const double ex = (x - cx) / ax, ey = (y - cy) / ay;
      img.at3(0, y, x) = (ex * ex + ey * ey <= 1.0) ? head : bg;
    }
  auto dot = [&](double px, double py, double val) {
    for (int y = 0; y < kSize; ++y)
      for (int x = 0; x < kSize; ++x) {
        const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
        if (d2 <= 1.3) img.at3(0, y, x) = val;
      }
  };
  dot(cx - eye_dx, cy - eye_dy, eye);
  dot(cx + eye_dx, cy - eye_dy, eye);
  const int my = static_cast<int>(std::lround(cy + mouth_dy));
  const int mx = static_cast<int>(std::lround(cx));
  for (int x = mx - mouth_half; x <= mx + mouth_half; ++x)
    if (my >= 0 && my < kSize && x >= 0 && x < kSize) img.at3(0, my, x) = mouth;
  return img;
}

Tensor dfd_distort(const Tensor& clean, int task_id, SplitMix64& rng) {
  switch (task_id) {
    case 1: return gaussian_blur5(clean, 1.0);
    case 3: return gaussian_blur5(clean, 2.0);
    case 2: {
      Tensor out = clean;
      const int oy = static_cast<int>(rng.next_below(kSize - 6 + 1));
      const int ox = static_cast<int>(rng.next_below(kSize - 6 + 1));
      for (int y = oy; y < oy + 6; ++y)
        for (int x = ox; x < ox + 6; ++x) out.at3(0, y, x) = 0.0;
      return out;
    }
    case 4: {
      Tensor out = clean;
      for (auto& v : out.data) v = clip01(v + rng.next_uniform(-0.25, 0.25));
      return out;
    }
    default:
      throw std::invalid_argument("dfd task id must be 1..4, got " + std::to_string(task_id));
  }
}

Tensor gld_base_scene(SplitMix64& rng) {
  Tensor img = Tensor::zeros({3, kSize, kSize});
  const int horizon = 6 + static_cast<int>(rng.next_below(5));  // rows 6..10
  const double sky_r = rng.next_uniform(0.25, 0.40);
  const double sky_g = rng.next_uniform(0.45, 0.60);
  const double sky_b = rng.next_uniform(0.75, 0.90);
  const double gnd_r = rng.next_uniform(0.30, 0.42);
  const double gnd_g = rng.next_uniform(0.42, 0.58);
  const double gnd_b = rng.next_uniform(0.22, 0.34);

  for (int y = 0; y < kSize; ++y) {
    if (y < horizon) {
      // Sky gradient toward a brighter horizon.
      const double t = static_cast<double>(y) / static_cast<double>(horizon);
      const double r = sky_r + (0.72 - sky_r) * t;
      const double g = sky_g + (0.82 - sky_g) * t;
      const double b = sky_b + (0.95 - sky_b) * t;
      for (int x = 0; x < kSize; ++x) {
        img.at3(0, y, x) = clip01(r);
        img.at3(1, y, x) = clip01(g);
        img.at3(2, y, x) = clip01(b);
      }
    } else {
      for (int x = 0; x < kSize; ++x) {
        const double n = rng.next_uniform(-0.08, 0.08);
        img.at3(0, y, x) = clip01(gnd_r + n);
        img.at3(1, y, x) = clip01(gnd_g + n + rng.next_uniform(-0.04, 0.04));
        img.at3(2, y, x) = clip01(gnd_b + n);
      }
    }
  }
  return img;
}

Tensor gld_style(const Tensor& img, int style_id) {
  if (img.shape.size() != 3 || img.shape[0] != 3)
    throw std::invalid_argument("gld_style: expected RGB image, got " + shape_str(img.shape));
  Tensor out = img;
  const int H = img.shape[1], W = img.shape[2];
  switch (style_id) {
    case 0: return out;
    case 1:
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const double r = std::pow(img.at3(0, y, x), 0.5);
          const double g = std::pow(img.at3(1, y, x), 0.5);
          const double b = std::pow(img.at3(2, y, x), 0.5);
          out.at3(0, y, x) = clip01(r * 1.10 + 0.03);
          out.at3(1, y, x) = clip01(g * 1.02);
          out.at3(2, y, x) = clip01(b * 0.86);
        }
      return out;
    case 2:
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const double r = img.at3(2, y, x);  // swapped
          const double g = img.at3(1, y, x);
          const double b = img.at3(0, y, x);
          out.at3(0, y, x) = std::pow(r, 1.5);
          out.at3(1, y, x) = std::pow(g, 1.5);
          out.at3(2, y, x) = std::pow(b, 1.5);
        }
      return out;
    case 3:
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const double r = img.at3(0, y, x), g = img.at3(1, y, x), b = img.at3(2, y, x);
          const double lum = 0.299 * r + 0.587 * g + 0.114 * b;
          auto tone = [&](double v) {
            const double desat = 0.5 * v + 0.5 * lum;
            return clip01((desat - 0.5) * 1.4 + 0.5);
          };
          out.at3(0, y, x) = tone(r);
          out.at3(1, y, x) = tone(g);
          out.at3(2, y, x) = tone(b);
        }
      return out;
    default:
      throw std::invalid_argument("gld style id must be 0..3, got " + std::to_string(style_id));
  }
}

namespace {

std::vector<std::pair<Tensor, Tensor>> gen_dfd_pairs(int task_id, int n, SplitMix64 rng) {
  std::vector<std::pair<Tensor, Tensor>> pairs;
  pairs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Tensor y = dfd_base_face(rng);
    Tensor x = dfd_distort(y, task_id, rng);
    pairs.emplace_back(std::move(x), std::move(y));
  }
  return pairs;
}

std::vector<std::pair<Tensor, Tensor>> gen_gld_pairs(int task_id, int n, SplitMix64 rng) {
  std::vector<std::pair<Tensor, Tensor>> pairs;
  pairs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Tensor base = gld_base_scene(rng);
    pairs.emplace_back(gld_style(base, task_id - 1), gld_style(base, task_id));
  }
  return pairs;
}

}  // namespace

TaskSpec gen_dfd_like(int task_id, int n_train, int n_test, std::uint64_t seed) {
  if (task_id < 1 || task_id > 4)
    throw std::invalid_argument("gen_dfd_like: task id must be 1..4, got " + std::to_string(task_id));
  TaskSpec t;
  t.suite = Suite::dfd_like;
  t.task_id = task_id;
  t.metric = Metric::psnr;
  t.channels = 1;
  t.height = kSize;
  t.width = kSize;
  t.seed = seed;
  const std::string tag = "dfd:task" + std::to_string(task_id);
  t.train = gen_dfd_pairs(task_id, n_train, substream(seed, tag + ":train"));
  t.test = gen_dfd_pairs(task_id, n_test, substream(seed, tag + ":test"));
  return t;
}

TaskSpec gen_gld_like(int task_id, int n_train, int n_test, std::uint64_t seed) {
  if (task_id < 1 || task_id > 3)
    throw std::invalid_argument("gen_gld_like: task id must be 1..3, got " + std::to_string(task_id));
  TaskSpec t;
  t.suite = Suite::gld_like;
  t.task_id = task_id;
  t.metric = Metric::ssim;
  t.channels = 3;
  t.height = kSize;
  t.width = kSize;
  t.seed = seed;
  const std::string tag = "gld:task" + std::to_string(task_id);
  t.train = gen_gld_pairs(task_id, n_train, substream(seed, tag + ":train"));
  t.test = gen_gld_pairs(task_id, n_test, substream(seed, tag + ":test"));
  return t;
}

TaskSpec gen_task(Suite suite, int task_id, int n_train, int n_test, std::uint64_t seed) {
  return suite == Suite::dfd_like ? gen_dfd_like(task_id, n_train, n_test, seed)
                                  : gen_gld_like(task_id, n_train, n_test, seed);
}

}  // namespace aclab
