#include "aclab/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace aclab {

double psnr(const Tensor& a, const Tensor& b, double max_val) {
  if (!a.same_shape(b))
    throw std::invalid_argument("psnr: shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.numel());
  if (mse == 0.0) return 99.0;
  const double v = 10.0 * std::log10(max_val * max_val / mse);
  return v > 99.0 ? 99.0 : v;
}

double ssim(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("ssim: shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  if (a.shape.size() != 3)
    throw std::invalid_argument("ssim: expected [C,H,W] images, got " + shape_str(a.shape));
  constexpr int kWin = 7;
  constexpr double kC1 = 0.01 * 0.01;  // (0.01*L)^2, L=1
  constexpr double kC2 = 0.03 * 0.03;
  const int C = a.shape[0], H = a.shape[1], W = a.shape[2];
  if (H < kWin || W < kWin)
    throw std::invalid_argument("ssim: image " + shape_str(a.shape) + " smaller than " +
                                std::to_string(kWin) + "x" + std::to_string(kWin) + " window");

  const double inv_n = 1.0 / static_cast<double>(kWin * kWin);
  double total = 0.0;
  std::int64_t windows = 0;
  for (int c = 0; c < C; ++c)
    for (int y = 0; y + kWin <= H; ++y)
      for (int x = 0; x + kWin <= W; ++x) {
        double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
        for (int dy = 0; dy < kWin; ++dy)
          for (int dx = 0; dx < kWin; ++dx) {
            const double va = a.at3(c, y + dy, x + dx);
            const double vb = b.at3(c, y + dy, x + dx);
            sa += va;
            sb += vb;
            saa += va * va;
            sbb += vb * vb;
            sab += va * vb;
          }
        const double mu_a = sa * inv_n, mu_b = sb * inv_n;
        const double var_a = saa * inv_n - mu_a * mu_a;
        const double var_b = sbb * inv_n - mu_b * mu_b;
        const double cov = sab * inv_n - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
        const double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
        total += num / den;
        ++windows;
      }
  return total / static_cast<double>(windows);
}

}  // namespace aclab
