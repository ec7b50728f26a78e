#pragma once

#include "aclab/tensor.hpp"

namespace aclab {

// 10*log10(max_val^2 / MSE) in dB, MSE taken over all channels and pixels.
// Identical images (MSE == 0) are capped at 99.0 dB.
double psnr(const Tensor& a, const Tensor& b, double max_val = 1.0);

// Mean SSIM over 7x7 uniform sliding windows (valid positions only),
// averaged over channels. C1 = (0.01*L)^2, C2 = (0.03*L)^2 with L = 1.
// ssim(x, x) == 1 exactly. Rejects images smaller than the window.
double ssim(const Tensor& a, const Tensor& b);

}  // namespace aclab
