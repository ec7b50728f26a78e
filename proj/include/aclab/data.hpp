#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>
#include "aclab/rng.hpp"
#include "aclab/tensor.hpp"

namespace aclab {

enum class Suite { dfd_like, gld_like };
enum class Metric { psnr, ssim };

const char* suite_name(Suite s);
const char* metric_name(Metric m);
Suite parse_suite(const std::string& s);

struct TaskSpec {
  Suite suite = Suite::dfd_like;
  int task_id = 1;
  Metric metric = Metric::psnr;
  int channels = 1;
  int height = 16;
  int width = 16;
  std::uint64_t seed = 0;
  std::vector<std::pair<Tensor, Tensor>> train;  // (x, y), all values in [0,1]
  std::vector<std::pair<Tensor, Tensor>> test;
};

int task_count(Suite s);  // 4 for dfd_like, 3 for gld_like

// Distortion-restoration tasks over procedural 16x16 grayscale faces.
// Y is the clean face; X applies the task's distortion:
//   T1 Gaussian blur sigma=1.0 (5x5 truncated kernel, renormalized)
//   T2 one random 6x6 zero occlusion
//   T3 Gaussian blur sigma=2.0 (same type as T1, stronger degree)
//   T4 additive uniform noise +-0.25, clipped to [0,1]
// Train and test draw from disjoint substreams of the seed.
TaskSpec gen_dfd_like(int task_id, int n_train, int n_test, std::uint64_t seed);

// Chained style-transfer tasks over procedural 16x16 RGB landscapes.
// X_i = s_{i-1}(base) with s_0 = identity, Y_i = s_i(base):
//   s1 gamma 0.5 + warm tint
//   s2 R/B channel swap + gamma 1.5
//   s3 desaturate 50% + contrast x1.4
TaskSpec gen_gld_like(int task_id, int n_train, int n_test, std::uint64_t seed);

TaskSpec gen_task(Suite suite, int task_id, int n_train, int n_test, std::uint64_t seed);

// Exposed for tests: the style maps and the base-image generators.
Tensor dfd_base_face(SplitMix64& rng);
Tensor dfd_distort(const Tensor& clean, int task_id, SplitMix64& rng);
Tensor gld_base_scene(SplitMix64& rng);
Tensor gld_style(const Tensor& img, int style_id);  // style_id 0 = identity

}  // namespace aclab
