#pragma once

#include <string>
#include <utility>
#include <vector>

#include "aclab/data.hpp"
#include "aclab/tensor.hpp"

namespace aclab {

// Binary PGM ("P5") for grayscale, binary PPM ("P6") for RGB; 16-bit samples
// (maxval 65535, most significant byte first) scaled from [0,1]. Round-trip
// error is at most 1/65535 per sample.
void save_image(const Tensor& img, const std::string& path);
Tensor load_image(const std::string& path);

enum class Split { train, test };
const char* split_name(Split s);

// Plain-text, tab-separated index of a task directory: suite, task id,
// metric, image shape, seed, pair counts, then one line per image pair.
struct TaskManifest {
  Suite suite = Suite::dfd_like;
  int task_id = 1;
  Metric metric = Metric::psnr;
  int channels = 1;
  int height = 16;
  int width = 16;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> train_files;
  std::vector<std::pair<std::string, std::string>> test_files;

  bool operator==(const TaskManifest&) const = default;
};

void save_manifest(const TaskManifest& m, const std::string& path);
TaskManifest load_manifest(const std::string& path);

// Writes all of a task's pairs plus its manifest under dir.
void save_task_dir(const TaskSpec& task, const std::string& dir);

// Loads one split's pairs per the manifest. Counted by the runner's
// file-access audit; nothing else in the codebase reads dataset files.
std::vector<std::pair<Tensor, Tensor>> load_pairs(const std::string& dir, const TaskManifest& m,
                                                  Split split);

}  // namespace aclab
