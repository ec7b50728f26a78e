#include "aclab/image_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aclab {

const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

namespace {

std::uint16_t quantize(double v) {
  if (v < 0.0) v = 0.0;
  if (v > 1.0) v = 1.0;
  return static_cast<std::uint16_t>(std::lround(v * 65535.0));
}

[[noreturn]] void fail_image(const std::string& path, std::size_t offset, const std::string& what) {
  throw std::runtime_error(path + ": " + what + " at byte offset " + std::to_string(offset));
}

}  // namespace

void save_image(const Tensor& img, const std::string& path) {
  if (img.shape.size() != 3 || (img.shape[0] != 1 && img.shape[0] != 3))
    throw std::invalid_argument("save_image: expected [1,H,W] or [3,H,W], got " + shape_str(img.shape));
  const int C = img.shape[0], H = img.shape[1], W = img.shape[2];
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_image: cannot open " + path);
  os << (C == 1 ? "P5" : "P6") << "\n" << W << " " << H << "\n" << 65535 << "\n";
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < C; ++c) {
        const std::uint16_t q = quantize(img.at3(c, y, x));
        os.put(static_cast<char>(q >> 8));  // most significant byte first
        os.put(static_cast<char>(q & 0xff));
      }
  if (!os) throw std::runtime_error("save_image: write failed for " + path);
}

Tensor load_image(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_image: cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  auto need = [&](std::size_t n, const char* what) {
    if (pos + n > content.size()) fail_image(path, content.size(), std::string("truncated ") + what);
  };
  need(2, "magic");
  const std::string magic = content.substr(0, 2);
  if (magic != "P5" && magic != "P6") fail_image(path, 0, "bad magic '" + magic + "' (expected P5 or P6)");
  const int C = magic == "P5" ? 1 : 3;
  pos = 2;

  auto next_int = [&](const char* what) -> long {
    while (pos < content.size() && std::isspace(static_cast<unsigned char>(content[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < content.size() && std::isdigit(static_cast<unsigned char>(content[pos]))) ++pos;
    if (pos == start) fail_image(path, start, std::string("expected integer for ") + what);
    return std::stol(content.substr(start, pos - start));
  };
  const long W = next_int("width");
  const long H = next_int("height");
  const long maxval = next_int("maxval");
  if (W <= 0 || H <= 0) fail_image(path, pos, "non-positive image dimensions");
  if (maxval != 65535) fail_image(path, pos, "unsupported maxval " + std::to_string(maxval));
  if (pos >= content.size() || !std::isspace(static_cast<unsigned char>(content[pos])))
    fail_image(path, pos, "missing whitespace after header");
  ++pos;

  Tensor img = Tensor::zeros({C, static_cast<int>(H), static_cast<int>(W)});
  need(static_cast<std::size_t>(2 * C * H * W), "payload");
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < C; ++c) {
        const auto hi = static_cast<unsigned char>(content[pos]);
        const auto lo = static_cast<unsigned char>(content[pos + 1]);
        pos += 2;
        img.at3(c, y, x) = static_cast<double>((hi << 8) | lo) / 65535.0;
      }
  return img;
}

// --------------------------------------------------------------- manifest --

void save_manifest(const TaskManifest& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_manifest: cannot open " + path);
  os << "suite\t" << suite_name(m.suite) << "\n";
  os << "task\t" << m.task_id << "\n";
  os << "metric\t" << metric_name(m.metric) << "\n";
  os << "channels\t" << m.channels << "\n";
  os << "height\t" << m.height << "\n";
  os << "width\t" << m.width << "\n";
  os << "seed\t" << m.seed << "\n";
  os << "train\t" << m.train_files.size() << "\n";
  os << "test\t" << m.test_files.size() << "\n";
  for (const auto& [x, y] : m.train_files) os << "pair\ttrain\t" << x << "\t" << y << "\n";
  for (const auto& [x, y] : m.test_files) os << "pair\ttest\t" << x << "\t" << y << "\n";
  if (!os) throw std::runtime_error("save_manifest: write failed for " + path);
}

TaskManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_manifest: cannot open " + path);
  TaskManifest m;
  std::size_t declared_train = 0, declared_test = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    auto bad = [&](const std::string& why) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + why);
    };
    if (f[0] == "suite" && f.size() == 2) m.suite = parse_suite(f[1]);
    else if (f[0] == "task" && f.size() == 2) m.task_id = std::stoi(f[1]);
    else if (f[0] == "metric" && f.size() == 2)
      m.metric = f[1] == "psnr" ? Metric::psnr
                 : f[1] == "ssim" ? Metric::ssim
                                  : throw std::runtime_error(path + ": unknown metric " + f[1]);
    else if (f[0] == "channels" && f.size() == 2) m.channels = std::stoi(f[1]);
    else if (f[0] == "height" && f.size() == 2) m.height = std::stoi(f[1]);
    else if (f[0] == "width" && f.size() == 2) m.width = std::stoi(f[1]);
    else if (f[0] == "seed" && f.size() == 2) m.seed = std::stoull(f[1]);
    else if (f[0] == "train" && f.size() == 2) declared_train = std::stoul(f[1]);
    else if (f[0] == "test" && f.size() == 2) declared_test = std::stoul(f[1]);
    else if (f[0] == "pair" && f.size() == 4) {
      if (f[1] == "train") m.train_files.emplace_back(f[2], f[3]);
      else if (f[1] == "test") m.test_files.emplace_back(f[2], f[3]);
      else bad("unknown split '" + f[1] + "'");
    } else bad("malformed record '" + f[0] + "'");
  }
  if (m.train_files.size() != declared_train || m.test_files.size() != declared_test)
    throw std::runtime_error(path + ": pair count does not match declared counts");
  return m;
}

void save_task_dir(const TaskSpec& task, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const char* ext = task.channels == 1 ? "pgm" : "ppm";
  TaskManifest m;
  m.suite = task.suite;
  m.task_id = task.task_id;
  m.metric = task.metric;
  m.channels = task.channels;
  m.height = task.height;
  m.width = task.width;
  m.seed = task.seed;

  char name[64];
  for (std::size_t i = 0; i < task.train.size(); ++i) {
    std::snprintf(name, sizeof(name), "train_x_%04zu.%s", i, ext);
    std::string xf = name;
    std::snprintf(name, sizeof(name), "train_y_%04zu.%s", i, ext);
    std::string yf = name;
    save_image(task.train[i].first, dir + "/" + xf);
    save_image(task.train[i].second, dir + "/" + yf);
    m.train_files.emplace_back(xf, yf);
  }
  for (std::size_t i = 0; i < task.test.size(); ++i) {
    std::snprintf(name, sizeof(name), "test_x_%04zu.%s", i, ext);
    std::string xf = name;
    std::snprintf(name, sizeof(name), "test_y_%04zu.%s", i, ext);
    std::string yf = name;
    save_image(task.test[i].first, dir + "/" + xf);
    save_image(task.test[i].second, dir + "/" + yf);
    m.test_files.emplace_back(xf, yf);
  }
  save_manifest(m, dir + "/manifest.tsv");
}

std::vector<std::pair<Tensor, Tensor>> load_pairs(const std::string& dir, const TaskManifest& m,
                                                  Split split) {
  const auto& files = split == Split::train ? m.train_files : m.test_files;
  std::vector<std::pair<Tensor, Tensor>> pairs;
  pairs.reserve(files.size());
  for (const auto& [xf, yf] : files)
    pairs.emplace_back(load_image(dir + "/" + xf), load_image(dir + "/" + yf));
  return pairs;
}

}  // namespace aclab
