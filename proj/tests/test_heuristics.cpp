#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "aclab/heuristics.hpp"
#include "aclab/rng.hpp"
#include "support/gradcheck.hpp"

using namespace aclab;
namespace fs = std::filesystem;

namespace {

ArchSpec gray16() { return ArchSpec{}; }

ParamSet dummy_mapper(std::uint64_t seed) { return init_params(gray16(), Role::mapper, seed); }

std::string temp_dir(const char* name) {
  const auto p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("store_mapping appends and rejects duplicates") {
  MappingMemory mem;
  CHECK(mem.empty());
  store_mapping(mem, 1, dummy_mapper(1), 0.01);
  CHECK(mem.size() == 1);
  CHECK(mem.has_task(1));
  CHECK_THROWS_AS(store_mapping(mem, 1, dummy_mapper(2)), std::invalid_argument);
  store_mapping(mem, 2, dummy_mapper(2), 0.02);
  CHECK(mem.size() == 2);
}

TEST_CASE("memory serialization round-trips bit-exactly") {
  MappingMemory mem;
  store_mapping(mem, 1, dummy_mapper(11), 0.015);
  store_mapping(mem, 2, dummy_mapper(12), 0.025);
  const std::string dir = temp_dir("aclab_memory_rt");
  save_memory(mem, dir);
  MappingMemory loaded = load_memory(dir);
  CHECK(loaded == mem);
  fs::remove_all(dir);
}

TEST_CASE("memory on disk grows by a fixed amount per entry") {
  auto dir_size = [](const std::string& dir) {
    std::int64_t total = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file()) total += static_cast<std::int64_t>(e.file_size());
    return total;
  };
  MappingMemory mem;
  std::vector<std::int64_t> sizes;
  const std::string dir = temp_dir("aclab_memory_sz");
  for (int t = 1; t <= 3; ++t) {
    store_mapping(mem, t, dummy_mapper(static_cast<std::uint64_t>(t)), 0.01);
    fs::remove_all(dir);
    save_memory(mem, dir);
    sizes.push_back(dir_size(dir));
  }
  const std::int64_t per_entry = sizes[1] - sizes[0];
  CHECK(sizes[2] - sizes[1] == per_entry);
  const std::int64_t header = sizes[0] - per_entry;
  CHECK(header >= 0);
  CHECK(sizes[2] == header + 3 * per_entry);
  fs::remove_all(dir);
}

TEST_CASE("train_mapper learns the identity task and is seed-deterministic") {
  const ArchSpec spec = gray16();
  TaskSpec task;
  task.channels = 1;
  SplitMix64 rng(5);
  for (int i = 0; i < 48; ++i) {
    Tensor img = gradcheck::random_tensor({1, 16, 16}, rng, 0.1, 0.9);
    task.train.emplace_back(img, img);  // X == Y
  }
  std::vector<std::pair<Tensor, Tensor>> held_out;
  for (int i = 0; i < 16; ++i) {
    Tensor img = gradcheck::random_tensor({1, 16, 16}, rng, 0.1, 0.9);
    held_out.emplace_back(img, img);
  }

  MapperBudget budget;
  budget.steps = 120;
  const ParamSet untrained = init_params(spec, Role::mapper, substream(7, "mapper:init").next_u64());
  const ParamSet trained = train_mapper(task, spec, budget, 7);
  CHECK(mapper_mse(trained, held_out, spec) < mapper_mse(untrained, held_out, spec));

  const ParamSet again = train_mapper(task, spec, budget, 7);
  CHECK(trained == again);

  TaskSpec empty;
  CHECK_THROWS_AS(train_mapper(empty, spec, budget, 7), std::invalid_argument);
}

TEST_CASE("mapper reproduces the occlusion task within the frozen bound") {
  // The occlusion position is random per sample, so any deterministic mapper
  // sits above the conditional-variance floor (about 0.06 per pixel on these
  // faces); the bound below was frozen from the reference run.
  const ArchSpec spec = gray16();
  TaskSpec task = gen_dfd_like(2, 96, 32, 2024);
  const ParamSet mapper = train_mapper(task, spec, MapperBudget{}, 11);
  const double held_out = mapper_mse(mapper, task.test, spec);
  CHECK(held_out < 0.08);
}

TEST_CASE("mapper reproduces the noise task within the frozen bound") {
  // Additive U(-0.25, 0.25) noise has variance 1/192 ~ 0.0208, clipping makes
  // it slightly smaller; a mapper near the identity lands just above it.
  const ArchSpec spec = gray16();
  TaskSpec task = gen_dfd_like(4, 96, 32, 2025);
  const ParamSet mapper = train_mapper(task, spec, MapperBudget{}, 12);
  const double held_out = mapper_mse(mapper, task.test, spec);
  CHECK(held_out < 0.03);
  // Untrained output is finite and inside (0,1).
  Tensor out = mapper_apply(init_params(spec, Role::mapper, 1), task.test[0].second, spec);
  for (double v : out.data) {
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("synthesize_association_batch mixing rules") {
  const ArchSpec spec = gray16();
  SplitMix64 data_rng(77);
  std::vector<std::pair<Tensor, Tensor>> current;
  for (int i = 0; i < 8; ++i)
    current.emplace_back(gradcheck::random_tensor({1, 16, 16}, data_rng, 0.0, 1.0),
                         gradcheck::random_tensor({1, 16, 16}, data_rng, 0.0, 1.0));

  MappingMemory mem;
  store_mapping(mem, 1, dummy_mapper(100));
  store_mapping(mem, 2, dummy_mapper(200));

  SUBCASE("r = 0 returns the inputs untouched") {
    SplitMix64 rng(1);
    AssocBatch b = synthesize_association_batch(MappingMemory{}, current, 0.0, rng, spec);
    CHECK(b.items.size() == current.size());
    CHECK(b.associated_count() == 0);
    for (std::size_t i = 0; i < current.size(); ++i) {
      CHECK(b.items[i].x.data == current[i].first.data);
      CHECK(b.items[i].y.data == current[i].second.data);
    }
  }

  SUBCASE("r = 1 replaces every x with a stored mapper applied to y") {
    SplitMix64 rng(2);
    MappingMemory one;
    store_mapping(one, 1, dummy_mapper(100));
    AssocBatch b = synthesize_association_batch(one, current, 1.0, rng, spec);
    CHECK(b.associated_count() == 8);
    for (std::size_t i = 0; i < current.size(); ++i) {
      CHECK(b.items[i].source_task == 1);
      Tensor expect = mapper_apply(one.entry(0).mapper, current[i].second, spec);
      CHECK(b.items[i].x.data == expect.data);
      CHECK(b.items[i].y.data == current[i].second.data);
      CHECK_FALSE(b.items[i].x.data == current[i].first.data);
    }
  }

  SUBCASE("r = 0.5 on batch 8 marks exactly 4, deterministically") {
    SplitMix64 rng(3);
    AssocBatch b = synthesize_association_batch(mem, current, 0.5, rng, spec);
    CHECK(b.associated_count() == 4);
    SplitMix64 rng2(3);
    AssocBatch b2 = synthesize_association_batch(mem, current, 0.5, rng2, spec);
    REQUIRE(b2.items.size() == b.items.size());
    for (std::size_t i = 0; i < b.items.size(); ++i) {
      CHECK(b.items[i].x.data == b2.items[i].x.data);
      CHECK(b.items[i].source_task == b2.items[i].source_task);
    }
  }

  SUBCASE("selection frequencies are uniform over stored tasks") {
    SplitMix64 rng(4);
    int counts[2] = {0, 0};
    int total = 0;
    std::vector<std::pair<Tensor, Tensor>> small(current.begin(), current.begin() + 2);
    while (total < 10000) {
      AssocBatch b = synthesize_association_batch(mem, small, 1.0, rng, spec);
      for (const auto& s : b.items) {
        ++counts[s.source_task - 1];
        ++total;
      }
    }
    const double p1 = counts[0] / static_cast<double>(total);
    CHECK(p1 > 0.48);
    CHECK(p1 < 0.52);
    // chi-square test, df = 1, critical value 6.635 at p = 0.01
    const double expect = total / 2.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < 6.635);
  }

  SUBCASE("r > 0 with empty memory is rejected") {
    SplitMix64 rng(5);
    CHECK_THROWS_AS(synthesize_association_batch(MappingMemory{}, current, 0.5, rng, spec),
                    std::invalid_argument);
  }

  SUBCASE("batch size preserved for intermediate ratios") {
    for (double r : {0.25, 0.33, 0.75}) {
      SplitMix64 rng(6);
      AssocBatch b = synthesize_association_batch(mem, current, r, rng, spec);
      CHECK(b.items.size() == current.size());
      CHECK(b.associated_count() == static_cast<int>(std::llround(r * 8)));
      for (const auto& s : b.items)
        for (double v : s.x.data) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
    }
  }
}
