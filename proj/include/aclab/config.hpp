#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aclab/adam.hpp"
#include "aclab/data.hpp"
#include "aclab/heuristics.hpp"

namespace aclab {

// Which ingredients a run actually uses, after folding the method preset,
// ablation mask and degenerate weights together. Two configs that normalize
// to the same flags (and same semantic fields) produce the same run id and
// byte-identical outputs.
struct EffectiveFlags {
  bool mse = true;
  bool adv = true;
  bool feature = false;
  bool heuristics = false;
  bool replay = false;
  bool joint = false;
};

struct RunConfig {
  Suite suite = Suite::dfd_like;
  std::vector<int> task_order;  // defaults to 1..N
  std::string method = "assoc";  // tl | jl | ewc | replay | assoc | ablate

  int epochs_per_task = 12;
  int batch_size = 16;
  int train_pairs = 200;
  int test_pairs = 50;

  AdamConfig adam{.lr = 2e-4, .beta1 = 0.5, .beta2 = 0.999, .eps = 1e-8};
  double disc_lr = 0.0;   // 0: use the generator learning rate
  double grad_clip = 10.0;  // global-norm cap per update; 0 disables

  double lambda_adv = 1e-3;
  double lambda_prime = 5.0;
  // "auto" ratio: r_i = min(0.5, (i-1)/i) at sequence position i.
  bool assoc_ratio_auto = true;
  double assoc_ratio = 0.0;

  int fisher_samples = 256;  // effective m = min(this, task train size)
  bool accumulate_fisher = false;

  // Ablation mask; only meaningful (and only accepted) with method = ablate.
  bool mask_mse = true;
  bool mask_adv = true;
  bool mask_feature = true;
  bool mask_heuristics = true;

  int replay_per_task = 50;

  MapperBudget mapper;

  std::uint64_t seed = 1;
  // The four named streams; when a stream is not set explicitly it derives
  // from the master seed.
  std::uint64_t seed_data = 0, seed_init = 0, seed_train = 0, seed_controller = 0;
  bool seed_data_set = false, seed_init_set = false, seed_train_set = false,
       seed_controller_set = false;

  std::string out_dir;
  std::string data_dir;  // empty: generate under out_dir/data
  int threads = 1;       // 0 = OpenMP default
  bool wall_clock = false;  // when true, metrics.csv wall_s carries measured time

  std::vector<std::string> methods = {"tl", "jl", "ewc", "replay", "assoc"};  // suite driver

  // --- derived ---
  EffectiveFlags flags;
  std::string label;   // normalized method label used in CSVs
  std::string run_id;  // label-suite-<fingerprint>

  double ratio_at(int sequence_pos) const;  // resolved association ratio
  std::uint64_t stream_seed_data() const;
  std::uint64_t stream_seed_init() const;
  std::uint64_t stream_seed_train() const;
  std::uint64_t stream_seed_controller() const;
};

// Applies defaults, folds the method preset into effective flags, validates
// (unknown method names, mask keys on non-ablate methods, ratio on methods
// that never mix, bad permutations) and computes label plus run id.
void finalize_config(RunConfig& cfg);

// Flat "key = value" file; '#' starts a comment; unknown keys are rejected
// with the offending line number.
RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);

// Every field, including defaults, in parseable form.
std::string serialize_config(const RunConfig& cfg);

std::string flags_str(const EffectiveFlags& f);

}  // namespace aclab
