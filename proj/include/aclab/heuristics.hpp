#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aclab/adam.hpp"
#include "aclab/data.hpp"
#include "aclab/models.hpp"
#include "aclab/paramset.hpp"
#include "aclab/rng.hpp"

namespace aclab {

// One stored inverse mapper: a network trained to map a task's ground truth
// back into that task's source domain. Entries are immutable once stored.
struct MappingEntry {
  int task_id = 0;
  ParamSet mapper;
  double train_mse = 0.0;  // per-pixel MSE on the training pairs after training
};

class MappingMemory {
 public:
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const MappingEntry& entry(std::size_t i) const { return entries_[i]; }
  bool has_task(int task_id) const;

  friend MappingMemory& store_mapping(MappingMemory& mem, int task_id, ParamSet mapper,
                                      double train_mse);

  bool operator==(const MappingMemory& o) const;

 private:
  std::vector<MappingEntry> entries_;
};

// Appends an entry; rejects duplicate task ids.
MappingMemory& store_mapping(MappingMemory& mem, int task_id, ParamSet mapper,
                             double train_mse = 0.0);

struct MapperBudget {
  int steps = 300;
  int batch_size = 16;
  AdamConfig adam{.lr = 2e-3, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8};
};

// Trains the inverse direction (predict x from y) with a plain content loss.
// Deterministic given the seed; rejects empty task data.
ParamSet train_mapper(const TaskSpec& task, const ArchSpec& spec, const MapperBudget& budget,
                      std::uint64_t seed);

// Per-pixel MSE of mapper(y) against x over the given pairs.
double mapper_mse(const ParamSet& mapper, const std::vector<std::pair<Tensor, Tensor>>& pairs,
                  const ArchSpec& spec);

enum class Provenance { current, associated };

struct AssocSample {
  Tensor x;
  Tensor y;
  Provenance provenance = Provenance::current;
  int source_task = 0;  // stored task id when associated, 0 otherwise
};

struct AssocBatch {
  std::vector<AssocSample> items;
  int associated_count() const;
  std::vector<std::pair<Tensor, Tensor>> pairs() const;
};

// Implements the association mixture: exactly round(r * batch) positions,
// drawn from the rng stream, get their x replaced by a stored mapper applied
// to the current ground truth y; the mapper's task is drawn uniformly over
// the memory. y is always the current ground truth, and batch size is
// preserved. Past raw data is never touched. Rejects r > 0 on empty memory.
AssocBatch synthesize_association_batch(const MappingMemory& mem,
                                        const std::vector<std::pair<Tensor, Tensor>>& current_pairs,
                                        double r, SplitMix64& rng, const ArchSpec& spec);

// One "ACLS" container per entry plus a plain-text index (task_id, file name,
// byte size). Round-trips bit-exactly.
void save_memory(const MappingMemory& mem, const std::string& dir);
MappingMemory load_memory(const std::string& dir);

}  // namespace aclab
