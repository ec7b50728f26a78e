#include "aclab/heuristics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "aclab/continual.hpp"
#include "aclab/tape.hpp"

namespace aclab {

bool MappingMemory::has_task(int task_id) const {
  for (const auto& e : entries_)
    if (e.task_id == task_id) return true;
  return false;
}

bool MappingMemory::operator==(const MappingMemory& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].task_id != o.entries_[i].task_id) return false;
    if (entries_[i].train_mse != o.entries_[i].train_mse) return false;
    if (!(entries_[i].mapper == o.entries_[i].mapper)) return false;
  }
  return true;
}

MappingMemory& store_mapping(MappingMemory& mem, int task_id, ParamSet mapper, double train_mse) {
  if (mem.has_task(task_id))
    throw std::invalid_argument("store_mapping: task " + std::to_string(task_id) + " already stored");
  mem.entries_.push_back({task_id, std::move(mapper), train_mse});
  return mem;
}

ParamSet train_mapper(const TaskSpec& task, const ArchSpec& spec, const MapperBudget& budget,
                      std::uint64_t seed) {
  if (task.train.empty())
    throw std::invalid_argument("train_mapper: task " + std::to_string(task.task_id) +
                                " has no training pairs");

  ParamSet params = init_params(spec, Role::mapper, substream(seed, "mapper:init").next_u64());
  OptimState opt(params, budget.adam);
  SplitMix64 shuffle_rng = substream(seed, "mapper:shuffle");

  const int n = static_cast<int>(task.train.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  int cursor = n;  // forces a shuffle before the first batch

  for (int step = 0; step < budget.steps; ++step) {
    Tape tape;
    ParamVars pv = register_params(tape, params);
    Var loss{};
    bool first = true;
    for (int b = 0; b < budget.batch_size; ++b) {
      if (cursor >= n) {
        shuffle_rng.shuffle(order);
        cursor = 0;
      }
      const auto& [x, y] = task.train[static_cast<std::size_t>(order[static_cast<std::size_t>(cursor++)])];
      Var pred = mapper_forward(tape, pv, tape.constant(y), spec);
      Var term = sq_norm_to(pred, x);
      loss = first ? term : add(loss, term);
      first = false;
    }
    loss = scale(loss, 1.0 / static_cast<double>(budget.batch_size));
    GradMap grads = tape.backward(loss);
    adam_update(params, grads, opt);
  }
  return params;
}

double mapper_mse(const ParamSet& mapper, const std::vector<std::pair<Tensor, Tensor>>& pairs,
                  const ArchSpec& spec) {
  if (pairs.empty()) throw std::invalid_argument("mapper_mse: no pairs");
  double total = 0.0;
  std::int64_t count = 0;
  for (const auto& [x, y] : pairs) {
    Tensor pred = mapper_apply(mapper, y, spec);
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
      const double d = pred.data[i] - x.data[i];
      total += d * d;
    }
    count += pred.numel();
  }
  return total / static_cast<double>(count);
}

int AssocBatch::associated_count() const {
  int k = 0;
  for (const auto& s : items)
    if (s.provenance == Provenance::associated) ++k;
  return k;
}

std::vector<std::pair<Tensor, Tensor>> AssocBatch::pairs() const {
  std::vector<std::pair<Tensor, Tensor>> out;
  out.reserve(items.size());
  for (const auto& s : items) out.emplace_back(s.x, s.y);
  return out;
}

AssocBatch synthesize_association_batch(const MappingMemory& mem,
                                        const std::vector<std::pair<Tensor, Tensor>>& current_pairs,
                                        double r, SplitMix64& rng, const ArchSpec& spec) {
  if (r < 0.0 || r > 1.0)
    throw std::invalid_argument("synthesize_association_batch: ratio " + std::to_string(r) +
                                " outside [0,1]");
  AssocBatch batch;
  batch.items.reserve(current_pairs.size());
  for (const auto& [x, y] : current_pairs) batch.items.push_back({x, y, Provenance::current, 0});
  if (r == 0.0) return batch;
  if (mem.empty())
    throw std::invalid_argument("synthesize_association_batch: ratio > 0 with empty memory");

  const int bsize = static_cast<int>(current_pairs.size());
  const int k = static_cast<int>(std::llround(r * bsize));
  const std::vector<int> positions = rng.choose_k_of_n(k, bsize);
  for (int pos : positions) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(mem.size()));
    AssocSample& s = batch.items[static_cast<std::size_t>(pos)];
    s.x = mapper_apply(mem.entry(j).mapper, s.y, spec);
    s.provenance = Provenance::associated;
    s.source_task = mem.entry(j).task_id;
  }
  return batch;
}

// ----------------------------------------------------------- persistence --

void save_memory(const MappingMemory& mem, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir + "/index.tsv");
  if (!index) throw std::runtime_error("save_memory: cannot open index in " + dir);
  index << "task_id\tfile\tbytes\n";
  char name[32];
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const MappingEntry& e = mem.entry(i);
    std::snprintf(name, sizeof(name), "mapper_%03d.acls", e.task_id);
    ParamSet with_meta = e.mapper;
    with_meta.add("__train_mse", Tensor::scalar(e.train_mse));
    const std::string path = dir + "/" + name;
    save_checkpoint(with_meta, path);
    index << e.task_id << "\t" << name << "\t" << std::filesystem::file_size(path) << "\n";
  }
  if (!index) throw std::runtime_error("save_memory: index write failed in " + dir);
}

MappingMemory load_memory(const std::string& dir) {
  std::ifstream index(dir + "/index.tsv");
  if (!index) throw std::runtime_error("load_memory: cannot open " + dir + "/index.tsv");
  MappingMemory mem;
  std::string line;
  if (!std::getline(index, line) || line != "task_id\tfile\tbytes")
    throw std::runtime_error("load_memory: malformed index header in " + dir);
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw std::runtime_error("load_memory: malformed index line '" + line + "'");
    const int task_id = std::stoi(line.substr(0, t1));
    const std::string file = line.substr(t1 + 1, t2 - t1 - 1);
    ParamSet loaded = load_checkpoint(dir + "/" + file);
    double train_mse = 0.0;
    ParamSet mapper;
    for (const auto& e : loaded) {
      if (e.name == "__train_mse") train_mse = e.tensor.data[0];
      else mapper.add(e.name, e.tensor);
    }
    store_mapping(mem, task_id, std::move(mapper), train_mse);
  }
  return mem;
}

}  // namespace aclab
