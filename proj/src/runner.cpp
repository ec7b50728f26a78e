#include "aclab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "aclab/kernels.hpp"
#include "aclab/metrics.hpp"
#include "aclab/tape.hpp"

namespace fs = std::filesystem;

namespace aclab {

namespace {

std::string fmt(const char* f, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

ArchSpec arch_for(Suite suite) {
  ArchSpec s;
  s.channels = suite == Suite::dfd_like ? 1 : 3;
  return s;
}

std::int64_t dir_bytes(const std::string& dir) {
  if (!fs::exists(dir)) return 0;
  std::int64_t total = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) total += static_cast<std::int64_t>(e.file_size());
  return total;
}

// All dataset-file reads in a run go through this store, which records them
// against the set of already-completed tasks. Training data for a completed
// task can therefore never be re-read without the audit flagging it.
class DataStore {
 public:
  DataStore(std::string root, std::vector<AuditRecord>* audit) : root_(std::move(root)), audit_(audit) {}

  void set_phase(int sequence_pos) { phase_ = sequence_pos; }
  void mark_completed(int task_id) { completed_.push_back(task_id); }

  std::vector<Pair> load(int task_id, Split split) {
    const std::string dir = root_ + "/task" + std::to_string(task_id);
    const TaskManifest m = load_manifest(dir + "/manifest.tsv");
    auto pairs = load_pairs(dir, m, split);
    bool violation = false;
    if (split == Split::train)
      for (int done : completed_)
        if (done == task_id) violation = true;
    audit_->push_back({phase_, task_id, split, static_cast<int>(pairs.size()) * 2, violation});
    return pairs;
  }

 private:
  std::string root_;
  std::vector<AuditRecord>* audit_;
  int phase_ = 0;
  std::vector<int> completed_;
};

struct StepLosses {
  double total = 0.0, mse = 0.0, adv = 0.0, feature = 0.0;
};

// Global-norm gradient clip. Keeps the update direction, bounds its size;
// without it a confident discriminator can push the generator into sigmoid
// saturation, which freezes training for good.
void clip_gradients(GradMap& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.data) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (auto& [name, g] : grads)
    for (double& v : g.data) v *= scale;
}

// One alternating step: discriminator update on (real y, detached G(x)),
// then a generator update on the masked objective through the refreshed
// discriminator. The generator forward is shared between both phases.
StepLosses train_step(const std::vector<Pair>& batch, ParamSet& gen, ParamSet& disc,
                      OptimState& gen_opt, OptimState& disc_opt,
                      const FisherSnapshot* snap, const RunConfig& cfg, const ArchSpec& spec) {
  Tape tape;
  ParamVars gv = register_params(tape, gen);

  std::vector<Var> fakes;
  fakes.reserve(batch.size());
  for (const auto& [x, y] : batch) fakes.push_back(generator_forward(tape, gv, tape.constant(x), spec));

  if (cfg.flags.adv) {
    ParamVars dv = register_params(tape, disc);
    Var real_sum{}, fake_sum{};
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Var zr = discriminator_logit(tape, dv, tape.constant(batch[i].second), spec);
      Var zf = discriminator_logit(tape, dv, tape.constant(tape.value(fakes[i])), spec);
      Var real_term = softplus(scale(zr, -1.0));  // -log D(y)
      Var fake_term = softplus(zf);               // -log(1 - D(G(x)))
      real_sum = i == 0 ? real_term : add(real_sum, real_term);
      fake_sum = i == 0 ? fake_term : add(fake_sum, fake_term);
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    Var d_loss = add(scale(real_sum, inv_b), scale(fake_sum, inv_b));
    GradMap d_grads = tape.backward(d_loss);
    clip_gradients(d_grads, cfg.grad_clip);
    adam_update(disc, d_grads, disc_opt);
  }

  // Generator objective, through the just-updated discriminator.
  ParamVars dv2 = cfg.flags.adv ? register_constants(tape, disc) : ParamVars{};
  Var mse_sum{}, adv_sum{};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Var content = sq_norm_to(fakes[i], batch[i].second);
    mse_sum = i == 0 ? content : add(mse_sum, content);
    if (cfg.flags.adv) {
      Var z = discriminator_logit(tape, dv2, fakes[i], spec);
      Var adv = softplus(scale(z, -1.0));
      adv_sum = i == 0 ? adv : add(adv_sum, adv);
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Var mse_mean = scale(mse_sum, inv_b);
  Var adv_mean = cfg.flags.adv ? scale(adv_sum, inv_b) : Var{};
  Var feature{};
  const bool have_feature = cfg.flags.feature && snap != nullptr;
  if (have_feature) feature = distill_penalty_node(tape, gv, gen, *snap);

  Var total{};
  bool have_total = false;
  auto add_term = [&](Var v) {
    total = have_total ? add(total, v) : v;
    have_total = true;
  };
  if (cfg.flags.mse) add_term(mse_mean);
  if (cfg.flags.adv && cfg.lambda_adv != 0.0) add_term(scale(adv_mean, cfg.lambda_adv));
  if (have_feature) add_term(scale(feature, cfg.lambda_prime));
  if (!have_total) total = tape.constant(Tensor::scalar(0.0));

  GradMap g_grads = tape.backward(total);
  clip_gradients(g_grads, cfg.grad_clip);
  adam_update(gen, g_grads, gen_opt);

  StepLosses out;
  out.total = tape.value(total).data[0];
  out.mse = tape.value(mse_mean).data[0];
  out.adv = cfg.flags.adv ? tape.value(adv_mean).data[0] : 0.0;
  out.feature = have_feature ? tape.value(feature).data[0] : 0.0;
  return out;
}

double eval_metric(const ParamSet& gen, const std::vector<Pair>& test, Metric metric,
                   const ArchSpec& spec) {
  double acc = 0.0;
  for (const auto& [x, y] : test) {
    Tensor out = generator_apply(gen, x, spec);
    acc += metric == Metric::psnr ? psnr(out, y) : ssim(out, y);
  }
  return acc / static_cast<double>(test.size());
}

struct FullEval {
  double psnr_db = 0.0, ssim_v = 0.0, l_mse = 0.0, l_adv = 0.0;
};

FullEval eval_full(const ParamSet& gen, const ParamSet& disc, const std::vector<Pair>& test,
                   const RunConfig& cfg, const ArchSpec& spec) {
  FullEval e;
  for (const auto& [x, y] : test) {
    Tensor out = generator_apply(gen, x, spec);
    e.psnr_db += psnr(out, y);
    e.ssim_v += ssim(out, y);
    double content = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      const double d = out.data[i] - y.data[i];
      content += d * d;
    }
    e.l_mse += content;
    if (cfg.flags.adv) {
      // -log D(out) == softplus(-z), overflow-free
      const double z = discriminator_logit_apply(disc, out, spec);
      e.l_adv += (z < 0.0 ? -z : 0.0) + std::log1p(std::exp(-std::abs(z)));
    }
  }
  const double inv = 1.0 / static_cast<double>(test.size());
  e.psnr_db *= inv;
  e.ssim_v *= inv;
  e.l_mse *= inv;
  e.l_adv *= inv;
  return e;
}

}  // namespace

double RunResult::final_metric(int task_id) const {
  return metric_after(task_count(cfg.suite), task_id);
}

double RunResult::metric_after(int tasks_trained, int task_id) const {
  for (const auto& r : metrics)
    if (r.tasks_trained == tasks_trained && r.eval_task == std::to_string(task_id))
      return cfg.suite == Suite::dfd_like ? r.psnr_db : r.ssim;
  throw std::runtime_error("RunResult: no metrics row for tasks_trained=" +
                           std::to_string(tasks_trained) + " task=" + std::to_string(task_id));
}

double RunResult::final_avg() const {
  const int n = task_count(cfg.suite);
  for (const auto& r : metrics)
    if (r.tasks_trained == n && r.eval_task == "avg")
      return cfg.suite == Suite::dfd_like ? r.psnr_db : r.ssim;
  throw std::runtime_error("RunResult: no final avg row");
}

void generate_suite_data(Suite suite, int n_train, int n_test, std::uint64_t seed,
                         const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (int t = 1; t <= task_count(suite); ++t) {
    TaskSpec task = gen_task(suite, t, n_train, n_test, seed);
    save_task_dir(task, out_dir + "/task" + std::to_string(t));
  }
}

namespace {

// Ensures the data directory exists and matches the run's data seed and
// counts; generates it when absent.
std::string prepare_data(RunConfig& cfg) {
  const std::string root = cfg.data_dir.empty() ? cfg.out_dir + "/data" : cfg.data_dir;
  const std::string probe = root + "/task1/manifest.tsv";
  if (!fs::exists(probe)) {
    if (!cfg.data_dir.empty())
      throw std::runtime_error("run: data_dir " + cfg.data_dir + " has no task1/manifest.tsv");
    generate_suite_data(cfg.suite, cfg.train_pairs, cfg.test_pairs, cfg.stream_seed_data(), root);
    return root;
  }
  const TaskManifest m = load_manifest(probe);
  if (m.suite != cfg.suite)
    throw std::runtime_error("run: data_dir suite mismatch");
  if (static_cast<int>(m.train_files.size()) != cfg.train_pairs ||
      static_cast<int>(m.test_files.size()) != cfg.test_pairs)
    throw std::runtime_error("run: data_dir holds " + std::to_string(m.train_files.size()) + "/" +
                             std::to_string(m.test_files.size()) + " pairs but config wants " +
                             std::to_string(cfg.train_pairs) + "/" + std::to_string(cfg.test_pairs));
  // A run's data identity is whatever the directory was generated with.
  if (m.seed != cfg.stream_seed_data()) {
    cfg.seed_data = m.seed;
    cfg.seed_data_set = true;
    finalize_config(cfg);
  }
  return root;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

}  // namespace

RunResult run_one(RunConfig cfg) {
  finalize_config(cfg);
  if (cfg.out_dir.empty()) throw std::invalid_argument("run: out_dir not set");
  kernels::set_threads(cfg.threads);

  RunResult res;
  fs::create_directories(cfg.out_dir);
  const std::string data_root = prepare_data(cfg);
  res.cfg = cfg;
  write_text(cfg.out_dir + "/config.snapshot", serialize_config(cfg));

  const ArchSpec spec = arch_for(cfg.suite);
  const std::string state_dir = cfg.out_dir + "/state";
  const int n_tasks = task_count(cfg.suite);
  const int steps_per_epoch = (cfg.train_pairs + cfg.batch_size - 1) / cfg.batch_size;

  DataStore store(data_root, &res.audit);

  ParamSet gen = init_params(spec, Role::generator, substream(cfg.stream_seed_init(), "gen").next_u64());
  ParamSet disc =
      init_params(spec, Role::discriminator, substream(cfg.stream_seed_init(), "disc").next_u64());
  OptimState gen_opt(gen, cfg.adam);
  AdamConfig disc_adam = cfg.adam;
  if (cfg.disc_lr != 0.0) disc_adam.lr = cfg.disc_lr;
  OptimState disc_opt(disc, disc_adam);

  MappingMemory memory;
  std::optional<FisherSnapshot> snapshot;
  std::vector<std::vector<Pair>> replay_buffers;
  std::vector<int> replay_tasks;

  SplitMix64 shuffle_rng = substream(cfg.stream_seed_train(), "shuffle");
  SplitMix64 controller_rng = substream(cfg.stream_seed_controller(), "assoc");
  SplitMix64 replay_rng = substream(cfg.stream_seed_controller(), "replay-select");

  std::vector<std::vector<Pair>> test_sets(static_cast<std::size_t>(n_tasks) + 1);
  double wall_total = 0.0;
  std::int64_t stored_bytes = 0;
  int epochs_cum = 0;

  // Joint training pools every task's data up front (phase 0) and draws each
  // "epoch" with the same step count as one sequential epoch, so the total
  // step budget matches a sequential run.
  std::vector<Pair> joint_pool;
  std::size_t joint_cursor = 0;
  std::vector<int> joint_order;

  auto joint_next_batch = [&](int want) {
    std::vector<Pair> batch;
    batch.reserve(static_cast<std::size_t>(want));
    for (int i = 0; i < want; ++i) {
      if (joint_cursor >= joint_order.size()) {
        shuffle_rng.shuffle(joint_order);
        joint_cursor = 0;
      }
      batch.push_back(joint_pool[static_cast<std::size_t>(joint_order[joint_cursor++])]);
    }
    return batch;
  };

  auto emit_metrics_rows = [&](int tasks_trained) {
    double sum_psnr = 0.0, sum_ssim = 0.0, sum_mse = 0.0, sum_adv = 0.0;
    const double l_feat = snapshot ? distill_penalty(gen, *snapshot) : 0.0;
    for (int pos = 1; pos <= tasks_trained; ++pos) {
      const int tid = cfg.task_order[static_cast<std::size_t>(pos - 1)];
      const FullEval e = eval_full(gen, disc, test_sets[static_cast<std::size_t>(tid)], cfg, spec);
      EvalRecord row;
      row.tasks_trained = tasks_trained;
      row.eval_task = std::to_string(tid);
      row.epoch = epochs_cum;
      row.psnr_db = e.psnr_db;
      row.ssim = e.ssim_v;
      row.l_mse = e.l_mse;
      row.l_adv = e.l_adv;
      row.l_feature = l_feat;
      row.wall_s = cfg.wall_clock ? wall_total : 0.0;
      row.stored_bytes = stored_bytes;
      res.metrics.push_back(row);
      sum_psnr += e.psnr_db;
      sum_ssim += e.ssim_v;
      sum_mse += e.l_mse;
      sum_adv += e.l_adv;
    }
    EvalRecord avg;
    avg.tasks_trained = tasks_trained;
    avg.eval_task = "avg";
    avg.epoch = epochs_cum;
    const double inv = 1.0 / static_cast<double>(tasks_trained);
    avg.psnr_db = sum_psnr * inv;
    avg.ssim = sum_ssim * inv;
    avg.l_mse = sum_mse * inv;
    avg.l_adv = sum_adv * inv;
    avg.l_feature = l_feat;
    avg.wall_s = cfg.wall_clock ? wall_total : 0.0;
    avg.stored_bytes = stored_bytes;
    res.metrics.push_back(avg);
  };

  try {
    if (cfg.flags.joint) {
      store.set_phase(0);
      for (int pos = 1; pos <= n_tasks; ++pos) {
        const int tid = cfg.task_order[static_cast<std::size_t>(pos - 1)];
        auto pairs = store.load(tid, Split::train);
        joint_pool.insert(joint_pool.end(), pairs.begin(), pairs.end());
        test_sets[static_cast<std::size_t>(tid)] = store.load(tid, Split::test);
      }
      joint_order.resize(joint_pool.size());
      for (std::size_t i = 0; i < joint_order.size(); ++i) joint_order[i] = static_cast<int>(i);
      joint_cursor = joint_order.size();  // shuffle before first batch
    }

    for (int pos = 1; pos <= n_tasks; ++pos) {
      const int task_id = cfg.task_order[static_cast<std::size_t>(pos - 1)];
      store.set_phase(pos);

      std::vector<Pair> train;
      if (!cfg.flags.joint) {
        train = store.load(task_id, Split::train);
        test_sets[static_cast<std::size_t>(task_id)] = store.load(task_id, Split::test);
      }
      const double r = cfg.ratio_at(pos);

      std::vector<int> order(train.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

      const double t_start = now_seconds();
      for (int epoch = 1; epoch <= cfg.epochs_per_task; ++epoch) {
        if (!cfg.flags.joint) shuffle_rng.shuffle(order);
        int step_in_task = (epoch - 1) * steps_per_epoch;
        for (int s = 0; s < steps_per_epoch; ++s, ++step_in_task) {
          std::vector<Pair> batch;
          if (cfg.flags.joint) {
            const int want = std::min(cfg.batch_size, cfg.train_pairs - s * cfg.batch_size);
            batch = joint_next_batch(want);
          } else {
            const std::size_t lo = static_cast<std::size_t>(s) * cfg.batch_size;
            const std::size_t hi = std::min(lo + cfg.batch_size, train.size());
            for (std::size_t i = lo; i < hi; ++i)
              batch.push_back(train[static_cast<std::size_t>(order[i])]);
          }

          if (cfg.flags.heuristics && pos > 1 && r > 0.0) {
            AssocBatch ab = synthesize_association_batch(memory, batch, r, controller_rng, spec);
            batch = ab.pairs();
          } else if (cfg.flags.replay && pos > 1 && r > 0.0 && !replay_buffers.empty()) {
            const int bsize = static_cast<int>(batch.size());
            const int k = static_cast<int>(std::llround(r * bsize));
            for (int p : controller_rng.choose_k_of_n(k, bsize)) {
              const auto bi = controller_rng.next_below(replay_buffers.size());
              const auto& buf = replay_buffers[static_cast<std::size_t>(bi)];
              batch[static_cast<std::size_t>(p)] =
                  buf[static_cast<std::size_t>(controller_rng.next_below(buf.size()))];
            }
          }

          const StepLosses losses = train_step(batch, gen, disc, gen_opt, disc_opt,
                                               snapshot ? &*snapshot : nullptr, cfg, spec);
          if (!std::isfinite(losses.total) || !std::isfinite(losses.mse) ||
              !std::isfinite(losses.adv) || !std::isfinite(losses.feature))
            throw std::runtime_error("non-finite loss at task position " + std::to_string(pos) +
                                     " step " + std::to_string(step_in_task));
        }
        ++epochs_cum;

        // Forgetting curve: suite metric of every task seen so far.
        for (int seen = 1; seen <= pos; ++seen) {
          const int tid = cfg.task_order[static_cast<std::size_t>(seen - 1)];
          const double v = eval_metric(gen, test_sets[static_cast<std::size_t>(tid)],
                                       cfg.suite == Suite::dfd_like ? Metric::psnr : Metric::ssim,
                                       spec);
          res.forgetting.push_back({pos, epoch, tid, v});
        }
      }
      // Post-task consolidation. Joint runs have no per-task state.
      std::vector<Pair>* task_pairs = cfg.flags.joint ? nullptr : &train;

      if (task_pairs != nullptr && cfg.flags.heuristics) {
        TaskSpec mt;
        mt.suite = cfg.suite;
        mt.task_id = task_id;
        mt.channels = spec.channels;
        mt.height = spec.image_h;
        mt.width = spec.image_w;
        mt.train = *task_pairs;
        const ParamSet mapper =
            train_mapper(mt, spec, cfg.mapper,
                         substream(cfg.stream_seed_train(), "mapper:task" + std::to_string(task_id))
                             .next_u64());
        store_mapping(memory, task_id, mapper, mapper_mse(mapper, *task_pairs, spec));
        save_memory(memory, state_dir + "/memory");
      }
      if (task_pairs != nullptr && cfg.flags.feature) {
        const int m = std::min<int>(cfg.fisher_samples, static_cast<int>(task_pairs->size()));
        FisherSnapshot snap = estimate_diag_fisher(gen, *task_pairs, m, spec, task_id);
        if (cfg.accumulate_fisher && snapshot)
          for (std::size_t j = 0; j < snap.fisher.size(); ++j)
            snap.fisher[j] += snapshot->fisher[j];
        snapshot = std::move(snap);
        fs::create_directories(state_dir);
        save_fisher_snapshot(*snapshot, state_dir + "/fisher.acls");
      }
      if (task_pairs != nullptr && cfg.flags.replay) {
        const int keep = std::min<int>(cfg.replay_per_task, static_cast<int>(task_pairs->size()));
        std::vector<Pair> kept;
        for (int idx : replay_rng.choose_k_of_n(keep, static_cast<int>(task_pairs->size())))
          kept.push_back((*task_pairs)[static_cast<std::size_t>(idx)]);
        ParamSet blob;
        char name[32];
        for (std::size_t i = 0; i < kept.size(); ++i) {
          std::snprintf(name, sizeof(name), "x_%04zu", i);
          blob.add(name, kept[i].first);
          std::snprintf(name, sizeof(name), "y_%04zu", i);
          blob.add(name, kept[i].second);
        }
        fs::create_directories(state_dir + "/replay");
        save_checkpoint(blob, state_dir + "/replay/task" + std::to_string(task_id) + ".acls");
        replay_buffers.push_back(std::move(kept));
        replay_tasks.push_back(task_id);
      }

      store.mark_completed(task_id);
      // Task wall time covers training, per-epoch evaluation and
      // consolidation (mapper training, Fisher estimation, replay persistence).
      const double task_seconds = now_seconds() - t_start;
      wall_total += task_seconds;
      stored_bytes = dir_bytes(state_dir);
      res.accounting.push_back({pos, task_seconds, stored_bytes});
      emit_metrics_rows(pos);

      train.clear();
      train.shrink_to_fit();
    }
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }

  for (const auto& a : res.audit)
    if (a.violation) ++res.audit_violations;

  // Persist artifacts even for failed runs; the suite driver reports them.
  save_checkpoint(gen, cfg.out_dir + "/generator.acls");
  save_checkpoint(disc, cfg.out_dir + "/discriminator.acls");
  write_text(cfg.out_dir + "/metrics.csv", metrics_csv_header() + metrics_csv_rows(res));
  write_text(cfg.out_dir + "/forgetting.csv", forgetting_csv_header() + forgetting_csv_rows(res));
  write_text(cfg.out_dir + "/accounting.csv", accounting_csv_header() + accounting_csv_rows(res));

  std::ostringstream audit_os;
  audit_os << "phase\tfile_task\tsplit\tfiles\tviolation\n";
  for (const auto& a : res.audit)
    audit_os << a.phase << "\t" << a.file_task << "\t" << split_name(a.split) << "\t" << a.files
             << "\t" << (a.violation ? 1 : 0) << "\n";
  audit_os << "violations\t" << res.audit_violations << "\n";
  write_text(cfg.out_dir + "/audit.txt", audit_os.str());

  if (!res.ok) write_text(cfg.out_dir + "/FAILED.txt", res.error + "\n");
  return res;
}

// ------------------------------------------------------------------ CSVs --

std::string metrics_csv_header() {
  return "run_id,method,suite,tasks_trained,eval_task,epoch,psnr_db,ssim,l_mse,l_adv,l_feature,"
         "wall_s,stored_bytes\n";
}

std::string metrics_csv_rows(const RunResult& r) {
  std::ostringstream os;
  for (const auto& m : r.metrics)
    os << r.cfg.run_id << "," << r.cfg.label << "," << suite_name(r.cfg.suite) << ","
       << m.tasks_trained << "," << m.eval_task << "," << m.epoch << "," << fmt("%.6f", m.psnr_db)
       << "," << fmt("%.8f", m.ssim) << "," << fmt("%.9g", m.l_mse) << "," << fmt("%.9g", m.l_adv)
       << "," << fmt("%.9g", m.l_feature) << "," << fmt("%.3f", m.wall_s) << "," << m.stored_bytes
       << "\n";
  return os.str();
}

std::string forgetting_csv_header() {
  return "run_id,method,suite,task_pos,epoch,eval_task,metric,value\n";
}

std::string forgetting_csv_rows(const RunResult& r) {
  std::ostringstream os;
  const char* metric = r.cfg.suite == Suite::dfd_like ? "psnr" : "ssim";
  for (const auto& f : r.forgetting)
    os << r.cfg.run_id << "," << r.cfg.label << "," << suite_name(r.cfg.suite) << "," << f.task_pos
       << "," << f.epoch << "," << f.eval_task << "," << metric << "," << fmt("%.8f", f.value)
       << "\n";
  return os.str();
}

std::string accounting_csv_header() {
  return "run_id,method,suite,tasks_trained,train_wall_s,stored_bytes\n";
}

std::string accounting_csv_rows(const RunResult& r) {
  std::ostringstream os;
  for (const auto& a : r.accounting)
    os << r.cfg.run_id << "," << r.cfg.label << "," << suite_name(r.cfg.suite) << ","
       << a.tasks_trained << "," << fmt("%.3f", a.train_wall_s) << "," << a.stored_bytes << "\n";
  return os.str();
}

// ---------------------------------------------------------------- drivers --

namespace {

void merge_csvs(const std::vector<std::string>& run_dirs, const std::string& name,
                const std::string& header, const std::string& out_path) {
  std::ostringstream os;
  os << header;
  for (const auto& dir : run_dirs) {
    std::ifstream is(dir + "/" + name);
    if (!is) continue;
    std::string line;
    std::getline(is, line);  // drop header
    while (std::getline(is, line)) os << line << "\n";
  }
  write_text(out_path, os.str());
}

RunConfig derive_run(const RunConfig& suite_cfg, const std::string& method,
                     const std::string& data_root, const std::string& run_root) {
  RunConfig cfg = suite_cfg;
  cfg.method = method;
  cfg.mask_mse = cfg.mask_adv = cfg.mask_feature = cfg.mask_heuristics = true;
  cfg.data_dir = data_root;
  finalize_config(cfg);
  cfg.out_dir = run_root + "/" + cfg.run_id;
  return cfg;
}

int drive_runs(RunConfig base, std::vector<RunConfig> runs, const std::string& note) {
  bool all_ok = true;
  std::vector<std::string> dirs;
  std::ostringstream status;
  status << "run_id\tmethod\tok\terror\n";
  for (auto& cfg : runs) {
    try {
      RunResult r = run_one(cfg);
      dirs.push_back(cfg.out_dir);
      status << cfg.run_id << "\t" << cfg.label << "\t" << (r.ok ? 1 : 0) << "\t" << r.error << "\n";
      if (!r.ok) all_ok = false;
    } catch (const std::exception& e) {
      status << cfg.run_id << "\t" << cfg.label << "\t0\t" << e.what() << "\n";
      all_ok = false;
    }
  }
  merge_csvs(dirs, "metrics.csv", metrics_csv_header(), base.out_dir + "/metrics.csv");
  merge_csvs(dirs, "forgetting.csv", forgetting_csv_header(), base.out_dir + "/forgetting.csv");
  merge_csvs(dirs, "accounting.csv", accounting_csv_header(), base.out_dir + "/accounting.csv");
  write_text(base.out_dir + "/runs.tsv", status.str());
  if (!note.empty()) write_text(base.out_dir + "/driver.txt", note);
  return all_ok ? 0 : 1;
}

}  // namespace

int run_suite(RunConfig suite_cfg) {
  finalize_config(suite_cfg);
  if (suite_cfg.out_dir.empty()) throw std::invalid_argument("suite: out_dir not set");
  fs::create_directories(suite_cfg.out_dir);
  write_text(suite_cfg.out_dir + "/config.snapshot", serialize_config(suite_cfg));

  const std::string data_root =
      suite_cfg.data_dir.empty() ? suite_cfg.out_dir + "/data" : suite_cfg.data_dir;
  if (!fs::exists(data_root + "/task1/manifest.tsv"))
    generate_suite_data(suite_cfg.suite, suite_cfg.train_pairs, suite_cfg.test_pairs,
                        suite_cfg.stream_seed_data(), data_root);

  std::vector<RunConfig> runs;
  for (const auto& method : suite_cfg.methods)
    runs.push_back(derive_run(suite_cfg, method, data_root, suite_cfg.out_dir + "/runs"));
  const int rc = drive_runs(suite_cfg, runs, "");
  write_report(suite_cfg.out_dir, "md");
  return rc;
}

std::vector<RunConfig> ablation_configs(const RunConfig& base) {
  struct MaskSpec {
    bool mse, adv, feature, heuristics;
  };
  const MaskSpec masks[6] = {
      {false, false, false, false},  // backbone
      {true, false, false, false},   // + content
      {true, true, false, false},    // + adversarial
      {true, true, true, false},     // + feature anchor
      {true, true, false, true},     // + heuristics
      {true, true, true, true},      // full
  };
  std::vector<RunConfig> out;
  for (const auto& m : masks) {
    RunConfig cfg = base;
    cfg.method = "ablate";
    cfg.mask_mse = m.mse;
    cfg.mask_adv = m.adv;
    cfg.mask_feature = m.feature;
    cfg.mask_heuristics = m.heuristics;
    finalize_config(cfg);
    out.push_back(cfg);
  }
  return out;
}

int run_ablate(RunConfig base) {
  finalize_config(base);
  if (base.out_dir.empty()) throw std::invalid_argument("ablate: out_dir not set");
  fs::create_directories(base.out_dir);
  const std::string data_root = base.data_dir.empty() ? base.out_dir + "/data" : base.data_dir;
  if (!fs::exists(data_root + "/task1/manifest.tsv"))
    generate_suite_data(base.suite, base.train_pairs, base.test_pairs, base.stream_seed_data(),
                        data_root);

  std::vector<RunConfig> runs = ablation_configs(base);
  for (auto& cfg : runs) {
    cfg.data_dir = data_root;
    finalize_config(cfg);
    cfg.out_dir = base.out_dir + "/runs/" + cfg.run_id;
  }
  std::vector<RunConfig> run_copy = runs;
  const int rc = drive_runs(base, run_copy, "");

  // Ordered summary preserving the canonical mask sequence.
  std::ostringstream os;
  os << "order,run_id,method,final_avg_psnr,final_avg_ssim\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::ifstream is(run_copy[i].out_dir + "/metrics.csv");
    std::string line, found;
    const std::string want = "," + std::to_string(task_count(base.suite)) + ",avg,";
    while (std::getline(is, line))
      if (line.find(want) != std::string::npos) found = line;
    double psnr_v = 0.0, ssim_v = 0.0;
    if (!found.empty()) {
      std::vector<std::string> cells;
      std::stringstream ss(found);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      psnr_v = std::stod(cells[6]);
      ssim_v = std::stod(cells[7]);
    }
    os << i << "," << run_copy[i].run_id << "," << run_copy[i].label << "," << fmt("%.6f", psnr_v)
       << "," << fmt("%.8f", ssim_v) << "\n";
  }
  write_text(base.out_dir + "/ablation.csv", os.str());
  return rc;
}

int run_sweep(RunConfig base, const std::string& param, const std::vector<double>& values) {
  finalize_config(base);
  if (base.out_dir.empty()) throw std::invalid_argument("sweep: out_dir not set");
  if (param != "lambda_prime")
    throw std::invalid_argument("sweep: unsupported parameter '" + param + "'");
  fs::create_directories(base.out_dir);
  const std::string data_root = base.data_dir.empty() ? base.out_dir + "/data" : base.data_dir;
  if (!fs::exists(data_root + "/task1/manifest.tsv"))
    generate_suite_data(base.suite, base.train_pairs, base.test_pairs, base.stream_seed_data(),
                        data_root);

  std::vector<RunConfig> runs;
  for (double v : values) {
    RunConfig cfg = base;
    cfg.lambda_prime = v;
    cfg.data_dir = data_root;
    finalize_config(cfg);
    cfg.out_dir = base.out_dir + "/runs/" + cfg.run_id;
    runs.push_back(cfg);
  }
  std::vector<RunConfig> run_copy = runs;
  const int rc = drive_runs(base, run_copy, "");

  std::ostringstream os;
  os << "param,value,run_id,eval_task,psnr_db,ssim\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::ifstream is(run_copy[i].out_dir + "/metrics.csv");
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells[3] != std::to_string(task_count(base.suite))) continue;
      os << param << "," << fmt("%.17g", values[i]) << "," << run_copy[i].run_id << "," << cells[4]
         << "," << cells[6] << "," << cells[7] << "\n";
    }
  }
  write_text(base.out_dir + "/sweep.csv", os.str());
  return rc;
}

int run_sequence(RunConfig base, const std::vector<std::vector<int>>& perms) {
  finalize_config(base);
  if (base.out_dir.empty()) throw std::invalid_argument("sequence: out_dir not set");
  fs::create_directories(base.out_dir);
  const std::string data_root = base.data_dir.empty() ? base.out_dir + "/data" : base.data_dir;
  if (!fs::exists(data_root + "/task1/manifest.tsv"))
    generate_suite_data(base.suite, base.train_pairs, base.test_pairs, base.stream_seed_data(),
                        data_root);

  std::vector<RunConfig> runs;
  for (const auto& perm : perms) {
    RunConfig cfg = base;
    cfg.task_order = perm;
    cfg.data_dir = data_root;
    finalize_config(cfg);
    cfg.out_dir = base.out_dir + "/runs/" + cfg.run_id;
    runs.push_back(cfg);
  }
  std::vector<RunConfig> run_copy = runs;
  const int rc = drive_runs(base, run_copy, "");

  std::ostringstream os;
  os << "perm,run_id,eval_task,psnr_db,ssim\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::string perm_str;
    for (std::size_t j = 0; j < perms[i].size(); ++j)
      perm_str += (j ? "-" : "") + std::to_string(perms[i][j]);
    std::ifstream is(run_copy[i].out_dir + "/metrics.csv");
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells[3] != std::to_string(task_count(base.suite)) || cells[4] == "avg") continue;
      os << perm_str << "," << run_copy[i].run_id << "," << cells[4] << "," << cells[6] << ","
         << cells[7] << "\n";
    }
  }
  write_text(base.out_dir + "/sequence.csv", os.str());
  return rc;
}

}  // namespace aclab
