#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aclab/config.hpp"
#include "aclab/continual.hpp"
#include "aclab/data.hpp"
#include "aclab/heuristics.hpp"
#include "aclab/image_io.hpp"

namespace aclab {

struct EvalRecord {
  int tasks_trained = 0;
  std::string eval_task;  // task id, or "avg"
  int epoch = 0;          // cumulative epochs when the row was written
  double psnr_db = 0.0;
  double ssim = 0.0;
  double l_mse = 0.0;
  double l_adv = 0.0;
  double l_feature = 0.0;
  double wall_s = 0.0;
  std::int64_t stored_bytes = 0;
};

struct ForgettingRecord {
  int task_pos = 0;   // 1-based position in the training sequence
  int epoch = 0;      // epoch within that task
  int eval_task = 0;  // task id
  double value = 0.0;  // suite metric
};

struct AccountingRecord {
  int tasks_trained = 0;
  double train_wall_s = 0.0;  // measured, always real
  std::int64_t stored_bytes = 0;
};

struct AuditRecord {
  int phase = 0;  // sequence position current at read time; 0 = run setup
  int file_task = 0;
  Split split = Split::train;
  int files = 0;
  bool violation = false;
};

struct RunResult {
  RunConfig cfg;
  std::vector<EvalRecord> metrics;
  std::vector<ForgettingRecord> forgetting;
  std::vector<AccountingRecord> accounting;
  std::vector<AuditRecord> audit;
  int audit_violations = 0;
  bool ok = false;
  std::string error;

  // Final metric on one task (psnr or ssim by suite), and the final AVG row.
  double final_metric(int task_id) const;
  double final_avg() const;
  // Metric on task_id right after the task at sequence position pos finished.
  double metric_after(int tasks_trained, int task_id) const;
};

// Executes one run into cfg.out_dir: config.snapshot, metrics.csv,
// forgetting.csv, accounting.csv, audit.txt, and persisted continual state
// under state/. Never throws for training failures; inspect RunResult::ok.
RunResult run_one(RunConfig cfg);

// Writes one task directory per task under out_dir (task1..taskN).
void generate_suite_data(Suite suite, int n_train, int n_test, std::uint64_t seed,
                         const std::string& out_dir);

// gen-data -> one run per configured method -> merged CSVs and report.
// Returns 0 only if every run completed finitely.
int run_suite(RunConfig suite_cfg);

// The six ablation configurations, in canonical order.
std::vector<RunConfig> ablation_configs(const RunConfig& base);
int run_ablate(RunConfig base);

int run_sweep(RunConfig base, const std::string& param, const std::vector<double>& values);
int run_sequence(RunConfig base, const std::vector<std::vector<int>>& perms);

// CSV plumbing shared by the drivers and tests.
std::string metrics_csv_header();
std::string metrics_csv_rows(const RunResult& r);
std::string forgetting_csv_header();
std::string forgetting_csv_rows(const RunResult& r);
std::string accounting_csv_header();
std::string accounting_csv_rows(const RunResult& r);

// report / quota emission (see report.cpp).
void write_report(const std::string& in_dir, const std::string& format);

}  // namespace aclab
