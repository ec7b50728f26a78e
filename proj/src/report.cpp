#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "aclab/runner.hpp"

namespace fs = std::filesystem;

namespace aclab {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

struct MetricsRow {
  std::string run_id, method, suite, eval_task;
  int tasks_trained = 0, epoch = 0;
  double psnr = 0.0, ssim = 0.0;
  std::int64_t stored_bytes = 0;
};

std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("report: cannot open " + path);
  std::vector<MetricsRow> rows;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    const auto c = split_csv(line);
    if (c.size() < 13) continue;
    MetricsRow r;
    r.run_id = c[0];
    r.method = c[1];
    r.suite = c[2];
    r.tasks_trained = std::stoi(c[3]);
    r.eval_task = c[4];
    r.epoch = std::stoi(c[5]);
    r.psnr = std::stod(c[6]);
    r.ssim = std::stod(c[7]);
    r.stored_bytes = std::stoll(c[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string fmt1(double v, bool psnr) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), psnr ? "%.2f" : "%.3f", v);
  return buf;
}

}  // namespace

void write_report(const std::string& in_dir, const std::string& format) {
  const std::string metrics_path = in_dir + "/metrics.csv";
  const auto rows = read_metrics(metrics_path);
  if (rows.empty()) throw std::runtime_error("report: no metrics rows in " + metrics_path);
  const bool is_psnr = rows.front().suite == "dfd";

  // Keep first-seen method order.
  std::vector<std::string> methods;
  for (const auto& r : rows) {
    bool seen = false;
    for (const auto& m : methods) seen = seen || m == r.method;
    if (!seen) methods.push_back(r.method);
  }
  int max_tasks = 0;
  for (const auto& r : rows) max_tasks = std::max(max_tasks, r.tasks_trained);

  // Quota curve: average metric over seen tasks after every epoch.
  {
    std::ifstream is(in_dir + "/forgetting.csv");
    if (is) {
      std::map<std::string, int> epochs_per_task;
      std::string line;
      std::getline(is, line);
      std::map<std::pair<std::string, std::pair<int, int>>, std::pair<double, int>> cell;
      while (std::getline(is, line)) {
        const auto c = split_csv(line);
        if (c.size() < 8) continue;
        const std::string method = c[1];
        const int task_pos = std::stoi(c[3]);
        const int epoch = std::stoi(c[4]);
        auto& e = cell[{method, {task_pos, epoch}}];
        e.first += std::stod(c[7]);
        e.second += 1;
        epochs_per_task[method] = std::max(epochs_per_task[method], epoch);
      }
      std::ostringstream os;
      os << "method,cum_epoch,avg_metric\n";
      for (const auto& [key, v] : cell) {
        const int cum = (key.second.first - 1) * epochs_per_task[key.first] + key.second.second;
        os << key.first << "," << cum << "," << fmt1(v.first / v.second, is_psnr) << "\n";
      }
      std::ofstream qf(in_dir + "/quota.csv", std::ios::binary);
      qf << os.str();
    }
  }

  if (format == "csv") {
    std::ostringstream os;
    os << "method,tasks_trained,avg_" << (is_psnr ? "psnr" : "ssim") << ",stored_bytes\n";
    for (const auto& m : methods)
      for (int t = 1; t <= max_tasks; ++t)
        for (const auto& r : rows)
          if (r.method == m && r.tasks_trained == t && r.eval_task == "avg")
            os << m << "," << t << "," << fmt1(is_psnr ? r.psnr : r.ssim, is_psnr) << ","
               << r.stored_bytes << "\n";
    std::ofstream sf(in_dir + "/summary.csv", std::ios::binary);
    sf << os.str();
    return;
  }

  // Markdown matrices, one per method: rows are eval tasks plus AVG, columns
  // are tasks-trained counts.
  std::ostringstream os;
  os << "# Results (" << (is_psnr ? "PSNR dB" : "SSIM") << ")\n";
  for (const auto& m : methods) {
    os << "\n## " << m << "\n\n|  |";
    for (int t = 1; t <= max_tasks; ++t) os << " " << t << " task" << (t > 1 ? "s" : "") << " |";
    os << "\n|--|";
    for (int t = 1; t <= max_tasks; ++t) os << "--|";
    os << "\n";
    std::vector<std::string> eval_tasks;
    for (const auto& r : rows)
      if (r.method == m && r.eval_task != "avg") {
        bool seen = false;
        for (const auto& e : eval_tasks) seen = seen || e == r.eval_task;
        if (!seen) eval_tasks.push_back(r.eval_task);
      }
    auto emit_row = [&](const std::string& ev, const char* label) {
      os << "| " << label << " |";
      for (int t = 1; t <= max_tasks; ++t) {
        bool found = false;
        for (const auto& r : rows)
          if (r.method == m && r.tasks_trained == t && r.eval_task == ev) {
            os << " " << fmt1(is_psnr ? r.psnr : r.ssim, is_psnr) << " |";
            found = true;
            break;
          }
        if (!found) os << "  |";
      }
      os << "\n";
    };
    for (const auto& ev : eval_tasks) emit_row(ev, ("T" + ev).c_str());
    emit_row("avg", "AVG");
  }

  // Storage growth per method.
  os << "\n## Stored bytes (beyond the live model)\n\n| method |";
  for (int t = 1; t <= max_tasks; ++t) os << " " << t << " |";
  os << "\n|--|";
  for (int t = 1; t <= max_tasks; ++t) os << "--|";
  os << "\n";
  for (const auto& m : methods) {
    os << "| " << m << " |";
    for (int t = 1; t <= max_tasks; ++t) {
      std::int64_t bytes = -1;
      for (const auto& r : rows)
        if (r.method == m && r.tasks_trained == t && r.eval_task == "avg") bytes = r.stored_bytes;
      if (bytes < 0) os << "  |";
      else os << " " << bytes << " |";
    }
    os << "\n";
  }
  std::ofstream rf(in_dir + "/report.md", std::ios::binary);
  rf << os.str();
}

}  // namespace aclab
