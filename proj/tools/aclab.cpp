// Command-line front end: dataset generation, single runs, the method suite,
// ablations, the lambda' sweep, task-order studies and report emission.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "aclab/runner.hpp"

namespace {

aclab::RunConfig load_base(const std::string& config_path) {
  if (config_path.empty()) {
    aclab::RunConfig cfg;
    aclab::finalize_config(cfg);
    return cfg;
  }
  return aclab::parse_config_file(config_path);
}

std::vector<std::vector<int>> parse_perms(const std::string& arg, int n_tasks) {
  std::vector<std::vector<int>> perms;
  if (arg == "all") {
    std::vector<int> p(static_cast<std::size_t>(n_tasks));
    for (int i = 0; i < n_tasks; ++i) p[static_cast<std::size_t>(i)] = i + 1;
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return perms;
  }
  std::stringstream ss(arg);
  std::string group;
  while (std::getline(ss, group, ';')) {
    std::vector<int> p;
    std::stringstream gs(group);
    std::string tok;
    while (std::getline(gs, tok, ',')) p.push_back(std::stoi(tok));
    perms.push_back(p);
  }
  return perms;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continual-learning lab for paired image-to-image GANs"};
  app.require_subcommand(1);

  // gen-data
  std::string gd_suite = "dfd", gd_out;
  int gd_train = 200, gd_test = 50;
  std::uint64_t gd_seed = 1;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic task suite");
  gen->add_option("--suite", gd_suite, "dfd|gld")->check(CLI::IsMember({"dfd", "gld"}));
  gen->add_option("--out", gd_out, "output directory")->required();
  gen->add_option("--train", gd_train, "train pairs per task");
  gen->add_option("--test", gd_test, "test pairs per task");
  gen->add_option("--seed", gd_seed, "data seed");

  // run
  std::string run_config, run_method, run_out;
  auto* run = app.add_subcommand("run", "train one method over the task sequence");
  run->add_option("--config", run_config, "config file (key = value)");
  run->add_option("--method", run_method, "tl|jl|ewc|replay|assoc|ablate");
  run->add_option("--out", run_out, "run output directory")->required();

  // suite
  std::string suite_config, suite_out;
  auto* suite = app.add_subcommand("suite", "run every configured method and merge the results");
  suite->add_option("--config", suite_config, "config file");
  suite->add_option("--out", suite_out, "suite output directory")->required();

  // ablate
  std::string ab_config, ab_out;
  auto* ablate = app.add_subcommand("ablate", "run the six component masks in canonical order");
  ablate->add_option("--config", ab_config, "config file");
  ablate->add_option("--out", ab_out, "output directory")->required();

  // sweep
  std::string sw_config, sw_out, sw_param = "lambda_prime", sw_values = "0,1,5,20";
  auto* sweep = app.add_subcommand("sweep", "one run per parameter value, shared seeds");
  sweep->add_option("--config", sw_config, "config file");
  sweep->add_option("--param", sw_param, "parameter to sweep");
  sweep->add_option("--values", sw_values, "comma-separated values");
  sweep->add_option("--out", sw_out, "output directory")->required();

  // sequence
  std::string sq_config, sq_out, sq_perms = "all";
  auto* sequence = app.add_subcommand("sequence", "task arrival order study");
  sequence->add_option("--config", sq_config, "config file");
  sequence->add_option("--perms", sq_perms, "all, or lists like 1,2,3,4;4,3,2,1");
  sequence->add_option("--out", sq_out, "output directory")->required();

  // report
  std::string rp_in, rp_format = "md";
  auto* report = app.add_subcommand("report", "emit report tables and quota curves");
  report->add_option("--in", rp_in, "suite or run directory")->required();
  report->add_option("--format", rp_format, "csv|md")->check(CLI::IsMember({"csv", "md"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      aclab::generate_suite_data(aclab::parse_suite(gd_suite), gd_train, gd_test, gd_seed, gd_out);
      std::cout << "wrote " << gd_out << "\n";
      return 0;
    }
    if (*run) {
      aclab::RunConfig cfg = load_base(run_config);
      if (!run_method.empty()) cfg.method = run_method;
      cfg.out_dir = run_out;
      aclab::finalize_config(cfg);
      const aclab::RunResult r = aclab::run_one(cfg);
      std::cout << cfg.run_id << (r.ok ? " ok" : " FAILED: " + r.error) << "\n";
      return r.ok ? 0 : 1;
    }
    if (*suite) {
      aclab::RunConfig cfg = load_base(suite_config);
      cfg.out_dir = suite_out;
      return aclab::run_suite(cfg);
    }
    if (*ablate) {
      aclab::RunConfig cfg = load_base(ab_config);
      cfg.out_dir = ab_out;
      return aclab::run_ablate(cfg);
    }
    if (*sweep) {
      aclab::RunConfig cfg = load_base(sw_config);
      cfg.out_dir = sw_out;
      std::vector<double> values;
      std::stringstream ss(sw_values);
      std::string tok;
      while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
      return aclab::run_sweep(cfg, sw_param, values);
    }
    if (*sequence) {
      aclab::RunConfig cfg = load_base(sq_config);
      cfg.out_dir = sq_out;
      return aclab::run_sequence(cfg, parse_perms(sq_perms, aclab::task_count(cfg.suite)));
    }
    if (*report) {
      aclab::write_report(rp_in, rp_format);
      std::cout << "report written to " << rp_in << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
