#include "aclab/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "aclab/rng.hpp"

namespace aclab {

double RunConfig::ratio_at(int sequence_pos) const {
  if (!flags.heuristics && !flags.replay) return 0.0;
  if (sequence_pos <= 1) return 0.0;
  if (assoc_ratio_auto) {
    const double r = static_cast<double>(sequence_pos - 1) / static_cast<double>(sequence_pos);
    return r > 0.5 ? 0.5 : r;
  }
  return assoc_ratio;
}

std::uint64_t RunConfig::stream_seed_data() const {
  return seed_data_set ? seed_data : substream(seed, "stream:data").next_u64();
}
std::uint64_t RunConfig::stream_seed_init() const {
  return seed_init_set ? seed_init : substream(seed, "stream:init").next_u64();
}
std::uint64_t RunConfig::stream_seed_train() const {
  return seed_train_set ? seed_train : substream(seed, "stream:train").next_u64();
}
std::uint64_t RunConfig::stream_seed_controller() const {
  return seed_controller_set ? seed_controller : substream(seed, "stream:controller").next_u64();
}

std::string flags_str(const EffectiveFlags& f) {
  std::string s;
  s += f.mse ? "mse," : "";
  s += f.adv ? "adv," : "";
  s += f.feature ? "feature," : "";
  s += f.heuristics ? "heuristics," : "";
  s += f.replay ? "replay," : "";
  s += f.joint ? "joint," : "";
  if (!s.empty()) s.pop_back();
  return s;
}

namespace {

std::string fmt_f(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string label_for(const EffectiveFlags& f) {
  if (f.joint) return "jl";
  if (f.replay) return "replay";
  if (f.mse && f.adv && f.feature && f.heuristics) return "assoc";
  if (f.mse && f.adv && f.feature && !f.heuristics) return "ewc";
  if (f.mse && f.adv && !f.feature && f.heuristics) return "assoc-nofeat";
  if (f.mse && f.adv && !f.feature && !f.heuristics) return "tl";
  if (f.mse && !f.adv && !f.feature && !f.heuristics) return "mse";
  if (!f.mse && !f.adv && !f.feature && !f.heuristics) return "backbone";
  std::string s = "mask";
  if (f.mse) s += "-mse";
  if (f.adv) s += "-adv";
  if (f.feature) s += "-feat";
  if (f.heuristics) s += "-heur";
  return s;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw std::invalid_argument("config: bad boolean '" + v + "' for key " + key);
}

std::vector<int> parse_order(const std::string& v) {
  std::vector<int> order;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) order.push_back(std::stoi(tok));
  return order;
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

void finalize_config(RunConfig& cfg) {
  const int n_tasks = task_count(cfg.suite);
  if (cfg.task_order.empty()) {
    cfg.task_order.resize(static_cast<std::size_t>(n_tasks));
    for (int i = 0; i < n_tasks; ++i) cfg.task_order[static_cast<std::size_t>(i)] = i + 1;
  }
  std::set<int> seen(cfg.task_order.begin(), cfg.task_order.end());
  if (static_cast<int>(cfg.task_order.size()) != n_tasks ||
      static_cast<int>(seen.size()) != n_tasks || *seen.begin() != 1 || *seen.rbegin() != n_tasks)
    throw std::invalid_argument("config: task_order must be a permutation of 1.." +
                                std::to_string(n_tasks));

  const bool custom_mask = !cfg.mask_mse || !cfg.mask_adv || !cfg.mask_feature || !cfg.mask_heuristics;
  if (cfg.method != "ablate" && custom_mask)
    throw std::invalid_argument("config: mask_* keys apply only to method = ablate");

  EffectiveFlags f;
  if (cfg.method == "tl") f = {true, true, false, false, false, false};
  else if (cfg.method == "jl") f = {true, true, false, false, false, true};
  else if (cfg.method == "ewc") f = {true, true, true, false, false, false};
  else if (cfg.method == "replay") f = {true, true, false, false, true, false};
  else if (cfg.method == "assoc") f = {true, true, true, true, false, false};
  else if (cfg.method == "ablate")
    f = {cfg.mask_mse, cfg.mask_adv, cfg.mask_feature, cfg.mask_heuristics, false, false};
  else
    throw std::invalid_argument("config: unknown method '" + cfg.method + "'");

  // Degenerate weights disable their pathway entirely, storage included.
  if (f.feature && cfg.lambda_prime == 0.0) f.feature = false;
  if ((f.heuristics || f.replay) && !cfg.assoc_ratio_auto && cfg.assoc_ratio == 0.0) {
    f.heuristics = false;
    f.replay = false;
  }

  if (!cfg.assoc_ratio_auto && cfg.assoc_ratio > 0.0 && !f.heuristics && !f.replay)
    throw std::invalid_argument("config: assoc_ratio > 0 is contradictory for method '" +
                                cfg.method + "'");
  if (cfg.epochs_per_task <= 0 || cfg.batch_size <= 0 || cfg.train_pairs <= 0 || cfg.test_pairs <= 0)
    throw std::invalid_argument("config: counts must be positive");
  if (cfg.assoc_ratio < 0.0 || cfg.assoc_ratio > 1.0)
    throw std::invalid_argument("config: assoc_ratio outside [0,1]");

  cfg.flags = f;
  cfg.label = label_for(f);

  // Canonical fingerprint over the semantic fields only; fields that cannot
  // influence results (threads, directories, wall_clock) stay out, and
  // fields behind a disabled flag are normalized away.
  std::string c;
  c += "suite=" + std::string(suite_name(cfg.suite));
  c += ";order=";
  for (int t : cfg.task_order) c += std::to_string(t) + ",";
  c += ";flags=" + flags_str(f);
  c += ";epochs=" + std::to_string(cfg.epochs_per_task);
  c += ";batch=" + std::to_string(cfg.batch_size);
  c += ";train=" + std::to_string(cfg.train_pairs);
  c += ";test=" + std::to_string(cfg.test_pairs);
  c += ";lr=" + fmt_f(cfg.adam.lr) + ";b1=" + fmt_f(cfg.adam.beta1) + ";b2=" + fmt_f(cfg.adam.beta2) +
       ";eps=" + fmt_f(cfg.adam.eps);
  c += ";dlr=" + (f.adv ? fmt_f(cfg.disc_lr == 0.0 ? cfg.adam.lr : cfg.disc_lr) : std::string("-"));
  c += ";clip=" + fmt_f(cfg.grad_clip);
  c += ";lambda=" + (f.adv ? fmt_f(cfg.lambda_adv) : std::string("-"));
  c += ";lambda_prime=" + (f.feature ? fmt_f(cfg.lambda_prime) : std::string("-"));
  c += ";r=" + ((f.heuristics || f.replay)
                    ? (cfg.assoc_ratio_auto ? std::string("auto") : fmt_f(cfg.assoc_ratio))
                    : std::string("-"));
  c += ";m=" + (f.feature ? std::to_string(cfg.fisher_samples) : std::string("-"));
  c += ";accf=" + std::string(f.feature && cfg.accumulate_fisher ? "1" : "0");
  c += ";replay_n=" + (f.replay ? std::to_string(cfg.replay_per_task) : std::string("-"));
  c += ";mapper=" + (f.heuristics ? std::to_string(cfg.mapper.steps) + "," +
                                        std::to_string(cfg.mapper.batch_size) + "," +
                                        fmt_f(cfg.mapper.adam.lr)
                                  : std::string("-"));
  c += ";seeds=" + std::to_string(cfg.stream_seed_data()) + "," +
       std::to_string(cfg.stream_seed_init()) + "," + std::to_string(cfg.stream_seed_train()) + "," +
       std::to_string(cfg.stream_seed_controller());

  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a64(c)));
  cfg.run_id = cfg.label + "-" + suite_name(cfg.suite) + "-" + hex;
}

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "suite") cfg.suite = parse_suite(value);
  else if (key == "task_order") cfg.task_order = parse_order(value);
  else if (key == "method") cfg.method = value;
  else if (key == "epochs_per_task") cfg.epochs_per_task = std::stoi(value);
  else if (key == "batch_size") cfg.batch_size = std::stoi(value);
  else if (key == "train_pairs") cfg.train_pairs = std::stoi(value);
  else if (key == "test_pairs") cfg.test_pairs = std::stoi(value);
  else if (key == "lr") cfg.adam.lr = std::stod(value);
  else if (key == "disc_lr") cfg.disc_lr = std::stod(value);
  else if (key == "grad_clip") cfg.grad_clip = std::stod(value);
  else if (key == "beta1") cfg.adam.beta1 = std::stod(value);
  else if (key == "beta2") cfg.adam.beta2 = std::stod(value);
  else if (key == "eps") cfg.adam.eps = std::stod(value);
  else if (key == "lambda_adv") cfg.lambda_adv = std::stod(value);
  else if (key == "lambda_prime") cfg.lambda_prime = std::stod(value);
  else if (key == "assoc_ratio") {
    if (value == "auto") cfg.assoc_ratio_auto = true;
    else {
      cfg.assoc_ratio_auto = false;
      cfg.assoc_ratio = std::stod(value);
    }
  } else if (key == "fisher_samples") cfg.fisher_samples = std::stoi(value);
  else if (key == "accumulate_fisher") cfg.accumulate_fisher = parse_bool(value, key);
  else if (key == "mask_mse") cfg.mask_mse = parse_bool(value, key);
  else if (key == "mask_adv") cfg.mask_adv = parse_bool(value, key);
  else if (key == "mask_feature") cfg.mask_feature = parse_bool(value, key);
  else if (key == "mask_heuristics") cfg.mask_heuristics = parse_bool(value, key);
  else if (key == "replay_per_task") cfg.replay_per_task = std::stoi(value);
  else if (key == "mapper_steps") cfg.mapper.steps = std::stoi(value);
  else if (key == "mapper_batch") cfg.mapper.batch_size = std::stoi(value);
  else if (key == "mapper_lr") cfg.mapper.adam.lr = std::stod(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "seed_data") {
    cfg.seed_data = std::stoull(value);
    cfg.seed_data_set = true;
  } else if (key == "seed_init") {
    cfg.seed_init = std::stoull(value);
    cfg.seed_init_set = true;
  } else if (key == "seed_train") {
    cfg.seed_train = std::stoull(value);
    cfg.seed_train_set = true;
  } else if (key == "seed_controller") {
    cfg.seed_controller = std::stoull(value);
    cfg.seed_controller_set = true;
  } else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "data_dir") cfg.data_dir = value;
  else if (key == "threads") cfg.threads = std::stoi(value);
  else if (key == "wall_clock") {
    if (value == "real") cfg.wall_clock = true;
    else if (value == "off") cfg.wall_clock = false;
    else cfg.wall_clock = parse_bool(value, key);
  }
  else if (key == "methods") cfg.methods = parse_list(value);
  else
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_line(cfg, key, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  finalize_config(cfg);
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "suite = " << suite_name(cfg.suite) << "\n";
  os << "task_order = ";
  for (std::size_t i = 0; i < cfg.task_order.size(); ++i)
    os << (i ? "," : "") << cfg.task_order[i];
  os << "\n";
  os << "method = " << cfg.method << "\n";
  os << "epochs_per_task = " << cfg.epochs_per_task << "\n";
  os << "batch_size = " << cfg.batch_size << "\n";
  os << "train_pairs = " << cfg.train_pairs << "\n";
  os << "test_pairs = " << cfg.test_pairs << "\n";
  os << "lr = " << fmt_f(cfg.adam.lr) << "\n";
  os << "disc_lr = " << fmt_f(cfg.disc_lr) << "\n";
  os << "grad_clip = " << fmt_f(cfg.grad_clip) << "\n";
  os << "beta1 = " << fmt_f(cfg.adam.beta1) << "\n";
  os << "beta2 = " << fmt_f(cfg.adam.beta2) << "\n";
  os << "eps = " << fmt_f(cfg.adam.eps) << "\n";
  os << "lambda_adv = " << fmt_f(cfg.lambda_adv) << "\n";
  os << "lambda_prime = " << fmt_f(cfg.lambda_prime) << "\n";
  os << "assoc_ratio = " << (cfg.assoc_ratio_auto ? std::string("auto") : fmt_f(cfg.assoc_ratio)) << "\n";
  os << "fisher_samples = " << cfg.fisher_samples << "\n";
  os << "accumulate_fisher = " << (cfg.accumulate_fisher ? "true" : "false") << "\n";
  if (cfg.method == "ablate") {
    os << "mask_mse = " << (cfg.mask_mse ? "true" : "false") << "\n";
    os << "mask_adv = " << (cfg.mask_adv ? "true" : "false") << "\n";
    os << "mask_feature = " << (cfg.mask_feature ? "true" : "false") << "\n";
    os << "mask_heuristics = " << (cfg.mask_heuristics ? "true" : "false") << "\n";
  }
  os << "replay_per_task = " << cfg.replay_per_task << "\n";
  os << "mapper_steps = " << cfg.mapper.steps << "\n";
  os << "mapper_batch = " << cfg.mapper.batch_size << "\n";
  os << "mapper_lr = " << fmt_f(cfg.mapper.adam.lr) << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "seed_data = " << cfg.stream_seed_data() << "\n";
  os << "seed_init = " << cfg.stream_seed_init() << "\n";
  os << "seed_train = " << cfg.stream_seed_train() << "\n";
  os << "seed_controller = " << cfg.stream_seed_controller() << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "data_dir = " << cfg.data_dir << "\n";
  os << "threads = " << cfg.threads << "\n";
  os << "wall_clock = " << (cfg.wall_clock ? "real" : "off") << "\n";
  os << "methods = ";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) os << (i ? "," : "") << cfg.methods[i];
  os << "\n";
  return os.str();
}

}  // namespace aclab
