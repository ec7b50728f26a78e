#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aclab/models.hpp"
#include "aclab/paramset.hpp"
#include "aclab/tape.hpp"
#include "aclab/tensor.hpp"

namespace aclab {

// Frozen anchor from the previous task: a flattened copy of the generator
// parameters at the end of that task plus the empirical diagonal Fisher
// estimated there. The Fisher entries are the Laplace-approximation
// precisions (1/sigma^2) of the per-parameter posterior, so they are
// non-negative by construction. Immutable after creation.
struct FisherSnapshot {
  std::vector<double> theta_star;
  std::vector<double> fisher;
  int sample_count = 0;
  int source_task = 0;
};

struct LossWeights {
  double lambda_adv = 1e-3;   // weight of the adversarial term
  double lambda_prime = 5.0;  // weight of the distillation penalty
  double assoc_ratio = 0.0;   // association ratio r, 0 on the first task
};

// Which loss components participate; used by the ablation runs. All-on by
// default.
struct TermMask {
  bool mse = true;
  bool adv = true;
  bool feature = true;
};

struct LossBreakdown {
  double total = 0.0;
  double mse = 0.0;
  double adv = 0.0;
  double feature = 0.0;
};

using Pair = std::pair<Tensor, Tensor>;  // (x, y)

// Empirical diagonal Fisher at gen_params: the mean over the first m pairs of
// the elementwise squared gradient of the per-sample content loss (squared L2
// residual, the Gaussian log-likelihood surrogate). Rejects empty datasets
// and non-finite per-sample gradients.
FisherSnapshot estimate_diag_fisher(const ParamSet& gen_params, const std::vector<Pair>& pairs,
                                    int m, const ArchSpec& spec, int source_task);

// 0.5 * sum_j F_j (theta_j - theta*_j)^2 over the flattened parameters.
double distill_penalty(const ParamSet& current, const FisherSnapshot& snap);

// Same penalty as a tape node over registered generator vars (in ParamSet
// order), so its gradient F.(theta-theta*) flows into the update.
Var distill_penalty_node(Tape& tape, const ParamVars& pv, const ParamSet& layout,
                         const FisherSnapshot& snap);

// Combined objective over a batch: batch-mean content loss, batch-mean
// -log D(G(x)) (weighted by lambda_adv), and the distillation penalty
// (weighted by lambda_prime; zero when snap is null). Components are
// reported separately; when grads_out is non-null the generator gradients of
// the masked total are written there.
LossBreakdown total_loss(const std::vector<Pair>& batch, const ParamSet& gen_params,
                         const ParamSet& disc_params, const FisherSnapshot* snap,
                         const LossWeights& w, const ArchSpec& spec, GradMap* grads_out = nullptr,
                         const TermMask& mask = {});

// Snapshot container entries: "__theta_star", "__fisher" and a "__meta"
// record [source_task, sample_count].
void save_fisher_snapshot(const FisherSnapshot& snap, const std::string& path);
FisherSnapshot load_fisher_snapshot(const std::string& path);

}  // namespace aclab
