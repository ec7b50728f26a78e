#include "aclab/continual.hpp"

#include <cmath>
#include <stdexcept>

namespace aclab {

FisherSnapshot estimate_diag_fisher(const ParamSet& gen_params, const std::vector<Pair>& pairs,
                                    int m, const ArchSpec& spec, int source_task) {
  if (pairs.empty()) throw std::invalid_argument("estimate_diag_fisher: empty dataset");
  if (m <= 0 || m > static_cast<int>(pairs.size()))
    throw std::invalid_argument("estimate_diag_fisher: sample count " + std::to_string(m) +
                                " out of range for dataset of size " + std::to_string(pairs.size()));

  FisherSnapshot snap;
  snap.theta_star = gen_params.flatten();
  snap.fisher.assign(snap.theta_star.size(), 0.0);
  snap.sample_count = m;
  snap.source_task = source_task;

  for (int i = 0; i < m; ++i) {
    Tape tape;
    ParamVars pv = register_params(tape, gen_params);
    Var out = generator_forward(tape, pv, tape.constant(pairs[static_cast<std::size_t>(i)].first), spec);
    Var loss = sq_norm_to(out, pairs[static_cast<std::size_t>(i)].second);
    GradMap grads = tape.backward(loss);

    std::size_t off = 0;
    for (const auto& e : gen_params) {
      const Tensor& g = grads.at(e.name);
      for (double v : g.data) {
        if (!std::isfinite(v))
          throw std::runtime_error("estimate_diag_fisher: non-finite gradient at sample " +
                                   std::to_string(i) + " in parameter '" + e.name + "'");
        snap.fisher[off++] += v * v;
      }
    }
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  for (auto& f : snap.fisher) f *= inv_m;
  return snap;
}

double distill_penalty(const ParamSet& current, const FisherSnapshot& snap) {
  const auto flat = current.flatten();
  if (flat.size() != snap.theta_star.size())
    throw std::invalid_argument("distill_penalty: parameter length " + std::to_string(flat.size()) +
                                " != snapshot length " + std::to_string(snap.theta_star.size()));
  double acc = 0.0;
  for (std::size_t j = 0; j < flat.size(); ++j) {
    const double d = flat[j] - snap.theta_star[j];
    acc += 0.5 * snap.fisher[j] * d * d;
  }
  return acc;
}

Var distill_penalty_node(Tape& tape, const ParamVars& pv, const ParamSet& layout,
                         const FisherSnapshot& snap) {
  if (layout.total_elements() != static_cast<std::int64_t>(snap.theta_star.size()))
    throw std::invalid_argument("distill_penalty_node: parameter length " +
                                std::to_string(layout.total_elements()) + " != snapshot length " +
                                std::to_string(snap.theta_star.size()));
  Var total{};
  bool have = false;
  std::size_t off = 0;
  for (const auto& e : layout) {
    const auto it = pv.find(e.name);
    if (it == pv.end())
      throw std::invalid_argument("distill_penalty_node: parameter '" + e.name + "' not on tape");
    const std::size_t n = e.tensor.data.size();
    Tensor center(e.tensor.shape,
                  std::vector<double>(snap.theta_star.begin() + static_cast<std::ptrdiff_t>(off),
                                      snap.theta_star.begin() + static_cast<std::ptrdiff_t>(off + n)));
    Tensor weight(e.tensor.shape,
                  std::vector<double>(snap.fisher.begin() + static_cast<std::ptrdiff_t>(off),
                                      snap.fisher.begin() + static_cast<std::ptrdiff_t>(off + n)));
    Var term = quad_penalty(it->second, center, weight);
    total = have ? add(total, term) : term;
    have = true;
    off += n;
  }
  return total;
}

LossBreakdown total_loss(const std::vector<Pair>& batch, const ParamSet& gen_params,
                         const ParamSet& disc_params, const FisherSnapshot* snap,
                         const LossWeights& w, const ArchSpec& spec, GradMap* grads_out,
                         const TermMask& mask) {
  if (batch.empty()) throw std::invalid_argument("total_loss: empty batch");

  Tape tape;
  ParamVars gv = grads_out ? register_params(tape, gen_params) : register_constants(tape, gen_params);
  ParamVars dv = register_constants(tape, disc_params);

  Var mse_sum{}, adv_sum{};
  bool first = true;
  for (const auto& [x, y] : batch) {
    Var g = generator_forward(tape, gv, tape.constant(x), spec);
    Var content = sq_norm_to(g, y);
    // -log D(G(x)) == softplus(-logit), evaluated without taking log of a
    // saturated sigmoid.
    Var logit = discriminator_logit(tape, dv, g, spec);
    Var adv = softplus(scale(logit, -1.0));
    if (first) {
      mse_sum = content;
      adv_sum = adv;
      first = false;
    } else {
      mse_sum = add(mse_sum, content);
      adv_sum = add(adv_sum, adv);
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Var mse_mean = scale(mse_sum, inv_b);
  Var adv_mean = scale(adv_sum, inv_b);

  Var feature{};
  bool have_feature = false;
  if (snap != nullptr) {
    feature = distill_penalty_node(tape, gv, gen_params, *snap);
    have_feature = true;
  }

  // Assemble the masked total. Terms are added only when active so that a
  // zero weight leaves the remaining arithmetic bit-identical to a run
  // without the term.
  Var total{};
  bool have_total = false;
  auto add_term = [&](Var v) {
    total = have_total ? add(total, v) : v;
    have_total = true;
  };
  if (mask.mse) add_term(mse_mean);
  if (mask.adv && w.lambda_adv != 0.0) add_term(scale(adv_mean, w.lambda_adv));
  if (mask.feature && have_feature && w.lambda_prime != 0.0)
    add_term(scale(feature, w.lambda_prime));
  if (!have_total) {
    total = tape.constant(Tensor::scalar(0.0));
    have_total = true;
  }

  LossBreakdown out;
  out.total = tape.value(total).data[0];
  out.mse = tape.value(mse_mean).data[0];
  out.adv = tape.value(adv_mean).data[0];
  out.feature = have_feature ? tape.value(feature).data[0] : 0.0;

  if (grads_out != nullptr) *grads_out = tape.backward(total);
  return out;
}

void save_fisher_snapshot(const FisherSnapshot& snap, const std::string& path) {
  ParamSet ps;
  ps.add("__theta_star", Tensor({static_cast<int>(snap.theta_star.size())}, snap.theta_star));
  ps.add("__fisher", Tensor({static_cast<int>(snap.fisher.size())}, snap.fisher));
  ps.add("__meta", Tensor({2}, {static_cast<double>(snap.source_task),
                                static_cast<double>(snap.sample_count)}));
  save_checkpoint(ps, path);
}

FisherSnapshot load_fisher_snapshot(const std::string& path) {
  ParamSet ps = load_checkpoint(path);
  FisherSnapshot snap;
  snap.theta_star = ps.get("__theta_star").data;
  snap.fisher = ps.get("__fisher").data;
  const Tensor& meta = ps.get("__meta");
  if (meta.numel() != 2) throw std::runtime_error("fisher snapshot: malformed __meta record");
  snap.source_task = static_cast<int>(meta.data[0]);
  snap.sample_count = static_cast<int>(meta.data[1]);
  if (snap.theta_star.size() != snap.fisher.size())
    throw std::runtime_error("fisher snapshot: theta/fisher length mismatch");
  return snap;
}

}  // namespace aclab
