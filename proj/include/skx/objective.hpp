// The composite training objective: per-route cross-entropies combined as
// intra + w_x * (cross-pair terms). Pure functions over probability /
// logit batches; gradients are fused with the softmax.
#pragma once

#include <vector>

#include "skx/tensor.hpp"

namespace skx {

struct LossBreakdown {
  double intra = 0;
  double dasp = 0;
  double sadp = 0;
  double total = 0;
  double w_x = 0;
};

// Row-wise softmax of a (n, K) logit matrix.
Tensor softmax_rows(const Tensor& logits);

// Batch mean of -log p[label]; probabilities are clamped at 1e-12 before the
// log so a confidently wrong row cannot produce infinity.
double cross_entropy(const Tensor& probs, const std::vector<long>& labels);
// Soft-target variant: batch mean of -sum_k target[k] * log p[k].
double cross_entropy_soft(const Tensor& probs, const Tensor& targets);

// Fused softmax + cross-entropy. Returns the (unweighted) mean loss and adds
// weight * d(mean loss)/d(logits) into dlogits.
double softmax_ce_grad(const Tensor& logits, const std::vector<long>& labels, double weight,
                       Tensor& dlogits);
double softmax_ce_soft_grad(const Tensor& logits, const Tensor& targets, double weight,
                            Tensor& dlogits);

// The two crossed predictions of a DASP pair carry different labels: the
// route whose temporal feature came from the original keeps y, the reversed
// route takes the partner's y2.
double loss_dasp(const Tensor& probs_cross, const Tensor& probs_cross_rev,
                 const std::vector<long>& y, const std::vector<long>& y2);

// Both SADP crossings share the original label (the partner depicts the
// same action).
double loss_sadp(const Tensor& probs_cross, const Tensor& probs_cross_rev,
                 const std::vector<long>& y);

// Intra-sample predictions of the original, the SADP partner (same action,
// label y) and the DASP partner (label y2).
double loss_intra(const Tensor& probs, const Tensor& probs_sadp, const Tensor& probs_dasp,
                  const std::vector<long>& y, const std::vector<long>& y2);

LossBreakdown total_loss(double intra, double dasp, double sadp, double w_x);

}  // namespace skx
