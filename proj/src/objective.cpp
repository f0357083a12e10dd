#include "skx/objective.hpp"

#include <algorithm>
#include <cmath>

namespace skx {

namespace {
constexpr double kProbFloor = 1e-12;
}

Tensor softmax_rows(const Tensor& logits) {
  long n = logits.dim(0), k = logits.dim(1);
  Tensor out(logits.shape());
  for (long r = 0; r < n; ++r) {
    double mx = logits.at(r, 0);
    for (long c = 1; c < k; ++c) mx = std::max(mx, logits.at(r, c));
    double sum = 0;
    for (long c = 0; c < k; ++c) {
      out.at(r, c) = std::exp(logits.at(r, c) - mx);
      sum += out.at(r, c);
    }
    for (long c = 0; c < k; ++c) out.at(r, c) /= sum;
  }
  return out;
}

double cross_entropy(const Tensor& probs, const std::vector<long>& labels) {
  long n = probs.dim(0), k = probs.dim(1);
  if (static_cast<long>(labels.size()) != n) fail("label count does not match batch");
  double sum = 0;
  for (long r = 0; r < n; ++r) {
    long y = labels[static_cast<size_t>(r)];
    if (y < 0 || y >= k) fail("label " + std::to_string(y) + " out of range");
    sum += -std::log(std::max(probs.at(r, y), kProbFloor));
  }
  return sum / static_cast<double>(n);
}

double cross_entropy_soft(const Tensor& probs, const Tensor& targets) {
  if (!probs.same_shape(targets)) fail("soft target shape mismatch");
  long n = probs.dim(0), k = probs.dim(1);
  double sum = 0;
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c < k; ++c) {
      if (targets.at(r, c) == 0.0) continue;
      sum += -targets.at(r, c) * std::log(std::max(probs.at(r, c), kProbFloor));
    }
  }
  return sum / static_cast<double>(n);
}

double softmax_ce_grad(const Tensor& logits, const std::vector<long>& labels, double weight,
                       Tensor& dlogits) {
  long n = logits.dim(0), k = logits.dim(1);
  Tensor probs = softmax_rows(logits);
  double loss = cross_entropy(probs, labels);
  for (long r = 0; r < n; ++r) {
    long y = labels[static_cast<size_t>(r)];
    for (long c = 0; c < k; ++c) {
      double g = probs.at(r, c) - (c == y ? 1.0 : 0.0);
      dlogits.at(r, c) += weight * g / static_cast<double>(n);
    }
  }
  return loss;
}

double softmax_ce_soft_grad(const Tensor& logits, const Tensor& targets, double weight,
                            Tensor& dlogits) {
  long n = logits.dim(0), k = logits.dim(1);
  Tensor probs = softmax_rows(logits);
  double loss = cross_entropy_soft(probs, targets);
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c < k; ++c) {
      double g = probs.at(r, c) - targets.at(r, c);
      dlogits.at(r, c) += weight * g / static_cast<double>(n);
    }
  }
  return loss;
}

double loss_dasp(const Tensor& probs_cross, const Tensor& probs_cross_rev,
                 const std::vector<long>& y, const std::vector<long>& y2) {
  return cross_entropy(probs_cross, y) + cross_entropy(probs_cross_rev, y2);
}

double loss_sadp(const Tensor& probs_cross, const Tensor& probs_cross_rev,
                 const std::vector<long>& y) {
  return cross_entropy(probs_cross, y) + cross_entropy(probs_cross_rev, y);
}

double loss_intra(const Tensor& probs, const Tensor& probs_sadp, const Tensor& probs_dasp,
                  const std::vector<long>& y, const std::vector<long>& y2) {
  return cross_entropy(probs, y) + cross_entropy(probs_sadp, y) + cross_entropy(probs_dasp, y2);
}

LossBreakdown total_loss(double intra, double dasp, double sadp, double w_x) {
  LossBreakdown b;
  b.intra = intra;
  b.dasp = dasp;
  b.sadp = sadp;
  b.w_x = w_x;
  b.total = intra + w_x * (dasp + sadp);
  return b;
}

}  // namespace skx
