// Neural mutual-information estimation: a small statistics network trained
// on the Donsker-Varadhan lower bound, used to compare how much label
// information survives in pooled versus aggregated features.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "skx/model.hpp"
#include "skx/train.hpp"

namespace skx {

struct MineConfig {
  long steps = 4500;
  long batch = 64;
  long width = 256;   // statistics-network hidden width
  long depth = 2;     // hidden layers
  double lr = 5e-4;
  double ema_decay = 0.99;  // bias correction for the log-denominator gradient
  uint64_t seed = 1;

  void validate() const;
};

struct MiCurve {
  std::vector<double> bounds;  // per-step lower-bound estimates, nats

  // Mean over the trailing 10% of steps.
  double converged() const;
};

// I(X;Y) lower bound for discrete labels in [0, class_count); the label side
// enters the network one-hot, the marginal comes from in-batch shuffling.
MiCurve estimate_mi(const Tensor& features, const std::vector<long>& labels, long class_count,
                    const MineConfig& config);

// Continuous-pair mode: rows of x and z are jointly drawn samples; the
// marginal shuffles z within the batch.
MiCurve estimate_mi_pairs(const Tensor& x, const Tensor& z, const MineConfig& config);

// Runs both arms with the same config and seed on one trained cross-sample
// model: first the pooled encoder feature, then the aggregated feature.
std::pair<MiCurve, MiCurve> compare_mi(SkxModel& model, const LoadedData& data,
                                       const MineConfig& config);
std::pair<MiCurve, MiCurve> compare_mi(const Checkpoint& ckpt, const LoadedData& data,
                                       const MineConfig& config);

}  // namespace skx
