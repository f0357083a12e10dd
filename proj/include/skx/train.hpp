// The optimization loop: schedules, batch assembly, pair drawing, baseline
// augmentations, evaluation and checkpoint snapshots.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "skx/checkpoint.hpp"
#include "skx/configfile.hpp"
#include "skx/model.hpp"
#include "skx/sampler.hpp"
#include "skx/types.hpp"

namespace skx {

enum class TrainMode { skeletonx, baseline_gap, baseline_mixup, baseline_rotation };

TrainMode train_mode_from_string(const std::string& s);
std::string to_string(TrainMode m);

struct TrainConfig {
  TrainMode mode = TrainMode::skeletonx;
  long epochs = 65;
  double base_lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0004;
  long warmup_epochs = 5;
  std::vector<long> decay_epochs = {35, 55};
  double decay_factor = 0.1;
  long batch_size = 0;  // 0 picks the mode default: 32 cross-sample, 64 baseline
  double w_x = 0.1;
  uint64_t seed = 1;
  EncoderConfig encoder = EncoderConfig::standard();
  HeadConfig head;
  double rotation_theta = 0.3;
  double mixup_alpha = 0.2;

  void validate() const;
  long effective_batch() const;
  std::string describe() const;  // key = value lines, the report's config echo
};

// Reads every TrainConfig key from a parsed config file; missing keys keep
// the values of `base`.
TrainConfig train_config_from(ConfigMap& cm, TrainConfig base = TrainConfig{});

// 1-based epoch. Linear warmup to base_lr, then a step decay per listed
// epoch that has been reached.
double lr_at(long epoch, const TrainConfig& config);

// A manifest with its sequences resident in memory, uniform shape.
struct LoadedData {
  DatasetManifest manifest;
  SkeletonLayout layout;
  std::vector<Tensor> coords;  // per record, (T, V, 3)
  std::map<std::string, size_t> by_id;

  long size() const { return static_cast<long>(coords.size()); }
  Tensor batch(const std::vector<size_t>& rows) const;  // (n, T, V, 3)
  std::vector<long> labels(const std::vector<size_t>& rows) const;
};

LoadedData load_data(const std::string& manifest_path, const SkeletonLayout& layout);
LoadedData subset_data(const LoadedData& data, const DatasetManifest& subset);

struct EpochLoss {
  double intra = 0, dasp = 0, sadp = 0, total = 0;
};

struct RunReport {
  std::string mode;
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  std::vector<EpochLoss> epoch_losses;
  double final_accuracy = -1;  // -1 when no eval split was given
  double best_accuracy = -1;
  long best_epoch = -1;
  long steps = 0;
  double wall_seconds = 0;  // excluded from determinism comparisons
};

std::string report_text(const RunReport& report, const TrainConfig& config);

struct FitResult {
  Checkpoint last;  // final parameters, float32-exact
  Checkpoint best;  // highest held-out accuracy epoch; equals last without eval data
  RunReport report;
  std::string loss_csv;  // step,intra,dasp,sadp,total,lr
};

// Trains from scratch. With eval data, held-out accuracy is measured every
// epoch on a float32-rounded copy of the model, so reported numbers are
// exactly reproducible from the saved checkpoints.
FitResult fit(const LoadedData& train, const LoadedData* eval_data, const TrainConfig& config);

double evaluate_top1(SkxModel& model, const LoadedData& data, Mask mask = Mask::none);
double evaluate_top1(BaselineModel& model, const LoadedData& data);

// Random per-sequence 3-D rotation with per-axis angles uniform in
// [-theta, theta].
Tensor augment_rotation(const Tensor& batch, double theta, Rng& rng);
// Convex combination of each sample with a shuffled partner; returns the
// mixed batch and the matching soft labels (n, K).
std::pair<Tensor, Tensor> augment_mixup(const Tensor& batch, const std::vector<long>& labels,
                                        long class_count, double alpha, Rng& rng);

// Checkpoint round trips. Snapshots carry enough metadata to rebuild the
// model without the original config file.
Checkpoint snapshot_skx(SkxModel& model);
Checkpoint snapshot_baseline(BaselineModel& model);
bool checkpoint_is_skeletonx(const Checkpoint& ckpt);
SkxModel skx_from_checkpoint(const Checkpoint& ckpt);
BaselineModel baseline_from_checkpoint(const Checkpoint& ckpt);

}  // namespace skx
