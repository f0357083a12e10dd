// One-shot recognition: train on base classes, then match novel-class
// queries to single labelled exemplars in feature space.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "skx/train.hpp"

namespace skx {

enum class Distance { sq_euclidean, cosine };

Distance distance_from_string(const std::string& s);
std::string to_string(Distance d);

struct OneShotConfig {
  // The base-training recipe. Defaults follow the short schedule.
  TrainConfig train = [] {
    TrainConfig t;
    t.epochs = 25;
    t.decay_epochs = {10, 15};
    return t;
  }();
  std::set<long> novel_classes;
  std::map<long, std::string> exemplar_ids;  // novel class -> exemplar sample_id
  Distance distance = Distance::sq_euclidean;
  // 0 keeps every base class; m > 0 keeps only the m lowest base class ids,
  // which is the knob for base-set scaling studies.
  long base_class_limit = 0;
};

struct OneShotResult {
  double novel_accuracy = 0;
  long base_classes_used = 0;
  long query_count = 0;
  // confusion[true class][predicted class] = count, novel classes only
  std::map<long, std::map<long, long>> confusion;
  RunReport base_report;
  Checkpoint base_checkpoint;
  Tensor exemplar_features;  // (K_novel, C_p), rows in ascending class order
};

// Post-projection features, one row per sample. (n, C_p)
Tensor extract_features(SkxModel& model, const LoadedData& data);

// Index of the nearest prototype row; ties resolve to the lowest index.
// When cosine meets a zero-norm operand the query falls back to squared
// Euclidean and `used_fallback` (if given) is set.
long protonet_match(const Tensor& features, long query_row, const Tensor& prototypes, Distance d,
                    bool* used_fallback = nullptr);

OneShotResult run_oneshot(const LoadedData& all, const OneShotConfig& config);

// Rebuilds the matching stage from a saved base checkpoint, skipping the
// training phase. Fills accuracy, confusion, query_count and
// exemplar_features of the result.
OneShotResult oneshot_eval(SkxModel& model, const LoadedData& all,
                           const std::set<long>& novel_classes,
                           const std::map<long, std::string>& exemplar_ids, Distance distance);

}  // namespace skx
