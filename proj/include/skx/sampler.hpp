// Dataset selection and pairing: limited-scale subset selection, protocol
// splits, and the DASP/SADP partner index used by cross-sample training.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "skx/types.hpp"

namespace skx {

struct LimitedScaleSpec {
  long samples_per_class = 10;  // N
  long performer_budget = 3;    // P
  bool allow_short = false;
};

// How each sample's partner lists were resolved. Exact means the strict
// relation held; the ladder below records each relaxation.
struct PairFlags {
  bool dasp_exact = false;
  bool dasp_fallback = false;  // any different-action sample
  bool sadp_exact = false;
  bool sadp_relaxed = false;  // same action, any distinct sample
  bool sadp_self = false;     // no partner at all; the sample itself

  std::string str() const;
};

struct PairIndex {
  // sample_id -> ordered candidate ids. DASP: same performer, different
  // action. SADP: same action, different performer. Fallback entries relax
  // those relations as recorded in flags.
  std::map<std::string, std::vector<std::string>> dasp;
  std::map<std::string, std::vector<std::string>> sadp;
  std::map<std::string, PairFlags> flags;
};

// Keeps the first N rows per class after dropping performers above P and
// stably re-sorting by (setup, performer). The input must already be in its
// canonical alphabetical-by-sample_id order; ties fall back to it.
DatasetManifest limited_scale_select(const DatasetManifest& manifest, const LimitedScaleSpec& spec);

// Partition by performer membership. Errors when either side ends up empty.
std::pair<DatasetManifest, DatasetManifest> cross_subject_split(
    const DatasetManifest& manifest, const std::set<long>& train_performers);

struct OneShotSplit {
  DatasetManifest base_train;
  DatasetManifest exemplars;
  DatasetManifest novel_queries;
};

OneShotSplit one_shot_split(const DatasetManifest& manifest, const std::set<long>& novel_classes,
                            const std::map<long, std::string>& exemplar_ids);

// Builds per-sample candidate lists, shuffled once at construction so the
// stored order is deterministic for a given seed.
PairIndex build_pair_index(const DatasetManifest& manifest, uint64_t rng_seed);

// Draws one partner of each kind per id, uniformly over its candidate list.
std::pair<std::vector<std::string>, std::vector<std::string>> draw_pair_batch(
    const std::vector<std::string>& batch_ids, const PairIndex& index, Rng& rng);

// Static pair file: header `sample_id,dasp_id,sadp_id,flags`, one drawn pair
// per manifest row.
std::string format_pairs(const DatasetManifest& manifest, const PairIndex& index, Rng& rng);

}  // namespace skx
