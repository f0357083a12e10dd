#include "skx/oneshot.hpp"

#include <algorithm>
#include <cmath>

namespace skx {

Distance distance_from_string(const std::string& s) {
  if (s == "sq_euclidean") return Distance::sq_euclidean;
  if (s == "cosine") return Distance::cosine;
  fail("unknown distance '" + s + "'");
}

std::string to_string(Distance d) {
  return d == Distance::sq_euclidean ? "sq_euclidean" : "cosine";
}

Tensor extract_features(SkxModel& model, const LoadedData& data) {
  long n = data.size();
  if (n == 0) fail("cannot extract features from an empty set");
  Tensor out;
  const long chunk = 64;
  for (long start = 0; start < n; start += chunk) {
    long end = std::min(n, start + chunk);
    std::vector<size_t> rows;
    for (long i = start; i < end; ++i) rows.push_back(static_cast<size_t>(i));
    Tensor f = model.features(data.batch(rows));
    if (start == 0) out = Tensor({n, f.dim(1)});
    std::copy(f.data(), f.data() + f.size(), out.data() + start * f.dim(1));
  }
  return out;
}

namespace {

double sq_euclid(const Tensor& features, long q, const Tensor& prototypes, long p) {
  double dist = 0;
  for (long k = 0; k < features.dim(1); ++k) {
    double diff = features.at(q, k) - prototypes.at(p, k);
    dist += diff * diff;
  }
  return dist;
}

}  // namespace

long protonet_match(const Tensor& features, long query_row, const Tensor& prototypes, Distance d,
                    bool* used_fallback) {
  long c = features.dim(1);
  if (prototypes.dim(1) != c) fail("feature width mismatch in prototype matching");
  if (used_fallback) *used_fallback = false;

  if (d == Distance::cosine) {
    // Cosine is undefined against a zero vector. If this query's comparison
    // table would contain one, the whole query drops to squared Euclidean.
    double nq = 0;
    for (long k = 0; k < c; ++k) nq += features.at(query_row, k) * features.at(query_row, k);
    bool degenerate = nq == 0;
    for (long p = 0; p < prototypes.dim(0) && !degenerate; ++p) {
      double np = 0;
      for (long k = 0; k < c; ++k) np += prototypes.at(p, k) * prototypes.at(p, k);
      degenerate = np == 0;
    }
    if (degenerate) {
      if (used_fallback) *used_fallback = true;
      d = Distance::sq_euclidean;
    }
  }

  long best = 0;
  double best_dist = 0;
  for (long p = 0; p < prototypes.dim(0); ++p) {
    double dist;
    if (d == Distance::sq_euclidean) {
      dist = sq_euclid(features, query_row, prototypes, p);
    } else {
      double dot = 0, nq = 0, np = 0;
      for (long k = 0; k < c; ++k) {
        double q = features.at(query_row, k), r = prototypes.at(p, k);
        dot += q * r;
        nq += q * q;
        np += r * r;
      }
      dist = 1.0 - dot / (std::sqrt(nq) * std::sqrt(np));
    }
    if (p == 0 || dist < best_dist) {
      best = p;
      best_dist = dist;
    }
  }
  return best;
}

OneShotResult oneshot_eval(SkxModel& model, const LoadedData& all,
                           const std::set<long>& novel_classes,
                           const std::map<long, std::string>& exemplar_ids, Distance distance) {
  OneShotSplit split = one_shot_split(all.manifest, novel_classes, exemplar_ids);

  std::vector<long> novel_order(novel_classes.begin(), novel_classes.end());
  std::vector<size_t> ex_rows;
  for (long c : novel_order) {
    auto it = all.by_id.find(exemplar_ids.at(c));
    if (it == all.by_id.end()) fail("exemplar '" + exemplar_ids.at(c) + "' not in loaded data");
    ex_rows.push_back(it->second);
  }

  OneShotResult result;
  result.exemplar_features = model.features(all.batch(ex_rows));

  LoadedData queries = subset_data(all, split.novel_queries);
  Tensor feats = extract_features(model, queries);
  long correct = 0;
  for (long q = 0; q < feats.dim(0); ++q) {
    long hit = protonet_match(feats, q, result.exemplar_features, distance);
    long predicted = novel_order[static_cast<size_t>(hit)];
    long truth = queries.manifest.records[static_cast<size_t>(q)].action;
    ++result.confusion[truth][predicted];
    if (predicted == truth) ++correct;
  }
  result.query_count = feats.dim(0);
  result.novel_accuracy = static_cast<double>(correct) / static_cast<double>(feats.dim(0));
  return result;
}

OneShotResult run_oneshot(const LoadedData& all, const OneShotConfig& config) {
  if (config.train.mode != TrainMode::skeletonx) {
    fail("one-shot base training expects the cross-sample mode");
  }
  OneShotSplit split = one_shot_split(all.manifest, config.novel_classes, config.exemplar_ids);

  std::vector<long> base_ids;
  for (long c = 0; c < all.manifest.class_count; ++c) {
    if (!config.novel_classes.count(c)) base_ids.push_back(c);
  }
  if (config.base_class_limit > 0 &&
      config.base_class_limit < static_cast<long>(base_ids.size())) {
    base_ids.resize(static_cast<size_t>(config.base_class_limit));
  }
  if (base_ids.empty()) fail("no base classes left to train on");

  // The base classifier only ever sees base classes, so their ids are
  // compacted to [0, m) for training. Matching below never uses these ids.
  std::map<long, long> remap;
  for (size_t i = 0; i < base_ids.size(); ++i) remap[base_ids[i]] = static_cast<long>(i);
  DatasetManifest base_manifest;
  base_manifest.class_count = static_cast<long>(base_ids.size());
  for (const auto& rec : split.base_train.records) {
    auto it = remap.find(rec.action);
    if (it == remap.end()) continue;
    SampleRecord r = rec;
    r.action = it->second;
    base_manifest.records.push_back(r);
  }
  if (base_manifest.records.empty()) fail("base training set is empty after class filtering");

  LoadedData base = subset_data(all, base_manifest);
  FitResult fitres = fit(base, nullptr, config.train);

  SkxModel model = skx_from_checkpoint(fitres.last);
  OneShotResult result =
      oneshot_eval(model, all, config.novel_classes, config.exemplar_ids, config.distance);
  result.base_classes_used = static_cast<long>(base_ids.size());
  result.base_report = fitres.report;
  result.base_checkpoint = fitres.last;
  return result;
}

}  // namespace skx
