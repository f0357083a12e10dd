#include "skx/sampler.hpp"

#include <algorithm>
#include <sstream>

namespace skx {

std::string PairFlags::str() const {
  std::string out;
  auto add = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out.push_back('|');
    out += name;
  };
  add(dasp_exact, "dasp_exact");
  add(dasp_fallback, "dasp_fallback");
  add(sadp_exact, "sadp_exact");
  add(sadp_relaxed, "sadp_relaxed");
  add(sadp_self, "sadp_self");
  return out;
}

DatasetManifest limited_scale_select(const DatasetManifest& manifest, const LimitedScaleSpec& spec) {
  if (spec.samples_per_class < 1 || spec.performer_budget < 1) {
    fail("samples_per_class and performer_budget must be >= 1");
  }
  std::vector<SampleRecord> rows;
  for (const auto& r : manifest.records) {
    if (r.performer <= spec.performer_budget) rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SampleRecord& a, const SampleRecord& b) {
    if (a.setup != b.setup) return a.setup < b.setup;
    return a.performer < b.performer;
  });

  DatasetManifest out;
  out.class_count = manifest.class_count;
  std::vector<long> shortfall;
  for (long c = 0; c < manifest.class_count; ++c) {
    long taken = 0;
    for (const auto& r : rows) {
      if (r.action != c) continue;
      out.records.push_back(r);
      if (++taken == spec.samples_per_class) break;
    }
    if (taken < spec.samples_per_class) shortfall.push_back(c);
  }
  if (!shortfall.empty() && !spec.allow_short) {
    std::ostringstream os;
    os << "deficient classes after selection (need " << spec.samples_per_class << " each):";
    for (long c : shortfall) {
      long have = 0;
      for (const auto& r : out.records) {
        if (r.action == c) ++have;
      }
      os << " class " << c << " has " << have << ";";
    }
    fail(os.str());
  }
  return out;
}

std::pair<DatasetManifest, DatasetManifest> cross_subject_split(
    const DatasetManifest& manifest, const std::set<long>& train_performers) {
  if (train_performers.empty()) fail("train performer set is empty");
  DatasetManifest train, test;
  train.class_count = test.class_count = manifest.class_count;
  for (const auto& r : manifest.records) {
    (train_performers.count(r.performer) ? train : test).records.push_back(r);
  }
  if (train.records.empty()) fail("cross-subject split produced an empty train side");
  if (test.records.empty()) fail("cross-subject split produced an empty test side");
  return {std::move(train), std::move(test)};
}

OneShotSplit one_shot_split(const DatasetManifest& manifest, const std::set<long>& novel_classes,
                            const std::map<long, std::string>& exemplar_ids) {
  for (long c : novel_classes) {
    if (!exemplar_ids.count(c)) fail("novel class " + std::to_string(c) + " has no exemplar");
  }
  for (const auto& [c, id] : exemplar_ids) {
    if (!novel_classes.count(c)) {
      fail("exemplar given for class " + std::to_string(c) + " which is not novel");
    }
    const SampleRecord* rec = manifest.find(id);
    if (!rec) fail("exemplar '" + id + "' not found in manifest");
    if (rec->action != c) {
      fail("exemplar '" + id + "' has class " + std::to_string(rec->action) + ", expected " +
           std::to_string(c));
    }
  }
  std::set<long> seen;
  for (const auto& r : manifest.records) seen.insert(r.action);
  for (long c : novel_classes) {
    if (!seen.count(c)) fail("novel class " + std::to_string(c) + " absent from manifest");
  }

  OneShotSplit out;
  out.base_train.class_count = manifest.class_count;
  out.exemplars.class_count = manifest.class_count;
  out.novel_queries.class_count = manifest.class_count;
  for (const auto& r : manifest.records) {
    if (!novel_classes.count(r.action)) {
      out.base_train.records.push_back(r);
    } else if (exemplar_ids.at(r.action) == r.sample_id) {
      out.exemplars.records.push_back(r);
    } else {
      out.novel_queries.records.push_back(r);
    }
  }
  return out;
}

PairIndex build_pair_index(const DatasetManifest& manifest, uint64_t rng_seed) {
  PairIndex index;
  const auto& recs = manifest.records;
  for (const auto& r : recs) {
    std::vector<std::string> dasp_exact, dasp_any, sadp_exact, sadp_any;
    for (const auto& o : recs) {
      if (o.sample_id == r.sample_id) continue;
      if (o.action != r.action) {
        dasp_any.push_back(o.sample_id);
        if (o.performer == r.performer) dasp_exact.push_back(o.sample_id);
      } else {
        sadp_any.push_back(o.sample_id);
        if (o.performer != r.performer) sadp_exact.push_back(o.sample_id);
      }
    }

    PairFlags f;
    std::vector<std::string> dasp, sadp;
    if (!dasp_exact.empty()) {
      dasp = std::move(dasp_exact);
      f.dasp_exact = true;
    } else {
      // No different action from this performer at all: accept any other
      // action so cross-aggregation still sees a foreign performer feature.
      dasp = std::move(dasp_any);
      if (!dasp.empty()) {
        f.dasp_fallback = true;
      } else {
        dasp.push_back(r.sample_id);
        f.dasp_fallback = true;
      }
    }
    if (!sadp_exact.empty()) {
      sadp = std::move(sadp_exact);
      f.sadp_exact = true;
    } else if (!sadp_any.empty()) {
      sadp = std::move(sadp_any);
      f.sadp_relaxed = true;
    } else {
      sadp.push_back(r.sample_id);
      f.sadp_self = true;
    }

    Rng stream(hash_combine(rng_seed, fnv1a(r.sample_id)));
    stream.shuffle(dasp);
    stream.shuffle(sadp);
    index.dasp[r.sample_id] = std::move(dasp);
    index.sadp[r.sample_id] = std::move(sadp);
    index.flags[r.sample_id] = f;
  }
  return index;
}

std::pair<std::vector<std::string>, std::vector<std::string>> draw_pair_batch(
    const std::vector<std::string>& batch_ids, const PairIndex& index, Rng& rng) {
  std::vector<std::string> dasp_ids, sadp_ids;
  dasp_ids.reserve(batch_ids.size());
  sadp_ids.reserve(batch_ids.size());
  for (const auto& id : batch_ids) {
    auto d = index.dasp.find(id);
    auto s = index.sadp.find(id);
    if (d == index.dasp.end() || s == index.sadp.end()) {
      fail("sample '" + id + "' missing from pair index");
    }
    dasp_ids.push_back(d->second[static_cast<size_t>(rng.uniform_int(
        static_cast<long>(d->second.size())))]);
    sadp_ids.push_back(s->second[static_cast<size_t>(rng.uniform_int(
        static_cast<long>(s->second.size())))]);
  }
  return {std::move(dasp_ids), std::move(sadp_ids)};
}

std::string format_pairs(const DatasetManifest& manifest, const PairIndex& index, Rng& rng) {
  std::vector<std::string> ids;
  ids.reserve(manifest.records.size());
  for (const auto& r : manifest.records) ids.push_back(r.sample_id);
  auto [dasp_ids, sadp_ids] = draw_pair_batch(ids, index, rng);
  std::ostringstream os;
  os << "sample_id,dasp_id,sadp_id,flags\n";
  for (size_t i = 0; i < ids.size(); ++i) {
    os << ids[i] << ',' << dasp_ids[i] << ',' << sadp_ids[i] << ','
       << index.flags.at(ids[i]).str() << '\n';
  }
  return os.str();
}

}  // namespace skx
