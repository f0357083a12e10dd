#include "skx/types.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace skx {

void SkeletonLayout::validate() const {
  if (joint_count <= 0) fail("layout '" + name + "': joint_count must be positive");
  if (root < 0 || root >= joint_count) fail("layout '" + name + "': root out of range");
  if (static_cast<long>(edges.size()) != joint_count - 1) {
    fail("layout '" + name + "': a tree over " + std::to_string(joint_count) +
         " joints needs " + std::to_string(joint_count - 1) + " edges, got " +
         std::to_string(edges.size()));
  }
  std::vector<std::vector<long>> adj(static_cast<size_t>(joint_count));
  for (auto [a, b] : edges) {
    if (a < 0 || a >= joint_count || b < 0 || b >= joint_count) {
      fail("layout '" + name + "': edge index out of range");
    }
    adj[static_cast<size_t>(a)].push_back(b);
    adj[static_cast<size_t>(b)].push_back(a);
  }
  // connectivity; with V-1 edges this also rules out cycles
  std::vector<bool> seen(static_cast<size_t>(joint_count), false);
  std::deque<long> queue{root};
  seen[static_cast<size_t>(root)] = true;
  long reached = 1;
  while (!queue.empty()) {
    long v = queue.front();
    queue.pop_front();
    for (long w : adj[static_cast<size_t>(v)]) {
      if (!seen[static_cast<size_t>(w)]) {
        seen[static_cast<size_t>(w)] = true;
        ++reached;
        queue.push_back(w);
      }
    }
  }
  if (reached != joint_count) fail("layout '" + name + "': edges do not connect all joints");
}

std::vector<long> SkeletonLayout::parents() const {
  std::vector<std::vector<long>> adj(static_cast<size_t>(joint_count));
  for (auto [a, b] : edges) {
    adj[static_cast<size_t>(a)].push_back(b);
    adj[static_cast<size_t>(b)].push_back(a);
  }
  std::vector<long> parent(static_cast<size_t>(joint_count), -2);
  std::deque<long> queue{root};
  parent[static_cast<size_t>(root)] = -1;
  while (!queue.empty()) {
    long v = queue.front();
    queue.pop_front();
    for (long w : adj[static_cast<size_t>(v)]) {
      if (parent[static_cast<size_t>(w)] == -2) {
        parent[static_cast<size_t>(w)] = v;
        queue.push_back(w);
      }
    }
  }
  return parent;
}

std::vector<long> SkeletonLayout::root_distances() const {
  auto parent = parents();
  std::vector<long> dist(parent.size(), 0);
  for (size_t j = 0; j < parent.size(); ++j) {
    long d = 0;
    long v = static_cast<long>(j);
    while (parent[static_cast<size_t>(v)] >= 0) {
      v = parent[static_cast<size_t>(v)];
      ++d;
    }
    dist[j] = d;
  }
  return dist;
}

void SkeletonSequence::validate() const {
  if (coords.rank() != 3 || coords.dim(2) != 3) {
    fail("sequence must be (T, V, 3), got " + coords.shape_str());
  }
  if (coords.dim(0) <= 0) fail("sequence must have at least one frame");
  if (!coords.all_finite()) fail("sequence contains non-finite coordinates");
}

const SampleRecord* DatasetManifest::find(const std::string& sample_id) const {
  for (const auto& r : records) {
    if (r.sample_id == sample_id) return &r;
  }
  return nullptr;
}

long LabelDistribution::argmax() const {
  long best = 0;
  for (long i = 1; i < classes(); ++i) {
    if (probs[static_cast<size_t>(i)] > probs[static_cast<size_t>(best)]) best = i;
  }
  return best;
}

std::vector<Violation> validate_manifest(const DatasetManifest& manifest) {
  std::vector<Violation> out;
  if (manifest.class_count <= 0) {
    out.push_back({"", "class_count", "class_count must be positive"});
  }
  std::set<std::string> seen;
  for (const auto& r : manifest.records) {
    if (!seen.insert(r.sample_id).second) {
      out.push_back({r.sample_id, "duplicate id", "sample_id appears more than once"});
    }
    if (r.performer <= 0) {
      out.push_back({r.sample_id, "performer", "performer ID must be positive"});
    }
    if (r.setup <= 0) {
      out.push_back({r.sample_id, "setup", "setup ID must be positive"});
    }
    if (r.action < 0 || r.action >= manifest.class_count) {
      out.push_back({r.sample_id, "class out of range",
                     "action " + std::to_string(r.action) + " not in [0, " +
                         std::to_string(manifest.class_count) + ")"});
    }
    if (r.sample_id.empty()) {
      out.push_back({r.sample_id, "sample_id", "sample_id must be nonempty"});
    }
  }
  return out;
}

}  // namespace skx
