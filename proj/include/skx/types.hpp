// Core domain types shared by every other component. All of them are plain
// immutable-after-construction value types; validation is explicit and
// reported as data rather than thrown.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skx/tensor.hpp"

namespace skx {

// Tree-structured joint layout. Edges are (parent, child) pairs over joint
// indices in [0, joint_count).
struct SkeletonLayout {
  std::string name;
  long joint_count = 0;
  long root = 0;
  std::vector<std::pair<long, long>> edges;

  // Throws if the edges do not form a connected tree over joint_count
  // vertices rooted at `root`.
  void validate() const;

  // parent[j] for every joint; parent[root] = -1.
  std::vector<long> parents() const;
  // Hop distance from the root for every joint.
  std::vector<long> root_distances() const;
};

// One single-body skeleton clip: T frames x V joints x 3 coordinates (m).
struct SkeletonSequence {
  Tensor coords;  // (T, V, 3)
  std::string layout_name;

  long frames() const { return coords.rank() == 3 ? coords.dim(0) : 0; }
  long joints() const { return coords.rank() == 3 ? coords.dim(1) : 0; }
  void validate() const;  // shape and finiteness
};

struct SampleRecord {
  std::string sample_id;
  long performer = 0;  // positive
  long setup = 0;      // positive
  long action = 0;     // in [0, class_count)
  std::string path;
};

struct DatasetManifest {
  std::vector<SampleRecord> records;  // order is significant
  long class_count = 0;

  const SampleRecord* find(const std::string& sample_id) const;
};

// Probability vector over the class set.
struct LabelDistribution {
  std::vector<double> probs;

  long classes() const { return static_cast<long>(probs.size()); }
  long argmax() const;  // ties resolved to the lowest index
};

struct Violation {
  std::string record;  // sample_id or "" for manifest-level rules
  std::string rule;
  std::string detail;
};

// Checks every manifest invariant; returns one entry per broken rule.
std::vector<Violation> validate_manifest(const DatasetManifest& manifest);

}  // namespace skx
