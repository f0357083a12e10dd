// External data ingestion: NTU-style .skeleton text parsing, empty-frame
// removal with temporal resize, and the bone-vector modality.
#pragma once

#include <string>

#include "skx/types.hpp"

namespace skx {

struct PreprocessConfig {
  long target_frames = 64;
  double empty_frame_epsilon = 1e-8;
};

// Parses the NTU .skeleton text layout: line 1 is the frame count, then per
// frame a body count, and per body one info line, a joint-count line and that
// many joint lines whose first three fields are x y z. Only the first body of
// each frame is kept; frames with zero bodies become all-zero frames.
SkeletonSequence parse_ntu_skeleton(const std::string& text);

// Drops empty frames (max |coordinate| below epsilon) and linearly resizes
// the survivors to exactly target_frames frames.
SkeletonSequence preprocess(const SkeletonSequence& seq, const PreprocessConfig& config);

// Bone modality: per frame the vector at each child joint is child minus
// parent; the root joint maps to zeros.
SkeletonSequence to_bone(const SkeletonSequence& seq, const SkeletonLayout& layout);

}  // namespace skx
