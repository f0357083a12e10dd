// Synthetic skeleton generator with ground-truth action / performer / setup
// attributes. Classes drive per-bone sinusoidal joint rotations, performers
// contribute bone-length and posture style, setups contribute a fixed global
// rotation. Every sequence is a pure function of (seed, class, performer,
// setup, repetition), so regeneration is bit-stable.
#pragma once

#include <string>

#include "skx/types.hpp"

namespace skx {

struct SynthConfig {
  long class_count = 8;
  long performer_count = 6;
  long setup_count = 2;
  long reps = 2;  // samples per (class, performer, setup)
  long frames = 64;
  double noise_std = 0.01;
  uint64_t seed = 1;
};

// The default 11-joint humanoid tree: pelvis root, spine, head, two 2-bone
// arms hanging off the spine top, two 2-bone legs off the pelvis.
SkeletonLayout humanoid_layout();

// One sequence. performer and setup are 1-based, action and rep 0-based.
SkeletonSequence synth_sequence(const SynthConfig& config, long action, long performer, long setup,
                                long rep);

std::string synth_sample_id(long action, long performer, long setup, long rep);

// Writes every sequence as SKX1 under out_dir plus manifest.csv and
// layout.txt; returns the manifest (records sorted by sample_id).
DatasetManifest generate(const SynthConfig& config, const std::string& out_dir);

// Builds the manifest generate() would produce without touching disk; paths
// are still filled in. Useful for sampler tests.
DatasetManifest synth_manifest(const SynthConfig& config);

// Nearest-centroid classification of every sample against per-class mean
// flattened sequences. A separability probe for generated datasets; loads
// sequences relative to manifest_path.
double centroid_accuracy(const DatasetManifest& manifest, const std::string& manifest_path);

}  // namespace skx
