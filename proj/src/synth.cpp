#include "skx/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "skx/io.hpp"

namespace skx {

namespace {

constexpr long kJoints = 11;
constexpr long kBones = 10;

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec3 normalized(Vec3 v) {
  double n = std::sqrt(dot(v, v));
  return n > 0 ? (1.0 / n) * v : Vec3{1, 0, 0};
}

// Rodrigues rotation of v about unit axis k by angle.
Vec3 rotate(Vec3 v, Vec3 k, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return c * v + s * cross(k, v) + (dot(k, v) * (1.0 - c)) * k;
}

Vec3 yaw(Vec3 v, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x + s * v.z, v.y, -s * v.x + c * v.z};
}

Vec3 random_axis(Rng& rng) {
  return normalized({rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1)});
}

// Bones in parent-before-child order; index b corresponds to child joint
// bone_child[b]. Rest directions sketch an upright figure.
struct Bone {
  long parent, child;
  Vec3 rest_dir;
  double length;
};

const std::array<Bone, kBones>& bones() {
  static const std::array<Bone, kBones> b = {{
      {0, 1, {0, 1, 0}, 0.50},           // pelvis -> spine top
      {1, 2, {0, 1, 0}, 0.25},           // spine top -> head
      {1, 3, {-0.9, -0.45, 0}, 0.30},    // left upper arm
      {3, 4, {-0.55, -0.85, 0}, 0.28},   // left forearm
      {1, 5, {0.9, -0.45, 0}, 0.30},     // right upper arm
      {5, 6, {0.55, -0.85, 0}, 0.28},    // right forearm
      {0, 7, {-0.25, -1, 0}, 0.45},      // left thigh
      {7, 8, {0, -1, 0}, 0.42},          // left shin
      {0, 9, {0.25, -1, 0}, 0.45},       // right thigh
      {9, 10, {0, -1, 0}, 0.42},         // right shin
  }};
  return b;
}

struct ClassMotion {
  double base_freq;
  std::array<Vec3, kBones> axis;
  std::array<double, kBones> amp;
  std::array<double, kBones> phase;
  std::array<double, kBones> freq_mult;
  // Whole-body translation path. A root offset shifts every joint equally, so
  // it survives averaging across joints, while its zero-mean oscillation
  // nearly cancels under averaging across frames. That keeps the action
  // signature in the per-frame trajectory rather than the mean posture.
  std::array<double, 3> root_amp;
  std::array<double, 3> root_phase;
  std::array<double, 3> root_mult;
};

ClassMotion class_motion(uint64_t seed, long action) {
  Rng rng(hash_combine(seed, 0x10000 + static_cast<uint64_t>(action)));
  ClassMotion m;
  m.base_freq = 1.0 + 0.5 * static_cast<double>(action);
  for (long b = 0; b < kBones; ++b) {
    auto i = static_cast<size_t>(b);
    m.axis[i] = random_axis(rng);
    // Amplitudes stay in a narrow common band so the time-averaged posture is
    // nearly class-independent; classes separate through frequency, phase and
    // rotation axes instead.
    m.amp[i] = rng.uniform(0.35, 0.55);
    m.phase[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    m.freq_mult[i] = static_cast<double>(1 + rng.uniform_int(2));
  }
  for (size_t k = 0; k < 3; ++k) {
    m.root_amp[k] = rng.uniform(0.18, 0.30);
    m.root_phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    m.root_mult[k] = static_cast<double>(1 + rng.uniform_int(2));
  }
  return m;
}

struct PerformerStyle {
  std::array<double, kBones> length_scale;
  std::array<Vec3, kBones> posture_axis;
  std::array<double, kBones> posture_angle;
  double speed;
  // Personal rendition of the travel path: each performer rotates and
  // rescales the whole-body trajectory, so the same action looks different
  // from person to person without moving it out of the temporal signature.
  Vec3 root_axis;
  double root_angle;
  std::array<double, 3> root_scale;
};

PerformerStyle performer_style(uint64_t seed, long performer) {
  Rng rng(hash_combine(seed, 0x20000 + static_cast<uint64_t>(performer)));
  PerformerStyle st;
  for (long b = 0; b < kBones; ++b) {
    auto i = static_cast<size_t>(b);
    st.length_scale[i] = rng.uniform(0.75, 1.3);
    st.posture_axis[i] = random_axis(rng);
    st.posture_angle[i] = rng.uniform(-0.5, 0.5);
  }
  st.speed = rng.uniform(0.75, 1.3);
  st.root_axis = random_axis(rng);
  st.root_angle = rng.uniform(-0.6, 0.6);
  for (size_t k = 0; k < 3; ++k) st.root_scale[k] = rng.uniform(0.7, 1.3);
  return st;
}

double setup_yaw(uint64_t seed, long setup) {
  Rng rng(hash_combine(seed, 0x30000 + static_cast<uint64_t>(setup)));
  return rng.uniform(-0.45, 0.45);
}

}  // namespace

SkeletonLayout humanoid_layout() {
  SkeletonLayout layout;
  layout.name = "humanoid11";
  layout.joint_count = kJoints;
  layout.root = 0;
  for (const auto& b : bones()) layout.edges.emplace_back(b.parent, b.child);
  layout.validate();
  return layout;
}

SkeletonSequence synth_sequence(const SynthConfig& config, long action, long performer, long setup,
                                long rep) {
  if (action < 0 || action >= config.class_count) fail("action out of range");
  if (performer < 1 || performer > config.performer_count) fail("performer out of range");
  if (setup < 1 || setup > config.setup_count) fail("setup out of range");

  ClassMotion motion = class_motion(config.seed, action);
  PerformerStyle style = performer_style(config.seed, performer);
  double view = setup_yaw(config.seed, setup);

  uint64_t sample_salt = hash_combine(
      hash_combine(hash_combine(static_cast<uint64_t>(action), static_cast<uint64_t>(performer)),
                   static_cast<uint64_t>(setup)),
      static_cast<uint64_t>(rep));
  Rng rng(hash_combine(config.seed, hash_combine(0x40000, sample_salt)));
  double phase_jitter = rng.uniform(-0.4, 0.4);

  SkeletonSequence seq;
  seq.layout_name = "humanoid11";
  seq.coords = Tensor({config.frames, kJoints, 3});

  std::array<Vec3, kJoints> pos;
  for (long t = 0; t < config.frames; ++t) {
    double tn = static_cast<double>(t) / static_cast<double>(config.frames);
    Vec3 root{0, 0, 0};
    for (size_t k = 0; k < 3; ++k) {
      double r = style.root_scale[k] * motion.root_amp[k] *
                 std::sin(2.0 * std::numbers::pi * motion.base_freq * motion.root_mult[k] *
                              style.speed * tn +
                          motion.root_phase[k] + phase_jitter);
      (k == 0 ? root.x : k == 1 ? root.y : root.z) = r;
    }
    pos[0] = rotate(root, style.root_axis, style.root_angle);
    for (long b = 0; b < kBones; ++b) {
      auto i = static_cast<size_t>(b);
      const Bone& bone = bones()[i];
      double angle = motion.amp[i] *
                     std::sin(2.0 * std::numbers::pi * motion.base_freq * motion.freq_mult[i] *
                                  style.speed * tn +
                              motion.phase[i] + phase_jitter);
      Vec3 dir = rotate(normalized(bone.rest_dir), motion.axis[i], angle);
      dir = rotate(dir, style.posture_axis[i], style.posture_angle[i]);
      double len = bone.length * style.length_scale[i];
      pos[static_cast<size_t>(bone.child)] = pos[static_cast<size_t>(bone.parent)] + len * dir;
    }
    for (long j = 0; j < kJoints; ++j) {
      Vec3 p = yaw(pos[static_cast<size_t>(j)], view);
      seq.coords.at(t, j, 0) = p.x + rng.normal(0, config.noise_std);
      seq.coords.at(t, j, 1) = p.y + rng.normal(0, config.noise_std);
      seq.coords.at(t, j, 2) = p.z + rng.normal(0, config.noise_std);
    }
  }
  return seq;
}

std::string synth_sample_id(long action, long performer, long setup, long rep) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "S%03ldP%03ldA%03ldR%03ld", setup, performer, action, rep);
  return buf;
}

DatasetManifest synth_manifest(const SynthConfig& config) {
  DatasetManifest m;
  m.class_count = config.class_count;
  // Loop order matches the alphabetical order of the generated ids, so the
  // manifest comes out pre-sorted by sample_id.
  for (long s = 1; s <= config.setup_count; ++s) {
    for (long p = 1; p <= config.performer_count; ++p) {
      for (long a = 0; a < config.class_count; ++a) {
        for (long r = 0; r < config.reps; ++r) {
          SampleRecord rec;
          rec.sample_id = synth_sample_id(a, p, s, r);
          rec.performer = p;
          rec.setup = s;
          rec.action = a;
          rec.path = rec.sample_id + ".skx";
          m.records.push_back(std::move(rec));
        }
      }
    }
  }
  return m;
}

DatasetManifest generate(const SynthConfig& config, const std::string& out_dir) {
  DatasetManifest m = synth_manifest(config);
  for (const auto& rec : m.records) {
    SkeletonSequence seq = synth_sequence(config, rec.action, rec.performer, rec.setup,
                                          std::stol(rec.sample_id.substr(13)));
    write_sequence(seq, out_dir + "/" + rec.path);
  }
  write_manifest(m, out_dir + "/manifest.csv");
  write_layout(humanoid_layout(), out_dir + "/layout.txt");
  return m;
}

double centroid_accuracy(const DatasetManifest& manifest, const std::string& manifest_path) {
  if (manifest.records.empty()) fail("empty manifest");
  std::vector<Tensor> flats;
  flats.reserve(manifest.records.size());
  long dim = -1;
  for (const auto& rec : manifest.records) {
    SkeletonSequence seq = read_sequence(resolve_relative(manifest_path, rec.path));
    if (dim == -1) dim = seq.coords.size();
    if (seq.coords.size() != dim) fail("inconsistent sequence sizes for centroid probe");
    flats.push_back(seq.coords);
  }

  std::vector<std::vector<double>> centroid(
      static_cast<size_t>(manifest.class_count), std::vector<double>(static_cast<size_t>(dim), 0.0));
  std::vector<long> counts(static_cast<size_t>(manifest.class_count), 0);
  for (size_t i = 0; i < flats.size(); ++i) {
    auto c = static_cast<size_t>(manifest.records[i].action);
    ++counts[c];
    for (long d = 0; d < dim; ++d) centroid[c][static_cast<size_t>(d)] += flats[i][d];
  }
  for (size_t c = 0; c < centroid.size(); ++c) {
    if (counts[c] == 0) continue;
    for (auto& v : centroid[c]) v /= static_cast<double>(counts[c]);
  }

  long correct = 0;
  for (size_t i = 0; i < flats.size(); ++i) {
    long best = -1;
    double best_d = 0;
    for (long c = 0; c < manifest.class_count; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) continue;
      double d2 = 0;
      for (long d = 0; d < dim; ++d) {
        double diff = flats[i][d] - centroid[static_cast<size_t>(c)][static_cast<size_t>(d)];
        d2 += diff * diff;
      }
      if (best == -1 || d2 < best_d) {
        best = c;
        best_d = d2;
      }
    }
    if (best == manifest.records[i].action) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(flats.size());
}

}  // namespace skx
