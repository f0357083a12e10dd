#include "skx/ingest.hpp"

#include <cmath>
#include <sstream>

namespace skx {

namespace {

// Line-counting reader over the .skeleton text. NTU files are strictly
// line-oriented, so every parse error can name the offending line.
struct LineReader {
  std::istringstream in;
  long line_no = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in, line)) {
      fail("skeleton text ended early at line " + std::to_string(line_no + 1) + " while reading " +
           what);
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  long next_count(const char* what) {
    std::string line = next(what);
    std::istringstream ls(line);
    long v = 0;
    if (!(ls >> v) || v < 0) {
      fail("line " + std::to_string(line_no) + ": expected a nonnegative " + std::string(what) +
           ", got '" + line + "'");
    }
    return v;
  }
};

}  // namespace

SkeletonSequence parse_ntu_skeleton(const std::string& text) {
  LineReader r(text);
  long frame_count = r.next_count("frame count");
  if (frame_count == 0) fail("line 1: skeleton text declares zero frames");

  // Joint count is taken from the first body encountered; until then we only
  // know a frame's worth of zeros is owed.
  long joints = -1;
  std::vector<std::vector<double>> frames;
  frames.reserve(static_cast<size_t>(frame_count));

  for (long f = 0; f < frame_count; ++f) {
    long bodies = r.next_count("body count");
    if (bodies == 0) {
      frames.emplace_back();  // filled with zeros once the joint count is known
      continue;
    }
    std::vector<double> first_body;
    for (long b = 0; b < bodies; ++b) {
      r.next("body info line");
      long jc = r.next_count("joint count");
      if (jc == 0) fail("line " + std::to_string(r.line_no) + ": body declares zero joints");
      std::vector<double> coords;
      coords.reserve(static_cast<size_t>(jc) * 3);
      for (long j = 0; j < jc; ++j) {
        std::string line = r.next("joint line");
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z)) {
          fail("line " + std::to_string(r.line_no) + ": joint line needs at least 3 numeric fields");
        }
        coords.push_back(x);
        coords.push_back(y);
        coords.push_back(z);
      }
      if (b == 0) {
        if (joints == -1) {
          joints = jc;
        } else if (jc != joints) {
          fail("line " + std::to_string(r.line_no) + ": joint count changed from " +
               std::to_string(joints) + " to " + std::to_string(jc));
        }
        first_body = std::move(coords);
      }
    }
    frames.push_back(std::move(first_body));
  }

  if (joints == -1) joints = 25;  // every frame was bodyless

  SkeletonSequence seq;
  seq.coords = Tensor({frame_count, joints, 3});
  for (long f = 0; f < frame_count; ++f) {
    const auto& fr = frames[static_cast<size_t>(f)];
    if (fr.empty()) continue;
    for (long i = 0; i < joints * 3; ++i) {
      seq.coords[f * joints * 3 + i] = fr[static_cast<size_t>(i)];
    }
  }
  return seq;
}

SkeletonSequence preprocess(const SkeletonSequence& seq, const PreprocessConfig& config) {
  seq.validate();
  if (config.target_frames < 1) fail("target_frames must be >= 1");
  long t_in = seq.frames();
  long v = seq.joints();

  std::vector<long> kept;
  for (long f = 0; f < t_in; ++f) {
    double mx = 0.0;
    for (long i = 0; i < v * 3; ++i) {
      mx = std::max(mx, std::abs(seq.coords[f * v * 3 + i]));
    }
    if (mx >= config.empty_frame_epsilon) kept.push_back(f);
  }
  if (kept.empty()) fail("all frames empty; nothing to resize");

  long n = static_cast<long>(kept.size());
  long t_out = config.target_frames;
  SkeletonSequence out;
  out.layout_name = seq.layout_name;
  out.coords = Tensor({t_out, v, 3});
  for (long f = 0; f < t_out; ++f) {
    // Map output frame f to a fractional position over the kept frames.
    double pos = (t_out == 1) ? 0.0
                              : static_cast<double>(f) * static_cast<double>(n - 1) /
                                    static_cast<double>(t_out - 1);
    long lo = static_cast<long>(std::floor(pos));
    long hi = std::min(lo + 1, n - 1);
    double w = pos - static_cast<double>(lo);
    long src_lo = kept[static_cast<size_t>(lo)];
    long src_hi = kept[static_cast<size_t>(hi)];
    for (long i = 0; i < v * 3; ++i) {
      out.coords[f * v * 3 + i] = (1.0 - w) * seq.coords[src_lo * v * 3 + i] +
                                  w * seq.coords[src_hi * v * 3 + i];
    }
  }
  return out;
}

SkeletonSequence to_bone(const SkeletonSequence& seq, const SkeletonLayout& layout) {
  seq.validate();
  if (seq.joints() != layout.joint_count) {
    fail("sequence has " + std::to_string(seq.joints()) + " joints but layout '" + layout.name +
         "' declares " + std::to_string(layout.joint_count));
  }
  auto parent = layout.parents();
  long t = seq.frames();
  long v = seq.joints();
  SkeletonSequence out;
  out.layout_name = seq.layout_name;
  out.coords = Tensor({t, v, 3});
  for (long f = 0; f < t; ++f) {
    for (long j = 0; j < v; ++j) {
      long p = parent[static_cast<size_t>(j)];
      if (p < 0) continue;  // root stays zero
      for (long c = 0; c < 3; ++c) {
        out.coords.at(f, j, c) = seq.coords.at(f, j, c) - seq.coords.at(f, p, c);
      }
    }
  }
  return out;
}

}  // namespace skx
