#include "skx/io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace skx {

namespace {

void append_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t read_u32(const std::string& bytes, size_t offset) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[offset + static_cast<size_t>(i)]))
         << (8 * i);
  }
  return v;
}

void append_f32(std::string& out, float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  append_u32(out, bits);
}

float read_f32(const std::string& bytes, size_t offset) {
  uint32_t bits = read_u32(bytes, offset);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) fail(what + ": trailing characters in '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(what + ": '" + s + "' is not an integer");
  } catch (const std::out_of_range&) {
    fail(what + ": '" + s + "' is out of range");
  }
}

}  // namespace

std::string encode_sequence(const SkeletonSequence& seq) {
  seq.validate();
  std::string out = "SKX1";
  append_u32(out, static_cast<uint32_t>(seq.coords.dim(0)));
  append_u32(out, static_cast<uint32_t>(seq.coords.dim(1)));
  append_u32(out, 3);
  for (long i = 0; i < seq.coords.size(); ++i) {
    append_f32(out, static_cast<float>(seq.coords[i]));
  }
  return out;
}

SkeletonSequence decode_sequence(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "SKX1") != 0) {
    fail(origin + ": bad magic at byte 0 (expected 'SKX1')");
  }
  if (bytes.size() < 16) fail(origin + ": truncated header at byte " + std::to_string(bytes.size()));
  uint32_t t = read_u32(bytes, 4);
  uint32_t v = read_u32(bytes, 8);
  uint32_t d = read_u32(bytes, 12);
  if (d != 3) fail(origin + ": coordinate dimension at byte 12 must be 3, got " + std::to_string(d));
  if (t == 0 || v == 0) fail(origin + ": zero frame or joint count in header");
  size_t expected = 16 + static_cast<size_t>(t) * v * d * 4;
  if (bytes.size() < expected) {
    fail(origin + ": truncated payload, " + std::to_string(bytes.size()) + " bytes but header needs " +
         std::to_string(expected));
  }
  SkeletonSequence seq;
  seq.coords = Tensor({static_cast<long>(t), static_cast<long>(v), 3});
  for (long i = 0; i < seq.coords.size(); ++i) {
    seq.coords[i] = static_cast<double>(read_f32(bytes, 16 + static_cast<size_t>(i) * 4));
  }
  return seq;
}

SkeletonSequence read_sequence(const std::string& path) {
  return decode_sequence(read_text_file(path), path);
}

void write_sequence(const SkeletonSequence& seq, const std::string& path) {
  write_text_file(path, encode_sequence(seq));
}

static const char* kManifestHeader = "sample_id,performer,setup,action,path";

DatasetManifest parse_manifest(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) fail(origin + ": empty manifest");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    fail(origin + ": manifest header must be exactly '" + std::string(kManifestHeader) + "'");
  }
  DatasetManifest m;
  long line_no = 1;
  long max_action = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_fields(line, ',');
    if (f.size() != 5) {
      fail(origin + ":" + std::to_string(line_no) + ": expected 5 fields, got " +
           std::to_string(f.size()));
    }
    SampleRecord r;
    r.sample_id = f[0];
    r.performer = parse_long(f[1], origin + ":" + std::to_string(line_no) + " performer");
    r.setup = parse_long(f[2], origin + ":" + std::to_string(line_no) + " setup");
    r.action = parse_long(f[3], origin + ":" + std::to_string(line_no) + " action");
    r.path = f[4];
    max_action = std::max(max_action, r.action);
    m.records.push_back(std::move(r));
  }
  m.class_count = max_action + 1;
  return m;
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open manifest: " + path);
  return parse_manifest(in, path);
}

void format_manifest(const DatasetManifest& manifest, std::ostream& out) {
  out << kManifestHeader << '\n';
  for (const auto& r : manifest.records) {
    out << r.sample_id << ',' << r.performer << ',' << r.setup << ',' << r.action << ',' << r.path
        << '\n';
  }
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ostringstream os;
  format_manifest(manifest, os);
  write_text_file(path, os.str());
}

std::string format_layout(const SkeletonLayout& layout) {
  std::ostringstream os;
  os << "layout " << layout.name << '\n';
  os << "joints " << layout.joint_count << '\n';
  os << "root " << layout.root << '\n';
  for (auto [p, c] : layout.edges) os << "edge " << p << ' ' << c << '\n';
  return os.str();
}

SkeletonLayout parse_layout_text(const std::string& text, const std::string& origin) {
  SkeletonLayout layout;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "layout") {
      ls >> layout.name;
    } else if (key == "joints") {
      if (!(ls >> layout.joint_count)) fail(origin + ":" + std::to_string(line_no) + ": bad joints line");
    } else if (key == "root") {
      if (!(ls >> layout.root)) fail(origin + ":" + std::to_string(line_no) + ": bad root line");
    } else if (key == "edge") {
      long a = 0, b = 0;
      if (!(ls >> a >> b)) fail(origin + ":" + std::to_string(line_no) + ": bad edge line");
      layout.edges.emplace_back(a, b);
    } else {
      fail(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  layout.validate();
  return layout;
}

SkeletonLayout read_layout(const std::string& path) {
  return parse_layout_text(read_text_file(path), path);
}

void write_layout(const SkeletonLayout& layout, const std::string& path) {
  write_text_file(path, format_layout(layout));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail("write failed: " + path);
}

std::string resolve_relative(const std::string& anchor_file, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(anchor_file).parent_path() / p).string();
}

}  // namespace skx
