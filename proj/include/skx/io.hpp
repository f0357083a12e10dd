// On-disk formats: SKX1 sequence binaries, the manifest table, layout files
// and static pair files. All formats are fixed here and nowhere else.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "skx/types.hpp"

namespace skx {

// SKX1 binary: "SKX1" magic, three little-endian u32 (T, V, D=3), then
// T*V*D little-endian float32, frame-major, joint-minor, coordinate last.
SkeletonSequence read_sequence(const std::string& path);
void write_sequence(const SkeletonSequence& seq, const std::string& path);
SkeletonSequence decode_sequence(const std::string& bytes, const std::string& origin);
std::string encode_sequence(const SkeletonSequence& seq);

// Manifest: UTF-8 text, header line `sample_id,performer,setup,action,path`,
// comma-delimited, no quoting, record order preserved.
DatasetManifest read_manifest(const std::string& path);
void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest parse_manifest(std::istream& in, const std::string& origin);
void format_manifest(const DatasetManifest& manifest, std::ostream& out);

// Layout: line-oriented text (`layout <name>`, `joints <V>`, `root <r>`,
// then one `edge <parent> <child>` per bone).
SkeletonLayout read_layout(const std::string& path);
void write_layout(const SkeletonLayout& layout, const std::string& path);
std::string format_layout(const SkeletonLayout& layout);
SkeletonLayout parse_layout_text(const std::string& text, const std::string& origin);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Joins relative `path` onto the directory containing `anchor_file`.
std::string resolve_relative(const std::string& anchor_file, const std::string& path);

}  // namespace skx
