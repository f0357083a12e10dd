// SKC1 checkpoint container: a config hash, string metadata, and named
// float32 tensors. Parameters are stored at file precision and widened on
// load, so save -> load -> save is byte-stable.
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "skx/nn.hpp"
#include "skx/tensor.hpp"

namespace skx {

struct Checkpoint {
  uint64_t config_hash = 0;
  std::vector<std::pair<std::string, std::string>> meta;   // ordered key/value
  std::vector<std::pair<std::string, Tensor>> tensors;     // registry order

  const std::string* find_meta(const std::string& key) const;
  const Tensor* find_tensor(const std::string& name) const;
  std::string meta_or_fail(const std::string& key) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes, const std::string& origin);
Checkpoint read_checkpoint(const std::string& path);
void write_checkpoint(const Checkpoint& ckpt, const std::string& path);

// Appends every listed tensor (values narrowed to float32 in the file).
void store_params(Checkpoint& ckpt, const ParamList& params);
// Loads listed tensors back by name; every name must exist with the right
// shape, and every checkpoint tensor must be claimed by some list across all
// restore_params calls for strictness to hold at the caller.
void restore_params(const Checkpoint& ckpt, const ParamList& params);

// Rounds every parameter through float32, making the in-memory model agree
// exactly with what a save/load round trip will produce.
void quantize_params(const ParamList& params);

}  // namespace skx
