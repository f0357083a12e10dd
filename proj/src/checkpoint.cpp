#include "skx/checkpoint.hpp"

#include <cstring>

#include "skx/io.hpp"

namespace skx {

namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out += s;
}

struct Cursor {
  const std::string& bytes;
  size_t pos = 0;
  const std::string& origin;

  void need(size_t n, const char* what) {
    if (pos + n > bytes.size()) {
      fail(origin + ": truncated while reading " + std::string(what) + " at byte " +
           std::to_string(pos));
    }
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[pos + static_cast<size_t>(i)]))
           << (8 * i);
    }
    pos += 4;
    return v;
  }
  uint64_t u64(const char* what) {
    need(8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[pos + static_cast<size_t>(i)]))
           << (8 * i);
    }
    pos += 8;
    return v;
  }
  std::string str(const char* what) {
    uint32_t n = u32(what);
    need(n, what);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

const std::string* Checkpoint::find_meta(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return &v;
  }
  return nullptr;
}

const Tensor* Checkpoint::find_tensor(const std::string& name) const {
  for (const auto& [k, v] : tensors) {
    if (k == name) return &v;
  }
  return nullptr;
}

std::string Checkpoint::meta_or_fail(const std::string& key) const {
  const std::string* v = find_meta(key);
  if (!v) fail("checkpoint is missing metadata key '" + key + "'");
  return *v;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out = "SKC1";
  put_u32(out, 1);  // version
  put_u64(out, ckpt.config_hash);
  put_u32(out, static_cast<uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u32(out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    put_str(out, name);
    put_u32(out, static_cast<uint32_t>(t.rank()));
    for (int d = 0; d < t.rank(); ++d) put_u32(out, static_cast<uint32_t>(t.dim(d)));
    for (long i = 0; i < t.size(); ++i) {
      float f = static_cast<float>(t[i]);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(out, bits);
    }
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "SKC1") != 0) {
    fail(origin + ": bad checkpoint magic at byte 0 (expected 'SKC1')");
  }
  Cursor cur{bytes, 4, origin};
  uint32_t version = cur.u32("version");
  if (version != 1) fail(origin + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.config_hash = cur.u64("config hash");
  uint32_t n_meta = cur.u32("metadata count");
  for (uint32_t i = 0; i < n_meta; ++i) {
    std::string k = cur.str("metadata key");
    std::string v = cur.str("metadata value");
    ckpt.meta.emplace_back(std::move(k), std::move(v));
  }
  uint32_t n_tensors = cur.u32("tensor count");
  for (uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = cur.str("tensor name");
    uint32_t rank = cur.u32("tensor rank");
    if (rank > 8) fail(origin + ": implausible tensor rank " + std::to_string(rank));
    std::vector<long> shape;
    long total = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<long>(cur.u32("tensor dim")));
      total *= shape.back();
    }
    Tensor t(shape);
    for (long j = 0; j < total; ++j) {
      uint32_t bits = cur.u32("tensor payload");
      float f;
      std::memcpy(&f, &bits, 4);
      t[j] = static_cast<double>(f);
    }
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  return ckpt;
}

Checkpoint read_checkpoint(const std::string& path) {
  return decode_checkpoint(read_text_file(path), path);
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_text_file(path, encode_checkpoint(ckpt));
}

void store_params(Checkpoint& ckpt, const ParamList& params) {
  for (const auto& r : params.refs()) ckpt.tensors.emplace_back(r.name, *r.value);
}

void restore_params(const Checkpoint& ckpt, const ParamList& params) {
  for (const auto& r : params.refs()) {
    const Tensor* stored = ckpt.find_tensor(r.name);
    if (!stored) fail("checkpoint has no tensor named '" + r.name + "'");
    if (!stored->same_shape(*r.value)) {
      fail("checkpoint tensor '" + r.name + "' has shape " + stored->shape_str() + ", expected " +
           r.value->shape_str());
    }
    *r.value = *stored;
  }
}

void quantize_params(const ParamList& params) {
  for (const auto& r : params.refs()) {
    Tensor& t = *r.value;
    for (long i = 0; i < t.size(); ++i) {
      t[i] = static_cast<double>(static_cast<float>(t[i]));
    }
  }
}

}  // namespace skx
