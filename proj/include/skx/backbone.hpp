// Spatio-temporal graph-convolutional encoder. Activations are channel-last
// (N, T, V, C) tensors; each block is graph conv -> norm -> relu ->
// temporal conv -> norm -> residual -> relu. Deliberately minimal: it is a
// stand-in for the stronger published backbones, behind the same seam
// (encode + parameter enumeration + config hash).
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "skx/nn.hpp"
#include "skx/types.hpp"

namespace skx {

enum class Partition { uniform, distance, spatial };

Partition partition_from_string(const std::string& s);
std::string to_string(Partition p);

struct BlockSpec {
  long channels = 64;
  long stride = 1;
};

// Parses a `channels:stride,channels:stride,...` block list.
std::vector<BlockSpec> parse_blocks(const std::string& s);

struct EncoderConfig {
  std::vector<BlockSpec> blocks;
  long temporal_kernel = 9;
  Partition partition = Partition::spatial;

  // The full-size recipe: channels 64-64-128-128-256-256, strides 1-1-2-1-2-1.
  static EncoderConfig standard();
  // A small recipe sized for CPU desk runs.
  static EncoderConfig compact();

  void validate() const;
  std::string describe() const;       // canonical config string
  uint64_t hash(const SkeletonLayout& layout) const;
  long out_channels() const { return blocks.empty() ? 0 : blocks.back().channels; }
  long temporal_shrink() const;  // product of strides
};

// Partitioned, degree-normalized adjacency stack for a layout. Entry [p] is
// V x V; entry (v, w) scales the contribution of joint w to joint v.
std::vector<Tensor> normalize_adjacency(const SkeletonLayout& layout, Partition strategy);

// Graph convolution: per partition p, out += (A_p x) W_p, plus bias.
class GraphConv {
 public:
  struct Ctx {
    Tensor x;  // (N, T, V, Cin)
  };

  GraphConv() = default;
  GraphConv(std::vector<Tensor> adjacency, long in_c, long out_c, Rng& rng);

  Tensor forward(const Tensor& x, Ctx& ctx) const;
  Tensor backward(const Tensor& dy, const Ctx& ctx);
  ParamList params(const std::string& prefix);

  std::vector<Tensor> adj;       // fixed, not trained
  std::vector<Tensor> w;         // per partition (Cin, Cout)
  std::vector<Tensor> grad_w;
  Tensor b, grad_b;
};

// Temporal convolution along the frame axis, full channel mixing, odd kernel
// with symmetric zero padding, stride 1 or 2.
class TemporalConv {
 public:
  struct Ctx {
    Tensor x;
    long t_out = 0;
  };

  TemporalConv() = default;
  TemporalConv(long in_c, long out_c, long kernel, long stride, Rng& rng);

  Tensor forward(const Tensor& x, Ctx& ctx) const;
  Tensor backward(const Tensor& dy, const Ctx& ctx);
  ParamList params(const std::string& prefix);

  long kernel = 9, stride = 1;
  Tensor w;  // (kernel, Cin, Cout)
  Tensor grad_w;
  Tensor b, grad_b;
};

class StgcnBlock {
 public:
  struct Ctx {
    GraphConv::Ctx gcn;
    BatchNorm::Ctx bn1;
    ReluCtx relu1;
    TemporalConv::Ctx tcn;
    BatchNorm::Ctx bn2;
    TemporalConv::Ctx res;
    BatchNorm::Ctx res_bn;
    ReluCtx relu2;
  };

  StgcnBlock() = default;
  StgcnBlock(const std::vector<Tensor>& adjacency, long in_c, long out_c, long kernel, long stride,
             bool with_residual, Rng& rng);

  Tensor forward(const Tensor& x, Ctx& ctx, bool training, bool update_running);
  Tensor backward(const Tensor& dy, const Ctx& ctx);
  ParamList params(const std::string& prefix);
  ParamList state(const std::string& prefix);

  GraphConv gcn;
  BatchNorm bn1;
  TemporalConv tcn;
  BatchNorm bn2;
  bool residual = false;
  bool res_projects = false;  // 1x1 strided conv + norm on the skip path
  TemporalConv res_conv;
  BatchNorm res_norm;
};

class Encoder {
 public:
  struct Ctx {
    BatchNorm::Ctx data_bn;
    std::vector<StgcnBlock::Ctx> blocks;
    long n = 0, t = 0, v = 0;
  };

  Encoder() = default;
  Encoder(const EncoderConfig& config, const SkeletonLayout& layout, Rng& rng);

  // x: (N, T, V, 3) -> (N, T', V, C).
  Tensor forward(const Tensor& x, Ctx& ctx, bool training, bool update_running);
  Tensor backward(const Tensor& dy, const Ctx& ctx);

  ParamList params(const std::string& prefix);
  ParamList state(const std::string& prefix);

  EncoderConfig config;
  SkeletonLayout layout;
  BatchNorm data_bn;  // per (joint, coordinate) pair
  std::vector<StgcnBlock> blocks;
};

}  // namespace skx
