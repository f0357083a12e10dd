#include "skx/backbone.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace skx {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

Partition partition_from_string(const std::string& s) {
  if (s == "uniform") return Partition::uniform;
  if (s == "distance") return Partition::distance;
  if (s == "spatial") return Partition::spatial;
  fail("unknown partition strategy '" + s + "' (expected uniform|distance|spatial)");
}

std::string to_string(Partition p) {
  switch (p) {
    case Partition::uniform: return "uniform";
    case Partition::distance: return "distance";
    case Partition::spatial: return "spatial";
  }
  return "?";
}

std::vector<BlockSpec> parse_blocks(const std::string& s) {
  std::vector<BlockSpec> out;
  std::istringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    size_t colon = part.find(':');
    try {
      BlockSpec spec;
      if (colon == std::string::npos) {
        spec.channels = std::stol(part);
        spec.stride = 1;
      } else {
        spec.channels = std::stol(part.substr(0, colon));
        spec.stride = std::stol(part.substr(colon + 1));
      }
      out.push_back(spec);
    } catch (const std::exception&) {
      fail("bad block spec '" + part + "' (expected channels:stride)");
    }
  }
  if (out.empty()) fail("empty block list");
  return out;
}

EncoderConfig EncoderConfig::standard() {
  EncoderConfig c;
  c.blocks = {{64, 1}, {64, 1}, {128, 2}, {128, 1}, {256, 2}, {256, 1}};
  return c;
}

EncoderConfig EncoderConfig::compact() {
  EncoderConfig c;
  c.blocks = {{16, 1}, {32, 2}, {48, 2}};
  return c;
}

void EncoderConfig::validate() const {
  if (blocks.empty()) fail("encoder needs at least one block");
  if (temporal_kernel < 1 || temporal_kernel % 2 == 0) {
    fail("temporal_kernel must be odd and positive");
  }
  for (const auto& b : blocks) {
    if (b.channels < 1) fail("block channels must be positive");
    if (b.stride != 1 && b.stride != 2) fail("block stride must be 1 or 2");
  }
}

std::string EncoderConfig::describe() const {
  std::ostringstream os;
  os << "blocks=";
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (i) os << ',';
    os << blocks[i].channels << ':' << blocks[i].stride;
  }
  os << ";kernel=" << temporal_kernel << ";partition=" << to_string(partition);
  return os.str();
}

uint64_t EncoderConfig::hash(const SkeletonLayout& layout) const {
  std::ostringstream os;
  os << describe() << ";layout=" << layout.name << ":" << layout.joint_count << ":" << layout.root;
  for (auto [p, c] : layout.edges) os << ":" << p << "-" << c;
  return fnv1a(os.str());
}

long EncoderConfig::temporal_shrink() const {
  long s = 1;
  for (const auto& b : blocks) s *= b.stride;
  return s;
}

std::vector<Tensor> normalize_adjacency(const SkeletonLayout& layout, Partition strategy) {
  layout.validate();
  long v_n = layout.joint_count;
  auto dist = layout.root_distances();

  // Unnormalized supports first; their sum across partitions is exactly the
  // adjacency with self-loops.
  std::vector<Tensor> supports;
  auto zeros = [v_n] { return Tensor({v_n, v_n}); };
  if (strategy == Partition::uniform) {
    supports.push_back(zeros());
    for (long j = 0; j < v_n; ++j) supports[0].at(j, j) = 1.0;
    for (auto [p, c] : layout.edges) {
      supports[0].at(p, c) = 1.0;
      supports[0].at(c, p) = 1.0;
    }
  } else if (strategy == Partition::distance) {
    supports.push_back(zeros());  // distance 0: self
    supports.push_back(zeros());  // distance 1: neighbors
    for (long j = 0; j < v_n; ++j) supports[0].at(j, j) = 1.0;
    for (auto [p, c] : layout.edges) {
      supports[1].at(p, c) = 1.0;
      supports[1].at(c, p) = 1.0;
    }
  } else {
    supports.push_back(zeros());  // self
    supports.push_back(zeros());  // centripetal: neighbor nearer the root
    supports.push_back(zeros());  // centrifugal: neighbor farther out
    for (long j = 0; j < v_n; ++j) supports[0].at(j, j) = 1.0;
    for (auto [p, c] : layout.edges) {
      // Receiving joint is the row. The child receives from its parent
      // (closer to the root), the parent from its child (farther).
      if (dist[static_cast<size_t>(p)] < dist[static_cast<size_t>(c)]) {
        supports[1].at(c, p) = 1.0;
        supports[2].at(p, c) = 1.0;
      } else {
        supports[1].at(p, c) = 1.0;
        supports[2].at(c, p) = 1.0;
      }
    }
  }

  // Symmetric degree normalization per partition; all-zero rows/columns are
  // left untouched.
  for (auto& s : supports) {
    std::vector<double> row_deg(static_cast<size_t>(v_n), 0.0);
    std::vector<double> col_deg(static_cast<size_t>(v_n), 0.0);
    for (long r = 0; r < v_n; ++r) {
      for (long c = 0; c < v_n; ++c) {
        row_deg[static_cast<size_t>(r)] += s.at(r, c);
        col_deg[static_cast<size_t>(c)] += s.at(r, c);
      }
    }
    for (long r = 0; r < v_n; ++r) {
      for (long c = 0; c < v_n; ++c) {
        if (s.at(r, c) == 0.0) continue;
        s.at(r, c) /= std::sqrt(row_deg[static_cast<size_t>(r)] * col_deg[static_cast<size_t>(c)]);
      }
    }
  }
  return supports;
}

GraphConv::GraphConv(std::vector<Tensor> adjacency, long in_c, long out_c, Rng& rng)
    : adj(std::move(adjacency)), b({out_c}), grad_b({out_c}) {
  for (size_t p = 0; p < adj.size(); ++p) {
    w.emplace_back(Tensor({in_c, out_c}));
    grad_w.emplace_back(Tensor({in_c, out_c}));
    init_uniform(w.back(), in_c, rng);
  }
  init_uniform(b, in_c, rng);
}

namespace {

// Applies a V x V matrix to every (n, t) slab of a (N, T, V, C) tensor.
Tensor joint_mix(const Tensor& x, const Tensor& a, bool transpose) {
  long n = x.dim(0), t = x.dim(1), v = x.dim(2), c = x.dim(3);
  Tensor out(x.shape());
  ECMap am(a.data(), v, v);
  for (long i = 0; i < n * t; ++i) {
    ECMap slab(x.data() + i * v * c, v, c);
    EMap dst(out.data() + i * v * c, v, c);
    if (transpose) {
      dst.noalias() = am.transpose() * slab;
    } else {
      dst.noalias() = am * slab;
    }
  }
  return out;
}

}  // namespace

Tensor GraphConv::forward(const Tensor& x, Ctx& ctx) const {
  ctx.x = x;
  long n = x.dim(0), t = x.dim(1), v = x.dim(2), cin = x.dim(3);
  long cout = b.dim(0);
  Tensor out({n, t, v, cout});
  EMap out_m(out.data(), n * t * v, cout);
  for (size_t p = 0; p < adj.size(); ++p) {
    Tensor mixed = joint_mix(x, adj[p], false);
    ECMap mixed_m(mixed.data(), n * t * v, cin);
    ECMap w_m(w[p].data(), cin, cout);
    out_m.noalias() += mixed_m * w_m;
  }
  for (long r = 0; r < n * t * v; ++r) {
    for (long c = 0; c < cout; ++c) out[r * cout + c] += b[c];
  }
  return out;
}

Tensor GraphConv::backward(const Tensor& dy, const Ctx& ctx) {
  const Tensor& x = ctx.x;
  long n = x.dim(0), t = x.dim(1), v = x.dim(2), cin = x.dim(3);
  long cout = dy.dim(3);
  long rows = n * t * v;
  ECMap dy_m(dy.data(), rows, cout);

  Tensor dx({n, t, v, cin});
  EMap dx_m(dx.data(), rows, cin);
  for (size_t p = 0; p < adj.size(); ++p) {
    // dW needs the mixed input again; recomputing it beats keeping one copy
    // per partition alive through the whole backward pass.
    Tensor mixed = joint_mix(x, adj[p], false);
    ECMap mixed_m(mixed.data(), rows, cin);
    EMap gw(grad_w[p].data(), cin, cout);
    gw.noalias() += mixed_m.transpose() * dy_m;

    Tensor dmixed({n, t, v, cin});
    EMap dmixed_m(dmixed.data(), rows, cin);
    ECMap w_m(w[p].data(), cin, cout);
    dmixed_m.noalias() = dy_m * w_m.transpose();
    Tensor dx_p = joint_mix(dmixed, adj[p], true);
    for (long i = 0; i < dx.size(); ++i) dx[i] += dx_p[i];
  }
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cout; ++c) grad_b[c] += dy[r * cout + c];
  }
  return dx;
}

ParamList GraphConv::params(const std::string& prefix) {
  ParamList list;
  for (size_t p = 0; p < w.size(); ++p) {
    list.add(prefix + "/w" + std::to_string(p), &w[p], &grad_w[p]);
  }
  list.add(prefix + "/b", &b, &grad_b);
  return list;
}

TemporalConv::TemporalConv(long in_c, long out_c, long kernel_, long stride_, Rng& rng)
    : kernel(kernel_),
      stride(stride_),
      w({kernel_, in_c, out_c}),
      grad_w({kernel_, in_c, out_c}),
      b({out_c}),
      grad_b({out_c}) {
  init_uniform(w, in_c * kernel_, rng);
  init_uniform(b, in_c * kernel_, rng);
}

// The conv runs one batched GEMM per kernel offset over a gathered
// time-shifted copy of the input; out-of-range taps contribute zero rows.
// This keeps the GEMM count at `kernel` instead of batch*frames.
Tensor TemporalConv::forward(const Tensor& x, Ctx& ctx) const {
  ctx.x = x;
  long n = x.dim(0), t = x.dim(1), v = x.dim(2), cin = x.dim(3);
  long cout = b.dim(0);
  long pad = (kernel - 1) / 2;
  long t_out = (t + 2 * pad - kernel) / stride + 1;
  ctx.t_out = t_out;

  long rows = n * t_out * v;
  long slab = v * cin;
  Tensor out({n, t_out, v, cout});
  Tensor buf({rows, cin});
  EMap out_m(out.data(), rows, cout);
  for (long o = 0; o < kernel; ++o) {
    for (long b_i = 0; b_i < n; ++b_i) {
      const double* xb = x.data() + b_i * t * slab;
      double* bb = buf.data() + b_i * t_out * slab;
      for (long to = 0; to < t_out; ++to) {
        long ti = to * stride + o - pad;
        if (ti < 0 || ti >= t) {
          std::fill(bb + to * slab, bb + (to + 1) * slab, 0.0);
        } else {
          std::copy(xb + ti * slab, xb + (ti + 1) * slab, bb + to * slab);
        }
      }
    }
    ECMap buf_m(buf.data(), rows, cin);
    ECMap w_o(w.data() + o * cin * cout, cin, cout);
    out_m.noalias() += buf_m * w_o;
  }
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cout; ++c) out[r * cout + c] += b[c];
  }
  return out;
}

Tensor TemporalConv::backward(const Tensor& dy, const Ctx& ctx) {
  const Tensor& x = ctx.x;
  long n = x.dim(0), t = x.dim(1), v = x.dim(2), cin = x.dim(3);
  long cout = dy.dim(3);
  long pad = (kernel - 1) / 2;
  long t_out = ctx.t_out;

  long rows = n * t_out * v;
  long slab = v * cin;
  Tensor dx({n, t, v, cin});
  Tensor buf({rows, cin});
  Tensor dbuf({rows, cin});
  ECMap dy_m(dy.data(), rows, cout);
  for (long o = 0; o < kernel; ++o) {
    for (long b_i = 0; b_i < n; ++b_i) {
      const double* xb = x.data() + b_i * t * slab;
      double* bb = buf.data() + b_i * t_out * slab;
      for (long to = 0; to < t_out; ++to) {
        long ti = to * stride + o - pad;
        if (ti < 0 || ti >= t) {
          std::fill(bb + to * slab, bb + (to + 1) * slab, 0.0);
        } else {
          std::copy(xb + ti * slab, xb + (ti + 1) * slab, bb + to * slab);
        }
      }
    }
    ECMap buf_m(buf.data(), rows, cin);
    EMap gw(grad_w.data() + o * cin * cout, cin, cout);
    gw.noalias() += buf_m.transpose() * dy_m;

    EMap dbuf_m(dbuf.data(), rows, cin);
    ECMap w_o(w.data() + o * cin * cout, cin, cout);
    dbuf_m.noalias() = dy_m * w_o.transpose();
    for (long b_i = 0; b_i < n; ++b_i) {
      const double* db = dbuf.data() + b_i * t_out * slab;
      double* dxb = dx.data() + b_i * t * slab;
      for (long to = 0; to < t_out; ++to) {
        long ti = to * stride + o - pad;
        if (ti < 0 || ti >= t) continue;
        const double* s = db + to * slab;
        double* d = dxb + ti * slab;
        for (long k = 0; k < slab; ++k) d[k] += s[k];
      }
    }
  }
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cout; ++c) grad_b[c] += dy[r * cout + c];
  }
  return dx;
}

ParamList TemporalConv::params(const std::string& prefix) {
  ParamList list;
  list.add(prefix + "/w", &w, &grad_w);
  list.add(prefix + "/b", &b, &grad_b);
  return list;
}

StgcnBlock::StgcnBlock(const std::vector<Tensor>& adjacency, long in_c, long out_c, long kernel,
                       long stride, bool with_residual, Rng& rng)
    : gcn(adjacency, in_c, out_c, rng),
      bn1(out_c),
      tcn(out_c, out_c, kernel, stride, rng),
      bn2(out_c),
      residual(with_residual) {
  if (residual && (in_c != out_c || stride != 1)) {
    res_projects = true;
    res_conv = TemporalConv(in_c, out_c, 1, stride, rng);
    res_norm = BatchNorm(out_c);
  }
}

namespace {

Tensor rows_view(const Tensor& x, long channels) {
  return x.reshaped({x.size() / channels, channels});
}

}  // namespace

Tensor StgcnBlock::forward(const Tensor& x, Ctx& ctx, bool training, bool update_running) {
  Tensor g = gcn.forward(x, ctx.gcn);
  auto g_shape = g.shape();
  long c = g.dim(3);
  Tensor g2 = bn1.forward(rows_view(g, c), ctx.bn1, training, update_running);
  Tensor g3 = relu(g2, ctx.relu1);
  Tensor t = tcn.forward(g3.reshaped(g_shape), ctx.tcn);
  auto t_shape = t.shape();
  Tensor t2 = bn2.forward(rows_view(t, c), ctx.bn2, training, update_running);

  if (residual) {
    Tensor r;
    if (res_projects) {
      Tensor rc = res_conv.forward(x, ctx.res);
      r = res_norm.forward(rows_view(rc, c), ctx.res_bn, training, update_running);
    } else {
      r = rows_view(x, c);
    }
    for (long i = 0; i < t2.size(); ++i) t2[i] += r[i];
  }
  Tensor y = relu(t2, ctx.relu2);
  return y.reshaped(t_shape);
}

Tensor StgcnBlock::backward(const Tensor& dy, const Ctx& ctx) {
  long c = dy.dim(3);
  Tensor d = relu_backward(rows_view(dy, c), ctx.relu2);

  Tensor dx_res;
  if (residual) {
    if (res_projects) {
      Tensor dr = res_norm.backward(d, ctx.res_bn);
      dx_res = res_conv.backward(dr.reshaped({dy.dim(0), dy.dim(1), dy.dim(2), c}), ctx.res);
    } else {
      dx_res = d;
    }
  }

  Tensor dt = bn2.backward(d, ctx.bn2);
  Tensor dg3 = tcn.backward(dt.reshaped({dy.dim(0), dy.dim(1), dy.dim(2), c}), ctx.tcn);
  Tensor dg2 = relu_backward(rows_view(dg3, c), ctx.relu1);
  Tensor dg = bn1.backward(dg2, ctx.bn1);
  Tensor dx = gcn.backward(
      dg.reshaped({ctx.gcn.x.dim(0), ctx.gcn.x.dim(1), ctx.gcn.x.dim(2), c}), ctx.gcn);
  if (residual) {
    for (long i = 0; i < dx.size(); ++i) dx[i] += dx_res[i];
  }
  return dx;
}

ParamList StgcnBlock::params(const std::string& prefix) {
  ParamList list;
  list.absorb(prefix + "/gcn", gcn.params(""));
  list.absorb(prefix + "/bn1", bn1.params(""));
  list.absorb(prefix + "/tcn", tcn.params(""));
  list.absorb(prefix + "/bn2", bn2.params(""));
  if (res_projects) {
    list.absorb(prefix + "/res", res_conv.params(""));
    list.absorb(prefix + "/res_bn", res_norm.params(""));
  }
  return list;
}

ParamList StgcnBlock::state(const std::string& prefix) {
  ParamList list;
  list.absorb(prefix + "/bn1", bn1.state(""));
  list.absorb(prefix + "/bn2", bn2.state(""));
  if (res_projects) list.absorb(prefix + "/res_bn", res_norm.state(""));
  return list;
}

Encoder::Encoder(const EncoderConfig& config_, const SkeletonLayout& layout_, Rng& rng)
    : config(config_), layout(layout_), data_bn(layout_.joint_count * 3) {
  config.validate();
  auto adjacency = normalize_adjacency(layout, config.partition);
  long in_c = 3;
  for (size_t i = 0; i < config.blocks.size(); ++i) {
    const auto& spec = config.blocks[i];
    blocks.emplace_back(adjacency, in_c, spec.channels, config.temporal_kernel, spec.stride,
                        /*with_residual=*/i > 0, rng);
    in_c = spec.channels;
  }
}

Tensor Encoder::forward(const Tensor& x, Ctx& ctx, bool training, bool update_running) {
  if (x.rank() != 4 || x.dim(3) != 3) fail("encoder input must be (N, T, V, 3)");
  if (x.dim(2) != layout.joint_count) {
    fail("encoder got " + std::to_string(x.dim(2)) + " joints, layout has " +
         std::to_string(layout.joint_count));
  }
  ctx.n = x.dim(0);
  ctx.t = x.dim(1);
  ctx.v = x.dim(2);
  ctx.blocks.resize(blocks.size());

  // Normalize each (joint, coordinate) channel over the batch and time.
  Tensor flat = x.reshaped({ctx.n * ctx.t, ctx.v * 3});
  Tensor normed = data_bn.forward(flat, ctx.data_bn, training, update_running);
  Tensor h = normed.reshaped({ctx.n, ctx.t, ctx.v, 3});
  for (size_t i = 0; i < blocks.size(); ++i) {
    h = blocks[i].forward(h, ctx.blocks[i], training, update_running);
  }
  return h;
}

Tensor Encoder::backward(const Tensor& dy, const Ctx& ctx) {
  Tensor d = dy;
  for (size_t i = blocks.size(); i-- > 0;) {
    d = blocks[i].backward(d, ctx.blocks[i]);
  }
  Tensor dflat = data_bn.backward(d.reshaped({ctx.n * ctx.t, ctx.v * 3}), ctx.data_bn);
  return dflat.reshaped({ctx.n, ctx.t, ctx.v, 3});
}

ParamList Encoder::params(const std::string& prefix) {
  ParamList list;
  list.absorb(prefix + "/data_bn", data_bn.params(""));
  for (size_t i = 0; i < blocks.size(); ++i) {
    list.absorb(prefix + "/block" + std::to_string(i), blocks[i].params(""));
  }
  return list;
}

ParamList Encoder::state(const std::string& prefix) {
  ParamList list;
  list.absorb(prefix + "/data_bn", data_bn.state(""));
  for (size_t i = 0; i < blocks.size(); ++i) {
    list.absorb(prefix + "/block" + std::to_string(i), blocks[i].state(""));
  }
  return list;
}

}  // namespace skx
