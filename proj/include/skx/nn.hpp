// Hand-wired differentiable layers. No autograd: every layer exposes an
// explicit forward that records what backward needs into a per-call context,
// and backward accumulates parameter gradients. All activations are
// channel-last 2-D views (rows x channels); callers reshape around them.
//
// Layers called more than once per step (the classifier runs on seven routes)
// keep per-call state in the caller-owned Ctx, never in the layer.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "skx/tensor.hpp"

namespace skx {

// A named view of one trainable tensor and its gradient accumulator.
struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

class ParamList {
 public:
  void add(const std::string& name, Tensor* value, Tensor* grad) {
    refs_.push_back({name, value, grad});
  }
  // Re-register a sublayer's parameters under `prefix/`.
  void absorb(const std::string& prefix, const ParamList& child);

  const std::vector<ParamRef>& refs() const { return refs_; }
  long scalar_count() const;
  void zero_grads();

 private:
  std::vector<ParamRef> refs_;
};

// y = x W + b with W of shape (in, out).
class Dense {
 public:
  struct Ctx {
    Tensor x;
  };

  Dense() = default;
  Dense(long in, long out, Rng& rng);

  Tensor forward(const Tensor& x, Ctx& ctx) const;
  Tensor backward(const Tensor& dy, const Ctx& ctx);

  ParamList params(const std::string& prefix);
  long in() const { return w.dim(0); }
  long out() const { return w.dim(1); }

  Tensor w, b, grad_w, grad_b;
};

// y[r,c] = w[c] * x[r,c] + b[c]; the channel-wise refinement affine.
class PerChannelAffine {
 public:
  struct Ctx {
    Tensor x;
  };

  PerChannelAffine() = default;
  explicit PerChannelAffine(long channels);

  Tensor forward(const Tensor& x, Ctx& ctx) const;
  Tensor backward(const Tensor& dy, const Ctx& ctx);

  ParamList params(const std::string& prefix);

  Tensor w, b, grad_w, grad_b;
};

// Per-channel batch normalization over the row axis. Training mode uses
// batch statistics (and optionally folds them into the running estimates);
// evaluation mode uses the running estimates.
class BatchNorm {
 public:
  struct Ctx {
    Tensor xhat;
    Tensor inv_std;  // per channel
    bool training = false;
  };

  BatchNorm() = default;
  explicit BatchNorm(long channels);

  Tensor forward(const Tensor& x, Ctx& ctx, bool training, bool update_running);
  Tensor backward(const Tensor& dy, const Ctx& ctx);

  ParamList params(const std::string& prefix);
  // Running statistics travel with checkpoints even though they take no
  // gradient, so they get their own registration.
  ParamList state(const std::string& prefix);

  double momentum = 0.1;
  double eps = 1e-5;
  Tensor gamma, beta, grad_gamma, grad_beta;
  Tensor running_mean, running_var;
};

struct ReluCtx {
  Tensor mask;
};

Tensor relu(const Tensor& x, ReluCtx& ctx);
Tensor relu_backward(const Tensor& dy, const ReluCtx& ctx);

// Plain matrix product helpers over 2-D tensors (row-major, Eigen inside).
Tensor matmul(const Tensor& a, const Tensor& b);                // (n,k)x(k,m)
Tensor matmul_tn(const Tensor& a, const Tensor& b);             // a^T b
Tensor matmul_nt(const Tensor& a, const Tensor& b);             // a b^T

// Stochastic gradient descent with classical momentum; weight decay is
// applied directly to the parameter, not through the momentum buffer.
class Sgd {
 public:
  Sgd(double momentum, double weight_decay) : momentum_(momentum), weight_decay_(weight_decay) {}

  void step(const ParamList& params, double lr);

 private:
  double momentum_;
  double weight_decay_;
  std::vector<Tensor> velocity_;
};

class Adam {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const ParamList& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

// Fan-in scaled uniform init, the convention of the graph-conv baselines.
void init_uniform(Tensor& t, long fan_in, Rng& rng);

// Central finite-difference gradient of `loss()` with respect to every entry
// of the listed parameters. Used by the correctness gates.
std::vector<double> finite_difference(const ParamList& params,
                                      const std::function<double()>& loss, double step);

}  // namespace skx
