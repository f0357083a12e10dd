#include "skx/nn.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace skx {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

namespace {

ECMap as_mat(const Tensor& t) {
  if (t.rank() != 2) fail("expected a 2-D tensor, got shape " + t.shape_str());
  return ECMap(t.data(), t.dim(0), t.dim(1));
}

}  // namespace

void ParamList::absorb(const std::string& prefix, const ParamList& child) {
  for (const auto& r : child.refs()) {
    std::string name = (r.name.empty() || r.name[0] == '/') ? prefix + r.name : prefix + "/" + r.name;
    refs_.push_back({std::move(name), r.value, r.grad});
  }
}

long ParamList::scalar_count() const {
  long n = 0;
  for (const auto& r : refs_) n += r.value->size();
  return n;
}

void ParamList::zero_grads() {
  for (const auto& r : refs_) {
    if (r.grad) r.grad->fill(0.0);
  }
}

void init_uniform(Tensor& t, long fan_in, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(std::max<long>(fan_in, 1)));
  for (long i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.dim(1) != b.dim(0)) fail("matmul shape mismatch " + a.shape_str() + " x " + b.shape_str());
  Tensor out({a.dim(0), b.dim(1)});
  EMap(out.data(), out.dim(0), out.dim(1)).noalias() = as_mat(a) * as_mat(b);
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.dim(0) != b.dim(0)) fail("matmul_tn shape mismatch");
  Tensor out({a.dim(1), b.dim(1)});
  EMap(out.data(), out.dim(0), out.dim(1)).noalias() = as_mat(a).transpose() * as_mat(b);
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.dim(1) != b.dim(1)) fail("matmul_nt shape mismatch");
  Tensor out({a.dim(0), b.dim(0)});
  EMap(out.data(), out.dim(0), out.dim(1)).noalias() = as_mat(a) * as_mat(b).transpose();
  return out;
}

Dense::Dense(long in, long out, Rng& rng)
    : w({in, out}), b({out}), grad_w({in, out}), grad_b({out}) {
  init_uniform(w, in, rng);
  init_uniform(b, in, rng);
}

Tensor Dense::forward(const Tensor& x, Ctx& ctx) const {
  ctx.x = x;
  Tensor y = matmul(x, w);
  for (long r = 0; r < y.dim(0); ++r) {
    for (long c = 0; c < y.dim(1); ++c) y.at(r, c) += b[c];
  }
  return y;
}

Tensor Dense::backward(const Tensor& dy, const Ctx& ctx) {
  Tensor dw = matmul_tn(ctx.x, dy);
  for (long i = 0; i < dw.size(); ++i) grad_w[i] += dw[i];
  for (long r = 0; r < dy.dim(0); ++r) {
    for (long c = 0; c < dy.dim(1); ++c) grad_b[c] += dy.at(r, c);
  }
  return matmul_nt(dy, w);
}

ParamList Dense::params(const std::string& prefix) {
  ParamList p;
  p.add(prefix + "/w", &w, &grad_w);
  p.add(prefix + "/b", &b, &grad_b);
  return p;
}

PerChannelAffine::PerChannelAffine(long channels)
    : w({channels}), b({channels}), grad_w({channels}), grad_b({channels}) {
  w.fill(1.0);
  b.fill(0.0);
}

Tensor PerChannelAffine::forward(const Tensor& x, Ctx& ctx) const {
  ctx.x = x;
  Tensor y(x.shape());
  long c_n = x.dim(1);
  for (long r = 0; r < x.dim(0); ++r) {
    for (long c = 0; c < c_n; ++c) y.at(r, c) = w[c] * x.at(r, c) + b[c];
  }
  return y;
}

Tensor PerChannelAffine::backward(const Tensor& dy, const Ctx& ctx) {
  Tensor dx(dy.shape());
  long c_n = dy.dim(1);
  for (long r = 0; r < dy.dim(0); ++r) {
    for (long c = 0; c < c_n; ++c) {
      grad_w[c] += dy.at(r, c) * ctx.x.at(r, c);
      grad_b[c] += dy.at(r, c);
      dx.at(r, c) = dy.at(r, c) * w[c];
    }
  }
  return dx;
}

ParamList PerChannelAffine::params(const std::string& prefix) {
  ParamList p;
  p.add(prefix + "/w", &w, &grad_w);
  p.add(prefix + "/b", &b, &grad_b);
  return p;
}

BatchNorm::BatchNorm(long channels)
    : gamma({channels}),
      beta({channels}),
      grad_gamma({channels}),
      grad_beta({channels}),
      running_mean({channels}),
      running_var({channels}) {
  gamma.fill(1.0);
  running_var.fill(1.0);
}

Tensor BatchNorm::forward(const Tensor& x, Ctx& ctx, bool training, bool update_running) {
  long n = x.dim(0), c_n = x.dim(1);
  ctx.training = training;
  Tensor y(x.shape());
  if (!training) {
    for (long c = 0; c < c_n; ++c) {
      double inv = 1.0 / std::sqrt(running_var[c] + eps);
      for (long r = 0; r < n; ++r) {
        y.at(r, c) = gamma[c] * (x.at(r, c) - running_mean[c]) * inv + beta[c];
      }
    }
    return y;
  }

  ctx.xhat = Tensor(x.shape());
  ctx.inv_std = Tensor({c_n});
  for (long c = 0; c < c_n; ++c) {
    double mean = 0;
    for (long r = 0; r < n; ++r) mean += x.at(r, c);
    mean /= static_cast<double>(n);
    double var = 0;
    for (long r = 0; r < n; ++r) {
      double d = x.at(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    double inv = 1.0 / std::sqrt(var + eps);
    ctx.inv_std[c] = inv;
    for (long r = 0; r < n; ++r) {
      ctx.xhat.at(r, c) = (x.at(r, c) - mean) * inv;
      y.at(r, c) = gamma[c] * ctx.xhat.at(r, c) + beta[c];
    }
    if (update_running) {
      double unbiased = n > 1 ? var * static_cast<double>(n) / static_cast<double>(n - 1) : var;
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mean;
      running_var[c] = (1.0 - momentum) * running_var[c] + momentum * unbiased;
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& dy, const Ctx& ctx) {
  long n = dy.dim(0), c_n = dy.dim(1);
  Tensor dx(dy.shape());
  if (!ctx.training) {
    fail("batch norm backward requires a training-mode forward context");
  }
  for (long c = 0; c < c_n; ++c) {
    double sum_dy = 0, sum_dy_xhat = 0;
    for (long r = 0; r < n; ++r) {
      sum_dy += dy.at(r, c);
      sum_dy_xhat += dy.at(r, c) * ctx.xhat.at(r, c);
    }
    grad_beta[c] += sum_dy;
    grad_gamma[c] += sum_dy_xhat;
    double inv_n = 1.0 / static_cast<double>(n);
    for (long r = 0; r < n; ++r) {
      dx.at(r, c) = gamma[c] * ctx.inv_std[c] *
                    (dy.at(r, c) - inv_n * sum_dy - ctx.xhat.at(r, c) * inv_n * sum_dy_xhat);
    }
  }
  return dx;
}

ParamList BatchNorm::params(const std::string& prefix) {
  ParamList p;
  p.add(prefix + "/gamma", &gamma, &grad_gamma);
  p.add(prefix + "/beta", &beta, &grad_beta);
  return p;
}

ParamList BatchNorm::state(const std::string& prefix) {
  ParamList p;
  p.add(prefix + "/running_mean", &running_mean, nullptr);
  p.add(prefix + "/running_var", &running_var, nullptr);
  return p;
}

Tensor relu(const Tensor& x, ReluCtx& ctx) {
  ctx.mask = Tensor(x.shape());
  Tensor y(x.shape());
  for (long i = 0; i < x.size(); ++i) {
    bool on = x[i] > 0;
    ctx.mask[i] = on ? 1.0 : 0.0;
    y[i] = on ? x[i] : 0.0;
  }
  return y;
}

Tensor relu_backward(const Tensor& dy, const ReluCtx& ctx) {
  Tensor dx(dy.shape());
  for (long i = 0; i < dy.size(); ++i) dx[i] = dy[i] * ctx.mask[i];
  return dx;
}

void Sgd::step(const ParamList& params, double lr) {
  const auto& refs = params.refs();
  if (velocity_.empty()) {
    for (const auto& r : refs) velocity_.emplace_back(Tensor(r.value->shape()));
  }
  if (velocity_.size() != refs.size()) fail("optimizer bound to a different parameter list");
  for (size_t i = 0; i < refs.size(); ++i) {
    Tensor& v = velocity_[i];
    Tensor& p = *refs[i].value;
    const Tensor& g = *refs[i].grad;
    for (long j = 0; j < p.size(); ++j) {
      v[j] = momentum_ * v[j] + g[j];
      p[j] -= lr * v[j] + lr * weight_decay_ * p[j];
    }
  }
}

void Adam::step(const ParamList& params) {
  const auto& refs = params.refs();
  if (m_.empty()) {
    for (const auto& r : refs) {
      m_.emplace_back(Tensor(r.value->shape()));
      v_.emplace_back(Tensor(r.value->shape()));
    }
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < refs.size(); ++i) {
    Tensor& p = *refs[i].value;
    const Tensor& g = *refs[i].grad;
    for (long j = 0; j < p.size(); ++j) {
      m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g[j];
      v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g[j] * g[j];
      double mhat = m_[i][j] / bc1;
      double vhat = v_[i][j] / bc2;
      p[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

std::vector<double> finite_difference(const ParamList& params,
                                      const std::function<double()>& loss, double step) {
  std::vector<double> grads;
  for (const auto& r : params.refs()) {
    for (long i = 0; i < r.value->size(); ++i) {
      double saved = (*r.value)[i];
      (*r.value)[i] = saved + step;
      double up = loss();
      (*r.value)[i] = saved - step;
      double down = loss();
      (*r.value)[i] = saved;
      grads.push_back((up - down) / (2.0 * step));
    }
  }
  return grads;
}

}  // namespace skx
