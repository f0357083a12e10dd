#include "skx/mine.hpp"

#include <algorithm>
#include <cmath>

namespace skx {

void MineConfig::validate() const {
  if (steps < 1) fail("steps must be >= 1");
  if (batch < 2) fail("batch must be >= 2");
  if (width < 1 || depth < 1) fail("statistics network needs positive width and depth");
  if (lr <= 0) fail("lr must be positive");
  if (ema_decay <= 0 || ema_decay >= 1) fail("ema_decay must be in (0, 1)");
}

double MiCurve::converged() const {
  if (bounds.empty()) fail("empty curve");
  size_t tail = std::max<size_t>(1, bounds.size() / 10);
  double sum = 0;
  for (size_t i = bounds.size() - tail; i < bounds.size(); ++i) sum += bounds[i];
  return sum / static_cast<double>(tail);
}

namespace {

// The statistics network: an MLP scoring a (feature, partner) row pair.
struct StatNet {
  std::vector<Dense> layers;

  StatNet(long in, const MineConfig& cfg, Rng& rng) {
    long prev = in;
    for (long d = 0; d < cfg.depth; ++d) {
      layers.emplace_back(prev, cfg.width, rng);
      prev = cfg.width;
    }
    layers.emplace_back(prev, 1, rng);
  }

  ParamList params() {
    ParamList list;
    for (size_t i = 0; i < layers.size(); ++i) {
      list.absorb("net", layers[i].params("layer" + std::to_string(i)));
    }
    return list;
  }

  struct Ctx {
    std::vector<Dense::Ctx> dense;
    std::vector<ReluCtx> act;
  };

  // Returns the per-row scalar scores as a (rows, 1) tensor.
  Tensor forward(const Tensor& x, Ctx& ctx) {
    ctx.dense.resize(layers.size());
    ctx.act.resize(layers.size() - 1);
    Tensor h = x;
    for (size_t i = 0; i + 1 < layers.size(); ++i) {
      h = layers[i].forward(h, ctx.dense[i]);
      h = relu(h, ctx.act[i]);
    }
    return layers.back().forward(h, ctx.dense.back());
  }

  void backward(const Tensor& dscore, const Ctx& ctx) {
    Tensor d = layers.back().backward(dscore, ctx.dense.back());
    for (size_t i = layers.size() - 1; i-- > 0;) {
      d = relu_backward(d, ctx.act[i]);
      d = layers[i].backward(d, ctx.dense[i]);
    }
  }
};

double logaddexp(double a, double b) {
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// log(mean(exp(scores)))
double log_mean_exp(const Tensor& scores) {
  long n = scores.size();
  double hi = scores[0];
  for (long i = 1; i < n; ++i) hi = std::max(hi, scores[i]);
  double sum = 0;
  for (long i = 0; i < n; ++i) sum += std::exp(scores[i] - hi);
  return hi + std::log(sum / static_cast<double>(n));
}

// Core loop shared by the discrete and continuous entry points: rows of x
// pair with rows of z jointly; the marginal shuffles z within the batch.
MiCurve run_mine(const Tensor& x, const Tensor& z, const MineConfig& config) {
  config.validate();
  long n = x.dim(0);
  if (z.dim(0) != n) fail("feature and partner row counts differ");
  if (n < config.batch) fail("need at least one batch of rows");
  long dx = x.dim(1), dz = z.dim(1);

  Rng rng(hash_combine(config.seed, fnv1a("mine")));
  StatNet net(dx + dz, config, rng);
  ParamList params = net.params();
  Adam opt(config.lr);

  long b = config.batch;
  std::vector<long> idx(static_cast<size_t>(b));
  std::vector<long> perm(static_cast<size_t>(b));
  Tensor joint({b, dx + dz}), marg({b, dx + dz});

  MiCurve curve;
  double log_ema = 0;
  bool ema_ready = false;

  for (long step = 1; step <= config.steps; ++step) {
    for (long i = 0; i < b; ++i) idx[static_cast<size_t>(i)] = rng.uniform_int(n);
    for (long i = 0; i < b; ++i) perm[static_cast<size_t>(i)] = i;
    rng.shuffle(perm);

    for (long i = 0; i < b; ++i) {
      long r = idx[static_cast<size_t>(i)];
      long m = idx[static_cast<size_t>(perm[static_cast<size_t>(i)])];
      for (long k = 0; k < dx; ++k) {
        joint.at(i, k) = x.at(r, k);
        marg.at(i, k) = x.at(r, k);
      }
      for (long k = 0; k < dz; ++k) {
        joint.at(i, dx + k) = z.at(r, k);
        marg.at(i, dx + k) = z.at(m, k);
      }
    }

    StatNet::Ctx jctx, mctx;
    Tensor tj = net.forward(joint, jctx);
    Tensor tm = net.forward(marg, mctx);

    double lme = log_mean_exp(tm);
    double mean_j = 0;
    for (long i = 0; i < b; ++i) mean_j += tj[i];
    mean_j /= static_cast<double>(b);
    double bound = mean_j - lme;
    if (!std::isfinite(bound)) {
      fail("non-finite bound at step " + std::to_string(step));
    }
    curve.bounds.push_back(bound);

    // Biased-gradient fix: the denominator in the log term is replaced by an
    // exponential moving average, held fixed within the step.
    if (!ema_ready) {
      log_ema = lme;
      ema_ready = true;
    } else {
      log_ema = logaddexp(std::log(config.ema_decay) + log_ema,
                          std::log1p(-config.ema_decay) + lme);
    }

    params.zero_grads();
    Tensor dj({b, 1}), dm({b, 1});
    for (long i = 0; i < b; ++i) {
      dj[i] = -1.0 / static_cast<double>(b);
      dm[i] = std::exp(tm[i] - log_ema) / static_cast<double>(b);
    }
    net.backward(dj, jctx);
    net.backward(dm, mctx);
    opt.step(params);
  }
  return curve;
}

Tensor one_hot(const std::vector<long>& labels, long class_count) {
  Tensor z({static_cast<long>(labels.size()), class_count});
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      fail("label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(class_count) +
           ")");
    }
    z.at(static_cast<long>(i), labels[i]) = 1.0;
  }
  return z;
}

Tensor batched_gap_features(SkxModel& model, const LoadedData& data) {
  long n = data.size();
  Tensor out;
  const long chunk = 64;
  for (long start = 0; start < n; start += chunk) {
    long end = std::min(n, start + chunk);
    std::vector<size_t> rows;
    for (long i = start; i < end; ++i) rows.push_back(static_cast<size_t>(i));
    Tensor f = model.gap_features(data.batch(rows));
    if (start == 0) out = Tensor({n, f.dim(1)});
    std::copy(f.data(), f.data() + f.size(), out.data() + start * f.dim(1));
  }
  return out;
}

Tensor batched_agg_features(SkxModel& model, const LoadedData& data) {
  long n = data.size();
  Tensor out;
  const long chunk = 64;
  for (long start = 0; start < n; start += chunk) {
    long end = std::min(n, start + chunk);
    std::vector<size_t> rows;
    for (long i = start; i < end; ++i) rows.push_back(static_cast<size_t>(i));
    Tensor f = model.features(data.batch(rows));
    if (start == 0) out = Tensor({n, f.dim(1)});
    std::copy(f.data(), f.data() + f.size(), out.data() + start * f.dim(1));
  }
  return out;
}

}  // namespace

MiCurve estimate_mi(const Tensor& features, const std::vector<long>& labels, long class_count,
                    const MineConfig& config) {
  if (features.dim(0) != static_cast<long>(labels.size())) {
    fail("feature rows and label count differ");
  }
  return run_mine(features, one_hot(labels, class_count), config);
}

MiCurve estimate_mi_pairs(const Tensor& x, const Tensor& z, const MineConfig& config) {
  return run_mine(x, z, config);
}

std::pair<MiCurve, MiCurve> compare_mi(SkxModel& model, const LoadedData& data,
                                       const MineConfig& config) {
  std::vector<long> labels;
  for (const auto& rec : data.manifest.records) labels.push_back(rec.action);
  long k = data.manifest.class_count;

  Tensor pooled = batched_gap_features(model, data);
  Tensor aggregated = batched_agg_features(model, data);
  MiCurve f_curve = estimate_mi(pooled, labels, k, config);
  MiCurve v_curve = estimate_mi(aggregated, labels, k, config);
  return {std::move(f_curve), std::move(v_curve)};
}

std::pair<MiCurve, MiCurve> compare_mi(const Checkpoint& ckpt, const LoadedData& data,
                                       const MineConfig& config) {
  SkxModel model = skx_from_checkpoint(ckpt);
  return compare_mi(model, data, config);
}

}  // namespace skx
