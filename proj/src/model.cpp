#include "skx/model.hpp"

#include <cmath>
#include <sstream>

namespace skx {

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "concat") return Aggregation::concat;
  if (s == "matmul") return Aggregation::matmul;
  if (s == "cross_attention") return Aggregation::cross_attention;
  fail("unknown aggregation '" + s + "' (expected concat|matmul|cross_attention)");
}

std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::concat: return "concat";
    case Aggregation::matmul: return "matmul";
    case Aggregation::cross_attention: return "cross_attention";
  }
  return "?";
}

std::string HeadConfig::describe() const {
  std::ostringstream os;
  os << "proj=" << proj_channels << ";agg=" << to_string(aggregation);
  return os.str();
}

namespace {

// (N, A, C) -> (N, C), arithmetic mean over the middle axis.
Tensor pool_middle(const Tensor& x) {
  long n = x.dim(0), a = x.dim(1), c = x.dim(2);
  Tensor out({n, c});
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < a; ++j) {
      for (long k = 0; k < c; ++k) out.at(i, k) += x.at(i, j, k);
    }
  }
  for (long i = 0; i < out.size(); ++i) out[i] /= static_cast<double>(a);
  return out;
}

Tensor gather_rows(const Tensor& x, const std::vector<long>& idx) {
  long a = x.dim(1), c = x.dim(2);
  Tensor out({static_cast<long>(idx.size()), a, c});
  for (size_t i = 0; i < idx.size(); ++i) {
    const double* src = x.data() + idx[i] * a * c;
    double* dst = out.data() + static_cast<long>(i) * a * c;
    std::copy(src, src + a * c, dst);
  }
  return out;
}

}  // namespace

SkxModel::SkxModel(const EncoderConfig& enc_config, const HeadConfig& head_config,
                   const SkeletonLayout& layout, long class_count, uint64_t seed)
    : head(head_config) {
  if (class_count < 2) fail("need at least two classes");
  Rng rng(seed);
  encoder = Encoder(enc_config, layout, rng);
  long c = enc_config.out_channels();
  if (head.proj_channels <= 0) head.proj_channels = std::max<long>(c / 2, 1);
  sp_affine = PerChannelAffine(c);
  tp_affine = PerChannelAffine(c);
  sp_bn = BatchNorm(c);
  tp_bn = BatchNorm(c);
  long in = head.aggregation == Aggregation::concat ? 2 * c : c;
  proj = Dense(in, head.proj_channels, rng);
  classifier = Dense(head.proj_channels, class_count, rng);
}

long SkxModel::proj_in() const { return proj.in(); }

void SkxModel::refine_forward(const Tensor& x, RefineCtx& ctx, bool training,
                              bool update_running) {
  Tensor f_e = encoder.forward(x, ctx.enc, training, update_running);
  ctx.n = f_e.dim(0);
  ctx.t = f_e.dim(1);
  ctx.v = f_e.dim(2);
  ctx.c = f_e.dim(3);

  // Spatial branch: average over time, then channel affine, norm, relu.
  Tensor ap_t({ctx.n, ctx.v, ctx.c});
  for (long i = 0; i < ctx.n; ++i) {
    for (long t = 0; t < ctx.t; ++t) {
      for (long v = 0; v < ctx.v; ++v) {
        for (long k = 0; k < ctx.c; ++k) ap_t.at(i, v, k) += f_e.at(i, t, v, k);
      }
    }
  }
  for (long i = 0; i < ap_t.size(); ++i) ap_t[i] /= static_cast<double>(ctx.t);
  Tensor s1 = sp_affine.forward(ap_t.reshaped({ctx.n * ctx.v, ctx.c}), ctx.sp_aff);
  Tensor s2 = sp_bn.forward(s1, ctx.sp_norm, training, update_running);
  ctx.f_s = relu(s2, ctx.sp_relu).reshaped({ctx.n, ctx.v, ctx.c});

  // Temporal branch: average over joints, own parameters.
  Tensor ap_s({ctx.n, ctx.t, ctx.c});
  for (long i = 0; i < ctx.n; ++i) {
    for (long t = 0; t < ctx.t; ++t) {
      for (long v = 0; v < ctx.v; ++v) {
        for (long k = 0; k < ctx.c; ++k) ap_s.at(i, t, k) += f_e.at(i, t, v, k);
      }
    }
  }
  for (long i = 0; i < ap_s.size(); ++i) ap_s[i] /= static_cast<double>(ctx.v);
  Tensor t1 = tp_affine.forward(ap_s.reshaped({ctx.n * ctx.t, ctx.c}), ctx.tp_aff);
  Tensor t2 = tp_bn.forward(t1, ctx.tp_norm, training, update_running);
  ctx.f_t = relu(t2, ctx.tp_relu).reshaped({ctx.n, ctx.t, ctx.c});
}

void SkxModel::refine_backward(const Tensor& dfs_all, const Tensor& dft_all,
                               const RefineCtx& ctx) {
  Tensor ds1 = relu_backward(dfs_all.reshaped({ctx.n * ctx.v, ctx.c}), ctx.sp_relu);
  Tensor ds2 = sp_bn.backward(ds1, ctx.sp_norm);
  Tensor dap_t = sp_affine.backward(ds2, ctx.sp_aff).reshaped({ctx.n, ctx.v, ctx.c});

  Tensor dt1 = relu_backward(dft_all.reshaped({ctx.n * ctx.t, ctx.c}), ctx.tp_relu);
  Tensor dt2 = tp_bn.backward(dt1, ctx.tp_norm);
  Tensor dap_s = tp_affine.backward(dt2, ctx.tp_aff).reshaped({ctx.n, ctx.t, ctx.c});

  // Undo the two pooling means: every frame shares the spatial grad, every
  // joint shares the temporal grad.
  Tensor dfe({ctx.n, ctx.t, ctx.v, ctx.c});
  double inv_t = 1.0 / static_cast<double>(ctx.t);
  double inv_v = 1.0 / static_cast<double>(ctx.v);
  for (long i = 0; i < ctx.n; ++i) {
    for (long t = 0; t < ctx.t; ++t) {
      for (long v = 0; v < ctx.v; ++v) {
        for (long k = 0; k < ctx.c; ++k) {
          dfe.at(i, t, v, k) = dap_t.at(i, v, k) * inv_t + dap_s.at(i, t, k) * inv_v;
        }
      }
    }
  }
  encoder.backward(dfe, ctx.enc);
}

Tensor SkxModel::aggregate_forward(const RefineCtx& rctx, const std::vector<long>& sp_idx,
                                   const std::vector<long>& tp_idx, AggCtx& actx, Mask mask) {
  actx.sp_idx = sp_idx;
  actx.tp_idx = tp_idx;
  actx.mask = mask;
  actx.fs_g = gather_rows(rctx.f_s, sp_idx);
  actx.ft_g = gather_rows(rctx.f_t, tp_idx);
  long m = actx.fs_g.dim(0), c = rctx.c;

  if (head.aggregation == Aggregation::cross_attention) {
    // Temporal feature attends over joints of the spatial feature.
    long t = actx.ft_g.dim(1), v = actx.fs_g.dim(1);
    double scale = 1.0 / std::sqrt(static_cast<double>(c));
    actx.attn = Tensor({m, t, v});
    actx.attn_out = Tensor({m, t, c});
    for (long i = 0; i < m; ++i) {
      for (long ti = 0; ti < t; ++ti) {
        double mx = -1e300;
        for (long vi = 0; vi < v; ++vi) {
          double s = 0;
          for (long k = 0; k < c; ++k) s += actx.ft_g.at(i, ti, k) * actx.fs_g.at(i, vi, k);
          actx.attn.at(i, ti, vi) = s * scale;
          mx = std::max(mx, actx.attn.at(i, ti, vi));
        }
        double sum = 0;
        for (long vi = 0; vi < v; ++vi) {
          actx.attn.at(i, ti, vi) = std::exp(actx.attn.at(i, ti, vi) - mx);
          sum += actx.attn.at(i, ti, vi);
        }
        for (long vi = 0; vi < v; ++vi) {
          actx.attn.at(i, ti, vi) /= sum;
          for (long k = 0; k < c; ++k) {
            actx.attn_out.at(i, ti, k) += actx.attn.at(i, ti, vi) * actx.fs_g.at(i, vi, k);
          }
        }
      }
    }
    Tensor pooled = pool_middle(actx.attn_out);
    return proj.forward(pooled, actx.proj_ctx);
  }

  actx.pooled_s = pool_middle(actx.fs_g);
  actx.pooled_t = pool_middle(actx.ft_g);
  if (mask == Mask::performer || mask == Mask::both) actx.pooled_s.fill(0.0);
  if (mask == Mask::action || mask == Mask::both) actx.pooled_t.fill(0.0);

  if (head.aggregation == Aggregation::matmul) {
    Tensor prod({m, c});
    for (long i = 0; i < prod.size(); ++i) prod[i] = actx.pooled_s[i] * actx.pooled_t[i];
    return proj.forward(prod, actx.proj_ctx);
  }

  Tensor concat({m, 2 * c});
  for (long i = 0; i < m; ++i) {
    for (long k = 0; k < c; ++k) {
      concat.at(i, k) = actx.pooled_s.at(i, k);
      concat.at(i, c + k) = actx.pooled_t.at(i, k);
    }
  }
  return proj.forward(concat, actx.proj_ctx);
}

void SkxModel::aggregate_backward(const Tensor& dagg, AggCtx& actx, Tensor& dfs_all,
                                  Tensor& dft_all) {
  Tensor dproj_in = proj.backward(dagg, actx.proj_ctx);
  long m = actx.fs_g.dim(0);
  long v = actx.fs_g.dim(1), t = actx.ft_g.dim(1), c = actx.fs_g.dim(2);

  if (head.aggregation == Aggregation::cross_attention) {
    double scale = 1.0 / std::sqrt(static_cast<double>(c));
    double inv_t = 1.0 / static_cast<double>(t);
    for (long i = 0; i < m; ++i) {
      for (long ti = 0; ti < t; ++ti) {
        // dagg was pooled over time.
        std::vector<double> dout(static_cast<size_t>(c));
        for (long k = 0; k < c; ++k) dout[static_cast<size_t>(k)] = dproj_in.at(i, k) * inv_t;

        std::vector<double> dattn(static_cast<size_t>(v), 0.0);
        double dot = 0;
        for (long vi = 0; vi < v; ++vi) {
          double d = 0;
          for (long k = 0; k < c; ++k) d += dout[static_cast<size_t>(k)] * actx.fs_g.at(i, vi, k);
          dattn[static_cast<size_t>(vi)] = d;
          dot += d * actx.attn.at(i, ti, vi);
        }
        for (long vi = 0; vi < v; ++vi) {
          double a = actx.attn.at(i, ti, vi);
          double dscore = a * (dattn[static_cast<size_t>(vi)] - dot);
          for (long k = 0; k < c; ++k) {
            dft_all.at(actx.tp_idx[static_cast<size_t>(i)], ti, k) +=
                dscore * scale * actx.fs_g.at(i, vi, k);
            dfs_all.at(actx.sp_idx[static_cast<size_t>(i)], vi, k) +=
                dscore * scale * actx.ft_g.at(i, ti, k) +
                a * dout[static_cast<size_t>(k)];
          }
        }
      }
    }
    return;
  }

  Tensor dpooled_s({m, c}), dpooled_t({m, c});
  if (head.aggregation == Aggregation::matmul) {
    for (long i = 0; i < m * c; ++i) {
      dpooled_s[i] = dproj_in[i] * actx.pooled_t[i];
      dpooled_t[i] = dproj_in[i] * actx.pooled_s[i];
    }
  } else {
    for (long i = 0; i < m; ++i) {
      for (long k = 0; k < c; ++k) {
        dpooled_s.at(i, k) = dproj_in.at(i, k);
        dpooled_t.at(i, k) = dproj_in.at(i, c + k);
      }
    }
  }
  if (actx.mask == Mask::performer || actx.mask == Mask::both) dpooled_s.fill(0.0);
  if (actx.mask == Mask::action || actx.mask == Mask::both) dpooled_t.fill(0.0);

  double inv_v = 1.0 / static_cast<double>(v);
  double inv_t = 1.0 / static_cast<double>(t);
  for (long i = 0; i < m; ++i) {
    long si = actx.sp_idx[static_cast<size_t>(i)];
    long ti_row = actx.tp_idx[static_cast<size_t>(i)];
    for (long vi = 0; vi < v; ++vi) {
      for (long k = 0; k < c; ++k) dfs_all.at(si, vi, k) += dpooled_s.at(i, k) * inv_v;
    }
    for (long ti = 0; ti < t; ++ti) {
      for (long k = 0; k < c; ++k) dft_all.at(ti_row, ti, k) += dpooled_t.at(i, k) * inv_t;
    }
  }
}

StepLoss SkxModel::training_step(const Tensor& x_all, long n, const std::vector<long>& y,
                                 const std::vector<long>& y_dasp, double w_x,
                                 bool update_running) {
  if (x_all.dim(0) != 3 * n) fail("training batch must hold originals, DASP and SADP partners");
  RefineCtx rctx;
  refine_forward(x_all, rctx, /*training=*/true, update_running);

  std::vector<long> orig(static_cast<size_t>(n)), dasp(static_cast<size_t>(n)),
      sadp(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    orig[static_cast<size_t>(i)] = i;
    dasp[static_cast<size_t>(i)] = n + i;
    sadp[static_cast<size_t>(i)] = 2 * n + i;
  }

  Tensor dfs_all(rctx.f_s.shape());
  Tensor dft_all(rctx.f_t.shape());

  // One route: gather -> aggregate -> classify -> CE; backward immediately,
  // scaling the gradient by the route's weight in the total objective.
  auto route = [&](const std::vector<long>& sp, const std::vector<long>& tp,
                   const std::vector<long>& labels, double weight) {
    AggCtx actx;
    Tensor agg = aggregate_forward(rctx, sp, tp, actx, Mask::none);
    Dense::Ctx cctx;
    Tensor logits = classifier.forward(agg, cctx);
    Tensor dlogits(logits.shape());
    double ce = softmax_ce_grad(logits, labels, weight, dlogits);
    Tensor dagg = classifier.backward(dlogits, cctx);
    aggregate_backward(dagg, actx, dfs_all, dft_all);
    return ce;
  };

  // Intra-sample predictions: the original, the SADP partner (same action,
  // same label) and the DASP partner under its own label.
  double intra = route(orig, orig, y, 1.0);
  intra += route(sadp, sadp, y, 1.0);
  intra += route(dasp, dasp, y_dasp, 1.0);

  // DASP crossings: the label follows the temporal (action) source.
  double l_dasp = route(dasp, orig, y, w_x);
  l_dasp += route(orig, dasp, y_dasp, w_x);

  // SADP crossings: both sides carry the original label.
  double l_sadp = route(sadp, orig, y, w_x);
  l_sadp += route(orig, sadp, y, w_x);

  refine_backward(dfs_all, dft_all, rctx);

  StepLoss out;
  out.loss = total_loss(intra, l_dasp, l_sadp, w_x);
  return out;
}

StepLoss SkxModel::intra_only_step(const Tensor& x, const std::vector<long>& y,
                                   bool update_running) {
  RefineCtx rctx;
  refine_forward(x, rctx, /*training=*/true, update_running);
  std::vector<long> idx(static_cast<size_t>(rctx.n));
  for (long i = 0; i < rctx.n; ++i) idx[static_cast<size_t>(i)] = i;

  Tensor dfs_all(rctx.f_s.shape());
  Tensor dft_all(rctx.f_t.shape());
  AggCtx actx;
  Tensor agg = aggregate_forward(rctx, idx, idx, actx, Mask::none);
  Dense::Ctx cctx;
  Tensor logits = classifier.forward(agg, cctx);
  Tensor dlogits(logits.shape());
  double ce = softmax_ce_grad(logits, y, 1.0, dlogits);
  Tensor dagg = classifier.backward(dlogits, cctx);
  aggregate_backward(dagg, actx, dfs_all, dft_all);
  refine_backward(dfs_all, dft_all, rctx);

  StepLoss out;
  out.loss = total_loss(ce, 0.0, 0.0, 0.0);
  return out;
}

Tensor SkxModel::infer_probs(const Tensor& x, Mask mask) {
  RefineCtx rctx;
  refine_forward(x, rctx, /*training=*/false, /*update_running=*/false);
  std::vector<long> idx(static_cast<size_t>(rctx.n));
  for (long i = 0; i < rctx.n; ++i) idx[static_cast<size_t>(i)] = i;
  AggCtx actx;
  Tensor agg = aggregate_forward(rctx, idx, idx, actx, mask);
  Dense::Ctx cctx;
  Tensor logits = classifier.forward(agg, cctx);
  return softmax_rows(logits);
}

Tensor SkxModel::features(const Tensor& x) {
  RefineCtx rctx;
  refine_forward(x, rctx, /*training=*/false, /*update_running=*/false);
  std::vector<long> idx(static_cast<size_t>(rctx.n));
  for (long i = 0; i < rctx.n; ++i) idx[static_cast<size_t>(i)] = i;
  AggCtx actx;
  return aggregate_forward(rctx, idx, idx, actx, Mask::none);
}

Tensor SkxModel::gap_features(const Tensor& x) {
  Encoder::Ctx ectx;
  Tensor f_e = encoder.forward(x, ectx, /*training=*/false, /*update_running=*/false);
  long n = f_e.dim(0), t = f_e.dim(1), v = f_e.dim(2), c = f_e.dim(3);
  Tensor out({n, c});
  for (long i = 0; i < n; ++i) {
    for (long ti = 0; ti < t; ++ti) {
      for (long vi = 0; vi < v; ++vi) {
        for (long k = 0; k < c; ++k) out.at(i, k) += f_e.at(i, ti, vi, k);
      }
    }
  }
  for (long i = 0; i < out.size(); ++i) out[i] /= static_cast<double>(t * v);
  return out;
}

DisentangledPair SkxModel::refine(const SkeletonSequence& seq, const std::string& sample_id) {
  Tensor x = seq.coords.reshaped({1, seq.frames(), seq.joints(), 3});
  RefineCtx rctx;
  refine_forward(x, rctx, /*training=*/false, /*update_running=*/false);
  DisentangledPair pair;
  pair.sample_id = sample_id;
  pair.f_s = rctx.f_s.reshaped({rctx.v, rctx.c});
  pair.f_t = rctx.f_t.reshaped({rctx.t, rctx.c});
  return pair;
}

Tensor SkxModel::refine_spatial_eval(const Tensor& f_e) {
  long t = f_e.dim(0), v = f_e.dim(1), c = f_e.dim(2);
  Tensor ap({v, c});
  for (long ti = 0; ti < t; ++ti) {
    for (long vi = 0; vi < v; ++vi) {
      for (long k = 0; k < c; ++k) ap.at(vi, k) += f_e.at(ti, vi, k);
    }
  }
  for (long i = 0; i < ap.size(); ++i) ap[i] /= static_cast<double>(t);
  PerChannelAffine::Ctx actx;
  BatchNorm::Ctx bctx;
  ReluCtx rctx;
  Tensor a = sp_affine.forward(ap, actx);
  Tensor b = sp_bn.forward(a, bctx, /*training=*/false, /*update_running=*/false);
  return relu(b, rctx);
}

Tensor SkxModel::refine_temporal_eval(const Tensor& f_e) {
  long t = f_e.dim(0), v = f_e.dim(1), c = f_e.dim(2);
  Tensor ap({t, c});
  for (long ti = 0; ti < t; ++ti) {
    for (long vi = 0; vi < v; ++vi) {
      for (long k = 0; k < c; ++k) ap.at(ti, k) += f_e.at(ti, vi, k);
    }
  }
  for (long i = 0; i < ap.size(); ++i) ap[i] /= static_cast<double>(v);
  PerChannelAffine::Ctx actx;
  BatchNorm::Ctx bctx;
  ReluCtx rctx;
  Tensor a = tp_affine.forward(ap, actx);
  Tensor b = tp_bn.forward(a, bctx, /*training=*/false, /*update_running=*/false);
  return relu(b, rctx);
}

AggregatedFeature SkxModel::aggregate_pair(const DisentangledPair& spatial_from,
                                           const DisentangledPair& temporal_from) {
  long c = spatial_from.f_s.dim(1);
  if (temporal_from.f_t.dim(1) != c) fail("channel mismatch between pair features");
  Tensor fs = spatial_from.f_s.reshaped({1, spatial_from.f_s.dim(0), c});
  Tensor ft = temporal_from.f_t.reshaped({1, temporal_from.f_t.dim(0), c});
  Tensor pooled_s = pool_middle(fs);
  Tensor pooled_t = pool_middle(ft);

  Tensor in;
  if (head.aggregation == Aggregation::concat) {
    in = Tensor({1, 2 * c});
    for (long k = 0; k < c; ++k) {
      in.at(0, k) = pooled_s.at(0, k);
      in.at(0, c + k) = pooled_t.at(0, k);
    }
  } else if (head.aggregation == Aggregation::matmul) {
    in = Tensor({1, c});
    for (long k = 0; k < c; ++k) in.at(0, k) = pooled_s.at(0, k) * pooled_t.at(0, k);
  } else {
    fail("aggregate_pair supports the concat and matmul strategies");
  }
  Dense::Ctx pctx;
  Tensor out = proj.forward(in, pctx);
  AggregatedFeature feat;
  feat.vec = out.reshaped({out.dim(1)});
  feat.action_source = temporal_from.sample_id;
  feat.performer_source = spatial_from.sample_id;
  return feat;
}

LabelDistribution SkxModel::classify(const AggregatedFeature& feature) {
  Dense::Ctx cctx;
  Tensor logits = classifier.forward(feature.vec.reshaped({1, feature.vec.size()}), cctx);
  Tensor probs = softmax_rows(logits);
  LabelDistribution dist;
  dist.probs.assign(probs.data(), probs.data() + probs.size());
  return dist;
}

ParamList SkxModel::params() {
  ParamList list;
  list.absorb("encoder", encoder.params(""));
  list.absorb("head/sp_affine", sp_affine.params(""));
  list.absorb("head/sp_bn", sp_bn.params(""));
  list.absorb("head/tp_affine", tp_affine.params(""));
  list.absorb("head/tp_bn", tp_bn.params(""));
  list.absorb("head/proj", proj.params(""));
  list.absorb("classifier", classifier.params(""));
  return list;
}

ParamList SkxModel::state() {
  ParamList list;
  list.absorb("encoder", encoder.state(""));
  list.absorb("head/sp_bn", sp_bn.state(""));
  list.absorb("head/tp_bn", tp_bn.state(""));
  return list;
}

std::map<std::string, long> SkxModel::parameter_counts() const {
  auto* self = const_cast<SkxModel*>(this);
  std::map<std::string, long> counts;
  counts["encoder"] = self->encoder.params("").scalar_count();
  long head_n = self->sp_affine.params("").scalar_count() + self->sp_bn.params("").scalar_count() +
                self->tp_affine.params("").scalar_count() + self->tp_bn.params("").scalar_count() +
                self->proj.params("").scalar_count();
  counts["head"] = head_n;
  counts["classifier"] = self->classifier.params("").scalar_count();
  return counts;
}

uint64_t SkxModel::config_hash() const {
  std::ostringstream os;
  os << encoder.config.describe() << ";" << head.describe() << ";classes=" << classifier.out()
     << ";mode=skeletonx";
  return hash_combine(encoder.config.hash(encoder.layout), fnv1a(os.str()));
}

BaselineModel::BaselineModel(const EncoderConfig& enc_config, const SkeletonLayout& layout,
                             long class_count, uint64_t seed) {
  if (class_count < 2) fail("need at least two classes");
  Rng rng(seed);
  encoder = Encoder(enc_config, layout, rng);
  classifier = Dense(enc_config.out_channels(), class_count, rng);
}

double BaselineModel::training_step(const Tensor& x, const std::vector<long>& labels,
                                    const Tensor& soft_labels, bool update_running) {
  Encoder::Ctx ectx;
  Tensor f_e = encoder.forward(x, ectx, /*training=*/true, update_running);
  long n = f_e.dim(0), t = f_e.dim(1), v = f_e.dim(2), c = f_e.dim(3);

  Tensor gap({n, c});
  for (long i = 0; i < n; ++i) {
    for (long ti = 0; ti < t; ++ti) {
      for (long vi = 0; vi < v; ++vi) {
        for (long k = 0; k < c; ++k) gap.at(i, k) += f_e.at(i, ti, vi, k);
      }
    }
  }
  for (long i = 0; i < gap.size(); ++i) gap[i] /= static_cast<double>(t * v);

  Dense::Ctx cctx;
  Tensor logits = classifier.forward(gap, cctx);
  Tensor dlogits(logits.shape());
  double loss = soft_labels.size() > 0
                    ? softmax_ce_soft_grad(logits, soft_labels, 1.0, dlogits)
                    : softmax_ce_grad(logits, labels, 1.0, dlogits);
  Tensor dgap = classifier.backward(dlogits, cctx);

  Tensor dfe({n, t, v, c});
  double inv = 1.0 / static_cast<double>(t * v);
  for (long i = 0; i < n; ++i) {
    for (long ti = 0; ti < t; ++ti) {
      for (long vi = 0; vi < v; ++vi) {
        for (long k = 0; k < c; ++k) dfe.at(i, ti, vi, k) = dgap.at(i, k) * inv;
      }
    }
  }
  encoder.backward(dfe, ectx);
  return loss;
}

Tensor BaselineModel::infer_probs(const Tensor& x) {
  Tensor gap = gap_features(x);
  Dense::Ctx cctx;
  return softmax_rows(classifier.forward(gap, cctx));
}

Tensor BaselineModel::gap_features(const Tensor& x) {
  Encoder::Ctx ectx;
  Tensor f_e = encoder.forward(x, ectx, /*training=*/false, /*update_running=*/false);
  long n = f_e.dim(0), t = f_e.dim(1), v = f_e.dim(2), c = f_e.dim(3);
  Tensor out({n, c});
  for (long i = 0; i < n; ++i) {
    for (long ti = 0; ti < t; ++ti) {
      for (long vi = 0; vi < v; ++vi) {
        for (long k = 0; k < c; ++k) out.at(i, k) += f_e.at(i, ti, vi, k);
      }
    }
  }
  for (long i = 0; i < out.size(); ++i) out[i] /= static_cast<double>(t * v);
  return out;
}

ParamList BaselineModel::params() {
  ParamList list;
  list.absorb("encoder", encoder.params(""));
  list.absorb("classifier", classifier.params(""));
  return list;
}

ParamList BaselineModel::state() {
  ParamList list;
  list.absorb("encoder", encoder.state(""));
  return list;
}

std::map<std::string, long> BaselineModel::parameter_counts() const {
  auto* self = const_cast<BaselineModel*>(this);
  return {{"encoder", self->encoder.params("").scalar_count()},
          {"classifier", self->classifier.params("").scalar_count()}};
}

uint64_t BaselineModel::config_hash() const {
  std::ostringstream os;
  os << encoder.config.describe() << ";classes=" << classifier.out() << ";mode=baseline";
  return hash_combine(encoder.config.hash(encoder.layout), fnv1a(os.str()));
}

}  // namespace skx
