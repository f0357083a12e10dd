// The cross-sample aggregation model: encoder plus the disentangle /
// aggregate / classify head, with the seven-route training step, masked
// inference for the ablation, and the plain global-average-pool baseline.
//
// Route bookkeeping runs on row indices into one concatenated batch
// [originals | DASP partners | SADP partners]; the encoder and both
// refinement branches run once per step regardless of route count.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "skx/backbone.hpp"
#include "skx/nn.hpp"
#include "skx/objective.hpp"
#include "skx/types.hpp"

namespace skx {

enum class Aggregation { concat, matmul, cross_attention };

Aggregation aggregation_from_string(const std::string& s);
std::string to_string(Aggregation a);

struct HeadConfig {
  long proj_channels = 0;  // C_p; 0 picks C/2
  Aggregation aggregation = Aggregation::concat;

  std::string describe() const;
};

// Test-surface mirror of the conceptual types: one sample's refined features
// and one aggregated vector with its provenance tags.
struct DisentangledPair {
  Tensor f_s;  // (V, C), performer-related
  Tensor f_t;  // (T', C), action-related
  std::string sample_id;
};

struct AggregatedFeature {
  Tensor vec;  // (C_p)
  std::string action_source;     // sample supplying F_t
  std::string performer_source;  // sample supplying F_s
};

enum class Mask { none, action, performer, both };

struct StepLoss {
  LossBreakdown loss;
};

class SkxModel {
 public:
  SkxModel() = default;
  SkxModel(const EncoderConfig& enc_config, const HeadConfig& head_config,
           const SkeletonLayout& layout, long class_count, uint64_t seed);

  // --- training ---------------------------------------------------------
  // x_all is the concatenated (3n, T, V, 3) batch; y holds the originals'
  // labels, y_dasp the drawn DASP partners'. Accumulates gradients for one
  // optimizer step and returns the loss breakdown.
  StepLoss training_step(const Tensor& x_all, long n, const std::vector<long>& y,
                         const std::vector<long>& y_dasp, double w_x, bool update_running);

  // The degenerate single-route step: intra-sample aggregation of x only.
  // This is what the composite objective collapses to when every partner is
  // the sample itself and the cross weight is zero.
  StepLoss intra_only_step(const Tensor& x, const std::vector<long>& y, bool update_running);

  // --- inference --------------------------------------------------------
  Tensor infer_probs(const Tensor& x, Mask mask = Mask::none);  // (n, K)
  Tensor features(const Tensor& x);                             // (n, C_p)
  Tensor gap_features(const Tensor& x);                         // (n, C)

  // --- single-sample test surface --------------------------------------
  // Evaluation-mode refinement and aggregation on explicit values.
  DisentangledPair refine(const SkeletonSequence& seq, const std::string& sample_id);
  Tensor refine_spatial_eval(const Tensor& f_e);   // (T',V,C) -> (V,C)
  Tensor refine_temporal_eval(const Tensor& f_e);  // (T',V,C) -> (T',C)
  AggregatedFeature aggregate_pair(const DisentangledPair& spatial_from,
                                   const DisentangledPair& temporal_from);
  LabelDistribution classify(const AggregatedFeature& feature);

  // --- plumbing ---------------------------------------------------------
  ParamList params();       // every trainable tensor
  ParamList state();        // normalization running statistics
  std::map<std::string, long> parameter_counts() const;
  uint64_t config_hash() const;

  long proj_in() const;
  long proj_channels() const { return proj.out(); }
  long classes() const { return classifier.out(); }

  Encoder encoder;
  HeadConfig head;
  PerChannelAffine sp_affine, tp_affine;
  BatchNorm sp_bn, tp_bn;
  Dense proj;
  Dense classifier;

 private:
  struct RefineCtx {
    Encoder::Ctx enc;
    PerChannelAffine::Ctx sp_aff;
    BatchNorm::Ctx sp_norm;
    ReluCtx sp_relu;
    PerChannelAffine::Ctx tp_aff;
    BatchNorm::Ctx tp_norm;
    ReluCtx tp_relu;
    long n = 0, t = 0, v = 0, c = 0;
    Tensor f_s;  // (N, V, C)
    Tensor f_t;  // (N, T', C)
  };

  struct AggCtx {
    std::vector<long> sp_idx, tp_idx;
    Tensor fs_g, ft_g;          // gathered (n, V, C) / (n, T', C)
    Tensor pooled_s, pooled_t;  // (n, C), post-mask
    Tensor attn;                // cross-attention weights (n, T', V)
    Tensor attn_out;            // (n, T', C)
    Dense::Ctx proj_ctx;
    Mask mask = Mask::none;
  };

  void refine_forward(const Tensor& x, RefineCtx& ctx, bool training, bool update_running);
  void refine_backward(const Tensor& dfs_all, const Tensor& dft_all, const RefineCtx& ctx);
  Tensor aggregate_forward(const RefineCtx& rctx, const std::vector<long>& sp_idx,
                           const std::vector<long>& tp_idx, AggCtx& actx, Mask mask);
  void aggregate_backward(const Tensor& dagg, AggCtx& actx, Tensor& dfs_all, Tensor& dft_all);

  friend class ModelProbe;
};

class BaselineModel {
 public:
  BaselineModel() = default;
  BaselineModel(const EncoderConfig& enc_config, const SkeletonLayout& layout, long class_count,
                uint64_t seed);

  // Accumulates gradients for one step. Labels may be soft (mixup): if
  // soft_labels has rows, it overrides the hard labels.
  double training_step(const Tensor& x, const std::vector<long>& labels, const Tensor& soft_labels,
                       bool update_running);

  Tensor infer_probs(const Tensor& x);
  Tensor gap_features(const Tensor& x);

  ParamList params();
  ParamList state();
  std::map<std::string, long> parameter_counts() const;
  uint64_t config_hash() const;

  Encoder encoder;
  Dense classifier;
};

}  // namespace skx
