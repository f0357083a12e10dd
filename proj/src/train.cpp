#include "skx/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "skx/io.hpp"

namespace skx {

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "skeletonx") return TrainMode::skeletonx;
  if (s == "baseline_gap") return TrainMode::baseline_gap;
  if (s == "baseline_mixup") return TrainMode::baseline_mixup;
  if (s == "baseline_rotation") return TrainMode::baseline_rotation;
  fail("unknown train mode '" + s + "'");
}

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::skeletonx: return "skeletonx";
    case TrainMode::baseline_gap: return "baseline_gap";
    case TrainMode::baseline_mixup: return "baseline_mixup";
    case TrainMode::baseline_rotation: return "baseline_rotation";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (epochs < 1) fail("epochs must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs >= epochs) fail("warmup_epochs must be below epochs");
  for (long e : decay_epochs) {
    if (e < 1 || e > epochs) fail("decay epoch " + std::to_string(e) + " outside [1, epochs]");
  }
  if (base_lr <= 0) fail("base_lr must be positive");
  if (decay_factor <= 0) fail("decay_factor must be positive");
  if (w_x < 0) fail("w_x must be nonnegative");
  if (effective_batch() < 1) fail("batch_size must be >= 1");
  encoder.validate();
}

long TrainConfig::effective_batch() const {
  if (batch_size > 0) return batch_size;
  return mode == TrainMode::skeletonx ? 32 : 64;
}

std::string TrainConfig::describe() const {
  std::ostringstream os;
  os << "mode = " << to_string(mode) << '\n';
  os << "epochs = " << epochs << '\n';
  os << "base_lr = " << base_lr << '\n';
  os << "momentum = " << momentum << '\n';
  os << "weight_decay = " << weight_decay << '\n';
  os << "warmup_epochs = " << warmup_epochs << '\n';
  os << "decay_epochs = ";
  for (size_t i = 0; i < decay_epochs.size(); ++i) os << (i ? "," : "") << decay_epochs[i];
  os << '\n';
  os << "decay_factor = " << decay_factor << '\n';
  os << "batch_size = " << effective_batch() << '\n';
  os << "w_x = " << w_x << '\n';
  os << "seed = " << seed << '\n';
  os << "blocks = ";
  for (size_t i = 0; i < encoder.blocks.size(); ++i) {
    os << (i ? "," : "") << encoder.blocks[i].channels << ':' << encoder.blocks[i].stride;
  }
  os << '\n';
  os << "temporal_kernel = " << encoder.temporal_kernel << '\n';
  os << "partition = " << to_string(encoder.partition) << '\n';
  os << "proj_channels = " << head.proj_channels << '\n';
  os << "aggregation = " << to_string(head.aggregation) << '\n';
  os << "rotation_theta = " << rotation_theta << '\n';
  os << "mixup_alpha = " << mixup_alpha << '\n';
  return os.str();
}

TrainConfig train_config_from(ConfigMap& cm, TrainConfig base) {
  TrainConfig c = base;
  c.mode = train_mode_from_string(cm.get_string("mode", to_string(c.mode)));
  c.epochs = cm.get_long("epochs", c.epochs);
  c.base_lr = cm.get_double("base_lr", c.base_lr);
  c.momentum = cm.get_double("momentum", c.momentum);
  c.weight_decay = cm.get_double("weight_decay", c.weight_decay);
  c.warmup_epochs = cm.get_long("warmup_epochs", c.warmup_epochs);
  c.decay_epochs = cm.get_long_list("decay_epochs", c.decay_epochs);
  c.decay_factor = cm.get_double("decay_factor", c.decay_factor);
  c.batch_size = cm.get_long("batch_size", c.batch_size);
  c.w_x = cm.get_double("w_x", c.w_x);
  c.seed = static_cast<uint64_t>(cm.get_long("seed", static_cast<long>(c.seed)));
  if (cm.has("blocks")) c.encoder.blocks = parse_blocks(cm.get_string("blocks", ""));
  c.encoder.temporal_kernel = cm.get_long("temporal_kernel", c.encoder.temporal_kernel);
  c.encoder.partition =
      partition_from_string(cm.get_string("partition", to_string(c.encoder.partition)));
  c.head.proj_channels = cm.get_long("proj_channels", c.head.proj_channels);
  c.head.aggregation =
      aggregation_from_string(cm.get_string("aggregation", to_string(c.head.aggregation)));
  c.rotation_theta = cm.get_double("rotation_theta", c.rotation_theta);
  c.mixup_alpha = cm.get_double("mixup_alpha", c.mixup_alpha);
  return c;
}

double lr_at(long epoch, const TrainConfig& config) {
  if (epoch < 1 || epoch > config.epochs) fail("epoch out of range");
  if (config.warmup_epochs > 0 && epoch <= config.warmup_epochs) {
    return config.base_lr * static_cast<double>(epoch) / static_cast<double>(config.warmup_epochs);
  }
  long decays = 0;
  for (long e : config.decay_epochs) {
    if (e <= epoch) ++decays;
  }
  return config.base_lr * std::pow(config.decay_factor, static_cast<double>(decays));
}

Tensor LoadedData::batch(const std::vector<size_t>& rows) const {
  if (rows.empty()) fail("empty batch");
  long t = coords[0].dim(0), v = coords[0].dim(1);
  Tensor out({static_cast<long>(rows.size()), t, v, 3});
  long per = t * v * 3;
  for (size_t i = 0; i < rows.size(); ++i) {
    const Tensor& src = coords[rows[i]];
    std::copy(src.data(), src.data() + per, out.data() + static_cast<long>(i) * per);
  }
  return out;
}

std::vector<long> LoadedData::labels(const std::vector<size_t>& rows) const {
  std::vector<long> out;
  out.reserve(rows.size());
  for (size_t r : rows) out.push_back(manifest.records[r].action);
  return out;
}

LoadedData load_data(const std::string& manifest_path, const SkeletonLayout& layout) {
  LoadedData data;
  data.manifest = read_manifest(manifest_path);
  data.layout = layout;
  long t = -1;
  for (size_t i = 0; i < data.manifest.records.size(); ++i) {
    const auto& rec = data.manifest.records[i];
    SkeletonSequence seq = read_sequence(resolve_relative(manifest_path, rec.path));
    if (seq.joints() != layout.joint_count) {
      fail("sample '" + rec.sample_id + "' has " + std::to_string(seq.joints()) +
           " joints, layout needs " + std::to_string(layout.joint_count));
    }
    if (t == -1) t = seq.frames();
    if (seq.frames() != t) {
      fail("sample '" + rec.sample_id + "' has " + std::to_string(seq.frames()) +
           " frames, expected uniform " + std::to_string(t));
    }
    data.by_id[rec.sample_id] = i;
    data.coords.push_back(std::move(seq.coords));
  }
  return data;
}

LoadedData subset_data(const LoadedData& data, const DatasetManifest& subset) {
  LoadedData out;
  out.manifest = subset;
  out.layout = data.layout;
  for (size_t i = 0; i < subset.records.size(); ++i) {
    auto it = data.by_id.find(subset.records[i].sample_id);
    if (it == data.by_id.end()) {
      fail("subset sample '" + subset.records[i].sample_id + "' not in loaded data");
    }
    out.coords.push_back(data.coords[it->second]);
    out.by_id[subset.records[i].sample_id] = i;
  }
  return out;
}

Tensor augment_rotation(const Tensor& batch, double theta, Rng& rng) {
  long n = batch.dim(0), t = batch.dim(1), v = batch.dim(2);
  Tensor out(batch.shape());
  for (long i = 0; i < n; ++i) {
    double ax = rng.uniform(-theta, theta);
    double ay = rng.uniform(-theta, theta);
    double az = rng.uniform(-theta, theta);
    double cx = std::cos(ax), sx = std::sin(ax);
    double cy = std::cos(ay), sy = std::sin(ay);
    double cz = std::cos(az), sz = std::sin(az);
    // R = Rx * Ry * Rz, applied to every joint coordinate.
    double r[3][3] = {
        {cy * cz, -cy * sz, sy},
        {cx * sz + sx * sy * cz, cx * cz - sx * sy * sz, -sx * cy},
        {sx * sz - cx * sy * cz, sx * cz + cx * sy * sz, cx * cy},
    };
    for (long ti = 0; ti < t; ++ti) {
      for (long vi = 0; vi < v; ++vi) {
        double x = batch.at(i, ti, vi, 0), y = batch.at(i, ti, vi, 1), z = batch.at(i, ti, vi, 2);
        for (long d = 0; d < 3; ++d) {
          out.at(i, ti, vi, d) = r[d][0] * x + r[d][1] * y + r[d][2] * z;
        }
      }
    }
  }
  return out;
}

std::pair<Tensor, Tensor> augment_mixup(const Tensor& batch, const std::vector<long>& labels,
                                        long class_count, double alpha, Rng& rng) {
  long n = batch.dim(0);
  std::vector<long> partner(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) partner[static_cast<size_t>(i)] = i;
  rng.shuffle(partner);

  std::gamma_distribution<double> gamma(alpha, 1.0);
  Tensor mixed(batch.shape());
  Tensor soft({n, class_count});
  long per = batch.size() / n;
  for (long i = 0; i < n; ++i) {
    double g1 = gamma(rng.generator());
    double g2 = gamma(rng.generator());
    double lam = (g1 + g2) > 0 ? g1 / (g1 + g2) : 0.5;
    long j = partner[static_cast<size_t>(i)];
    for (long k = 0; k < per; ++k) {
      mixed[i * per + k] = lam * batch[i * per + k] + (1.0 - lam) * batch[j * per + k];
    }
    soft.at(i, labels[static_cast<size_t>(i)]) += lam;
    soft.at(i, labels[static_cast<size_t>(j)]) += 1.0 - lam;
  }
  return {std::move(mixed), std::move(soft)};
}

namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

long argmax_row(const Tensor& probs, long row) {
  long best = 0;
  for (long c = 1; c < probs.dim(1); ++c) {
    if (probs.at(row, c) > probs.at(row, best)) best = c;
  }
  return best;
}

template <typename ProbsFn>
double accuracy_over(const LoadedData& data, ProbsFn&& probs_fn) {
  long n = data.size();
  if (n == 0) fail("cannot evaluate on an empty set");
  long correct = 0;
  const long chunk = 64;
  for (long start = 0; start < n; start += chunk) {
    long end = std::min(n, start + chunk);
    std::vector<size_t> rows;
    for (long i = start; i < end; ++i) rows.push_back(static_cast<size_t>(i));
    Tensor probs = probs_fn(data.batch(rows));
    for (long i = 0; i < end - start; ++i) {
      if (argmax_row(probs, i) == data.manifest.records[static_cast<size_t>(start + i)].action) {
        ++correct;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

void layout_meta(Checkpoint& ckpt, const SkeletonLayout& layout) {
  ckpt.meta.emplace_back("layout", format_layout(layout));
}

void encoder_meta(Checkpoint& ckpt, const EncoderConfig& cfg) {
  std::ostringstream blocks;
  for (size_t i = 0; i < cfg.blocks.size(); ++i) {
    blocks << (i ? "," : "") << cfg.blocks[i].channels << ':' << cfg.blocks[i].stride;
  }
  ckpt.meta.emplace_back("enc_blocks", blocks.str());
  ckpt.meta.emplace_back("enc_kernel", std::to_string(cfg.temporal_kernel));
  ckpt.meta.emplace_back("enc_partition", to_string(cfg.partition));
}

EncoderConfig encoder_from_meta(const Checkpoint& ckpt) {
  EncoderConfig cfg;
  cfg.blocks = parse_blocks(ckpt.meta_or_fail("enc_blocks"));
  cfg.temporal_kernel = std::stol(ckpt.meta_or_fail("enc_kernel"));
  cfg.partition = partition_from_string(ckpt.meta_or_fail("enc_partition"));
  return cfg;
}

}  // namespace

double evaluate_top1(SkxModel& model, const LoadedData& data, Mask mask) {
  return accuracy_over(data, [&](const Tensor& x) { return model.infer_probs(x, mask); });
}

double evaluate_top1(BaselineModel& model, const LoadedData& data) {
  return accuracy_over(data, [&](const Tensor& x) { return model.infer_probs(x); });
}

Checkpoint snapshot_skx(SkxModel& model) {
  Checkpoint ckpt;
  ckpt.config_hash = model.config_hash();
  ckpt.meta.emplace_back("mode", "skeletonx");
  ckpt.meta.emplace_back("classes", std::to_string(model.classes()));
  encoder_meta(ckpt, model.encoder.config);
  ckpt.meta.emplace_back("head_proj", std::to_string(model.head.proj_channels));
  ckpt.meta.emplace_back("head_agg", to_string(model.head.aggregation));
  layout_meta(ckpt, model.encoder.layout);
  store_params(ckpt, model.params());
  store_params(ckpt, model.state());
  return ckpt;
}

Checkpoint snapshot_baseline(BaselineModel& model) {
  Checkpoint ckpt;
  ckpt.config_hash = model.config_hash();
  ckpt.meta.emplace_back("mode", "baseline");
  ckpt.meta.emplace_back("classes", std::to_string(model.classifier.out()));
  encoder_meta(ckpt, model.encoder.config);
  layout_meta(ckpt, model.encoder.layout);
  store_params(ckpt, model.params());
  store_params(ckpt, model.state());
  return ckpt;
}

bool checkpoint_is_skeletonx(const Checkpoint& ckpt) {
  return ckpt.meta_or_fail("mode") == "skeletonx";
}

SkxModel skx_from_checkpoint(const Checkpoint& ckpt) {
  if (!checkpoint_is_skeletonx(ckpt)) fail("checkpoint does not hold a cross-sample model");
  SkeletonLayout layout = parse_layout_text(ckpt.meta_or_fail("layout"), "checkpoint layout");
  HeadConfig head;
  head.proj_channels = std::stol(ckpt.meta_or_fail("head_proj"));
  head.aggregation = aggregation_from_string(ckpt.meta_or_fail("head_agg"));
  SkxModel model(encoder_from_meta(ckpt), head, layout, std::stol(ckpt.meta_or_fail("classes")),
                 /*seed=*/0);
  restore_params(ckpt, model.params());
  restore_params(ckpt, model.state());
  return model;
}

BaselineModel baseline_from_checkpoint(const Checkpoint& ckpt) {
  if (checkpoint_is_skeletonx(ckpt)) fail("checkpoint holds a cross-sample model");
  SkeletonLayout layout = parse_layout_text(ckpt.meta_or_fail("layout"), "checkpoint layout");
  BaselineModel model(encoder_from_meta(ckpt), layout, std::stol(ckpt.meta_or_fail("classes")),
                      /*seed=*/0);
  restore_params(ckpt, model.params());
  restore_params(ckpt, model.state());
  return model;
}

std::string report_text(const RunReport& report, const TrainConfig& config) {
  std::ostringstream os;
  os << "mode = " << report.mode << '\n';
  os << "seed = " << report.seed << '\n';
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(report.config_hash));
  os << "config_hash = " << hash << '\n';
  os << "steps = " << report.steps << '\n';
  if (report.final_accuracy >= 0) os << "final_accuracy = " << fmt6(report.final_accuracy) << '\n';
  if (report.best_accuracy >= 0) {
    os << "best_accuracy = " << fmt6(report.best_accuracy) << '\n';
    os << "best_epoch = " << report.best_epoch << '\n';
  }
  os << "wall_seconds = " << fmt6(report.wall_seconds) << '\n';
  os << "[config]\n" << config.describe();
  os << "[epoch_loss]\n";
  os << "epoch,intra,dasp,sadp,total\n";
  for (size_t e = 0; e < report.epoch_losses.size(); ++e) {
    const auto& l = report.epoch_losses[e];
    os << (e + 1) << ',' << fmt6(l.intra) << ',' << fmt6(l.dasp) << ',' << fmt6(l.sadp) << ','
       << fmt6(l.total) << '\n';
  }
  return os.str();
}

FitResult fit(const LoadedData& train, const LoadedData* eval_data, const TrainConfig& config) {
  config.validate();
  if (train.size() == 0) fail("training set is empty");
  long n_train = train.size();
  long batch = std::min<long>(config.effective_batch(), n_train);
  bool cross = config.mode == TrainMode::skeletonx;

  PairIndex pair_index;
  if (cross) pair_index = build_pair_index(train.manifest, hash_combine(config.seed, fnv1a("pairs")));

  SkxModel skx_model;
  BaselineModel base_model;
  if (cross) {
    skx_model = SkxModel(config.encoder, config.head, train.layout,
                         train.manifest.class_count, config.seed);
  } else {
    base_model = BaselineModel(config.encoder, train.layout, train.manifest.class_count,
                               config.seed);
  }
  ParamList params = cross ? skx_model.params() : base_model.params();

  Sgd opt(config.momentum, config.weight_decay);
  Rng order_rng(hash_combine(config.seed, fnv1a("order")));
  Rng draw_rng(hash_combine(config.seed, fnv1a("draw")));
  Rng aug_rng(hash_combine(config.seed, fnv1a("augment")));

  auto t0 = std::chrono::steady_clock::now();
  FitResult result;
  result.report.mode = to_string(config.mode);
  result.report.seed = config.seed;
  result.report.config_hash = cross ? skx_model.config_hash() : base_model.config_hash();

  std::ostringstream csv;
  csv << "step,intra,dasp,sadp,total,lr\n";

  double best_acc = -1;
  long best_epoch = -1;
  Checkpoint best_ckpt;
  long step = 0;

  std::vector<size_t> order(static_cast<size_t>(n_train));
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (long epoch = 1; epoch <= config.epochs; ++epoch) {
    double lr = lr_at(epoch, config);
    order_rng.shuffle(order);
    EpochLoss epoch_loss;
    long epoch_steps = 0;

    for (long start = 0; start < n_train; start += batch) {
      long end = std::min(n_train, start + batch);
      std::vector<size_t> rows(order.begin() + start, order.begin() + end);
      std::vector<long> y = train.labels(rows);
      ++step;
      ++epoch_steps;
      params.zero_grads();

      LossBreakdown loss;
      if (cross) {
        std::vector<std::string> ids;
        ids.reserve(rows.size());
        for (size_t r : rows) ids.push_back(train.manifest.records[r].sample_id);
        auto [dasp_ids, sadp_ids] = draw_pair_batch(ids, pair_index, draw_rng);

        std::vector<size_t> all_rows = rows;
        std::vector<long> y_dasp;
        for (const auto& id : dasp_ids) all_rows.push_back(train.by_id.at(id));
        for (const auto& id : sadp_ids) all_rows.push_back(train.by_id.at(id));
        for (const auto& id : dasp_ids) {
          y_dasp.push_back(train.manifest.records[train.by_id.at(id)].action);
        }
        Tensor x_all = train.batch(all_rows);
        StepLoss sl = skx_model.training_step(x_all, end - start, y, y_dasp, config.w_x, true);
        loss = sl.loss;
      } else {
        Tensor x = train.batch(rows);
        Tensor soft;
        if (config.mode == TrainMode::baseline_rotation) {
          x = augment_rotation(x, config.rotation_theta, aug_rng);
        } else if (config.mode == TrainMode::baseline_mixup) {
          auto mixed = augment_mixup(x, y, train.manifest.class_count, config.mixup_alpha, aug_rng);
          x = std::move(mixed.first);
          soft = std::move(mixed.second);
        }
        double l = base_model.training_step(x, y, soft, true);
        loss = total_loss(l, 0, 0, config.w_x);
      }

      if (!std::isfinite(loss.total)) {
        fail("non-finite loss at step " + std::to_string(step));
      }
      opt.step(params, lr);

      epoch_loss.intra += loss.intra;
      epoch_loss.dasp += loss.dasp;
      epoch_loss.sadp += loss.sadp;
      epoch_loss.total += loss.total;
      csv << step << ',' << fmt6(loss.intra) << ',' << fmt6(loss.dasp) << ',' << fmt6(loss.sadp)
          << ',' << fmt6(loss.total) << ',' << fmt6(lr) << '\n';
    }

    epoch_loss.intra /= static_cast<double>(epoch_steps);
    epoch_loss.dasp /= static_cast<double>(epoch_steps);
    epoch_loss.sadp /= static_cast<double>(epoch_steps);
    epoch_loss.total /= static_cast<double>(epoch_steps);
    result.report.epoch_losses.push_back(epoch_loss);

    if (eval_data) {
      // Measure on a float32-rounded copy so the number is exactly what the
      // saved checkpoint will reproduce.
      double acc;
      Checkpoint snap;
      if (cross) {
        SkxModel probe = skx_model;
        quantize_params(probe.params());
        quantize_params(probe.state());
        acc = evaluate_top1(probe, *eval_data);
        snap = snapshot_skx(probe);
      } else {
        BaselineModel probe = base_model;
        quantize_params(probe.params());
        quantize_params(probe.state());
        acc = evaluate_top1(probe, *eval_data);
        snap = snapshot_baseline(probe);
      }
      if (acc > best_acc) {
        best_acc = acc;
        best_epoch = epoch;
        best_ckpt = std::move(snap);
      }
    }
  }

  result.report.steps = step;

  // Final parameters are rounded in place; everything downstream (report
  // accuracy, saved checkpoint, later `eval`) then agrees bit for bit.
  quantize_params(params);
  if (cross) {
    quantize_params(skx_model.state());
    result.last = snapshot_skx(skx_model);
    if (eval_data) result.report.final_accuracy = evaluate_top1(skx_model, *eval_data);
  } else {
    quantize_params(base_model.state());
    result.last = snapshot_baseline(base_model);
    if (eval_data) result.report.final_accuracy = evaluate_top1(base_model, *eval_data);
  }
  if (eval_data) {
    result.report.best_accuracy = best_acc;
    result.report.best_epoch = best_epoch;
    result.best = std::move(best_ckpt);
  } else {
    result.best = result.last;
  }
  result.loss_csv = csv.str();
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace skx
