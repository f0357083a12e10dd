// The skx command line tool: every workflow behind one binary.
//
// Exit codes: 0 success, 1 usage error, 2 data error (unreadable or invalid
// inputs), 3 runtime failure (training or estimation blew up). The split
// between 2 and 3 follows a phase marker each command advances once its
// inputs are fully loaded and validated.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "skx/checkpoint.hpp"
#include "skx/configfile.hpp"
#include "skx/ingest.hpp"
#include "skx/io.hpp"
#include "skx/mine.hpp"
#include "skx/model.hpp"
#include "skx/oneshot.hpp"
#include "skx/sampler.hpp"
#include "skx/synth.hpp"
#include "skx/train.hpp"

namespace {

int g_exit_on_error = 2;  // 2 while loading inputs; bumped to 3 for compute

void computing() { g_exit_on_error = 3; }

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Resolves a config-file path value against the config's own directory, so
// config files can move together with their data.
std::string from_config_dir(const std::string& config_path, const std::string& value) {
  if (value.empty()) return value;
  return skx::resolve_relative(config_path, value);
}

skx::SkeletonLayout layout_for(const std::string& layout_path, const std::string& manifest_path) {
  if (!layout_path.empty()) return skx::read_layout(layout_path);
  // Convention: the generator and ingest both leave layout.txt next to the
  // manifest.
  return skx::read_layout(skx::resolve_relative(manifest_path, "layout.txt"));
}

// ---------------------------------------------------------------- synth --

struct SynthArgs {
  std::string out;
  std::string config;
  long classes = -1, performers = -1, setups = -1, reps = -1, frames = -1;
  double noise = -1;
  long seed = -1;
};

int cmd_synth(const SynthArgs& a) {
  skx::SynthConfig cfg;
  if (!a.config.empty()) {
    skx::ConfigMap cm = skx::ConfigMap::load(a.config);
    cfg.class_count = cm.get_long("class_count", cfg.class_count);
    cfg.performer_count = cm.get_long("performer_count", cfg.performer_count);
    cfg.setup_count = cm.get_long("setup_count", cfg.setup_count);
    cfg.reps = cm.get_long("reps", cfg.reps);
    cfg.frames = cm.get_long("frames", cfg.frames);
    cfg.noise_std = cm.get_double("noise_std", cfg.noise_std);
    cfg.seed = static_cast<uint64_t>(cm.get_long("seed", static_cast<long>(cfg.seed)));
    cm.reject_unknown();
  }
  if (a.classes >= 0) cfg.class_count = a.classes;
  if (a.performers >= 0) cfg.performer_count = a.performers;
  if (a.setups >= 0) cfg.setup_count = a.setups;
  if (a.reps >= 0) cfg.reps = a.reps;
  if (a.frames >= 0) cfg.frames = a.frames;
  if (a.noise >= 0) cfg.noise_std = a.noise;
  if (a.seed >= 0) cfg.seed = static_cast<uint64_t>(a.seed);

  computing();
  skx::DatasetManifest manifest = skx::generate(cfg, a.out);

  std::ostringstream report;
  report << "samples = " << manifest.records.size() << '\n';
  report << "classes = " << manifest.class_count << '\n';
  report << "[config]\n";
  report << "class_count = " << cfg.class_count << '\n';
  report << "performer_count = " << cfg.performer_count << '\n';
  report << "setup_count = " << cfg.setup_count << '\n';
  report << "reps = " << cfg.reps << '\n';
  report << "frames = " << cfg.frames << '\n';
  report << "noise_std = " << cfg.noise_std << '\n';
  report << "seed = " << cfg.seed << '\n';
  skx::write_text_file(join_path(a.out, "synth_report.txt"), report.str());
  std::cout << "wrote " << manifest.records.size() << " samples to " << a.out << '\n';
  return 0;
}

// --------------------------------------------------------------- ingest --

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string layout;
  long frames = 64;
  double epsilon = 1e-8;
  bool bone = false;
};

// NTU-style stems look like S001C001P001R001A001; setup, performer and the
// 1-based action class come out of the name.
bool parse_ntu_stem(const std::string& stem, long& setup, long& performer, long& action) {
  long c = 0, r = 0;
  if (std::sscanf(stem.c_str(), "S%3ldC%3ldP%3ldR%3ldA%3ld", &setup, &c, &performer, &r,
                  &action) != 5) {
    return false;
  }
  return stem.size() == 20;
}

int cmd_ingest(const IngestArgs& a) {
  std::vector<std::string> files;
  for (const auto& in : a.inputs) {
    if (std::filesystem::is_directory(in)) {
      for (const auto& entry : std::filesystem::directory_iterator(in)) {
        if (entry.path().extension() == ".skeleton") files.push_back(entry.path().string());
      }
    } else {
      files.push_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) skx::fail("no .skeleton files found");

  skx::SkeletonLayout layout;
  if (a.bone) {
    if (a.layout.empty()) skx::fail("--bone needs --layout");
    layout = skx::read_layout(a.layout);
  }

  skx::PreprocessConfig pp;
  pp.target_frames = a.frames;
  pp.empty_frame_epsilon = a.epsilon;

  computing();
  skx::DatasetManifest manifest;
  for (const auto& file : files) {
    std::string stem = std::filesystem::path(file).stem().string();
    long setup = 0, performer = 0, action = 0;
    if (!parse_ntu_stem(stem, setup, performer, action)) {
      skx::fail("file name '" + stem + "' does not follow the SsssCcccPpppRrrrAaaa pattern");
    }
    skx::SkeletonSequence seq = skx::parse_ntu_skeleton(skx::read_text_file(file));
    seq = skx::preprocess(seq, pp);
    if (a.bone) seq = skx::to_bone(seq, layout);
    std::string rel = stem + ".skx";
    skx::write_sequence(seq, join_path(a.out, rel));
    manifest.records.push_back({stem, performer, setup, action - 1, rel});
  }
  std::sort(manifest.records.begin(), manifest.records.end(),
            [](const skx::SampleRecord& x, const skx::SampleRecord& y) {
              return x.sample_id < y.sample_id;
            });
  long max_action = 0;
  for (const auto& rec : manifest.records) max_action = std::max(max_action, rec.action);
  manifest.class_count = max_action + 1;

  skx::write_manifest(manifest, join_path(a.out, "manifest.csv"));
  if (!a.layout.empty()) {
    skx::write_text_file(join_path(a.out, "layout.txt"),
                         skx::format_layout(skx::read_layout(a.layout)));
  }
  std::cout << "ingested " << manifest.records.size() << " files to " << a.out << '\n';
  return 0;
}

// --------------------------------------------------------------- sample --

struct SampleArgs {
  std::string manifest;
  std::string out;
  long n = 10;
  long p = 3;
  bool allow_short = false;
  std::string n_grid;
};

int cmd_sample(const SampleArgs& a) {
  skx::DatasetManifest manifest = skx::read_manifest(a.manifest);

  std::vector<long> grid;
  if (!a.n_grid.empty()) {
    if (a.out.find("{n}") == std::string::npos) {
      skx::fail("--n-grid needs an --out pattern containing {n}");
    }
    std::stringstream ss(a.n_grid);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(std::stol(tok));
  } else {
    grid.push_back(a.n);
  }

  computing();
  for (long n : grid) {
    skx::LimitedScaleSpec spec;
    spec.samples_per_class = n;
    spec.performer_budget = a.p;
    spec.allow_short = a.allow_short;
    skx::DatasetManifest selected = skx::limited_scale_select(manifest, spec);
    std::string out = a.out;
    auto pos = out.find("{n}");
    if (pos != std::string::npos) out.replace(pos, 3, std::to_string(n));
    // Record paths resolve against the manifest that holds them, so a subset
    // written elsewhere needs them re-anchored.
    std::filesystem::path out_dir = std::filesystem::absolute(out).parent_path();
    for (auto& rec : selected.records) {
      std::filesystem::path abs =
          std::filesystem::absolute(skx::resolve_relative(a.manifest, rec.path));
      std::error_code ec;
      std::filesystem::path rel = std::filesystem::relative(abs, out_dir, ec);
      rec.path = (ec || rel.empty()) ? abs.string() : rel.string();
    }
    skx::write_manifest(selected, out);
    std::cout << "n=" << n << ": " << selected.records.size() << " rows -> " << out << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- pairs --

struct PairsArgs {
  std::string manifest;
  std::string out;
  long seed = 1;
};

int cmd_pairs(const PairsArgs& a) {
  skx::DatasetManifest manifest = skx::read_manifest(a.manifest);
  computing();
  skx::PairIndex index = skx::build_pair_index(manifest, static_cast<uint64_t>(a.seed));
  skx::Rng rng(skx::hash_combine(static_cast<uint64_t>(a.seed), skx::fnv1a("draw")));
  skx::write_text_file(a.out, skx::format_pairs(manifest, index, rng));
  std::cout << "wrote pairs for " << manifest.records.size() << " samples to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------- train --

struct TrainArgs {
  std::string config;
  std::string out;
  std::string data;
  std::string eval;
  std::string layout;
  long seed = -1;
  long threads = 1;
};

int cmd_train(const TrainArgs& a) {
  skx::ConfigMap cm = skx::ConfigMap::load(a.config);
  std::string data_path = from_config_dir(a.config, cm.get_string("data", ""));
  std::string eval_path = from_config_dir(a.config, cm.get_string("eval", ""));
  std::string layout_path = from_config_dir(a.config, cm.get_string("layout", ""));
  skx::TrainConfig cfg = skx::train_config_from(cm);
  cm.reject_unknown();

  if (!a.data.empty()) data_path = a.data;
  if (!a.eval.empty()) eval_path = a.eval;
  if (!a.layout.empty()) layout_path = a.layout;
  if (a.seed >= 0) cfg.seed = static_cast<uint64_t>(a.seed);
  if (data_path.empty()) skx::fail("no training data: give data= in the config or --data");
  cfg.validate();

  skx::SkeletonLayout layout = layout_for(layout_path, data_path);
  skx::LoadedData train = skx::load_data(data_path, layout);
  skx::LoadedData eval_data;
  bool has_eval = !eval_path.empty();
  if (has_eval) eval_data = skx::load_data(eval_path, layout);

  computing();
  skx::FitResult result = skx::fit(train, has_eval ? &eval_data : nullptr, cfg);

  skx::write_checkpoint(result.last, join_path(a.out, "checkpoint_last.skc"));
  skx::write_checkpoint(result.best, join_path(a.out, "checkpoint_best.skc"));
  skx::write_text_file(join_path(a.out, "report.txt"), skx::report_text(result.report, cfg));
  skx::write_text_file(join_path(a.out, "loss.csv"), result.loss_csv);

  if (result.report.final_accuracy >= 0) {
    std::cout << "final_accuracy = " << fmt6(result.report.final_accuracy) << '\n';
    std::cout << "best_accuracy = " << fmt6(result.report.best_accuracy) << " (epoch "
              << result.report.best_epoch << ")\n";
  }
  std::cout << "wrote " << join_path(a.out, "checkpoint_last.skc") << '\n';
  return 0;
}

// ----------------------------------------------------------------- eval --

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string layout;
  std::string mask = "none";
};

skx::Mask mask_from_string(const std::string& s) {
  if (s == "none") return skx::Mask::none;
  if (s == "action") return skx::Mask::action;
  if (s == "performer") return skx::Mask::performer;
  if (s == "both") return skx::Mask::both;
  skx::fail("unknown mask '" + s + "'");
}

int cmd_eval(const EvalArgs& a) {
  skx::Checkpoint ckpt = skx::read_checkpoint(a.checkpoint);
  skx::SkeletonLayout layout =
      a.layout.empty() ? skx::parse_layout_text(ckpt.meta_or_fail("layout"), "checkpoint layout")
                       : skx::read_layout(a.layout);
  skx::LoadedData data = skx::load_data(a.data, layout);
  skx::Mask mask = mask_from_string(a.mask);

  double acc;
  std::string mode;
  if (skx::checkpoint_is_skeletonx(ckpt)) {
    skx::SkxModel model = skx::skx_from_checkpoint(ckpt);
    computing();
    acc = skx::evaluate_top1(model, data, mask);
    mode = "skeletonx";
  } else {
    if (mask != skx::Mask::none) skx::fail("masks only apply to skeletonx checkpoints");
    skx::BaselineModel model = skx::baseline_from_checkpoint(ckpt);
    computing();
    acc = skx::evaluate_top1(model, data);
    mode = "baseline";
  }
  std::cout << "mode = " << mode << '\n';
  std::cout << "mask = " << a.mask << '\n';
  std::cout << "samples = " << data.size() << '\n';
  std::cout << "accuracy = " << fmt6(acc) << '\n';
  return 0;
}

// -------------------------------------------------------------- oneshot --

struct OneShotArgs {
  std::string config;
  std::string out;
  long seed = -1;
};

int cmd_oneshot(const OneShotArgs& a) {
  skx::ConfigMap cm = skx::ConfigMap::load(a.config);
  std::string data_path = from_config_dir(a.config, cm.get_string("data", ""));
  std::string layout_path = from_config_dir(a.config, cm.get_string("layout", ""));
  if (data_path.empty()) skx::fail("config needs data=");

  skx::OneShotConfig cfg;
  cfg.train = skx::train_config_from(cm, cfg.train);
  for (long c : cm.get_long_list("novel_classes", {})) cfg.novel_classes.insert(c);
  std::string exemplars = cm.get_string("exemplars", "");
  std::stringstream ss(exemplars);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto colon = tok.find(':');
    if (colon == std::string::npos) skx::fail("exemplars entries look like class:sample_id");
    cfg.exemplar_ids[std::stol(tok.substr(0, colon))] = tok.substr(colon + 1);
  }
  cfg.distance = skx::distance_from_string(cm.get_string("distance", to_string(cfg.distance)));
  cfg.base_class_limit = cm.get_long("base_class_limit", cfg.base_class_limit);
  cm.reject_unknown();
  if (a.seed >= 0) cfg.train.seed = static_cast<uint64_t>(a.seed);
  if (cfg.novel_classes.empty()) skx::fail("config needs novel_classes=");

  skx::LoadedData all = skx::load_data(data_path, layout_for(layout_path, data_path));

  computing();
  skx::OneShotResult result = skx::run_oneshot(all, cfg);

  std::ostringstream report;
  report << "novel_accuracy = " << fmt6(result.novel_accuracy) << '\n';
  report << "base_classes_used = " << result.base_classes_used << '\n';
  report << "queries = " << result.query_count << '\n';
  report << "distance = " << to_string(cfg.distance) << '\n';
  report << "[config]\n" << cfg.train.describe();
  skx::write_text_file(join_path(a.out, "oneshot_report.txt"), report.str());

  std::ostringstream confusion;
  confusion << "true,predicted,count\n";
  for (const auto& [truth, row] : result.confusion) {
    for (const auto& [predicted, count] : row) {
      confusion << truth << ',' << predicted << ',' << count << '\n';
    }
  }
  skx::write_text_file(join_path(a.out, "confusion.csv"), confusion.str());

  std::ostringstream feats;
  feats << "class";
  for (long k = 0; k < result.exemplar_features.dim(1); ++k) feats << ",f" << k;
  feats << '\n';
  long row = 0;
  for (long c : cfg.novel_classes) {
    feats << c;
    for (long k = 0; k < result.exemplar_features.dim(1); ++k) {
      feats << ',' << fmt6(result.exemplar_features.at(row, k));
    }
    feats << '\n';
    ++row;
  }
  skx::write_text_file(join_path(a.out, "exemplar_features.csv"), feats.str());
  skx::write_checkpoint(result.base_checkpoint, join_path(a.out, "checkpoint_base.skc"));

  std::cout << "novel_accuracy = " << fmt6(result.novel_accuracy) << '\n';
  return 0;
}

// ------------------------------------------------------------------- mi --

struct MiArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  skx::MineConfig cfg;
  long seed = -1;
};

int cmd_mi(const MiArgs& a) {
  skx::MineConfig cfg = a.cfg;
  if (a.seed >= 0) cfg.seed = static_cast<uint64_t>(a.seed);
  cfg.validate();
  skx::Checkpoint ckpt = skx::read_checkpoint(a.checkpoint);
  skx::SkeletonLayout layout =
      skx::parse_layout_text(ckpt.meta_or_fail("layout"), "checkpoint layout");
  skx::LoadedData data = skx::load_data(a.data, layout);

  computing();
  auto [pooled, aggregated] = skx::compare_mi(ckpt, data, cfg);

  auto curve_csv = [](const skx::MiCurve& curve) {
    std::ostringstream os;
    os << "step,bound\n";
    for (size_t i = 0; i < curve.bounds.size(); ++i) {
      os << (i + 1) << ',' << fmt6(curve.bounds[i]) << '\n';
    }
    return os.str();
  };
  skx::write_text_file(join_path(a.out, "mi_pooled.csv"), curve_csv(pooled));
  skx::write_text_file(join_path(a.out, "mi_aggregated.csv"), curve_csv(aggregated));

  std::ostringstream report;
  report << "pooled_mi = " << fmt6(pooled.converged()) << '\n';
  report << "aggregated_mi = " << fmt6(aggregated.converged()) << '\n';
  report << "[config]\n";
  report << "steps = " << cfg.steps << '\n';
  report << "batch = " << cfg.batch << '\n';
  report << "width = " << cfg.width << '\n';
  report << "depth = " << cfg.depth << '\n';
  report << "lr = " << cfg.lr << '\n';
  report << "ema_decay = " << cfg.ema_decay << '\n';
  report << "seed = " << cfg.seed << '\n';
  skx::write_text_file(join_path(a.out, "mi_report.txt"), report.str());

  std::cout << "pooled_mi = " << fmt6(pooled.converged()) << '\n';
  std::cout << "aggregated_mi = " << fmt6(aggregated.converged()) << '\n';
  return 0;
}

// ------------------------------------------------------- export-features --

struct ExportArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
};

int cmd_export_features(const ExportArgs& a) {
  skx::Checkpoint ckpt = skx::read_checkpoint(a.checkpoint);
  skx::SkeletonLayout layout =
      skx::parse_layout_text(ckpt.meta_or_fail("layout"), "checkpoint layout");
  skx::LoadedData data = skx::load_data(a.data, layout);

  computing();
  skx::Tensor feats;
  if (skx::checkpoint_is_skeletonx(ckpt)) {
    skx::SkxModel model = skx::skx_from_checkpoint(ckpt);
    feats = skx::extract_features(model, data);
  } else {
    skx::BaselineModel model = skx::baseline_from_checkpoint(ckpt);
    std::vector<size_t> rows;
    for (long i = 0; i < data.size(); ++i) rows.push_back(static_cast<size_t>(i));
    feats = model.gap_features(data.batch(rows));
  }

  std::ostringstream os;
  os << "sample_id,label";
  for (long k = 0; k < feats.dim(1); ++k) os << ",f" << k;
  os << '\n';
  for (long i = 0; i < feats.dim(0); ++i) {
    const auto& rec = data.manifest.records[static_cast<size_t>(i)];
    os << rec.sample_id << ',' << rec.action;
    for (long k = 0; k < feats.dim(1); ++k) os << ',' << fmt6(feats.at(i, k));
    os << '\n';
  }
  skx::write_text_file(a.out, os.str());
  std::cout << "wrote " << feats.dim(0) << " feature rows to " << a.out << '\n';
  return 0;
}

// --------------------------------------------------------------- params --

struct ParamsArgs {
  std::string config;
  std::string layout;
  long classes = 8;
};

int cmd_params(const ParamsArgs& a) {
  skx::TrainConfig cfg;
  if (!a.config.empty()) {
    skx::ConfigMap cm = skx::ConfigMap::load(a.config);
    cm.get_string("data", "");
    cm.get_string("eval", "");
    cm.get_string("layout", "");
    cfg = skx::train_config_from(cm);
    cm.reject_unknown();
  }
  skx::SkeletonLayout layout =
      a.layout.empty() ? skx::humanoid_layout() : skx::read_layout(a.layout);

  computing();
  skx::SkxModel model(cfg.encoder, cfg.head, layout, a.classes, 0);
  skx::BaselineModel baseline(cfg.encoder, layout, a.classes, 0);

  long total = 0;
  for (const auto& [part, count] : model.parameter_counts()) {
    std::cout << part << " = " << count << '\n';
    total += count;
  }
  long baseline_total = 0;
  for (const auto& [part, count] : baseline.parameter_counts()) baseline_total += count;
  std::cout << "total = " << total << '\n';
  std::cout << "baseline_total = " << baseline_total << '\n';
  std::cout << "head_overhead = " << (total - baseline_total) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skeleton action recognition lab"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic skeleton dataset");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--config", synth_args.config, "config file");
  synth->add_option("--classes", synth_args.classes, "action classes");
  synth->add_option("--performers", synth_args.performers, "performer count");
  synth->add_option("--setups", synth_args.setups, "camera setups");
  synth->add_option("--reps", synth_args.reps, "repetitions per cell");
  synth->add_option("--frames", synth_args.frames, "frames per sequence");
  synth->add_option("--noise", synth_args.noise, "coordinate noise std");
  synth->add_option("--seed", synth_args.seed, "generator seed");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "convert NTU .skeleton files");
  ingest->add_option("--in", ingest_args.inputs, "input files or directories")->required();
  ingest->add_option("--out", ingest_args.out, "output directory")->required();
  ingest->add_option("--layout", ingest_args.layout, "layout file (copied next to the manifest)");
  ingest->add_option("--frames", ingest_args.frames, "target frame count");
  ingest->add_option("--epsilon", ingest_args.epsilon, "empty-frame threshold");
  ingest->add_flag("--bone", ingest_args.bone, "store bone vectors instead of joints");

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "limited-scale sample selection");
  sample->add_option("--manifest", sample_args.manifest, "source manifest")->required();
  sample->add_option("--out", sample_args.out, "output manifest (use {n} with --n-grid)")
      ->required();
  sample->add_option("--n", sample_args.n, "samples per class");
  sample->add_option("--p", sample_args.p, "highest performer id kept");
  sample->add_flag("--allow-short", sample_args.allow_short, "accept deficient classes");
  sample->add_option("--n-grid", sample_args.n_grid, "comma list of n values");

  PairsArgs pairs_args;
  auto* pairs = app.add_subcommand("pairs", "emit a drawn partner file");
  pairs->add_option("--manifest", pairs_args.manifest, "source manifest")->required();
  pairs->add_option("--out", pairs_args.out, "output pair file")->required();
  pairs->add_option("--seed", pairs_args.seed, "draw seed");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", train_args.config, "train config file")->required();
  train->add_option("--out", train_args.out, "output directory")->required();
  train->add_option("--data", train_args.data, "training manifest (overrides config)");
  train->add_option("--eval", train_args.eval, "held-out manifest (overrides config)");
  train->add_option("--layout", train_args.layout, "layout file (overrides config)");
  train->add_option("--seed", train_args.seed, "seed override");
  train->add_option("--threads", train_args.threads, "worker cap; 1 is the deterministic mode");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")->required();
  eval->add_option("--data", eval_args.data, "manifest to evaluate")->required();
  eval->add_option("--layout", eval_args.layout, "layout override");
  eval->add_option("--mask", eval_args.mask, "none|action|performer|both");

  OneShotArgs oneshot_args;
  auto* oneshot = app.add_subcommand("oneshot", "one-shot protocol");
  oneshot->add_option("--config", oneshot_args.config, "one-shot config file")->required();
  oneshot->add_option("--out", oneshot_args.out, "output directory")->required();
  oneshot->add_option("--seed", oneshot_args.seed, "seed override");

  MiArgs mi_args;
  auto* mi = app.add_subcommand("mi", "mutual-information comparison");
  mi->add_option("--checkpoint", mi_args.checkpoint, "skeletonx checkpoint")->required();
  mi->add_option("--data", mi_args.data, "manifest for the feature arms")->required();
  mi->add_option("--out", mi_args.out, "output directory")->required();
  mi->add_option("--steps", mi_args.cfg.steps, "estimator steps");
  mi->add_option("--batch", mi_args.cfg.batch, "estimator batch");
  mi->add_option("--width", mi_args.cfg.width, "statistics-network width");
  mi->add_option("--depth", mi_args.cfg.depth, "statistics-network depth");
  mi->add_option("--lr", mi_args.cfg.lr, "estimator learning rate");
  mi->add_option("--ema-decay", mi_args.cfg.ema_decay, "denominator EMA decay");
  mi->add_option("--seed", mi_args.seed, "seed override");

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export-features", "write features plus labels as CSV");
  exp->add_option("--checkpoint", export_args.checkpoint, "checkpoint file")->required();
  exp->add_option("--data", export_args.data, "manifest to featurize")->required();
  exp->add_option("--out", export_args.out, "output CSV")->required();

  ParamsArgs params_args;
  auto* params = app.add_subcommand("params", "print parameter counts");
  params->add_option("--config", params_args.config, "train config file");
  params->add_option("--layout", params_args.layout, "layout file (default: built-in humanoid)");
  params->add_option("--classes", params_args.classes, "classifier width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (ingest->parsed()) return cmd_ingest(ingest_args);
    if (sample->parsed()) return cmd_sample(sample_args);
    if (pairs->parsed()) return cmd_pairs(pairs_args);
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (oneshot->parsed()) return cmd_oneshot(oneshot_args);
    if (mi->parsed()) return cmd_mi(mi_args);
    if (exp->parsed()) return cmd_export_features(export_args);
    if (params->parsed()) return cmd_params(params_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return g_exit_on_error;
  }
  return 1;
}
