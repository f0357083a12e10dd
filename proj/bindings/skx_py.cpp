// Python bindings for the main operations: dataset generation, selection and
// pairing, training, evaluation, one-shot matching and MI estimation.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "skx/checkpoint.hpp"
#include "skx/io.hpp"
#include "skx/mine.hpp"
#include "skx/model.hpp"
#include "skx/oneshot.hpp"
#include "skx/sampler.hpp"
#include "skx/synth.hpp"
#include "skx/train.hpp"

namespace py = pybind11;
using namespace skx;

namespace {

py::array_t<double> to_numpy(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<double> out(shape);
  std::copy(t.data(), t.data() + t.size(), out.mutable_data());
  return out;
}

Tensor from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  std::vector<long> shape(a.ndim());
  for (py::ssize_t i = 0; i < a.ndim(); ++i) shape[static_cast<size_t>(i)] = a.shape(i);
  Tensor t(shape);
  std::copy(a.data(), a.data() + a.size(), t.data());
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cross-sample skeleton action recognition lab";

  py::class_<SampleRecord>(m, "SampleRecord")
      .def(py::init<>())
      .def_readwrite("sample_id", &SampleRecord::sample_id)
      .def_readwrite("performer", &SampleRecord::performer)
      .def_readwrite("setup", &SampleRecord::setup)
      .def_readwrite("action", &SampleRecord::action)
      .def_readwrite("path", &SampleRecord::path);

  py::class_<DatasetManifest>(m, "DatasetManifest")
      .def(py::init<>())
      .def_readwrite("records", &DatasetManifest::records)
      .def_readwrite("class_count", &DatasetManifest::class_count);

  py::class_<SkeletonLayout>(m, "SkeletonLayout")
      .def(py::init<>())
      .def_readwrite("name", &SkeletonLayout::name)
      .def_readwrite("joint_count", &SkeletonLayout::joint_count)
      .def_readwrite("root", &SkeletonLayout::root)
      .def_readwrite("edges", &SkeletonLayout::edges);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("class_count", &SynthConfig::class_count)
      .def_readwrite("performer_count", &SynthConfig::performer_count)
      .def_readwrite("setup_count", &SynthConfig::setup_count)
      .def_readwrite("reps", &SynthConfig::reps)
      .def_readwrite("frames", &SynthConfig::frames)
      .def_readwrite("noise_std", &SynthConfig::noise_std)
      .def_readwrite("seed", &SynthConfig::seed);

  py::class_<PairFlags>(m, "PairFlags")
      .def_readonly("dasp_exact", &PairFlags::dasp_exact)
      .def_readonly("dasp_fallback", &PairFlags::dasp_fallback)
      .def_readonly("sadp_exact", &PairFlags::sadp_exact)
      .def_readonly("sadp_relaxed", &PairFlags::sadp_relaxed)
      .def_readonly("sadp_self", &PairFlags::sadp_self)
      .def("__str__", &PairFlags::str);

  py::class_<PairIndex>(m, "PairIndex")
      .def_readonly("dasp", &PairIndex::dasp)
      .def_readonly("sadp", &PairIndex::sadp)
      .def_readonly("flags", &PairIndex::flags);

  m.def("read_manifest", &read_manifest, py::arg("path"));
  m.def("write_manifest", &write_manifest, py::arg("manifest"), py::arg("path"));
  m.def("read_layout", &read_layout, py::arg("path"));
  m.def("humanoid_layout", &humanoid_layout);
  m.def(
      "read_sequence",
      [](const std::string& path) { return to_numpy(read_sequence(path).coords); },
      py::arg("path"));
  m.def("generate_synthetic", &generate, py::arg("config"), py::arg("out_dir"));

  m.def(
      "limited_scale_select",
      [](const DatasetManifest& manifest, long samples_per_class, long performer_budget,
         bool allow_short) {
        LimitedScaleSpec spec;
        spec.samples_per_class = samples_per_class;
        spec.performer_budget = performer_budget;
        spec.allow_short = allow_short;
        return limited_scale_select(manifest, spec);
      },
      py::arg("manifest"), py::arg("samples_per_class"), py::arg("performer_budget"),
      py::arg("allow_short") = false);
  m.def("build_pair_index", &build_pair_index, py::arg("manifest"), py::arg("seed"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("base_lr", &TrainConfig::base_lr)
      .def_readwrite("momentum", &TrainConfig::momentum)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("warmup_epochs", &TrainConfig::warmup_epochs)
      .def_readwrite("decay_epochs", &TrainConfig::decay_epochs)
      .def_readwrite("decay_factor", &TrainConfig::decay_factor)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("w_x", &TrainConfig::w_x)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_property(
          "mode", [](const TrainConfig& c) { return to_string(c.mode); },
          [](TrainConfig& c, const std::string& s) { c.mode = train_mode_from_string(s); })
      .def_property(
          "blocks",
          [](const TrainConfig& c) {
            std::vector<std::pair<long, long>> out;
            for (const auto& b : c.encoder.blocks) out.emplace_back(b.channels, b.stride);
            return out;
          },
          [](TrainConfig& c, const std::vector<std::pair<long, long>>& blocks) {
            c.encoder.blocks.clear();
            for (const auto& [ch, st] : blocks) c.encoder.blocks.push_back({ch, st});
          });

  py::class_<RunReport>(m, "RunReport")
      .def_readonly("mode", &RunReport::mode)
      .def_readonly("seed", &RunReport::seed)
      .def_readonly("final_accuracy", &RunReport::final_accuracy)
      .def_readonly("best_accuracy", &RunReport::best_accuracy)
      .def_readonly("best_epoch", &RunReport::best_epoch)
      .def_readonly("steps", &RunReport::steps)
      .def_readonly("wall_seconds", &RunReport::wall_seconds);

  m.def("lr_at", &lr_at, py::arg("epoch"), py::arg("config"));

  m.def(
      "train",
      [](const std::string& data_manifest, const std::string& eval_manifest,
         const std::string& layout_path, const TrainConfig& config, const std::string& out_dir) {
        SkeletonLayout layout = read_layout(layout_path);
        LoadedData train_data = load_data(data_manifest, layout);
        LoadedData eval_data;
        bool has_eval = !eval_manifest.empty();
        if (has_eval) eval_data = load_data(eval_manifest, layout);
        FitResult result = fit(train_data, has_eval ? &eval_data : nullptr, config);
        if (!out_dir.empty()) {
          write_checkpoint(result.last, out_dir + "/checkpoint_last.skc");
          write_checkpoint(result.best, out_dir + "/checkpoint_best.skc");
          write_text_file(out_dir + "/report.txt", report_text(result.report, config));
          write_text_file(out_dir + "/loss.csv", result.loss_csv);
        }
        return result.report;
      },
      py::arg("data_manifest"), py::arg("eval_manifest"), py::arg("layout_path"),
      py::arg("config"), py::arg("out_dir") = "",
      "Train from manifests; optionally write checkpoints and reports.");

  m.def(
      "evaluate",
      [](const std::string& checkpoint_path, const std::string& data_manifest,
         const std::string& mask) {
        Checkpoint ckpt = read_checkpoint(checkpoint_path);
        SkeletonLayout layout = parse_layout_text(ckpt.meta_or_fail("layout"), "checkpoint");
        LoadedData data = load_data(data_manifest, layout);
        Mask m_ = Mask::none;
        if (mask == "action") m_ = Mask::action;
        else if (mask == "performer") m_ = Mask::performer;
        else if (mask == "both") m_ = Mask::both;
        else if (mask != "none") fail("unknown mask '" + mask + "'");
        if (checkpoint_is_skeletonx(ckpt)) {
          SkxModel model = skx_from_checkpoint(ckpt);
          return evaluate_top1(model, data, m_);
        }
        if (m_ != Mask::none) fail("masks only apply to skeletonx checkpoints");
        BaselineModel model = baseline_from_checkpoint(ckpt);
        return evaluate_top1(model, data);
      },
      py::arg("checkpoint"), py::arg("data_manifest"), py::arg("mask") = "none");

  m.def(
      "export_features",
      [](const std::string& checkpoint_path, const std::string& data_manifest) {
        Checkpoint ckpt = read_checkpoint(checkpoint_path);
        SkeletonLayout layout = parse_layout_text(ckpt.meta_or_fail("layout"), "checkpoint");
        LoadedData data = load_data(data_manifest, layout);
        std::vector<long> labels;
        for (const auto& rec : data.manifest.records) labels.push_back(rec.action);
        Tensor feats;
        if (checkpoint_is_skeletonx(ckpt)) {
          SkxModel model = skx_from_checkpoint(ckpt);
          feats = extract_features(model, data);
        } else {
          BaselineModel model = baseline_from_checkpoint(ckpt);
          std::vector<size_t> rows;
          for (long i = 0; i < data.size(); ++i) rows.push_back(static_cast<size_t>(i));
          feats = model.gap_features(data.batch(rows));
        }
        return py::make_tuple(to_numpy(feats), labels);
      },
      py::arg("checkpoint"), py::arg("data_manifest"),
      "Returns (features, labels) for every manifest row.");

  py::class_<MineConfig>(m, "MineConfig")
      .def(py::init<>())
      .def_readwrite("steps", &MineConfig::steps)
      .def_readwrite("batch", &MineConfig::batch)
      .def_readwrite("width", &MineConfig::width)
      .def_readwrite("depth", &MineConfig::depth)
      .def_readwrite("lr", &MineConfig::lr)
      .def_readwrite("ema_decay", &MineConfig::ema_decay)
      .def_readwrite("seed", &MineConfig::seed);

  m.def(
      "estimate_mi",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& features,
         const std::vector<long>& labels, long class_count, const MineConfig& config) {
        MiCurve curve = estimate_mi(from_numpy(features), labels, class_count, config);
        return py::make_tuple(curve.converged(), curve.bounds);
      },
      py::arg("features"), py::arg("labels"), py::arg("class_count"), py::arg("config"),
      "Returns (converged_bound, per_step_bounds).");

  m.def(
      "compare_mi",
      [](const std::string& checkpoint_path, const std::string& data_manifest,
         const MineConfig& config) {
        Checkpoint ckpt = read_checkpoint(checkpoint_path);
        SkeletonLayout layout = parse_layout_text(ckpt.meta_or_fail("layout"), "checkpoint");
        LoadedData data = load_data(data_manifest, layout);
        auto [pooled, aggregated] = compare_mi(ckpt, data, config);
        return py::make_tuple(pooled.converged(), aggregated.converged());
      },
      py::arg("checkpoint"), py::arg("data_manifest"), py::arg("config"),
      "Returns (pooled_mi, aggregated_mi).");
}
