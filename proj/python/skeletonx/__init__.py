"""Cross-sample skeleton action recognition lab."""

from skeletonx._core import (
    DatasetManifest,
    MineConfig,
    PairFlags,
    PairIndex,
    SampleRecord,
    SkeletonLayout,
    SynthConfig,
    TrainConfig,
    RunReport,
    build_pair_index,
    compare_mi,
    estimate_mi,
    evaluate,
    export_features,
    generate_synthetic,
    humanoid_layout,
    limited_scale_select,
    lr_at,
    read_layout,
    read_manifest,
    read_sequence,
    train,
    write_manifest,
)

__all__ = [
    "DatasetManifest",
    "MineConfig",
    "PairFlags",
    "PairIndex",
    "SampleRecord",
    "SkeletonLayout",
    "SynthConfig",
    "TrainConfig",
    "RunReport",
    "build_pair_index",
    "compare_mi",
    "estimate_mi",
    "evaluate",
    "export_features",
    "generate_synthetic",
    "humanoid_layout",
    "limited_scale_select",
    "lr_at",
    "read_layout",
    "read_manifest",
    "read_sequence",
    "train",
    "write_manifest",
]
