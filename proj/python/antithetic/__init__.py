"""Sharpness-balanced identity training pipeline (python surface of the C++ core)."""

from antithetic._core import (  # noqa: F401
    AugmentConfig,
    EnhancerKind,
    Image,
    LossMode,
    LossOutput,
    LossWeights,
    Manifest,
    Model,
    ModelConfig,
    Origin,
    PartitionLabel,
    ResampleFilter,
    Rng,
    SampleRecord,
    SynthConfig,
    TrainConfig,
    Triplet,
    ccl,
    center_shift,
    cmc_map,
    cosine,
    dense_labels,
    dft2d_magnitude,
    distance_matrix,
    distance_stats,
    downsample_counterpart,
    enhance_classical,
    enhance_external,
    forward,
    gaussian_blur,
    generate_antithetical,
    hflip,
    init_model,
    inter_loss,
    intra_loss,
    load_image,
    load_manifest,
    load_model,
    lr_at,
    partition,
    random_erase,
    resize,
    save_image,
    save_manifest,
    save_model,
    score_manifest,
    sharpness,
    sharpness_from_magnitudes,
    softmax_ce,
    split_threshold,
    synth_corpus,
    to_grayscale,
    total_loss,
    train,
    trihard,
)

__version__ = "0.1.0"
