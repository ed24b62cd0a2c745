"""Python bindings for the CSSFN super-resolution library."""

from ._cssfn import (
    ConfigError,
    IoError,
    Network,
    NetworkConfig,
    bicubic_degrade,
    bicubic_upscale,
    compute_depth,
    count_params,
    kspace_truncate,
    lr_schedule,
    measured_depth,
    pixel_shuffle,
    psnr,
    spectral_upsample,
    ssim,
    synth_phantom,
)

__all__ = [
    "ConfigError",
    "IoError",
    "Network",
    "NetworkConfig",
    "bicubic_degrade",
    "bicubic_upscale",
    "compute_depth",
    "count_params",
    "kspace_truncate",
    "lr_schedule",
    "measured_depth",
    "pixel_shuffle",
    "psnr",
    "spectral_upsample",
    "ssim",
    "synth_phantom",
]
