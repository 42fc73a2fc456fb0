"""Burst denoising with Poisson-Gaussian variance stabilization."""
from .burst import Burst, Layout
from .errors import ContractViolation, FormatError, HomographyFailure, InvalidArgument, StageError
from .noise_model import NoiseParams, SensorCalib, params_from_gain, preset_params, synth_noise
from .plane import Domain, ImagePlane
from .vst import VstKind, VstParams

__version__ = "0.1.0"

__all__ = [
    "Burst", "ContractViolation", "Domain", "FormatError", "HomographyFailure", "ImagePlane",
    "InvalidArgument", "Layout", "NoiseParams", "SensorCalib", "StageError", "VstKind", "VstParams",
    "params_from_gain", "preset_params", "synth_noise",
]
