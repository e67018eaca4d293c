from .bundle import (PolicyBundle, load_bundle, load_flat, load_weights_into,
                     save_bundle, save_flat)
from .encoders import conv_feature_shape, encode_instruction, pad_tokens
from .flat import FLAT_VARIANTS, FlatPolicy
from .high import HIGH_VARIANTS, HighPolicy, subtask_onehot
from .low import LOW_KINDS, LOW_VARIANTS, LowPolicy

__all__ = [
    "PolicyBundle", "load_bundle", "load_flat", "load_weights_into",
    "save_bundle", "save_flat",
    "conv_feature_shape", "encode_instruction", "pad_tokens",
    "FLAT_VARIANTS", "FlatPolicy",
    "HIGH_VARIANTS", "HighPolicy", "subtask_onehot",
    "LOW_KINDS", "LOW_VARIANTS", "LowPolicy",
]
