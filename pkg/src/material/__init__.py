from src.material.params import MaterialParams, lame_from_engineering, MATERIAL_PRESETS
from src.material.hardening import isotropic_hardening
from src.material.tensors import von_mises, deviatoric, double_contract, frobenius_norm

__all__ = [
    "MaterialParams",
    "lame_from_engineering",
    "MATERIAL_PRESETS",
    "isotropic_hardening",
    "von_mises",
    "deviatoric",
    "double_contract",
    "frobenius_norm",
]
