from src.qoi.records import ElasticPointRecord
from src.qoi.reconstruction import ReconstructedTensors, equivalent_stress, reconstruct_stress, reconstruct_tensors
from src.qoi.metrics import QOI_NAMES, QoIAccumulator, cycle_window, cycle_windows, delta_p, dissipation

__all__ = [
    "ElasticPointRecord",
    "ReconstructedTensors",
    "equivalent_stress",
    "reconstruct_stress",
    "reconstruct_tensors",
    "QOI_NAMES",
    "QoIAccumulator",
    "cycle_window",
    "cycle_windows",
    "delta_p",
    "dissipation",
]
