from src.oracles.tensorial import TensorSeries, integrate_tensorial, synthetic_record
from src.oracles.fine import coarse_view, integrate_fine
from src.oracles.uniaxial import UniaxialResponse, radial_return_uniaxial
from src.oracles.projection import projection_error
from src.oracles.report import max_relative_difference, neuber_residual, verify_grid

__all__ = [
    "TensorSeries",
    "integrate_tensorial",
    "synthetic_record",
    "coarse_view",
    "integrate_fine",
    "UniaxialResponse",
    "radial_return_uniaxial",
    "projection_error",
    "max_relative_difference",
    "neuber_residual",
    "verify_grid",
]
