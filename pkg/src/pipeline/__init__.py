from src.pipeline.field_io import ElasticField, read_elastic_field, read_load_history, write_elastic_field, write_load_history
from src.pipeline.runner import RunConfig, run_correction
from src.pipeline.scatter import emit_scatter

__all__ = [
    "ElasticField",
    "read_elastic_field",
    "read_load_history",
    "write_elastic_field",
    "write_load_history",
    "RunConfig",
    "run_correction",
    "emit_scatter",
]
