from .ingest import (
    MeasurementMapping,
    MeasurementBatch,
    MeasurementSet,
    Rejection,
    ingest,
    load_mappings,
    save_mappings,
    load_batch_csv,
)
from .initial_state import (
    EstimationError,
    EstimationReport,
    estimate_initial_state,
    discard_first_step,
)

__all__ = [
    "MeasurementMapping",
    "MeasurementBatch",
    "MeasurementSet",
    "Rejection",
    "ingest",
    "load_mappings",
    "save_mappings",
    "load_batch_csv",
    "EstimationError",
    "EstimationReport",
    "estimate_initial_state",
    "discard_first_step",
]
