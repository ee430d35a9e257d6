"""Parcel-level urban-area delineation.

Polygonize a road network into parcels, score each parcel with morphological
and functional covariates, select urban parcels with a budget-constrained
vector cellular automaton, merge the selection into urban-area polygons, and
validate the result with rank-size and overlap statistics.
"""

__version__ = "0.1.0"

from .aggregator import UrbanArea, aggregate, read_urban_area, write_urban_area
from .ca_engine import (
    CAParams,
    CAResult,
    ConstraintMask,
    NeighborhoodGraph,
    build_constraint_mask,
    build_neighborhood,
    neighborhood_potential,
    run_ca,
    stochastic_factor,
    transition_probability,
)
from .calibrator import (
    BEIJING_2010,
    LogisticModel,
    classification_accuracy,
    fit_logistic,
    predict,
    predict_many,
)
from .errors import (
    ConfigError,
    EmptyNetworkError,
    FitConvergenceError,
    InputError,
    InsufficientDataError,
    ParcelCAError,
    PipelineStageError,
    UndefinedRateError,
)
from .parcel_attrs import (
    CityContext,
    compute_attributes,
    compute_geometry_attrs,
    compute_poi_density,
    normalize_density,
)
from .parcelizer import AttributeVector, Parcel, ParcelState, buffer_roads, extract_parcels
from .pipeline import PipelineConfig, RunManifest, load_config, run_batch, run_city
from .road_ingest import (
    PointOfInterest,
    RoadNetwork,
    RoadSegment,
    load_network,
    load_pois,
    snap_network,
    trim_dangles,
)
from .validator import PowerLawFit, head_tail_break, overlap_rate, rank_size_fit

__all__ = [
    "AttributeVector",
    "BEIJING_2010",
    "CAParams",
    "CAResult",
    "CityContext",
    "ConfigError",
    "ConstraintMask",
    "EmptyNetworkError",
    "FitConvergenceError",
    "InputError",
    "InsufficientDataError",
    "LogisticModel",
    "NeighborhoodGraph",
    "Parcel",
    "ParcelCAError",
    "ParcelState",
    "PipelineConfig",
    "PipelineStageError",
    "PointOfInterest",
    "PowerLawFit",
    "RoadNetwork",
    "RoadSegment",
    "RunManifest",
    "UndefinedRateError",
    "UrbanArea",
    "aggregate",
    "build_constraint_mask",
    "build_neighborhood",
    "buffer_roads",
    "classification_accuracy",
    "compute_attributes",
    "compute_geometry_attrs",
    "compute_poi_density",
    "extract_parcels",
    "fit_logistic",
    "head_tail_break",
    "load_config",
    "load_network",
    "load_pois",
    "neighborhood_potential",
    "normalize_density",
    "overlap_rate",
    "predict",
    "predict_many",
    "rank_size_fit",
    "read_urban_area",
    "run_batch",
    "run_ca",
    "run_city",
    "snap_network",
    "stochastic_factor",
    "transition_probability",
    "trim_dangles",
    "write_urban_area",
]
