"""lorentzkit: numerical Lorentzian geometry.

Curvature from exact second-order jets, causal classification, geodesics and
parallel transport, trapped-submanifold analysis with null expansions,
region-level curvature/causality condition checkers, closed-form conformal
transformation laws verified against a rescaled-metric oracle, and compactly
supported conformal perturbation families with signed certificates.
"""

__version__ = "0.1.0"

from . import catalog
from .conditions import (ConditionReport, Region, gs_trace, inclusion_audit,
                         ricci_condition, riem_condition,
                         temporal_certificate, tidal_condition)
from .conformal import (conformal_mean_curvature, conformal_riemann,
                        connection_delta, rescale)
from .errors import LorentzkitError
from .expr import SymbolTable, eval2, parse
from .fields import ExprScalarField, ScalarField, VectorField
from .geodesics import GeodesicSolution, geodesic, parallel_transport
from .geometry import (CausalClass, CurvatureData, TangentVector,
                       TidalOperator, Tolerances, causal_class, christoffel,
                       curvature_data, generic_check, ricci, riemann,
                       signature, tidal)
from .jets import Jet2
from .metric import ConformalScaledMetric, ExprMetricField, MetricField, minkowski_field
from .normal import NormalChart, orthonormal_frame_from
from .perturb import (BumpField, PerturbationFamily, bump, cs_seminorm,
                      positivity_exit_family, trapped_exit_family)
from .specfile import load_spec, parse_spacetime_file
from .submanifold import (Embedding, classify_trapped, induced_metric,
                          mean_curvature, null_frame_and_expansions,
                          shape_tensor)
from .tensors import MetricValue, TensorValue, contract, move_index

__all__ = [
    "BumpField", "CausalClass", "ConditionReport", "ConformalScaledMetric",
    "CurvatureData", "Embedding", "ExprMetricField", "ExprScalarField",
    "GeodesicSolution", "Jet2", "LorentzkitError", "MetricField",
    "MetricValue", "NormalChart", "PerturbationFamily", "Region",
    "ScalarField", "SymbolTable", "TangentVector", "TensorValue",
    "TidalOperator", "Tolerances", "VectorField", "bump", "catalog",
    "causal_class", "christoffel", "classify_trapped",
    "conformal_mean_curvature", "conformal_riemann", "connection_delta",
    "contract", "cs_seminorm", "curvature_data", "eval2", "generic_check",
    "geodesic", "gs_trace", "inclusion_audit", "induced_metric",
    "load_spec", "mean_curvature", "minkowski_field", "move_index",
    "null_frame_and_expansions", "orthonormal_frame_from",
    "parallel_transport", "parse", "parse_spacetime_file",
    "positivity_exit_family", "rescale", "ricci", "ricci_condition",
    "riem_condition", "riemann", "shape_tensor", "signature",
    "temporal_certificate", "tidal", "tidal_condition",
    "trapped_exit_family",
]
