"""Numerical workbench for complex Finsler metrics: connections, curvature, transport and classifiers."""

from .errors import (DimensionError, DomainError, FinslerError, HypothesisError, OrderError,
                     ParamError, SingularMetricError, StiffnessError)
from .geometry import PointState, apply_J, decompose_type, realify
from .jets import Jet
from .metrics import (MetricDefinition, SamplePlan, make_bergman_ball, make_euclidean,
                      make_fubini_study, make_hermitian_nonkahler, make_metric, make_minkowski_tk,
                      make_polydisk_tk, validate)

__version__ = "0.1.0"
