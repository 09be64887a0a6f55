"""shrinklab: numerical laboratory for mean curvature flow self-shrinkers.

Builds sampled immersion charts in arbitrary codimension, evaluates the
submanifold structure equations and every self-shrinker identity as
pointwise residuals, generates Abresch-Langer curves from their ODE,
simulates rescaled curve-shortening flow, and classifies catalog examples
against the spherical/splitting dichotomy.
"""

from .grid import Axis, ParameterGrid, periodic_axis, truncated_axis
from .chart import (
    ImmersionMap,
    SampledChart,
    evaluate_chart,
    make_product,
    make_cylinder,
)
from .tensors import (
    GeometryFields,
    compute_fields,
    first_fundamental,
    second_fundamental,
    derived_tensors,
    normal_derivatives,
)
from .residuals import ResidualReport

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "ParameterGrid",
    "periodic_axis",
    "truncated_axis",
    "ImmersionMap",
    "SampledChart",
    "evaluate_chart",
    "make_product",
    "make_cylinder",
    "GeometryFields",
    "compute_fields",
    "first_fundamental",
    "second_fundamental",
    "derived_tensors",
    "normal_derivatives",
    "ResidualReport",
    "__version__",
]
