"""zaklab: numerical laboratory for Zakharov-system regularity experiments.

Subpackages and modules:

* ``geometry``    frequency-set families, measures, Minkowski containment
* ``relations``   resonance functions and certified interval enclosures
* ``convolution`` exact/grid indicator-convolution norms, lower-bound check
* ``oscillatory`` bilinear oscillatory integrals and their L2 norms
* ``scaling``     N-sweeps, slope fits, regularity-region classifier
* ``simulator``   lattice pseudospectral integrator and cross-validation
* ``service``     FastAPI app plus pydantic schemas and handlers
* ``cli``         thin command-line client over the service handlers
"""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    Ball,
    Box,
    CaseId,
    ConstructionCase,
    FreqSet,
    build_sets,
    contains,
    measure,
    minkowski_diff_subset,
)
from .oscillatory import (  # noqa: F401
    QuadratureSpec,
    RegularityTriple,
    WeightVariant,
    lhs_norm,
    rhs_norm,
)
from .scaling import classify, fit_slope, predicted_exponent, sweep  # noqa: F401
