"""Factor-count selection for factor analysis and PCA.

Implements permutation parallel analysis (PA) and its deterministic
(DPA), deflated (DDPA), and estimation-thresholded (DDPA+) successors,
on top of a fast solver for the upper edge of the generalized
Marchenko-Pastur distribution.
"""

from . import errors
from .edge import (
    EdgeProblem,
    EdgeSolution,
    backend_name,
    silverstein_z,
    silverstein_z_prime,
    tracy_widom_scale,
    upper_edge,
)
from .matrix import (
    DataMatrix,
    SvdResult,
    VarianceDistribution,
    standardize,
    svd,
    variance_distribution,
)
from .select import (
    Method,
    SelectionResult,
    SpectralFunctionals,
    StepRecord,
    ddpa_plus_select,
    ddpa_select,
    dpa_select,
    optshrink_functionals,
    pa_select,
)
from .simulate import (
    BernoulliStd,
    ClusteredTree,
    ExperimentResult,
    FactorModelSpec,
    GaussianHetero,
    gen_factor_model,
    run_experiment,
    scenario_names,
)
from .dataio import IngestOptions, ingest, read_atoms, write_matrix

__version__ = "0.1.0"

__all__ = [
    "errors",
    "DataMatrix",
    "SvdResult",
    "VarianceDistribution",
    "standardize",
    "svd",
    "variance_distribution",
    "EdgeProblem",
    "EdgeSolution",
    "backend_name",
    "silverstein_z",
    "silverstein_z_prime",
    "tracy_widom_scale",
    "upper_edge",
    "Method",
    "SelectionResult",
    "SpectralFunctionals",
    "StepRecord",
    "pa_select",
    "dpa_select",
    "ddpa_select",
    "ddpa_plus_select",
    "optshrink_functionals",
    "FactorModelSpec",
    "GaussianHetero",
    "BernoulliStd",
    "ClusteredTree",
    "ExperimentResult",
    "gen_factor_model",
    "run_experiment",
    "scenario_names",
    "IngestOptions",
    "ingest",
    "read_atoms",
    "write_matrix",
    "__version__",
]
