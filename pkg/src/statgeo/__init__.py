"""Geometry of statistical hypersurfaces ``x_{n+1} = ln sum_a exp f_a(x)``.

Submodules: ``expr`` (parser and second-order forward AD), ``model``
(families and Gibbs primitives), ``geometry`` (metric, curvature, entropy),
``ideal`` and ``superideal`` (affine families and their closed forms),
``perturb`` (small-coupling expansions), ``singular`` (path scans for
phase-like singularities), ``tropical`` (uniform and double-scaling limits),
``oracles`` (finite-difference cross-checks), ``verify`` and ``cli``.
"""

from .errors import *  # noqa: F401,F403
from .expr import Expression, Jet2, eval_jet2, evaluate, parse, to_source
from .geometry import GeometryReport, full_report
from .model import (
    ExpressionModel,
    LinearModel,
    Model,
    SubsystemModel,
    SuperIdealModel,
    entropy,
    expression_model,
    free_energy,
    gibbs_weights,
    hessian_F,
    mean_gradient,
    mean_second,
    primitives,
)
from .modelfile import load_model, parse_model

__version__ = "0.1.0"
