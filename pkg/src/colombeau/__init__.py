"""Numerical laboratory for diffeomorphism-invariant Colombeau algebras
on the real line with its global chart.

The package builds the basic space of smooth maps R(omega, p) over
unit-integral test forms, embeds distributions and smooth functions into
it, acts on it with diffeomorphisms and Lie derivatives computed along
two independent routes, and grades representatives asymptotically into
the moderate/negligible classes that define the quotient algebra.
"""

from .kernels import (EpsilonGrid, FlowEscapeError, Interval, NumericsError,
                      QuadratureError, SlopeFit, central_diff, fit_slope,
                      integrate, nth_derivative, ode_flow)
from .test_objects import (FormVariation, MomentMollifier, OrientationError,
                           TestObject, lie_derivative_form, make_bump,
                           make_moment_mollifier, perturb, pushforward,
                           scaled_net)
from .basic_space import (DeltaAt, DeltaDerivative, Distribution, HeavisideAt,
                          Regular, Representative, SmoothFunction, d1_directional,
                          delta, delta_derivative, embed_convolution,
                          embed_distribution, embed_smooth, heaviside, pairing,
                          regular, rep_add, rep_mul, rep_scale, zero_rep)
from .diffeo import (Diffeomorphism, act_on_representative, check_equivariance,
                     compose, from_forward, identity_diffeo,
                     pullback_distribution, pullback_smooth)
from .lie import (VectorField, flow_pullback_rep, lie_distribution, lie_rep,
                  lie_rep_direct, lie_rep_formula, lie_smooth, linear_field,
                  translation_field)
from .grading import (AssociationReport, Classification, GradingReport,
                      associate, grade_moderate, grade_negligible,
                      quotient_equal, sweep_against_witness, weak_limit)

__version__ = "0.1.0"

__all__ = [
    "AssociationReport", "Classification", "DeltaAt", "DeltaDerivative",
    "Diffeomorphism", "Distribution", "EpsilonGrid", "FlowEscapeError",
    "FormVariation", "GradingReport", "HeavisideAt", "Interval",
    "MomentMollifier", "NumericsError", "OrientationError", "QuadratureError",
    "Regular", "Representative", "SlopeFit", "SmoothFunction", "TestObject",
    "VectorField", "act_on_representative", "associate", "central_diff",
    "check_equivariance", "compose", "d1_directional", "delta",
    "delta_derivative", "embed_convolution", "embed_distribution",
    "embed_smooth", "fit_slope", "flow_pullback_rep", "from_forward",
    "grade_moderate", "grade_negligible", "heaviside", "identity_diffeo",
    "integrate", "lie_derivative_form", "lie_distribution", "lie_rep",
    "lie_rep_direct", "lie_rep_formula", "lie_smooth", "linear_field",
    "make_bump", "make_moment_mollifier", "nth_derivative", "ode_flow",
    "pairing", "perturb", "pullback_distribution", "pullback_smooth",
    "pushforward", "quotient_equal", "regular", "rep_add", "rep_mul",
    "rep_scale", "scaled_net", "sweep_against_witness", "translation_field",
    "weak_limit", "zero_rep",
]
