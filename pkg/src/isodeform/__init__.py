"""Isospectral deformations of torus-invariant metrics on balls and spheres.

The package builds families of skew matrix pencils with matching pointwise
spectra, realizes the associated metrics on R^{m+2k} and on the unit ball
and sphere inside it, and machine-checks the geometric identities that the
construction rests on (conjugators, submersion structure, totally geodesic
fibers, heat-invariant constancy, curvature convergence).
"""

__version__ = "0.1.0"

from .jmaps import JMap, random_generic_jmap, substitute_basis, conjugate_jmap, \
    genericity_test, trace_word_invariants
from .forms import HomogeneousForm, power_trace_form, isospectral, IsospectralityReport
from .conjugation import EquivalenceWitness, conjugator_at, equivalence_search, \
    skew_canonical_form

__all__ = [
    "JMap",
    "HomogeneousForm",
    "EquivalenceWitness",
    "IsospectralityReport",
    "random_generic_jmap",
    "substitute_basis",
    "conjugate_jmap",
    "genericity_test",
    "trace_word_invariants",
    "power_trace_form",
    "isospectral",
    "conjugator_at",
    "equivalence_search",
    "skew_canonical_form",
    "__version__",
]
