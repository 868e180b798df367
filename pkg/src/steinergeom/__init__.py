"""Finite combinatorics of sparse linear spaces.

Predimension and strong substructures, free amalgamation, bounded good
pairs, forbidden configurations, quasigroup block algebras over finite
fields, path graphs, and an audited growth engine for finite
approximations of generic models.
"""

from .space import (
    CapacityError,
    LinearSpaceError,
    PartialLinearSpace,
    all_linear_spaces,
    canonical_form,
    free_amalgam,
    isomorphic,
    label_key,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "LinearSpaceError",
    "PartialLinearSpace",
    "all_linear_spaces",
    "canonical_form",
    "free_amalgam",
    "isomorphic",
    "label_key",
    "__version__",
]
