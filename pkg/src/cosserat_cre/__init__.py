"""Cosserat rod element: nonlinear shape functions, element operators and rod dynamics.

Units are SI throughout (m, kg, s, N). The usual entry points are
:func:`rect_section`, :func:`build_element`, :class:`Mesh`,
:func:`build_system`, :func:`modal` and :func:`integrate`; the ``cosserat-cre``
console script wraps them for file-based runs.
"""

from ._accel import USE_NUMBA
from .element import ElementOperators, build_element
from .section import Material, SectionProperties, rect_section
from .shapefn import eval_shape, jet_shape, solve_shape
from .system import (
    DistributedLoad,
    GlobalSystem,
    Mesh,
    PointLoad,
    TimeSeries,
    assemble,
    build_system,
    cbt_frequencies,
    integrate,
    modal,
    partition,
)

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA",
    "DistributedLoad",
    "ElementOperators",
    "GlobalSystem",
    "Material",
    "Mesh",
    "PointLoad",
    "SectionProperties",
    "TimeSeries",
    "assemble",
    "build_element",
    "build_system",
    "cbt_frequencies",
    "eval_shape",
    "integrate",
    "jet_shape",
    "modal",
    "partition",
    "rect_section",
    "solve_shape",
]
