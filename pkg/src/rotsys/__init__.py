"""SAT toolchain for rotation systems of simple drawings of complete graphs."""

from .core import (
    InvalidSystem, NotDrawable, OutOfScope, PreRotationSystem, canonical_form, check_class,
    classify_quadruple, contains_configuration, crossing_map, restrict, side_contains, transform,
)

__version__ = "0.1.0"

__all__ = [
    "InvalidSystem", "NotDrawable", "OutOfScope", "PreRotationSystem", "canonical_form",
    "check_class", "classify_quadruple", "contains_configuration", "crossing_map", "restrict",
    "side_contains", "transform", "__version__",
]
