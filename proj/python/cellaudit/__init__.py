"""Python access to the cellaudit workbook engine."""

from ._core import (
    ParseError,
    Workbook,
    __version__,
    cascade_histogram,
    cascade_risk,
    cell_map,
    format_value,
    formula_listing,
    grid_table,
    lint,
    load,
    names_table,
    parse,
    recalculate,
    sensitivity,
    validations_table,
)

__all__ = [
    "ParseError",
    "Workbook",
    "__version__",
    "cascade_histogram",
    "cascade_risk",
    "cell_map",
    "format_value",
    "formula_listing",
    "grid_table",
    "lint",
    "load",
    "names_table",
    "parse",
    "recalculate",
    "sensitivity",
    "validations_table",
]
