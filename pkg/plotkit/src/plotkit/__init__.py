"""Figure rendering for qgas CSV outputs.

Consumes the qgas CLI's CSV schemas bit-exactly; numeric annotations are
read from CSV footers, never recomputed, so plots cannot disagree with the
primary artifact.
"""

__version__ = "0.1.0"

from .render import (  # noqa: F401
    SchemaError,
    load_compare_csv,
    load_derivatives_csv,
    render_derivative_growth,
    render_residual_decay,
)
