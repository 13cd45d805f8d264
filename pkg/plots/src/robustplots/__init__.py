from .render import (
    SchemaError,
    render_event_frequencies,
    render_scaling_fit,
    render_threshold_curve,
)

__version__ = "0.1.0"
