"""Parameter switching for systems of the form x' = g(x) + p*B*x."""
__version__ = "0.1.0"

from .dsl import SchemeSyntaxError, parse_scheme, print_scheme  # noqa: E402
from .models import get_model, load_model  # noqa: E402
from .ode import DivergenceError, SystemDef, Trajectory, integrate, rhs, rk4_step  # noqa: E402
from .switching import (FramingError, SwitchingScheme, attractor_combination,  # noqa: E402
                        averaged_parameter, convex_weights, decompose, framing_check,
                        ps_integrate, ps_integrate_random)

__all__ = [
    "__version__", "SchemeSyntaxError", "parse_scheme", "print_scheme", "get_model", "load_model",
    "DivergenceError", "SystemDef", "Trajectory", "integrate", "rhs", "rk4_step", "FramingError",
    "SwitchingScheme", "attractor_combination", "averaged_parameter", "convex_weights", "decompose",
    "framing_check", "ps_integrate", "ps_integrate_random",
]
