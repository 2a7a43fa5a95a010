"""Lambda-bisystems of subshifts, their configuration spaces and AF invariants."""
from .errors import *  # noqa: F401,F403
from .subshift import SubshiftPresentation, full_shift, golden_mean, even_shift, one_point, two_full_shifts, higher_block
from .bisystem import LambdaBiSystem, validate_axioms
from .canonical import build_canonical, detect_stabilization
from .tower import Tower

__version__ = "0.1.0"
