"""Almost-Euclidean sections of l_p^N balls: radius bounds, distortion
constants, and a search lab for the l_2 -> l_p Schatten inequalities."""

__version__ = "0.1.0"

from .types import Field, Kind, Measure  # noqa: E402,F401
from .linalg import Subspace, lp_norm, orthonormalize, schatten_norm  # noqa: E402,F401
