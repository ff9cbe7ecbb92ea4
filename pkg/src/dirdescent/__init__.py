"""Lower convex envelopes on sample clouds and two-stage directional descent."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Domain,
    InputError,
    Objective,
    SampleCloud,
    cloud_objective,
    empirical_lipschitz,
    evaluate,
)
from .descent import (  # noqa: E402
    Stage1Config,
    Stage2Config,
    directional_descent,
    error_bound,
    stage1_direction,
    stage2_march,
)
from .envelope import (  # noqa: E402
    convexity_radius,
    convexity_set,
    lce_value,
    subgradient_certificate,
)
from .hull_lp import LpProblem, WeightedCombination, caratheodory_reduce, lower_hull_1d, solve_lp  # noqa: E402
from .testfns import get_function, list_functions  # noqa: E402

__all__ = [
    "Domain", "InputError", "LpProblem", "Objective", "SampleCloud", "Stage1Config",
    "Stage2Config", "WeightedCombination", "caratheodory_reduce", "cloud_objective",
    "convexity_radius", "convexity_set", "directional_descent", "empirical_lipschitz",
    "error_bound", "evaluate", "get_function", "lce_value", "list_functions", "lower_hull_1d",
    "solve_lp", "stage1_direction", "stage2_march", "subgradient_certificate",
]
