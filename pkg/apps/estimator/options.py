"""
Solver options for the Gauss-Newton fusion, with defaults from settings.
"""

from dataclasses import dataclass, fields

from django.conf import settings

SETTINGS_KEYS = {
    'max_iterations': 'SOLVER_MAX_ITERATIONS',
    'step_tolerance': 'SOLVER_STEP_TOLERANCE',
    'cost_tolerance': 'SOLVER_COST_TOLERANCE',
    'line_search_halvings': 'SOLVER_LINE_SEARCH_HALVINGS',
    'saturated_grid_size': 'SATURATED_GRID_SIZE',
    'saturated_grid_span': 'SATURATED_GRID_SPAN',
}


@dataclass(frozen=True)
class SolverOptions:
    """
    Stopping rules and multi-start parameters.

    Attributes:
        max_iterations (int): Gauss-Newton iteration cap.
        step_tolerance (float): Converged when the accepted step norm (rad/s) is below this.
        cost_tolerance (float): Converged when the relative cost decrease is below this.
        line_search_halvings (int): Step halvings tried before giving up on an iteration.
        saturated_grid_size (int): Speeds in the all-saturated seed grid.
        saturated_grid_span (float): Grid covers [gamma, span * gamma].
    """
    max_iterations: int = 50
    step_tolerance: float = 1e-10
    cost_tolerance: float = 1e-12
    line_search_halvings: int = 20
    saturated_grid_size: int = 8
    saturated_grid_span: float = 10.0

    def __post_init__(self):
        for option in fields(self):
            if not getattr(self, option.name) > 0:
                raise ValueError(f"SolverOptions.{option.name} must be positive")
        if self.saturated_grid_span < 1:
            raise ValueError("saturated_grid_span must be at least 1")

    @classmethod
    def from_settings(cls, **overrides):
        """Options from settings.INERTIAL_ARRAY, with non-None overrides applied."""
        config = settings.INERTIAL_ARRAY
        values = {name: config[key] for name, key in SETTINGS_KEYS.items()}
        values.update({name: value for name, value in overrides.items() if value is not None})
        return cls(**values)
