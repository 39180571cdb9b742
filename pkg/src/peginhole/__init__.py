"""Desk-scale peg-in-hole assembly laboratory.

Search phase (quadrant visual servoing + spiral search), insertion phase
(admittance control), the synthetic two-view image generator that trains
hole predictors, and the evaluation/experiment harness around them.
"""

from .compose import BACKEND as COMPOSE_BACKEND

__version__ = "0.1.0"

__all__ = ["COMPOSE_BACKEND", "__version__"]
