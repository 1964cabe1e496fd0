"""driftlab: concept-drift workbench for wind-turbine normal-behaviour residuals."""

__version__ = "0.1.0"
