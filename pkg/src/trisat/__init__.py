"""Triangle-free saturation game toolkit: engine, C5 builder, adversaries, exact solver, oracles."""

__version__ = "0.1.0"
