"""Simulation library for pre- and post-selected quantum systems.

Subpackages:
  hilbert    labeled product spaces, kets, operators, Schmidt decomposition
  tsvf       two-state vectors, post-selection, weak values
  pointer    von Neumann pointer model, weak-to-strong measurement continuum
  scenarios  built-in experiments with exact expected outputs
  dsl        text format for declaring new pre/post-selected experiments
  cli        command-line front end (also installed as the `tsvsim` script)
"""

from . import errors, hilbert, pointer, scenarios, tsvf

__all__ = ["errors", "hilbert", "pointer", "scenarios", "tsvf"]
__version__ = "0.1.0"
