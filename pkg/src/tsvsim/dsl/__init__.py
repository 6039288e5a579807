"""Declarative text format (.scn files) for pre/post-selected experiments.

parse/render handle the line-oriented format; evaluate builds the Hilbert
space, runs the declared gates and selections, and reports weak values and
Born probabilities as a ScenarioResult.
"""

from .parse import (
    AmplitudeEntry,
    Diagnostic,
    FactorDecl,
    GateDecl,
    ObservableDecl,
    PostselectDecl,
    ScenarioFileError,
    ScenarioSpec,
    ScenarioSyntaxError,
    ScenarioValidationError,
    parse,
    render,
)
from .evaluate import builtin_scenario_path, evaluate, load_file

__all__ = [
    "AmplitudeEntry",
    "Diagnostic",
    "FactorDecl",
    "GateDecl",
    "ObservableDecl",
    "PostselectDecl",
    "ScenarioFileError",
    "ScenarioSpec",
    "ScenarioSyntaxError",
    "ScenarioValidationError",
    "builtin_scenario_path",
    "evaluate",
    "load_file",
    "parse",
    "render",
]
