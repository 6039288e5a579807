"""Two-state-vector bookkeeping: post-selection, conditional probabilities,
and weak values.

A TwoStateVector pairs a forward-evolving pre-selected ket with a
backward-evolving post-selected one (stored as a ket, conjugated on use).
The weak value of an operator A in that context is

    wv(A) = <post| A |pre> / <post|pre>

which is complex in general and unbounded by A's spectrum. All functions here
are pure; inputs are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hilbert
from .errors import (DimensionMismatch, IncompleteSet, OrthogonalSelection,
                     ZeroProbabilityBranch)
from .hilbert import Ket, Operator

EPS_OVERLAP = 1e-10    # near-orthogonal selections amplify rounding noise quadratically
EPS_BRANCH = 1e-14


@dataclass(frozen=True)
class WeakValue:
    value: complex
    operator_tag: str

    @property
    def re(self) -> float:
        return self.value.real

    @property
    def im(self) -> float:
        return self.value.imag


class TwoStateVector:
    """Pre- and post-selected pair defining a weak-value context.

    Both kets must be normalized and live on the same space. The overlap is
    checked at weak-value query time, not at construction, so orthogonal pairs
    can still be built and inspected.
    """

    __slots__ = ("pre", "post")

    def __init__(self, pre: Ket, post: Ket):
        if pre.space != post.space:
            raise DimensionMismatch("pre and post selections on different spaces")
        for name, k in (("pre", pre), ("post", post)):
            if abs(k.norm() - 1.0) > 1e-10:
                raise ValueError(f"{name}-selected ket is not normalized (norm {k.norm()!r})")
        self.pre = pre
        self.post = post

    def overlap(self) -> complex:
        return hilbert.inner(self.post, self.pre)

    def selection_probability(self) -> float:
        """Born probability of the post-selection given the pre-selected state."""
        return abs(self.overlap()) ** 2


def weak_value(tsv: TwoStateVector, a: Operator,
               eps_overlap: float = EPS_OVERLAP) -> WeakValue:
    """<post|A|pre> / <post|pre>.

    Raises OrthogonalSelection when |<post|pre>| <= eps_overlap: the weak value
    is undefined there and must not be interpreted.
    """
    if a.space != tsv.pre.space:
        raise DimensionMismatch("operator space differs from selection space")
    denom = tsv.overlap()
    if abs(denom) <= eps_overlap:
        raise OrthogonalSelection(
            f"|<post|pre>| = {abs(denom):.3e} <= {eps_overlap:.1e}; weak value undefined"
        )
    num = complex(np.vdot(tsv.post.amplitudes, a.matrix @ tsv.pre.amplitudes))
    return WeakValue(num / denom, a.tag)


def born_probability(state: Ket, outcome_projector: Operator) -> float:
    """||P|psi>||^2 without collapsing. P is validated as a projector."""
    if outcome_projector.space != state.space:
        raise DimensionMismatch("projector space differs from state space")
    if not outcome_projector.is_projector():
        raise ValueError("outcome operator is not a projector (P^2 = P = P+ to 1e-12)")
    v = outcome_projector.matrix @ state.amplitudes
    return float(np.vdot(v, v).real)


def post_select(state: Ket, outcome_projector: Operator) -> tuple[float, Ket]:
    """Born rule plus renormalization: (||P psi||^2, P psi / ||P psi||).

    Raises ZeroProbabilityBranch when the probability falls below 1e-14; the
    collapsed state is undefined there.
    """
    if outcome_projector.space != state.space:
        raise DimensionMismatch("projector space differs from state space")
    if not outcome_projector.is_projector():
        raise ValueError("outcome operator is not a projector (P^2 = P = P+ to 1e-12)")
    v = outcome_projector.matrix @ state.amplitudes
    p = float(np.vdot(v, v).real)
    if p < EPS_BRANCH:
        raise ZeroProbabilityBranch(f"branch probability {p:.3e} < {EPS_BRANCH:.1e}")
    return p, Ket(state.space, v / np.sqrt(p))


def projector_weak_value_sum(tsv: TwoStateVector, projectors: list[Operator],
                             tol: float = 1e-10) -> complex:
    """Sum of weak values over a complete projector family.

    The family must resolve the identity (IncompleteSet otherwise); by
    linearity the sum then equals 1.
    """
    if not projectors:
        raise IncompleteSet("empty projector list")
    total = projectors[0].matrix.copy()
    for p in projectors[1:]:
        if p.space != projectors[0].space:
            raise DimensionMismatch("projectors on different spaces")
        total = total + p.matrix
    if np.max(np.abs(total - np.eye(projectors[0].space.dim))) > tol:
        raise IncompleteSet("projectors do not sum to the identity")
    return sum(weak_value(tsv, p).value for p in projectors)
