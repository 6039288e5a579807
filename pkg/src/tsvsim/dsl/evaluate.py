"""Evaluator turning a parsed ScenarioSpec into a ScenarioResult.

The pipeline is: build the labeled product space, prepare the initial ket,
apply the gates epoch by epoch (recording the state after each epoch),
apply the optional post-selection (recording its Born probability), and
evaluate every named observable as a weak value between the evolved state
and the post-selection. Without a POSTSELECT section the post ket defaults
to the evolved state itself, which reduces the weak value to an ordinary
expectation value.

Any error raised by the underlying state machinery (orthogonal selection,
zero-probability branch, ...) is re-raised with the source position of the
responsible line attached as a `diagnostic` attribute.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .. import hilbert as hb
from .. import tsvf
from ..errors import TsvsimError
from ..hilbert import Ket, Operator
from ..scenarios import ScenarioResult
from .parse import Diagnostic, GateDecl, ScenarioSpec, ScenarioSyntaxError, parse


def load_file(path: str | Path) -> ScenarioSpec:
    """Read and parse a .scn file (UTF-8)."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ScenarioSyntaxError(
            [Diagnostic(1, 1, f"file is not valid UTF-8: {e.reason} at byte {e.start}")]
        ) from None
    return parse(text)


def builtin_scenario_path(scenario_id: str) -> Path:
    """Path of the shipped .scn fixture for a built-in scenario."""
    ref = resources.files("tsvsim") / "data" / f"{scenario_id}.scn"
    with resources.as_file(ref) as p:
        return Path(p)


def _with_position(exc: TsvsimError, line: int, column: int = 1) -> TsvsimError:
    exc.diagnostic = Diagnostic(line, column, str(exc))
    return exc


def _build_space(spec: ScenarioSpec) -> hb.Space:
    return hb.Space(hb.Factor(f.name, f.labels) for f in spec.factors)


def _build_ket(sp: hb.Space, entries, normalized: bool | None = None) -> Ket:
    amps = np.zeros(sp.dim, dtype=complex)
    for e in entries:
        amps[sp.index_of(e.labels)] = e.amplitude
    return Ket(sp, amps, normalized=normalized)


def _gate_operator(sp: hb.Space, g: GateDecl):
    """Unitary for one gate, or None for projector_select (handled separately)."""
    if g.kind == "beamsplitter":
        factor = sp.factor(g.targets[0])
        i1, i2, o1, o2 = g.params
        mat = hb.mode_coupler(factor, (i1, i2), (o1, o2))
        return ("factors", mat, g.targets)
    if g.kind == "swap_map":
        src, dst = g.params
        return ("full", hb.label_swap(sp, g.targets, src, dst), None)
    if g.kind == "custom_unitary":
        return ("factors", np.array(g.params, dtype=complex), g.targets)
    return None


def evaluate(spec: ScenarioSpec, scenario_id: str = "scn") -> ScenarioResult:
    """Run the declared experiment and collect its exact outputs.

    states_by_epoch holds "t0" plus one entry per gate epoch (the state after
    that epoch's last gate, projections included). Probabilities come from
    projector_select gates and the final post-selection, under their declared
    names. Weak values are evaluated with the two-state rule
    <post|A|evolved> / <post|evolved>.
    """
    sp = _build_space(spec)
    state = _build_ket(sp, spec.initial).unit()
    states: dict[str, Ket] = {"t0": state}
    probabilities: dict[str, float] = {}

    current_epoch: str | None = None
    for g in spec.gates:
        if current_epoch is not None and g.epoch != current_epoch:
            states[current_epoch] = state
        current_epoch = g.epoch
        if g.kind == "projector_select":
            labels, name = g.params
            proj = Operator.projector(sp, {g.targets[0]: list(labels)})
            try:
                p, state = tsvf.post_select(state, proj)
            except TsvsimError as e:
                raise _with_position(e, g.line)
            key = name or f"{g.epoch}_{g.targets[0]}_{'_'.join(labels)}"
            probabilities[key] = p
        else:
            kind, mat, targets = _gate_operator(sp, g)
            try:
                if kind == "full":
                    state = hb.apply(mat, state)
                else:
                    state = hb.apply_to_factors(state, mat, targets)
            except TsvsimError as e:
                raise _with_position(e, g.line)
    if current_epoch is not None:
        states[current_epoch] = state

    post_ket = state
    if spec.postselect is not None:
        post_ket = _build_ket(sp, spec.postselect.entries).unit()
        probabilities[spec.postselect.name] = abs(hb.inner(post_ket, state)) ** 2

    weak_values: dict[str, complex] = {}
    if spec.observables:
        try:
            tsv = tsvf.TwoStateVector(state, post_ket)
            for obs in spec.observables:
                op = _observable_operator(sp, obs.terms, obs.name)
                weak_values[obs.name] = tsvf.weak_value(tsv, op).value
        except TsvsimError as e:
            line = spec.postselect.line if spec.postselect is not None else 1
            raise _with_position(e, line)

    return ScenarioResult(
        scenario_id=scenario_id,
        states_by_epoch=states,
        probabilities=probabilities,
        weak_values=weak_values,
    )


def _observable_operator(sp: hb.Space, terms, tag: str) -> Operator:
    mat = np.zeros((sp.dim, sp.dim), dtype=complex)
    eye = np.eye(sp.dim)
    for coeff, constraints in terms:
        if constraints is None:
            mat += coeff * eye
        else:
            mask = Operator.basis_mask(sp, dict(constraints))
            mat[np.diag_indices(sp.dim)] += coeff * mask
    return Operator(sp, mat, tag=tag)
