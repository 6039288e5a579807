"""Finite-dimensional labeled Hilbert spaces: kets, operators, tensor products,
projectors, and Schmidt decomposition.

States live on a product of named factors (particle paths, detector flags,
pointer bins, ...). Every factor carries a label table, so basis states are
addressed by label tuples such as ``("1''", "2'", "READY1")`` instead of raw
indices. Amplitude storage is dense; the spaces used here stay small.

All values are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidBipartition

ATOL_NORM = 1e-12
ATOL_PROJECTOR = 1e-12

# Fixed 50/50 convention: symmetric beam splitter / Stern-Gerlach splitter.
# Scenario builders that need real equal-amplitude splits absorb the i phases
# into their basis definitions (see splitter_real).
BS_SYMMETRIC = np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=complex) / np.sqrt(2.0)

# Phase-absorbed variant: splits a source mode into two equal real amplitudes
# and is its own inverse, which keeps time-reversal checks transparent.
SPLIT_REAL = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class Factor:
    """One tensor factor: a name plus its ordered basis label table."""

    name: str
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise ValueError(f"factor {self.name!r} has no labels")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"factor {self.name!r} has duplicate labels")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r} in factor {self.name!r}") from None


class Space:
    """Ordered product of factors. Basis index = C-order flattening of factor indices."""

    def __init__(self, factors: Iterable[Factor]):
        self.factors: tuple[Factor, ...] = tuple(factors)
        if not self.factors:
            raise ValueError("space needs at least one factor")
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate factor names: {names}")
        self.dims: tuple[int, ...] = tuple(f.dim for f in self.factors)
        self.dim: int = prod(self.dims)
        self._by_name = {f.name: i for i, f in enumerate(self.factors)}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Space) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __repr__(self) -> str:
        inner = ", ".join(f"{f.name}[{f.dim}]" for f in self.factors)
        return f"Space({inner})"

    def factor_index(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"no factor named {name!r} in {self!r}") from None

    def factor(self, name: str) -> Factor:
        return self.factors[self.factor_index(name)]

    def index_of(self, labels: Sequence[str]) -> int:
        """Flat basis index of the joint basis state given one label per factor."""
        if len(labels) != len(self.factors):
            raise DimensionMismatch(
                f"expected {len(self.factors)} labels, got {len(labels)}"
            )
        idx = 0
        for f, lab in zip(self.factors, labels):
            idx = idx * f.dim + f.index(lab)
        return idx

    def labels_of(self, index: int) -> tuple[str, ...]:
        """Inverse of index_of."""
        out = []
        for d, f in zip(reversed(self.dims), reversed(self.factors)):
            index, r = divmod(index, d)
            out.append(f.labels[r])
        return tuple(reversed(out))

    def basis_iter(self):
        """Yield (flat index, label tuple) over the full product basis."""
        for i in range(self.dim):
            yield i, self.labels_of(i)


def space(*factors: tuple[str, Sequence[str]]) -> Space:
    """Shorthand: space(("photon", ["L_u", "L_d"]), ("det", ["READY", "CLICK"]))."""
    return Space(Factor(name, tuple(labels)) for name, labels in factors)


class Ket:
    """Dense complex amplitude vector over a labeled product basis.

    Unit norm unless constructed with normalized=False; the flag is checked
    at construction (|norm - 1| <= 1e-12) when claimed.
    """

    __slots__ = ("space", "amplitudes", "normalized")

    def __init__(self, space: Space, amplitudes: np.ndarray | Sequence[complex],
                 normalized: bool | None = None):
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape != (space.dim,):
            raise DimensionMismatch(
                f"amplitude vector has shape {amps.shape}, space dim is {space.dim}"
            )
        amps = amps.copy()
        amps.flags.writeable = False
        self.space = space
        self.amplitudes = amps
        nrm = float(np.linalg.norm(amps))
        if normalized is None:
            normalized = abs(nrm - 1.0) <= ATOL_NORM
        elif normalized and abs(nrm - 1.0) > ATOL_NORM:
            raise ValueError(f"ket claimed normalized but has norm {nrm!r}")
        self.normalized = normalized

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def unit(self) -> "Ket":
        """Return the normalized copy of this ket."""
        nrm = self.norm()
        if nrm == 0.0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return Ket(self.space, self.amplitudes / nrm)

    def amplitude(self, labels: Sequence[str]) -> complex:
        return complex(self.amplitudes[self.space.index_of(labels)])

    def probability(self, labels: Sequence[str]) -> float:
        return abs(self.amplitude(labels)) ** 2

    def marginal_probability(self, factor_name: str, label: str) -> float:
        """Born probability of finding the given factor in the given label."""
        ax = self.space.factor_index(factor_name)
        t = np.abs(self.amplitudes.reshape(self.space.dims)) ** 2
        other = tuple(i for i in range(len(self.space.dims)) if i != ax)
        return float(t.sum(axis=other)[self.space.factor(factor_name).index(label)])

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.dims)

    def __repr__(self) -> str:
        return f"Ket({self.space!r}, norm={self.norm():.6f})"


def basis_state(sp: Space, *labels: str) -> Ket:
    """Basis ket |labels...> with amplitude 1."""
    amps = np.zeros(sp.dim, dtype=complex)
    amps[sp.index_of(labels)] = 1.0
    return Ket(sp, amps, normalized=True)


def from_amplitudes(sp: Space, entries: Mapping[Sequence[str], complex],
                    normalized: bool | None = None) -> Ket:
    """Build a ket from a {label tuple: amplitude} mapping; unlisted entries are 0."""
    amps = np.zeros(sp.dim, dtype=complex)
    for labels, a in entries.items():
        amps[sp.index_of(labels)] = a
    return Ket(sp, amps, normalized=normalized)


def tensor(a: Ket, b: Ket) -> Ket:
    """Tensor product. Factor lists concatenate; amplitudes are the Kronecker product."""
    joined = Space(a.space.factors + b.space.factors)
    return Ket(joined, np.kron(a.amplitudes, b.amplitudes),
               normalized=a.normalized and b.normalized)


def inner(bra: Ket, ket: Ket) -> complex:
    """<bra|ket>, conjugate-linear in the first argument."""
    if bra.space != ket.space:
        raise DimensionMismatch("inner product between different spaces")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


class Operator:
    """Dense complex square matrix acting on a Space.

    The optional tag names the operator in results (weak-value tables etc.).
    """

    __slots__ = ("space", "matrix", "tag")

    def __init__(self, space: Space, matrix: np.ndarray, tag: str = ""):
        mat = np.asarray(matrix, dtype=complex)
        if mat.shape != (space.dim, space.dim):
            raise DimensionMismatch(
                f"matrix shape {mat.shape} does not match space dim {space.dim}"
            )
        mat = mat.copy()
        mat.flags.writeable = False
        self.space = space
        self.matrix = mat
        self.tag = tag

    # construction helpers ------------------------------------------------

    @classmethod
    def identity(cls, sp: Space, tag: str = "I") -> "Operator":
        return cls(sp, np.eye(sp.dim), tag=tag)

    @classmethod
    def projector(cls, sp: Space, constraints: Mapping[str, str | Sequence[str]],
                  tag: str = "") -> "Operator":
        """Diagonal projector onto basis states whose labels satisfy the constraints.

        constraints maps factor name -> label (or collection of allowed labels);
        unconstrained factors are untouched.
        """
        mask = cls.basis_mask(sp, constraints)
        return cls(sp, np.diag(mask.astype(complex)), tag=tag)

    @staticmethod
    def basis_mask(sp: Space, constraints: Mapping[str, str | Sequence[str]]) -> np.ndarray:
        """Boolean mask over the product basis selecting the constrained labels."""
        mask = np.ones(sp.dims, dtype=bool)
        for name, allowed in constraints.items():
            f = sp.factor(name)
            if isinstance(allowed, str):
                allowed = [allowed]
            sel = np.zeros(f.dim, dtype=bool)
            for lab in allowed:
                sel[f.index(lab)] = True
            shape = [1] * len(sp.dims)
            shape[sp.factor_index(name)] = f.dim
            mask &= sel.reshape(shape)
        return mask.reshape(sp.dim)

    @classmethod
    def ket_projector(cls, k: Ket, tag: str = "") -> "Operator":
        """|k><k| (k should be normalized for a true projector)."""
        v = k.amplitudes
        return cls(k.space, np.outer(v, v.conj()), tag=tag)

    @classmethod
    def permutation(cls, sp: Space, swaps: Iterable[tuple[int, int]],
                    tag: str = "") -> "Operator":
        """Unitary permutation given as a list of disjoint index transpositions."""
        perm = np.arange(sp.dim)
        seen: set[int] = set()
        for i, j in swaps:
            if i in seen or j in seen:
                raise ValueError("transpositions must be disjoint")
            seen.update((i, j))
            perm[i], perm[j] = perm[j], perm[i]
        mat = np.zeros((sp.dim, sp.dim), dtype=complex)
        mat[perm, np.arange(sp.dim)] = 1.0
        return cls(sp, mat, tag=tag)

    # queries --------------------------------------------------------------

    def dagger(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T, tag=self.tag)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def is_unitary(self, tol: float = 1e-10) -> bool:
        eye = self.matrix @ self.matrix.conj().T
        return bool(np.max(np.abs(eye - np.eye(self.space.dim))) <= tol)

    def is_projector(self, tol: float = ATOL_PROJECTOR) -> bool:
        if not self.is_hermitian(tol):
            return False
        return bool(np.max(np.abs(self.matrix @ self.matrix - self.matrix)) <= tol)

    # algebra ---------------------------------------------------------------

    def _check_space(self, other: "Operator") -> None:
        if self.space != other.space:
            raise DimensionMismatch("operators on different spaces")

    def __add__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * scalar, tag=self.tag)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def __repr__(self) -> str:
        t = f", tag={self.tag!r}" if self.tag else ""
        return f"Operator({self.space!r}{t})"


def apply(op: Operator, k: Ket) -> Ket:
    """Matrix-vector product op|k>. Spaces must match exactly."""
    if op.space != k.space:
        raise DimensionMismatch("operator and ket live on different spaces")
    return Ket(k.space, op.matrix @ k.amplitudes)


def apply_to_factors(k: Ket, matrix: np.ndarray, factor_names: Sequence[str]) -> Ket:
    """Apply a small unitary/matrix to a subset of factors, identity elsewhere.

    The matrix is indexed in the order of factor_names (C-order flattening of
    those factors' label indices). This avoids building full-space matrices.
    """
    sp = k.space
    axes = [sp.factor_index(n) for n in factor_names]
    if len(set(axes)) != len(axes):
        raise ValueError("target factors must be distinct")
    sub_dim = prod(sp.dims[a] for a in axes)
    mat = np.asarray(matrix, dtype=complex)
    if mat.shape != (sub_dim, sub_dim):
        raise DimensionMismatch(
            f"matrix shape {mat.shape} does not match target dims {sub_dim}"
        )
    t = k.as_tensor()
    rest = [i for i in range(len(sp.dims)) if i not in axes]
    t = np.transpose(t, axes + rest)
    t = t.reshape(sub_dim, -1)
    t = mat @ t
    t = t.reshape([sp.dims[a] for a in axes] + [sp.dims[i] for i in rest])
    # undo the transpose
    inv = np.argsort(axes + rest)
    t = np.transpose(t, inv)
    return Ket(sp, t.reshape(sp.dim))


def embed(op: Operator, sp: Space, tag: str = "") -> Operator:
    """Embed an operator on a subset of factors into sp, identity on the rest.

    Matching is by factor identity: every factor of op.space must appear in sp
    with the same label table.
    """
    local = {f.name for f in op.space.factors}
    for f in op.space.factors:
        if sp.factor(f.name) != f:
            raise DimensionMismatch(f"factor {f.name!r} differs between spaces")
    order = [f.name for f in sp.factors if f.name in local]
    small = _reorder_operator(op, order)
    op_axes = [sp.factor_index(name) for name in order]
    full = _apply_matrix_to_axes(np.eye(sp.dim, dtype=complex), small, op_axes, sp.dims)
    return Operator(sp, full, tag=tag or op.tag)


def _reorder_operator(op: Operator, order: Sequence[str]) -> np.ndarray:
    names = [f.name for f in op.space.factors]
    if list(order) == names:
        return op.matrix
    perm = [names.index(nm) for nm in order]
    dims = op.space.dims
    k = len(dims)
    t = op.matrix.reshape(dims + dims)
    t = np.transpose(t, perm + [k + p for p in perm])
    d = op.space.dim
    return t.reshape(d, d)


def _apply_matrix_to_axes(columns: np.ndarray, mat: np.ndarray,
                          axes: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Apply mat to the given tensor axes of each column of a (dim, dim) matrix."""
    dim = columns.shape[0]
    sub = prod(dims[a] for a in axes)
    rest = [i for i in range(len(dims)) if i not in axes]
    t = columns.reshape(list(dims) + [dim])
    t = np.transpose(t, list(axes) + rest + [len(dims)])
    t = t.reshape(sub, -1)
    t = mat @ t
    t = t.reshape([dims[a] for a in axes] + [dims[i] for i in rest] + [dim])
    inv = np.argsort(list(axes) + rest)
    t = np.transpose(t, list(inv) + [len(dims)])
    return t.reshape(dim, dim)


# ---------------------------------------------------------------------------
# Bipartitions and Schmidt decomposition


@dataclass(frozen=True)
class Bipartition:
    """A split of the factor indices into left and right groups."""

    left: tuple[int, ...]
    right: tuple[int, ...]

    @classmethod
    def of(cls, sp: Space, left_names: Sequence[str]) -> "Bipartition":
        left = tuple(sorted(sp.factor_index(n) for n in left_names))
        right = tuple(i for i in range(len(sp.factors)) if i not in left)
        return cls(left, right)

    def validate(self, sp: Space) -> None:
        n = len(sp.factors)
        both = sorted(self.left + self.right)
        if (set(self.left) & set(self.right)) or both != list(range(n)):
            raise InvalidBipartition(
                f"bipartition {self.left}|{self.right} does not cover {n} factors"
            )
        if not self.left or not self.right:
            raise InvalidBipartition("both sides of a bipartition must be non-empty")


def schmidt_rank(k: Ket, cut: Bipartition, tol: float = 1e-8) -> tuple[int, np.ndarray]:
    """Schmidt rank and coefficients of k across the cut.

    Returns (rank, coefficients): the number of singular values above tol and
    the full descending singular-value list of the reshaped amplitude matrix.
    For a normalized ket the squared coefficients sum to 1.
    """
    cut.validate(k.space)
    dims = k.space.dims
    t = k.as_tensor()
    t = np.transpose(t, cut.left + cut.right)
    d_left = prod(dims[i] for i in cut.left)
    mat = t.reshape(d_left, -1)
    coeffs = np.linalg.svd(mat, compute_uv=False)
    rank = int(np.sum(coeffs > tol))
    return rank, coeffs


# ---------------------------------------------------------------------------
# Gate library. Everything returned here is unitary.


def beamsplitter() -> np.ndarray:
    """Symmetric 50/50 splitter (1/sqrt2)[[1, i], [i, 1]] on a 2-dim factor."""
    return BS_SYMMETRIC.copy()


def splitter_real() -> np.ndarray:
    """Self-inverse 50/50 split with real equal amplitudes (phases absorbed)."""
    return SPLIT_REAL.copy()


def mode_coupler(factor: Factor, in_pair: tuple[str, str], out_pair: tuple[str, str],
                 block: np.ndarray | None = None) -> np.ndarray:
    """Unitary on one factor coupling two input modes to two output modes.

    With in_pair == out_pair this embeds the 2x2 block on those modes. With
    disjoint pairs it builds the block-antidiagonal unitary [[0, B+], [B, 0]]:
    a second application routes the output modes back through the inverse, so
    round trips through an untouched splitter recombine exactly.
    """
    b = BS_SYMMETRIC if block is None else np.asarray(block, dtype=complex)
    i0, i1 = (factor.index(x) for x in in_pair)
    o0, o1 = (factor.index(x) for x in out_pair)
    n = factor.dim
    u = np.eye(n, dtype=complex)
    if {i0, i1} == {o0, o1}:
        if (i0, i1) != (o0, o1):
            raise ValueError("in/out pairs overlap but are not identical")
        for r, rr in enumerate((o0, o1)):
            for c, cc in enumerate((i0, i1)):
                u[rr, cc] = b[r, c]
        return u
    if {i0, i1} & {o0, o1}:
        raise ValueError("in/out pairs must be identical or disjoint")
    for idx in (i0, i1, o0, o1):
        u[idx, idx] = 0.0
    for r, rr in enumerate((o0, o1)):
        for c, cc in enumerate((i0, i1)):
            u[rr, cc] = b[r, c]
    bh = b.conj().T
    for r, rr in enumerate((i0, i1)):
        for c, cc in enumerate((o0, o1)):
            u[rr, cc] = bh[r, c]
    return u


def flag_flip(sp: Space, condition: Mapping[str, str | Sequence[str]],
              flag_factor: str, ready: str, click: str, tag: str = "") -> Operator:
    """Permutation unitary toggling a flag factor on basis states matching condition.

    Models detectors and annihilation events as norm-preserving basis maps:
    |paths, READY> <-> |paths, CLICK> exactly on the triggering path states.
    """
    mask = Operator.basis_mask(sp, condition)
    ax = sp.factor_index(flag_factor)
    f = sp.factor(flag_factor)
    r_idx, c_idx = f.index(ready), f.index(click)
    m = mask.reshape(sp.dims)
    swaps = []
    it = np.argwhere(m)
    for multi in it:
        if multi[ax] != r_idx:
            continue
        other = multi.copy()
        other[ax] = c_idx
        if not m[tuple(other)]:
            # condition must not depend on the flag itself
            raise ValueError("flag_flip condition must be independent of the flag factor")
        i = int(np.ravel_multi_index(tuple(multi), sp.dims))
        j = int(np.ravel_multi_index(tuple(other), sp.dims))
        swaps.append((i, j))
    return Operator.permutation(sp, swaps, tag=tag)


def label_swap(sp: Space, factor_names: Sequence[str],
               src: Sequence[str], dst: Sequence[str], tag: str = "") -> Operator:
    """Transposition of two joint label assignments on the given factors.

    Entries in src/dst may be "*" to mean "any label, carried through"; the
    wildcard positions must agree between src and dst. All other factors are
    untouched. The result is a permutation, hence exactly unitary.
    """
    if len(src) != len(factor_names) or len(dst) != len(factor_names):
        raise DimensionMismatch("src/dst must give one label per target factor")
    axes = [sp.factor_index(n) for n in factor_names]
    fixed_src: dict[int, int] = {}
    fixed_dst: dict[int, int] = {}
    wild_axes = []
    for ax, nm, s, d in zip(axes, factor_names, src, dst):
        f = sp.factor(nm)
        if s == "*" or d == "*":
            if s != d:
                raise ValueError("wildcard positions must match between src and dst")
            wild_axes.append(ax)
        else:
            fixed_src[ax] = f.index(s)
            fixed_dst[ax] = f.index(d)
    if all(fixed_src[a] == fixed_dst[a] for a in fixed_src):
        return Operator.identity(sp, tag=tag)
    free_axes = [i for i in range(len(sp.dims)) if i not in fixed_src]
    swaps = []
    for combo in np.ndindex(*(sp.dims[a] for a in free_axes)):
        multi_s = [0] * len(sp.dims)
        multi_d = [0] * len(sp.dims)
        for a, v in zip(free_axes, combo):
            multi_s[a] = v
            multi_d[a] = v
        for a in fixed_src:
            multi_s[a] = fixed_src[a]
            multi_d[a] = fixed_dst[a]
        i = int(np.ravel_multi_index(multi_s, sp.dims))
        j = int(np.ravel_multi_index(multi_d, sp.dims))
        if i != j:
            swaps.append((i, j))
    return Operator.permutation(sp, swaps, tag=tag)
