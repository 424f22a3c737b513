"""Sparse multi-register state vectors.

A :class:`PureState` stores only its nonzero amplitudes: an ``(nnz, k)`` int64
array of basis tuples (one column per register) and a complex amplitude per
row.  Permutation registers hold Lehmer ranks.  Rows are kept unique, and
amplitudes below the pruning threshold are dropped after every operation.
"""

from __future__ import annotations

import json
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .perm import Perm, symmetric_group

ATOL = 1e-9
PRUNE_TOL = 1e-12

_prune_state = {"tol": PRUNE_TOL}


@contextmanager
def pruning_disabled():
    """Keep every amplitude, however small, inside the ``with`` block."""
    old = _prune_state["tol"]
    _prune_state["tol"] = None
    try:
        yield
    finally:
        _prune_state["tol"] = old


def prune_tolerance() -> float | None:
    return _prune_state["tol"]


class LayoutMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Register:
    name: str
    kind: str  # "qubit", "perm" or "qudit"
    dim: int
    n: int = 0

    @classmethod
    def qubit(cls, name: str) -> Register:
        return cls(name, "qubit", 2)

    @classmethod
    def perm(cls, name: str, n: int) -> Register:
        return cls(name, "perm", math.factorial(n), n)

    @classmethod
    def qudit(cls, name: str, dim: int) -> Register:
        return cls(name, "qudit", dim)

    def encode(self, value) -> int:
        if isinstance(value, Perm):
            if self.kind != "perm" or value.n != self.n:
                raise ValueError(f"register {self.name!r} cannot hold {value!r}")
            return value.rank()
        v = int(value)
        if not 0 <= v < self.dim:
            raise ValueError(f"value {v} out of range for register {self.name!r}")
        return v

    def decode(self, value: int):
        if self.kind == "perm":
            return symmetric_group(self.n).perm(int(value))
        return int(value)

    def to_json(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "dim": self.dim}
        if self.kind == "perm":
            d["n"] = self.n
        return d


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[Register, ...]

    def __post_init__(self):
        names = [r.name for r in self.registers]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(r.dim for r in self.registers)

    def __len__(self) -> int:
        return len(self.registers)

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no register named {name!r} in {self.names}") from None

    def indices(self, names: Sequence[str]) -> list[int]:
        return [self.index(nm) for nm in names]

    def __getitem__(self, name: str) -> Register:
        return self.registers[self.index(name)]

    def concat(self, other: RegisterLayout) -> RegisterLayout:
        clash = set(self.names) & set(other.names)
        if clash:
            raise LayoutMismatch(f"register name collision: {sorted(clash)}")
        return RegisterLayout(self.registers + other.registers)

    def without(self, names: Iterable[str]) -> RegisterLayout:
        drop = set(names)
        return RegisterLayout(tuple(r for r in self.registers if r.name not in drop))

    def encode(self, values) -> tuple[int, ...]:
        if isinstance(values, Mapping):
            values = [values[nm] for nm in self.names]
        if len(values) != len(self.registers):
            raise ValueError(f"expected {len(self.registers)} values, got {len(values)}")
        return tuple(r.encode(v) for r, v in zip(self.registers, values))

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.registers]


def qubit(name: str) -> Register:
    return Register.qubit(name)


def perm_reg(name: str, n: int) -> Register:
    return Register.perm(name, n)


def layout(*registers: Register) -> RegisterLayout:
    return RegisterLayout(tuple(registers))


# -- row grouping ------------------------------------------------------------

def _group(basis: np.ndarray, dims: Sequence[int]):
    """Unique rows of ``basis``; returns (first_index, inverse)."""
    if basis.shape[1] == 0:
        return np.zeros(min(1, len(basis)), dtype=np.int64), np.zeros(len(basis), dtype=np.int64)
    total = 1
    for d in dims:
        total *= d
    if total < 2**62:
        strides = np.ones(len(dims), dtype=np.int64)
        for j in range(len(dims) - 2, -1, -1):
            strides[j] = strides[j + 1] * dims[j + 1]
        keys = basis @ strides
        _, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    else:
        _, first, inv = np.unique(basis, axis=0, return_index=True, return_inverse=True)
    return first, inv.reshape(-1)


def _canonical(basis: np.ndarray, amps: np.ndarray, dims, merge: bool = True):
    basis = np.asarray(basis, dtype=np.int64).reshape(len(amps), len(dims))
    amps = np.asarray(amps, dtype=np.complex128)
    if merge and len(amps):
        first, inv = _group(basis, dims)
        if len(first) != len(amps):
            summed = np.zeros(len(first), dtype=np.complex128)
            np.add.at(summed, inv, amps)
            basis, amps = basis[first], summed
    tol = _prune_state["tol"]
    if tol is not None and len(amps):
        keep = np.abs(amps) >= tol
        if not keep.all():
            basis, amps = basis[keep], amps[keep]
    return basis, amps


@dataclass(frozen=True, eq=False)
class PureState:
    """A (possibly sub-normalized) vector over a register layout."""

    layout: RegisterLayout
    basis: np.ndarray = field(repr=False)
    amps: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, lay: RegisterLayout, basis, amps, merge: bool = True) -> PureState:
        b, a = _canonical(basis, amps, lay.dims, merge=merge)
        b.setflags(write=False)
        a.setflags(write=False)
        return cls(lay, b, a)

    @classmethod
    def zero(cls, lay: RegisterLayout) -> PureState:
        return cls.build(lay, np.zeros((0, len(lay)), dtype=np.int64), np.zeros(0))

    @property
    def nnz(self) -> int:
        return len(self.amps)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def normalized(self) -> PureState:
        nrm = self.norm()
        if nrm < PRUNE_TOL:
            raise ZeroDivisionError("cannot normalize a zero vector")
        return PureState(self.layout, self.basis, self.amps / nrm)

    def column(self, name: str) -> np.ndarray:
        return self.basis[:, self.layout.index(name)]

    def __add__(self, other: PureState) -> PureState:
        _same_layout(self, other)
        return PureState.build(
            self.layout,
            np.concatenate([self.basis, other.basis]),
            np.concatenate([self.amps, other.amps]),
        )

    def __sub__(self, other: PureState) -> PureState:
        return self + other.scale(-1)

    def scale(self, c: complex) -> PureState:
        return PureState.build(self.layout, self.basis, self.amps * c, merge=False)

    def __mul__(self, c: complex) -> PureState:
        return self.scale(c)

    __rmul__ = __mul__

    def __neg__(self) -> PureState:
        return self.scale(-1)

    def amplitude(self, values) -> complex:
        row = np.array(self.layout.encode(values), dtype=np.int64)
        hit = np.flatnonzero(np.all(self.basis == row, axis=1))
        return complex(self.amps[hit[0]]) if len(hit) else 0j

    def to_dense(self) -> np.ndarray:
        """Full amplitude vector in row-major register order (small layouts only)."""
        dims = self.layout.dims
        size = int(np.prod(dims, dtype=object))
        if size > 2**24:
            raise MemoryError(f"refusing to densify a {size}-dimensional vector")
        vec = np.zeros(size, dtype=np.complex128)
        if self.nnz:
            vec[np.ravel_multi_index(tuple(self.basis.T), dims)] = self.amps
        return vec

    @classmethod
    def from_dense(cls, lay: RegisterLayout, vec) -> PureState:
        vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
        idx = np.flatnonzero(vec)
        basis = np.stack(np.unravel_index(idx, lay.dims), axis=1) if len(lay) else np.zeros((len(idx), 0))
        return cls.build(lay, basis, vec[idx], merge=False)

    def sorted_entries(self):
        order = np.lexsort(self.basis.T[::-1]) if self.nnz else np.zeros(0, dtype=np.int64)
        return self.basis[order], self.amps[order]

    def to_json(self) -> dict:
        basis, amps = self.sorted_entries()
        regs = self.layout.registers
        entries = []
        for row, amp in zip(basis, amps):
            vals = [r.decode(v).to_json() if r.kind == "perm" else int(v) for r, v in zip(regs, row)]
            entries.append([vals, _round(amp.real), _round(amp.imag)])
        return {"layout": self.layout.to_json(), "entries": entries}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def __repr__(self) -> str:
        return f"PureState({list(self.layout.names)}, nnz={self.nnz}, norm_sq={self.norm_sq():.6g})"


def _round(x: float) -> float:
    # 15 significant digits keep dumps byte-stable across summation orders
    v = float(f"{x:.15g}")
    return 0.0 if v == 0 else v


def _same_layout(a: PureState, b: PureState):
    if a.layout != b.layout:
        raise LayoutMismatch(f"layouts differ: {a.layout.names} vs {b.layout.names}")


def basis_state(lay: RegisterLayout, values) -> PureState:
    row = np.array([lay.encode(values)], dtype=np.int64)
    return PureState.build(lay, row, np.ones(1), merge=False)


def superposition(lay: RegisterLayout, terms: Iterable[tuple[object, complex]]) -> PureState:
    terms = list(terms)
    if not terms:
        return PureState.zero(lay)
    basis = np.array([lay.encode(v) for v, _ in terms], dtype=np.int64)
    return PureState.build(lay, basis, np.array([c for _, c in terms], dtype=np.complex128))


def inner_product(a: PureState, b: PureState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _same_layout(a, b)
    if not a.nnz or not b.nnz:
        return 0j
    both = np.concatenate([a.basis, b.basis])
    first, inv = _group(both, a.layout.dims)
    va = np.zeros(len(first), dtype=np.complex128)
    vb = np.zeros(len(first), dtype=np.complex128)
    va[inv[: a.nnz]] = a.amps
    vb[inv[a.nnz:]] = b.amps
    return complex(np.vdot(va, vb))


def fidelity(a: PureState, b: PureState) -> float:
    """``|<a|b>|^2 / (|a|^2 |b|^2)`` for pure states."""
    na, nb = a.norm_sq(), b.norm_sq()
    if na < PRUNE_TOL or nb < PRUNE_TOL:
        return 0.0
    return abs(inner_product(a, b)) ** 2 / (na * nb)


def distance(a: PureState, b: PureState) -> float:
    return (a - b).norm()


def allclose(a: PureState, b: PureState, atol: float = ATOL) -> bool:
    return distance(a, b) <= atol


def equal_up_to_phase(a: PureState, b: PureState, atol: float = ATOL) -> bool:
    """``|<a|b>| == |a| |b|`` and ``|a| == |b|`` within ``atol``."""
    na, nb = a.norm(), b.norm()
    return abs(na - nb) <= atol and abs(abs(inner_product(a, b)) - na * nb) <= atol


def tensor(a: PureState, b: PureState) -> PureState:
    lay = a.layout.concat(b.layout)
    ia = np.repeat(np.arange(a.nnz), b.nnz)
    ib = np.tile(np.arange(b.nnz), a.nnz)
    basis = np.concatenate([a.basis[ia], b.basis[ib]], axis=1)
    return PureState.build(lay, basis, a.amps[ia] * b.amps[ib], merge=False)


def add_register(state: PureState, reg: Register, value=0) -> PureState:
    return tensor(state, basis_state(layout(reg), [value]))


def discard(state: PureState, names: str | Sequence[str]) -> PureState:
    """Drop registers that hold a single definite basis value."""
    names = [names] if isinstance(names, str) else list(names)
    idx = state.layout.indices(names)
    for nm, j in zip(names, idx):
        col = state.basis[:, j]
        if len(col) and np.any(col != col[0]):
            raise ValueError(f"register {nm!r} is not in a definite basis state")
    keep = [j for j in range(len(state.layout)) if j not in idx]
    return PureState.build(state.layout.without(names), state.basis[:, keep], state.amps, merge=False)


def reorder(state: PureState, names: Sequence[str]) -> PureState:
    idx = state.layout.indices(names)
    if sorted(idx) != list(range(len(state.layout))):
        raise ValueError("reorder needs every register exactly once")
    lay = RegisterLayout(tuple(state.layout.registers[j] for j in idx))
    return PureState.build(lay, state.basis[:, idx], state.amps, merge=False)


def rename(state: PureState, mapping: Mapping[str, str]) -> PureState:
    regs = tuple(
        Register(mapping.get(r.name, r.name), r.kind, r.dim, r.n) for r in state.layout.registers
    )
    return PureState(RegisterLayout(regs), state.basis, state.amps)


def project(state: PureState, constraints: Mapping[str, object]) -> PureState:
    """Apply the computational-basis projector fixing each named register.

    A constraint value may be a single value or a collection of allowed values.
    The result is sub-normalized; its squared norm is the event probability.
    """
    mask = np.ones(state.nnz, dtype=bool)
    for nm, allowed in constraints.items():
        reg = state.layout[nm]
        col = state.column(nm)
        if isinstance(allowed, (set, frozenset, list, tuple, np.ndarray)) and not isinstance(allowed, Perm):
            vals = np.array([reg.encode(v) for v in allowed], dtype=np.int64)
            mask &= np.isin(col, vals)
        else:
            mask &= col == reg.encode(allowed)
    return PureState.build(state.layout, state.basis[mask], state.amps[mask], merge=False)


def map_rows(state: PureState, basis: np.ndarray, amps: np.ndarray | None = None) -> PureState:
    """Replace the basis rows (and optionally amplitudes) then re-canonicalize.

    Used by gates that permute basis states, possibly with phases.
    """
    return PureState.build(state.layout, basis, state.amps if amps is None else amps)


def apply_matrix(state: PureState, targets: Sequence[str], matrix: np.ndarray) -> PureState:
    """Apply a dense operator on the joint space of ``targets`` (row-major order)."""
    lay = state.layout
    tidx = lay.indices(targets)
    tdims = [lay.dims[j] for j in tidx]
    d = int(np.prod(tdims))
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (d, d):
        raise ValueError(f"matrix shape {matrix.shape} does not match target dimension {d}")
    if not state.nnz:
        return state
    ridx = [j for j in range(len(lay)) if j not in tidx]
    rdims = [lay.dims[j] for j in ridx]
    t = np.ravel_multi_index(tuple(state.basis[:, tidx].T), tdims)
    first, inv = _group(state.basis[:, ridx], rdims)
    rest = state.basis[first][:, ridx]
    m = len(first)
    out_basis, out_amps = [], []
    chunk = max(1, 2**24 // d)
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        sel = (inv >= lo) & (inv < hi)
        block = np.zeros((hi - lo, d), dtype=np.complex128)
        block[inv[sel] - lo, t[sel]] = state.amps[sel]
        out = block @ matrix.T
        tol = _prune_state["tol"]
        r, c = np.nonzero(np.abs(out) >= tol) if tol is not None else np.nonzero(np.ones_like(out, dtype=bool))
        rows = np.empty((len(r), len(lay)), dtype=np.int64)
        rows[:, ridx] = rest[lo + r]
        rows[:, tidx] = np.stack(np.unravel_index(c, tdims), axis=1)
        out_basis.append(rows)
        out_amps.append(out[r, c])
    return PureState.build(lay, np.concatenate(out_basis), np.concatenate(out_amps), merge=False)


def apply_unitary(state: PureState, gate, targets: Sequence[str] | str) -> PureState:
    """Apply a gate specification to the named registers."""
    if isinstance(targets, str):
        targets = [targets]
    return gate.apply(state, list(targets))


# -- measurement -------------------------------------------------------------

@dataclass(frozen=True)
class Outcome:
    label: tuple[int, ...]
    probability: float
    state: PureState | None

    def decoded(self, lay: RegisterLayout, names: Sequence[str]):
        return tuple(lay[nm].decode(v) for nm, v in zip(names, self.label))


@dataclass(frozen=True)
class OutcomeDistribution:
    registers: tuple[str, ...]
    outcomes: tuple[Outcome, ...]
    total: float

    def probability(self, label) -> float:
        label = tuple(label)
        for o in self.outcomes:
            if o.label == label:
                return o.probability
        return 0.0

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {o.label: o.probability for o in self.outcomes}

    def __iter__(self):
        return iter(self.outcomes)

    def __len__(self):
        return len(self.outcomes)


def measure_analysis(state: PureState, registers: Sequence[str] | str, keep_states: bool = True) -> OutcomeDistribution:
    """Every outcome of a computational-basis measurement with its probability.

    Post-measurement states are renormalized; outcomes come sorted by label.
    """
    if isinstance(registers, str):
        registers = [registers]
    lay = state.layout
    idx = lay.indices(registers)
    outcomes = []
    if state.nnz:
        cols = state.basis[:, idx]
        first, inv = _group(cols, [lay.dims[j] for j in idx])
        weights = np.zeros(len(first))
        np.add.at(weights, inv, np.abs(state.amps) ** 2)
        labels = cols[first]
        order = np.lexsort(labels.T[::-1]) if len(idx) else np.arange(len(first))
        for g in order:
            p = float(weights[g])
            if p <= 0:
                continue
            post = None
            if keep_states:
                sel = inv == g
                post = PureState.build(lay, state.basis[sel], state.amps[sel] / math.sqrt(p), merge=False)
            outcomes.append(Outcome(tuple(int(v) for v in labels[g]), p, post))
    return OutcomeDistribution(tuple(registers), tuple(outcomes), state.norm_sq())


def measure_sample(state: PureState, registers: Sequence[str] | str, seed) -> tuple[tuple[int, ...], PureState]:
    """Draw one outcome with a seeded generator; ``seed`` may be an int or a Generator."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dist = measure_analysis(state, registers)
    if not dist.outcomes:
        raise ValueError("cannot sample from a zero vector")
    probs = np.array([o.probability for o in dist.outcomes])
    k = int(rng.choice(len(probs), p=probs / probs.sum()))
    return dist.outcomes[k].label, dist.outcomes[k].state


# -- reduced states ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityOp:
    """Dense density matrix on one register."""

    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, atol: float = ATOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= atol)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def is_valid(self, atol: float = ATOL, weight: float = 1.0) -> bool:
        return (
            self.is_hermitian(atol)
            and abs(self.trace() - weight) <= atol
            and self.min_eigenvalue() >= -atol
        )

    def __matmul__(self, other: DensityOp) -> np.ndarray:
        return self.matrix @ other.matrix

    def __add__(self, other: DensityOp) -> DensityOp:
        return DensityOp(self.matrix + other.matrix)

    def max_abs_diff(self, other) -> float:
        m = other.matrix if isinstance(other, DensityOp) else np.asarray(other)
        return float(np.max(np.abs(self.matrix - m)))

    def __repr__(self) -> str:
        return f"DensityOp(dim={self.dim}, trace={self.trace().real:.6g})"


def partial_trace(state: PureState, keep: str) -> DensityOp:
    """Reduced density matrix of one register, tracing out all others."""
    lay = state.layout
    k = lay.index(keep)
    d = lay.dims[k]
    ridx = [j for j in range(len(lay)) if j != k]
    if not state.nnz:
        return DensityOp(np.zeros((d, d), dtype=np.complex128))
    first, inv = _group(state.basis[:, ridx], [lay.dims[j] for j in ridx])
    mat = np.zeros((len(first), d), dtype=np.complex128)
    mat[inv, state.basis[:, k]] = state.amps
    return DensityOp(mat.T @ mat.conj())


def _codes(basis: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    if basis.shape[1] == 0:
        return np.zeros(len(basis), dtype=np.int64)
    return np.ravel_multi_index(tuple(basis.T), dims)


def contract(state: PureState, registers: Sequence[str], target: PureState) -> PureState:
    """``(<target| (x) I) |state>``: a vector over the remaining registers."""
    lay = state.layout
    idx = lay.indices(registers)
    sub = RegisterLayout(tuple(lay.registers[j] for j in idx))
    if target.layout != sub:
        raise LayoutMismatch(f"target layout {target.layout.names} does not match {sub.names}")
    rest_idx = [j for j in range(len(lay)) if j not in idx]
    rest_lay = RegisterLayout(tuple(lay.registers[j] for j in rest_idx))
    if not state.nnz or not target.nnz:
        return PureState.zero(rest_lay)
    tcodes = _codes(target.basis, sub.dims)
    order = np.argsort(tcodes)
    tcodes, tamps = tcodes[order], target.amps[order]
    scodes = _codes(state.basis[:, idx], sub.dims)
    pos = np.clip(np.searchsorted(tcodes, scodes), 0, len(tcodes) - 1)
    hit = tcodes[pos] == scodes
    if not hit.any():
        return PureState.zero(rest_lay)
    return PureState.build(
        rest_lay, state.basis[hit][:, rest_idx], np.conj(tamps[pos[hit]]) * state.amps[hit]
    )


def project_onto(state: PureState, registers: Sequence[str], target: PureState) -> PureState:
    """Apply the rank-one projector ``|t><t|`` (``t`` normalized) on ``registers``."""
    rest = contract(state, registers, target.normalized())
    out = tensor(rest, target.normalized())
    return reorder(out, state.layout.names)
