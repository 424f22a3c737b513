"""Named unitaries acting on registers of a :class:`~permcommit.hilbert.PureState`.

Each gate knows how many registers it touches, what kind they must be, and
how to invert itself.  Gates that merely permute basis states are applied by
rewriting rank columns through the S_n tables; the rest go through a dense
kernel over the joint target space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .hilbert import ATOL, PureState, Register, RegisterLayout, apply_matrix, map_rows
from .perm import Perm, symmetric_group


class NonUnitaryError(ValueError):
    """A supplied matrix fails U^dagger U = I."""


class GateTargetError(ValueError):
    """A gate was applied to registers of the wrong number or kind."""


def _regs(state: PureState, targets: Sequence[str]) -> list[Register]:
    return [state.layout[t] for t in targets]


def _expect(gate, regs: list[Register], kinds: Sequence[str]):
    if len(regs) != len(kinds):
        raise GateTargetError(f"{gate.kind} takes {len(kinds)} registers, got {len(regs)}")
    for r, k in zip(regs, kinds):
        if k == "qubit" and r.dim != 2:
            raise GateTargetError(f"{gate.kind}: register {r.name!r} must be a qubit")
        if k == "perm" and r.kind != "perm":
            raise GateTargetError(f"{gate.kind}: register {r.name!r} must be a permutation register")
    ns = {r.n for r in regs if r.kind == "perm"}
    if len(ns) > 1:
        raise GateTargetError(f"{gate.kind}: permutation registers of different sizes {sorted(ns)}")


def check_unitary(matrix: np.ndarray, atol: float = ATOL) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonUnitaryError(f"matrix must be square, got shape {m.shape}")
    err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0)
    if err > atol:
        raise NonUnitaryError(f"matrix is not unitary (max |U^dagger U - I| = {err:.3g})")
    return m


def _matrix_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(np.complex128)
    raise ValueError("matrix must be a list of rows of numbers or [re, im] pairs")


class Gate:
    kind = "?"

    def apply(self, state: PureState, targets: Sequence[str]) -> PureState:
        raise NotImplementedError

    def inverse(self) -> Gate:
        raise NotImplementedError

    def params_json(self) -> dict:
        return {}

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params_json()}


@dataclass(frozen=True)
class Hadamard(Gate):
    kind = "Hadamard"

    def apply(self, state, targets):
        _expect(self, _regs(state, targets), ["qubit"])
        return apply_matrix(state, targets, np.array([[1, 1], [1, -1]]) / math.sqrt(2))

    def inverse(self):
        return self


@dataclass(frozen=True)
class Not(Gate):
    kind = "Not"

    def apply(self, state, targets):
        _expect(self, _regs(state, targets), ["qubit"])
        j = state.layout.index(targets[0])
        basis = state.basis.copy()
        basis[:, j] ^= 1
        return map_rows(state, basis)

    def inverse(self):
        return self


@dataclass(frozen=True)
class CtrlRightMult(Gate):
    """``|a>|k>|s> -> |a>|k>|s k>`` when a = 1 (``s k^-1`` for the inverse)."""

    inverted: bool = False
    kind = "CtrlRightMult"

    def apply(self, state, targets):
        regs = _regs(state, targets)
        _expect(self, regs, ["qubit", "perm", "perm"])
        g = symmetric_group(regs[1].n)
        c, k, t = state.layout.indices(targets)
        basis = state.basis.copy()
        on = basis[:, c] == 1
        key = basis[on, k]
        if self.inverted:
            key = g.inv[key]
        basis[on, t] = g.mult[basis[on, t], key]
        return map_rows(state, basis)

    def inverse(self):
        return CtrlRightMult(not self.inverted)

    def params_json(self):
        return {"inverted": self.inverted}


@dataclass(frozen=True)
class CtrlRightMultFixed(Gate):
    """``|a>|s> -> |a>|s pi>`` when a = 1, with ``pi`` known classically."""

    pi: Perm
    inverted: bool = False
    kind = "CtrlRightMultFixed"

    def apply(self, state, targets):
        regs = _regs(state, targets)
        _expect(self, regs, ["qubit", "perm"])
        if regs[1].n != self.pi.n:
            raise GateTargetError(f"key is in S_{self.pi.n} but register is S_{regs[1].n}")
        g = symmetric_group(self.pi.n)
        r = self.pi.rank()
        if self.inverted:
            r = int(g.inv[r])
        c, t = state.layout.indices(targets)
        basis = state.basis.copy()
        on = basis[:, c] == 1
        basis[on, t] = g.mult[basis[on, t], r]
        return map_rows(state, basis)

    def inverse(self):
        return CtrlRightMultFixed(self.pi, not self.inverted)

    def params_json(self):
        return {"pi": self.pi.to_json(), "inverted": self.inverted}


@dataclass(frozen=True)
class CnotId(Gate):
    """Flip the qubit iff the permutation register holds the identity."""

    kind = "CnotId"

    def apply(self, state, targets):
        _expect(self, _regs(state, targets), ["qubit", "perm"])
        c, t = state.layout.indices(targets)
        basis = state.basis.copy()
        basis[:, c] ^= (basis[:, t] == 0).astype(np.int64)
        return map_rows(state, basis)

    def inverse(self):
        return self


@dataclass(frozen=True)
class USgn(Gate):
    """``|s> -> (-1)^sgn(s) |s>`` with sgn = 1 for even permutations."""

    kind = "USgn"

    def apply(self, state, targets):
        regs = _regs(state, targets)
        _expect(self, regs, ["perm"])
        par = symmetric_group(regs[0].n).parity
        col = state.column(targets[0])
        return map_rows(state, state.basis, state.amps * (1 - 2 * par[col]))

    def inverse(self):
        return self


@dataclass(frozen=True)
class CtrlSwap(Gate):
    """Exchange the contents of two registers of equal dimension."""

    kind = "CtrlSwap"

    def apply(self, state, targets):
        regs = _regs(state, targets)
        if len(regs) != 2:
            raise GateTargetError(f"CtrlSwap takes 2 registers, got {len(regs)}")
        if regs[0].dim != regs[1].dim:
            raise GateTargetError(f"cannot swap registers of dimension {regs[0].dim} and {regs[1].dim}")
        i, j = state.layout.indices(targets)
        basis = state.basis.copy()
        basis[:, [i, j]] = basis[:, [j, i]]
        return map_rows(state, basis)

    def inverse(self):
        return self


@dataclass(frozen=True)
class LeftMultFrom(Gate):
    """``|s>|t> -> |s>|s t>`` (``s^-1 t`` for the inverse)."""

    inverted: bool = False
    kind = "LeftMultFrom"

    def apply(self, state, targets):
        regs = _regs(state, targets)
        _expect(self, regs, ["perm", "perm"])
        g = symmetric_group(regs[0].n)
        s, t = state.layout.indices(targets)
        basis = state.basis.copy()
        src = basis[:, s]
        if self.inverted:
            src = g.inv[src]
        basis[:, t] = g.mult[src, basis[:, t]]
        return map_rows(state, basis)

    def inverse(self):
        return LeftMultFrom(not self.inverted)

    def params_json(self):
        return {"inverted": self.inverted}


@lru_cache(maxsize=None)
def unif_matrix(n: int) -> np.ndarray:
    """Real orthogonal matrix whose column for the identity is the uniform vector.

    Obtained by Gram-Schmidt on (uniform, e_1, e_2, ..., e_{N-1}), where e_k is
    the basis vector of the rank-k permutation.
    """
    size = math.factorial(n)
    a = np.eye(size)
    a[:, 0] = 1 / math.sqrt(size)
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    q.setflags(write=False)
    return q


@dataclass(frozen=True)
class Unif(Gate):
    """Maps ``|id>`` to the uniform superposition over S_n."""

    inverted: bool = False

    @property
    def kind(self):
        return "UnifInverse" if self.inverted else "Unif"

    def apply(self, state, targets):
        regs = _regs(state, targets)
        _expect(self, regs, ["perm"])
        u = unif_matrix(regs[0].n)
        return apply_matrix(state, targets, u.T if self.inverted else u)

    def inverse(self):
        return Unif(not self.inverted)


def UnifInverse() -> Unif:
    return Unif(True)


@dataclass(frozen=True, eq=False)
class Dense(Gate):
    """Arbitrary unitary on the joint space of its targets (row-major)."""

    matrix: np.ndarray = field(repr=False)
    kind = "Dense"

    def __post_init__(self):
        m = check_unitary(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, state, targets):
        return apply_matrix(state, targets, self.matrix)

    def inverse(self):
        return Dense(self.matrix.conj().T)

    def params_json(self):
        return {"matrix": _matrix_json(self.matrix)}


@dataclass(frozen=True, eq=False)
class Block(Gate):
    """A unitary on the span of listed target basis tuples, identity elsewhere.

    ``basis`` entries are tuples with one value per target register; permutation
    values may be given as :class:`Perm` or as ranks.
    """

    matrix: np.ndarray = field(repr=False)
    basis: tuple = ()
    kind = "Block"

    def __post_init__(self):
        m = check_unitary(self.matrix)
        if m.shape[0] != len(self.basis):
            raise NonUnitaryError(f"block matrix is {m.shape[0]}-dimensional but {len(self.basis)} basis tuples given")
        if len(set(self.basis)) != len(self.basis):
            raise NonUnitaryError("block basis tuples must be distinct")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "basis", tuple(tuple(b) for b in self.basis))

    def apply(self, state, targets):
        regs = _regs(state, targets)
        for b in self.basis:
            if len(b) != len(regs):
                raise GateTargetError(f"block basis tuple {b} does not match {len(regs)} targets")
        tidx = state.layout.indices(targets)
        tdims = [r.dim for r in regs]
        codes = np.array(
            [np.ravel_multi_index([r.encode(v) for r, v in zip(regs, b)], tdims) for b in self.basis],
            dtype=np.int64,
        )
        if not state.nnz:
            return state
        row_codes = np.ravel_multi_index(tuple(state.basis[:, tidx].T), tdims)
        order = np.argsort(codes)
        at = np.clip(np.searchsorted(codes[order], row_codes), 0, len(codes) - 1)
        inside = codes[order][at] == row_codes
        pos = np.where(inside, order[at], -1)
        if not inside.any():
            return state
        # relabel the block subspace as a qudit of dimension k, apply, map back
        k = len(codes)
        sub_basis = state.basis[inside].copy()
        keep = [j for j in range(len(state.layout)) if j not in tidx]
        regs_out = [state.layout.registers[j] for j in keep] + [Register("__block__", "qudit", k)]
        lay = RegisterLayout(tuple(regs_out))
        sub = PureState.build(
            lay,
            np.concatenate([sub_basis[:, keep], pos[inside][:, None]], axis=1),
            state.amps[inside],
            merge=False,
        )
        sub = apply_matrix(sub, ["__block__"], self.matrix)
        target_vals = np.stack(np.unravel_index(codes, tdims), axis=1)
        rows = np.empty((sub.nnz, len(state.layout)), dtype=np.int64)
        rows[:, keep] = sub.basis[:, :-1]
        rows[:, tidx] = target_vals[sub.basis[:, -1]]
        return PureState.build(
            state.layout,
            np.concatenate([state.basis[~inside], rows]),
            np.concatenate([state.amps[~inside], sub.amps]),
        )

    def inverse(self):
        return Block(self.matrix.conj().T, self.basis)

    def params_json(self):
        return {
            "basis": [[v.to_json() if isinstance(v, Perm) else int(v) for v in b] for b in self.basis],
            "matrix": _matrix_json(self.matrix),
        }


@dataclass(frozen=True, eq=False)
class Controlled(Gate):
    """Apply ``inner`` to the remaining targets when the first target equals ``value``."""

    inner: Gate
    value: int = 1
    kind = "Controlled"

    def apply(self, state, targets):
        ctrl, rest = targets[0], list(targets[1:])
        on = state.column(ctrl) == self.value
        if not on.any():
            return state
        part = PureState.build(state.layout, state.basis[on], state.amps[on], merge=False)
        part = self.inner.apply(part, rest)
        return PureState.build(
            state.layout,
            np.concatenate([state.basis[~on], part.basis]),
            np.concatenate([state.amps[~on], part.amps]),
        )

    def inverse(self):
        return Controlled(self.inner.inverse(), self.value)

    def params_json(self):
        return {"inner": self.inner.to_json(), "value": self.value}


# -- constructors --------------------------------------------------------------

def hadamard() -> Hadamard:
    return Hadamard()


def not_gate() -> Not:
    return Not()


def ctrl_right_mult() -> CtrlRightMult:
    return CtrlRightMult()


def ctrl_right_mult_fixed(pi: Perm) -> CtrlRightMultFixed:
    return CtrlRightMultFixed(pi)


def cnot_id() -> CnotId:
    return CnotId()


def u_sgn() -> USgn:
    return USgn()


def ctrl_swap() -> CtrlSwap:
    return CtrlSwap()


def left_mult_from() -> LeftMultFrom:
    return LeftMultFrom()


def unif() -> Unif:
    return Unif()


def gate_from_json(data: dict) -> Gate:
    kind = data.get("kind")
    p = data.get("params", {}) or {}
    simple = {"Hadamard": Hadamard, "Not": Not, "CnotId": CnotId, "USgn": USgn, "CtrlSwap": CtrlSwap}
    if kind in simple:
        return simple[kind]()
    if kind == "CtrlRightMult":
        return CtrlRightMult(bool(p.get("inverted", False)))
    if kind == "CtrlRightMultFixed":
        return CtrlRightMultFixed(Perm.from_json(p["pi"]), bool(p.get("inverted", False)))
    if kind == "LeftMultFrom":
        return LeftMultFrom(bool(p.get("inverted", False)))
    if kind == "Unif":
        return Unif(False)
    if kind == "UnifInverse":
        return Unif(True)
    if kind == "Dense":
        return Dense(_matrix_from_json(p["matrix"]))
    if kind == "Block":
        basis = tuple(tuple(Perm.from_json(v) if isinstance(v, list) else int(v) for v in b) for b in p["basis"])
        return Block(_matrix_from_json(p["matrix"]), basis)
    if kind == "Controlled":
        return Controlled(gate_from_json(p["inner"]), int(p.get("value", 1)))
    raise ValueError(f"unknown gate kind {kind!r}")


# -- programs ------------------------------------------------------------------

@dataclass(frozen=True)
class Op:
    gate: Gate
    targets: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))

    def apply(self, state: PureState) -> PureState:
        return self.gate.apply(state, self.targets)

    def inverse(self) -> Op:
        return Op(self.gate.inverse(), self.targets)

    def to_json(self) -> dict:
        d = self.gate.to_json()
        d["targets"] = list(self.targets)
        return d

    @classmethod
    def from_json(cls, data: dict) -> Op:
        if not isinstance(data, dict) or "targets" not in data:
            raise ValueError(f"gate entry must be an object with 'kind' and 'targets': {data!r}")
        return cls(gate_from_json(data), tuple(str(t) for t in data["targets"]))


Program = tuple  # tuple[Op, ...]


def run_program(state: PureState, program: Sequence[Op]) -> PureState:
    for op in program:
        state = op.apply(state)
    return state


def invert_program(program: Sequence[Op]) -> tuple[Op, ...]:
    return tuple(op.inverse() for op in reversed(program))


def program_registers(program: Sequence[Op]) -> set[str]:
    return {t for op in program for t in op.targets}


def program_to_json(program: Sequence[Op]) -> list[dict]:
    return [op.to_json() for op in program]


def program_from_json(data) -> tuple[Op, ...]:
    if not isinstance(data, list):
        raise ValueError("a gate program must be a JSON list")
    return tuple(Op.from_json(d) for d in data)
