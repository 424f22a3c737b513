"""Reductions: a key finder gives a two-copy distinguisher, and a bit decoder gives a one-copy one."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from ..gates import Block, Controlled, Hadamard, Op, USgn, run_program
from ..hilbert import PureState, add_register, basis_state, layout, measure_analysis, perm_reg, qubit, tensor
from ..perm import Perm, enumerate_keys, symmetric_group
from ..procedures import c_spa_program, c_spa_on_rho
from ..states import compact_purification, require_key

GUESS = "guess"
CTRL = "ctrl"
SPA_ANC = "spa_anc"
COPY1 = ("env1", "inst1")
COPY2 = ("env2", "inst2")


class KeyOracle(Protocol):
    """Writes a key guess into ``guess`` (which starts in |id>), acting on ``instance`` only."""

    gamma: float

    def program(self, pi: Perm, instance: str, guess: str) -> tuple[Op, ...]: ...


def _first_column_unitary(v: np.ndarray) -> np.ndarray:
    """A real orthogonal matrix whose first column is the unit vector ``v``."""
    e0 = np.zeros_like(v)
    e0[0] = 1.0
    u = e0 - v
    if np.allclose(u, 0):
        return np.eye(len(v))
    return np.eye(len(v)) - 2 * np.outer(u, u) / (u @ u)


@dataclass(frozen=True)
class GenieOracle:
    """Finds the hidden key with probability ``gamma`` and a fixed wrong key otherwise.

    It is handed the key by the simulator and ignores the instance register,
    standing in for any solver with that success rate.
    """

    gamma: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")

    def program(self, pi: Perm, instance: str, guess: str) -> tuple[Op, ...]:
        require_key(pi)
        ident = Perm.identity(pi.n)
        if self.gamma >= 1.0:
            return (Op(Block(np.array([[0, 1], [1, 0]]), ((ident,), (pi,))), (guess,)),)
        wrong = [k for k in enumerate_keys(pi.n) if k != pi]
        if not wrong:
            raise ValueError(f"n={pi.n} has a single key, so a guess with gamma < 1 has nothing else to output")
        v = np.array([0.0, math.sqrt(self.gamma), math.sqrt(1 - self.gamma)])
        return (Op(Block(_first_column_unitary(v), ((ident,), (pi,), (wrong[0],))), (guess,)),)


def brute_force_oracle(pi: Perm) -> GenieOracle:
    """Exhaustive key test: the unique key whose partition of ``rho(0, kappa)`` is deterministic."""
    hits = [k for k in enumerate_keys(pi.n) if abs(c_spa_on_rho(0, pi, k).probability((0,)) - 1) < 1e-9]
    if hits != [pi]:
        raise AssertionError(f"exhaustive key test found {hits}, expected only the hidden key")
    return GenieOracle(1.0)


def genie_oracle(gamma: float) -> GenieOracle:
    return GenieOracle(gamma)


@dataclass(frozen=True)
class QscdResult:
    s: int
    pi: Perm
    gamma: float
    distribution: tuple  # ((0, p0), (1, p1)) for the output bit

    @property
    def success(self) -> float:
        return dict(self.distribution)[self.s]

    @property
    def guess(self) -> int:
        return max(self.distribution, key=lambda kv: (kv[1], -kv[0]))[0]

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "pi": self.pi.to_json(),
            "gamma": self.gamma,
            "distribution": {str(b): p for b, p in self.distribution},
            "success": self.success,
            "guess": self.guess,
        }


def _first_stage(oracle: KeyOracle, s: int, pi: Perm, n: int) -> PureState:
    """Control in |+>, sector fix on branch 1, then the oracle writes its guess."""
    st = basis_state(layout(qubit(CTRL)), [0])
    st = tensor(st, compact_purification(s, pi, COPY1))
    st = tensor(st, basis_state(layout(perm_reg(GUESS, n)), [Perm.identity(n)]))
    prog = (
        Op(Hadamard(), (CTRL,)),
        Op(Controlled(USgn()), (CTRL, COPY1[1])),  # branch 1 converts sector 1 to sector 0 first
        *oracle.program(pi, COPY1[1], GUESS),
    )
    return run_program(st, prog)


def qscd_state(oracle: KeyOracle, s: int, pi: Perm) -> PureState:
    """The whole two-copy circuit as one pure state, ending before the ancilla is read."""
    st = tensor(_first_stage(oracle, s, pi, pi.n), compact_purification(s, pi, COPY2))
    st = add_register(st, qubit(SPA_ANC), 0)
    return run_program(st, c_spa_program(SPA_ANC, GUESS, COPY2[1]))


def qscd_distinguish(oracle: KeyOracle, s: int, pi: Perm, joint: bool = False) -> QscdResult:
    """Exact output distribution of the two-copy distinguisher on ``rho(s, pi)`` twice.

    The partition step only reads the guess register, so by default the second
    copy is handled one guess value at a time; ``joint=True`` simulates both
    copies in a single state instead (slow at n = 6, same numbers).
    """
    if s not in (0, 1):
        raise ValueError("s must be 0 or 1")
    require_key(pi)
    if joint:
        dist = measure_analysis(qscd_state(oracle, s, pi), [SPA_ANC], keep_states=False)
        p = (dist.probability((0,)), dist.probability((1,)))
    else:
        g = symmetric_group(pi.n)
        p = [0.0, 0.0]
        for o in measure_analysis(_first_stage(oracle, s, pi, pi.n), [GUESS], keep_states=False):
            (key,) = o.label
            if not g.is_key[key]:
                raise ValueError("the oracle wrote a non-key into the guess register")
            part = c_spa_on_rho(s, pi, g.perm(key))
            p[0] += o.probability * part.probability((0,))
            p[1] += o.probability * part.probability((1,))
    return QscdResult(s, pi, oracle.gamma, ((0, p[0]), (1, p[1])))


def qscd_advantage(oracle: KeyOracle, pi: Perm) -> float:
    p1 = [dict(qscd_distinguish(oracle, s, pi).distribution)[1] for s in (0, 1)]
    return abs(p1[0] - p1[1])


# -- one-copy decoders --------------------------------------------------------------

Decoder = Callable[[int, Perm], float]  # (a, pi) -> Pr[output 1 | rho(a, pi)]


def perfect_decoder(a: int, pi: Perm) -> float:
    """Partition with the true key; the outcome is the committed bit."""
    return c_spa_on_rho(a, pi, pi).probability((1,))


def biased_decoder(p: float) -> Decoder:
    """Outputs the committed bit with probability ``p`` on either input."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return lambda a, pi: p if a == 1 else 1 - p


def random_decoder(a: int, pi: Perm) -> float:
    return 0.5


@dataclass(frozen=True)
class DistinguisherResult:
    p1_given_0: float
    p1_given_1: float

    @property
    def advantage(self) -> float:
        return abs(self.p1_given_0 - self.p1_given_1)

    @property
    def min_success(self) -> float:
        return min(1 - self.p1_given_0, self.p1_given_1)

    @property
    def guaranteed(self) -> float:
        """``2 (min success - 1/2)``: the floor promised by the success margin."""
        return 2 * (self.min_success - 0.5)

    def to_json(self) -> dict:
        return {
            "p1_given_0": self.p1_given_0,
            "p1_given_1": self.p1_given_1,
            "advantage": self.advantage,
            "min_success": self.min_success,
            "guaranteed": self.guaranteed,
        }


def decoder_to_distinguisher(decoder: Decoder, pi: Perm | None = None, n: int = 6) -> DistinguisherResult:
    """Run the decoder and output its bit; the advantage is the gap in Pr[1]."""
    pi = require_key(pi) if pi is not None else enumerate_keys(n)[0]
    return DistinguisherResult(float(decoder(0, pi)), float(decoder(1, pi)))
