"""Cheating strategies for the committer and a small library of examples."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..gates import (
    Block,
    Controlled,
    Hadamard,
    Not,
    Op,
    USgn,
    invert_program,
    program_from_json,
    program_to_json,
    run_program,
)
from ..hilbert import PureState, basis_state
from ..perm import Perm, check_security_param, enumerate_keys
from ..procedures import p1_tilde_program
from ..protocol import ALICE_COMMIT_REGS, ALICE_OPEN_REGS, honest_commit_program, key_loader, protocol_layout


class MalformedStrategy(ValueError):
    """A strategy file or program that cannot be used as an attack."""


@dataclass(frozen=True)
class CheatStrategy:
    """Committer programs ``(u1, u2_0, u2_1)``.

    ``u1`` runs on A_private, bit, open1, open2, commit starting from all zeros;
    ``u2_a`` runs on A_private, bit, open1, open2 before opening bit ``a``.
    """

    name: str
    n: int
    u1: tuple[Op, ...]
    u2_0: tuple[Op, ...] = ()
    u2_1: tuple[Op, ...] = ()
    a_private_dim: int = 2

    def __post_init__(self):
        check_security_param(self.n)
        for label, prog, allowed in (
            ("u1", self.u1, ALICE_COMMIT_REGS),
            ("u2_0", self.u2_0, ALICE_OPEN_REGS),
            ("u2_1", self.u2_1, ALICE_OPEN_REGS),
        ):
            object.__setattr__(self, label, tuple(prog))
            for op in prog:
                bad = [t for t in op.targets if t not in allowed]
                if bad:
                    raise MalformedStrategy(f"{label} touches {bad}, allowed registers are {list(allowed)}")

    def u2(self, a: int) -> tuple[Op, ...]:
        return self.u2_1 if a else self.u2_0

    def initial_state(self) -> PureState:
        lay = protocol_layout(self.n, self.a_private_dim)
        return basis_state(lay, [0] * len(lay))

    def eta_c1(self) -> PureState:
        """Joint state after the commit program."""
        return run_program(self.initial_state(), self.u1)

    def is_normalized(self) -> bool:
        return len(self.u2_1) == 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "a_private_dim": self.a_private_dim,
            "u1": program_to_json(self.u1),
            "u2_0": program_to_json(self.u2_0),
            "u2_1": program_to_json(self.u2_1),
        }

    @classmethod
    def from_json(cls, data, n: int | None = None) -> CheatStrategy:
        if not isinstance(data, dict):
            raise MalformedStrategy("strategy must be a JSON object")
        try:
            return cls(
                name=str(data.get("name", "custom")),
                n=int(n if n is not None else data["n"]),
                u1=program_from_json(data.get("u1", [])),
                u2_0=program_from_json(data.get("u2_0", [])),
                u2_1=program_from_json(data.get("u2_1", [])),
                a_private_dim=int(data.get("a_private_dim", 2)),
            )
        except MalformedStrategy:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedStrategy(str(exc)) from exc

    @classmethod
    def load(cls, path: str, n: int | None = None) -> CheatStrategy:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedStrategy(f"{path}: {exc}") from exc
        return cls.from_json(data, n)


def normalize_strategy(s: CheatStrategy) -> CheatStrategy:
    """Fold ``u2_1`` into the commit program so that opening 1 needs no action.

    Returns ``(u1 then u2_1, u2_1^-1 then u2_0, identity)``; both success
    probabilities are unchanged.
    """
    if s.is_normalized():
        return s
    return CheatStrategy(
        name=s.name,
        n=s.n,
        u1=s.u1 + s.u2_1,
        u2_0=invert_program(s.u2_1) + s.u2_0,
        u2_1=(),
        a_private_dim=s.a_private_dim,
    )


# -- bundled strategies ------------------------------------------------------------

def honest(n: int, a: int, key_index: int = 0) -> CheatStrategy:
    pi = enumerate_keys(n)[key_index]
    return CheatStrategy(f"honest-{a}", n, honest_commit_program(n, a, pi))


def equal_superposition(n: int, key_index: int = 0) -> CheatStrategy:
    """Commit to (|0>|big_phi_0> + |1>|big_phi_1>)/sqrt 2 with one key."""
    pi = enumerate_keys(n)[key_index]
    u1 = (
        (key_loader(pi),)
        + p1_tilde_program("A_private", "open2", "open1", "commit")
        + (
            Op(Hadamard(), ("bit",)),
            Op(Controlled(USgn()), ("bit", "open1")),
            Op(Controlled(USgn()), ("bit", "commit")),
        )
    )
    return CheatStrategy("equal-superposition", n, u1)


def key_swap(n: int, pi_index: int = 0, kappa_index: int = 1) -> CheatStrategy:
    """Honestly commit 1 under ``pi``; to open 0, relabel (1, pi) as (0, kappa)."""
    keys = enumerate_keys(n)
    if len(keys) < 2:
        raise ValueError(f"key-swap needs two distinct keys; n={n} has {len(keys)}")
    pi, kappa = keys[pi_index], keys[kappa_index]
    if pi == kappa:
        raise ValueError("key-swap needs two distinct keys")
    flip = Block(np.array([[0, 1], [1, 0]]), ((1, pi), (0, kappa)))
    return CheatStrategy(
        "key-swap",
        n,
        honest_commit_program(n, 1, pi),
        u2_0=(Op(flip, ("bit", "open2")),),
    )


def uniform_key_loader(n: int, reg: str = "open2") -> Op:
    """Householder reflection sending |id> to the uniform superposition over keys."""
    keys = enumerate_keys(n)
    k = len(keys)
    target = np.zeros(k + 1)
    target[1:] = 1 / math.sqrt(k)
    v = np.zeros(k + 1)
    v[0] = 1.0
    v -= target
    refl = np.eye(k + 1) - 2 * np.outer(v, v) / (v @ v)
    return Op(Block(refl, tuple((p,) for p in [Perm.identity(n)] + keys)), (reg,))


def uniform_key(n: int) -> CheatStrategy:
    """Honestly commit 1 under a uniform superposition of all keys."""
    u1 = (
        (uniform_key_loader(n),)
        + p1_tilde_program("A_private", "open2", "open1", "commit")
        + (Op(Not(), ("bit",)),)
        + (Op(USgn(), ("open1",)), Op(USgn(), ("commit",)))
    )
    return CheatStrategy("uniform-key", n, u1)


BUILTIN = ("honest-0", "honest-1", "equal-superposition", "key-swap", "uniform-key")


def builtin(name: str, n: int) -> CheatStrategy:
    if name == "honest-0":
        return honest(n, 0)
    if name == "honest-1":
        return honest(n, 1)
    if name == "equal-superposition":
        return equal_superposition(n)
    if name == "key-swap":
        return key_swap(n)
    if name == "uniform-key":
        return uniform_key(n)
    raise KeyError(f"unknown strategy {name!r}; choose from {', '.join(BUILTIN)}")


def library(n: int) -> list[CheatStrategy]:
    out = []
    for name in BUILTIN:
        try:
            out.append(builtin(name, n))
        except ValueError:
            continue  # key-swap does not exist at n = 2
    return out
