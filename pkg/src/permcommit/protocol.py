"""Commit and open phases for honest parties, as immutable transcripts.

Registers, in layout order::

    A_private  bit  open1  open2  commit  B_private

``open2`` carries the key, ``open1`` and ``commit`` carry the two halves of
big_phi(a, key).  Every gate application is checked against the current
owner of each touched register.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .gates import Block, Not, Op, invert_program, run_program
from .hilbert import (
    ATOL,
    PureState,
    Register,
    RegisterLayout,
    basis_state,
    measure_analysis,
    measure_sample,
    perm_reg,
    qubit,
)
from .perm import Perm, check_security_param, draw_key, is_key, symmetric_group
from .procedures import c_spa_program, p1_tilde_program, p2_program
from .states import require_key

REGISTERS = ("A_private", "bit", "open1", "open2", "commit", "B_private")
ALICE_COMMIT_REGS = ("A_private", "bit", "open1", "open2", "commit")
ALICE_OPEN_REGS = ("A_private", "bit", "open1", "open2")


class Party(str, enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"


class Phase(str, enum.Enum):
    FRESH = "Fresh"
    COMMITTED = "Committed"
    OPENED = "Opened"
    VERIFIED = "Verified"


class OwnershipError(RuntimeError):
    pass


class PhaseError(RuntimeError):
    pass


def protocol_layout(n: int, a_private_dim: int = 2) -> RegisterLayout:
    check_security_param(n)
    a_priv = qubit("A_private") if a_private_dim == 2 else Register.qudit("A_private", a_private_dim)
    return RegisterLayout(
        (
            a_priv,
            qubit("bit"),
            perm_reg("open1", n),
            perm_reg("open2", n),
            perm_reg("commit", n),
            qubit("B_private"),
        )
    )


def register_qubits(reg: Register) -> int:
    return max(1, math.ceil(math.log2(reg.dim)))


@dataclass(frozen=True)
class Transfer:
    step: str
    register: str
    sender: Party
    receiver: Party
    qubits: int

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "register": self.register,
            "from": self.sender.value,
            "to": self.receiver.value,
            "qubits": self.qubits,
        }


@dataclass(frozen=True)
class CommitTranscript:
    n: int
    joint: PureState
    ownership: tuple[tuple[str, Party], ...]
    phase: Phase
    transfers: tuple[Transfer, ...] = ()

    def owner(self, reg: str) -> Party:
        return dict(self.ownership)[reg]

    def owned_by(self, party: Party) -> tuple[str, ...]:
        return tuple(r for r, p in self.ownership if p == party)

    def check_owner(self, party: Party, regs: Sequence[str]):
        for r in regs:
            if self.owner(r) != party:
                raise OwnershipError(f"{party.value} cannot act on {r!r}, owned by {self.owner(r).value}")

    def apply(self, party: Party, program: Sequence[Op]) -> CommitTranscript:
        for op in program:
            self.check_owner(party, op.targets)
        return replace(self, joint=run_program(self.joint, program))

    def send(self, step: str, regs: Sequence[str], sender: Party, receiver: Party) -> CommitTranscript:
        self.check_owner(sender, regs)
        own = dict(self.ownership)
        moved = []
        for r in regs:
            own[r] = receiver
            moved.append(Transfer(step, r, sender, receiver, register_qubits(self.joint.layout[r])))
        return replace(
            self,
            ownership=tuple((r, own[r]) for r in self.joint.layout.names),
            transfers=self.transfers + tuple(moved),
        )

    def qubits_sent(self, step: str | None = None) -> int:
        return sum(t.qubits for t in self.transfers if step is None or t.step == step)

    def cost_ledger(self) -> dict:
        steps = sorted({t.step for t in self.transfers})
        return {
            "transfers": [t.to_json() for t in self.transfers],
            "per_step": {s: self.qubits_sent(s) for s in steps},
            "opening_qubits": self.qubits_sent("R1"),
            "total_qubits": self.qubits_sent(),
        }

    def to_json(self, include_state: bool = False) -> dict:
        out = {
            "n": self.n,
            "phase": self.phase.value,
            "ownership": {r: p.value for r, p in self.ownership},
            "ledger": self.cost_ledger(),
        }
        if include_state:
            out["state"] = self.joint.to_json()
        return out


def fresh_transcript(n: int, a_private_dim: int = 2) -> CommitTranscript:
    lay = protocol_layout(n, a_private_dim)
    own = tuple((r, Party.BOB if r == "B_private" else Party.ALICE) for r in lay.names)
    return CommitTranscript(n, basis_state(lay, [0] * len(lay)), own, Phase.FRESH)


def key_loader(pi: Perm, reg: str = "open2") -> Op:
    """Swap |id> and |pi> on a register, loading the key from the all-zero state."""
    ident = Perm.identity(pi.n)
    return Op(Block(np.array([[0, 1], [1, 0]]), ((ident,), (pi,))), (reg,))


def honest_commit_program(n: int, a: int, pi: Perm) -> tuple[Op, ...]:
    """The committer's whole preparation as a single program from |0...0>."""
    prog = (key_loader(pi),) + p1_tilde_program("A_private", "open2", "open1", "commit")
    if a:
        prog += (Op(Not(), ("bit",)),) + p2_program("open1", "commit")
    return prog


def alice_commit(n: int, a: int, pi: Perm, a_private_dim: int = 2) -> CommitTranscript:
    check_security_param(n)
    if pi.n != n:
        raise ValueError(f"key is a permutation of [{pi.n}], expected [{n}]")
    require_key(pi)
    if a not in (0, 1):
        raise ValueError(f"committed bit must be 0 or 1, got {a!r}")
    t = fresh_transcript(n, a_private_dim)
    t = t.apply(Party.ALICE, honest_commit_program(n, a, pi))
    return commit_to_bob(t)


def commit_to_bob(t: CommitTranscript) -> CommitTranscript:
    t = t.send("C4", ["commit"], Party.ALICE, Party.BOB)
    return replace(t, phase=Phase.COMMITTED)


def cheating_commit(n: int, u1: Sequence[Op], a_private_dim: int = 2) -> CommitTranscript:
    """Run an arbitrary committer program from |0...0> and hand over ``commit``."""
    t = fresh_transcript(n, a_private_dim)
    return commit_to_bob(t.apply(Party.ALICE, u1))


def alice_open(t: CommitTranscript, u2: Sequence[Op] = ()) -> CommitTranscript:
    """Optionally apply the opener's program, then send bit and open registers."""
    if t.phase != Phase.COMMITTED:
        raise PhaseError(f"cannot open a transcript in phase {t.phase.value}")
    if u2:
        t = t.apply(Party.ALICE, u2)
    t = t.send("R1", ["bit", "open1", "open2"], Party.ALICE, Party.BOB)
    return replace(t, phase=Phase.OPENED)


@dataclass(frozen=True)
class VerifyResult:
    verdict: str  # "Accept(0)", "Accept(1)" or "RejectDeceive"
    probability: float
    distribution: tuple[tuple[str, float], ...]
    mode: str = "analysis"
    path: tuple = field(default=(), compare=False)

    @property
    def accepted_bit(self) -> int | None:
        return int(self.verdict[7]) if self.verdict.startswith("Accept") else None

    def accept_probability(self, a: int) -> float:
        return dict(self.distribution).get(f"Accept({a})", 0.0)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "probability": self.probability,
            "distribution": dict(self.distribution),
            "mode": self.mode,
        }


def _verify_ops_after_partition(a: int) -> tuple[Op, ...]:
    ops: tuple[Op, ...] = ()
    if a:
        ops += (Op(Not(), ("B_private",)),)  # reset the partition ancilla
        ops += p2_program("open1", "commit")
    return ops + invert_program(p1_tilde_program("B_private", "open2", "open1", "commit"))


def _bob(t: CommitTranscript, state: PureState, ops: Sequence[Op]) -> PureState:
    for op in ops:
        t.check_owner(Party.BOB, op.targets)
    return run_program(state, ops)


ACCEPT_LABEL = (0, 0, 0)  # B_private, open1, commit after the inverse preparation


def bob_verify(t: CommitTranscript, mode: str = "analysis", seed=None) -> VerifyResult:
    if t.phase != Phase.OPENED:
        raise PhaseError(f"cannot verify a transcript in phase {t.phase.value}")
    analysis = _verify_analysis(t)
    if mode == "analysis":
        verdict, prob = max(analysis.items(), key=lambda kv: (kv[1], kv[0]))
        return VerifyResult(verdict, prob, tuple(sorted(analysis.items())), "analysis")
    if mode != "sample":
        raise ValueError(f"mode must be 'analysis' or 'sample', got {mode!r}")
    verdict, path = _verify_sample(t, np.random.default_rng(seed))
    return VerifyResult(verdict, analysis.get(verdict, 0.0), tuple(sorted(analysis.items())), "sample", path)


def _verify_analysis(t: CommitTranscript) -> dict[str, float]:
    g = symmetric_group(t.n)
    out = {"Accept(0)": 0.0, "Accept(1)": 0.0, "RejectDeceive": 0.0}
    revealed = measure_analysis(t.joint, ["bit", "open2"])
    for o in revealed:
        a, key = o.label
        if not g.is_key[key]:
            out["RejectDeceive"] += o.probability
            continue
        after = _bob(t, o.state, c_spa_program("B_private", "open2", "commit"))
        part = measure_analysis(after, ["B_private"])
        p_match = part.probability((a,))
        out["RejectDeceive"] += o.probability * (1 - p_match)
        if p_match <= 0:
            continue
        post = [x.state for x in part if x.label == (a,)][0]
        final = _bob(t, post, _verify_ops_after_partition(a))
        p_acc = measure_analysis(final, ["B_private", "open1", "commit"], keep_states=False).probability(ACCEPT_LABEL)
        out[f"Accept({a})"] += o.probability * p_match * p_acc
        out["RejectDeceive"] += o.probability * p_match * (1 - p_acc)
    total = t.joint.norm_sq()
    if abs(sum(out.values()) - total) > ATOL:
        raise AssertionError("verification probabilities do not sum to the state norm")
    # rounding can leave values like -1e-16
    return {k: min(1.0, max(0.0, v)) for k, v in out.items()}


def _verify_sample(t: CommitTranscript, rng: np.random.Generator) -> tuple[str, tuple]:
    g = symmetric_group(t.n)
    (a, key), st = measure_sample(t.joint, ["bit", "open2"], rng)
    path = [("R2", a, g.perm(key).to_json())]
    if not g.is_key[key]:
        return "RejectDeceive", tuple(path)
    st = _bob(t, st, c_spa_program("B_private", "open2", "commit"))
    (o,), st = measure_sample(st, ["B_private"], rng)
    path.append(("R4", o))
    if o != a:
        return "RejectDeceive", tuple(path)
    st = _bob(t, st, _verify_ops_after_partition(a))
    label, _ = measure_sample(st, ["B_private", "open1", "commit"], rng)
    path.append(("R5", list(label)))
    return ("Accept(%d)" % a if tuple(label) == ACCEPT_LABEL else "RejectDeceive"), tuple(path)


def run_honest(n: int, a: int, pi: Perm, mode: str = "analysis", seed=None) -> VerifyResult:
    return bob_verify(alice_open(alice_commit(n, a, pi)), mode, seed)


def run_with_programs(n: int, u1: Sequence[Op], u2: Sequence[Op], mode: str = "analysis", seed=None,
                      a_private_dim: int = 2) -> VerifyResult:
    t = cheating_commit(n, u1, a_private_dim)
    return bob_verify(alice_open(t, u2), mode, seed)


__all__ = [
    "Party",
    "Phase",
    "CommitTranscript",
    "VerifyResult",
    "OwnershipError",
    "PhaseError",
    "protocol_layout",
    "fresh_transcript",
    "honest_commit_program",
    "key_loader",
    "alice_commit",
    "alice_open",
    "bob_verify",
    "run_honest",
    "run_with_programs",
    "cheating_commit",
    "draw_key",
    "is_key",
]
