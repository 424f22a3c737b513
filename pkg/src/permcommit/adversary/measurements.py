"""Projectors used to score an opening, and the success probabilities they give.

Register roles: ``open2`` holds the key, ``open1`` the sigma half and
``commit`` the half sent to the receiver.  ``M_key`` (alias ``M_open1``) and
``M_sigma`` (alias ``M_open2``) are computational-basis projectors on those two
registers; the aliases follow the published labelling, where the roles of the
two opening registers are named the other way round.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..gates import run_program
from ..hilbert import PureState, basis_state, contract, layout, project, project_onto, reorder, tensor
from ..perm import Perm, enumerate_keys
from ..states import big_phi, phi, require_key, sector_project
from .strategies import CheatStrategy

PAIR = ("open1", "commit")

_ALIASES = {"M_open1": "M_key", "M_open2": "M_sigma"}
KINDS = ("M_bit", "M_key", "M_sigma", "M_commit", "M_mix", "M_a", "M_tilde") + tuple(_ALIASES)


@dataclass(frozen=True)
class ProjectorSpec:
    """A named projector; ``apply`` maps a state to its (sub-normalized) image."""

    kind: str
    a: int | None = None
    pi: Perm | None = None
    sigma: Perm | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown projector kind {self.kind!r}")
        object.__setattr__(self, "kind", _ALIASES.get(self.kind, self.kind))
        if self.kind in ("M_commit", "M_mix", "M_tilde"):
            require_key(self.pi)

    def apply(self, state: PureState) -> PureState:
        k = self.kind
        if k == "M_bit":
            return project(state, {"bit": self.a})
        if k == "M_key":
            return project(state, {"open2": self.pi})
        if k == "M_sigma":
            return project(state, {"open1": self.sigma})
        if k == "M_commit":
            return project_onto(state, ["commit"], phi(self.sigma, self.a, self.pi, "commit"))
        if k == "M_mix":
            return project_onto(state, PAIR, big_phi(self.a, self.pi, PAIR))
        if k == "M_a":
            return apply_m(state, self.a)
        return m_tilde(state, self.pi)

    __call__ = apply

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.a is not None:
            d["a"] = self.a
        if self.pi is not None:
            d["pi"] = self.pi.to_json()
        if self.sigma is not None:
            d["sigma"] = self.sigma.to_json()
        return d


def apply_m(state: PureState, a: int) -> PureState:
    """``sum_pi M_bit(a) (x) M_key(pi) (x) M_mix(a, pi)``."""
    out = PureState.zero(state.layout)
    branch = project(state, {"bit": a})
    if not branch.nnz:
        return out
    present = set(branch.column("open2").tolist())
    for pi in enumerate_keys(state.layout["open2"].n):
        if pi.rank() in present:
            part = project(branch, {"open2": pi})
            out = out + project_onto(part, PAIR, big_phi(a, pi, PAIR))
    return out


def m_tilde(state: PureState, pi_prime: Perm, register: str = "commit") -> PureState:
    """Project ``register`` onto span{phi(sigma, 0, pi')}."""
    require_key(pi_prime)
    return sector_project(state, register, 0, pi_prime)


def t_value(s: CheatStrategy, a: int) -> float:
    """Probability that opening ``a`` passes, scored with the projector ``M_a``."""
    eta = run_program(s.eta_c1(), s.u2(a))
    return apply_m(eta, a).norm_sq()


def norm_sq_term(s: CheatStrategy) -> float:
    """``|| M_0 (u2_0 (x) I) M_1 eta ||^2`` for a normalized strategy."""
    if not s.is_normalized():
        raise ValueError("norm_sq_term expects a normalized strategy")
    m1 = apply_m(s.eta_c1(), 1)
    return apply_m(run_program(m1, s.u2_0), 0).norm_sq()


@dataclass(frozen=True)
class XiDecomposition:
    """``state = sum_{a,pi} |xi_{a,pi}>|a>|pi>|big_phi_a^pi> + residual``."""

    xi: dict  # (a, pi) -> PureState on the registers outside bit/open1/open2/commit
    residual: PureState

    def weights(self) -> dict:
        return {k: v.norm_sq() for k, v in self.xi.items()}

    def total(self) -> float:
        return sum(self.weights().values())


def xi_coefficients(state: PureState) -> XiDecomposition:
    n = state.layout["open2"].n
    xi = {}
    covered = PureState.zero(state.layout)
    for a in (0, 1):
        for pi in enumerate_keys(n):
            part = project(state, {"bit": a, "open2": pi})
            if not part.nnz:
                continue
            vec = contract(part, ["bit", "open1", "open2", "commit"], _label(a, pi, state))
            if vec.norm_sq() > 0:
                xi[(a, pi)] = vec
                covered = covered + project_onto(part, PAIR, big_phi(a, pi, PAIR))
    return XiDecomposition(xi, state - covered)


def _label(a: int, pi: Perm, state: PureState) -> PureState:
    lay = state.layout
    head = basis_state(layout(lay["bit"], lay["open2"]), [a, pi])
    return reorder(tensor(head, big_phi(a, pi, PAIR)), ["bit", "open1", "open2", "commit"])


def xi_weights(state: PureState, a: int = 1) -> dict[Perm, float]:
    """``||xi_{a,pi}||^2`` for every key."""
    w = xi_coefficients(state).weights()
    return {pi: w.get((a, pi), 0.0) for pi in enumerate_keys(state.layout["open2"].n)}
