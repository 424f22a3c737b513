"""Distillation of the opening-1 component, and its projection onto one key's sector."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..gates import Not, Op, invert_program, run_program
from ..hilbert import (
    ATOL,
    PureState,
    add_register,
    basis_state,
    discard,
    distance,
    perm_reg,
    project,
    qubit,
    reorder,
    tensor,
)
from ..hilbert import layout as make_layout
from ..perm import Perm, enumerate_keys, symmetric_group
from ..procedures import c_spa_program, p1_tilde_program, p2_program
from ..states import require_key
from .measurements import PAIR, apply_m, m_tilde, xi_coefficients
from .strategies import CheatStrategy

D_ANC = "D_anc"
DISTILL_FLOOR = 1e-12


class DistillationError(RuntimeError):
    """The strategy never opens 1 successfully, so there is nothing to distill."""


@dataclass(frozen=True)
class DistillResult:
    prob: float
    eta_perf: PureState  # normalized
    unnormalized: PureState  # (I (x) M_1) eta, i.e. sqrt(prob) * eta_perf


def distill_state(eta: PureState) -> PureState:
    """Run the distillation circuit in analysis mode, keeping the accepted branch unnormalized."""
    n = eta.layout["open2"].n
    g = symmetric_group(n)
    st = add_register(eta, qubit(D_ANC), 0)
    # bit must read 1 and the key register must hold a key
    st = project(st, {"bit": 1})
    keep = g.is_key[st.column("open2")]
    st = PureState.build(st.layout, st.basis[keep], st.amps[keep])
    # the partition step must report sector 1
    st = run_program(st, c_spa_program(D_ANC, "open2", "commit"))
    st = project(st, {D_ANC: 1})
    st = run_program(st, (Op(Not(), (D_ANC,)),))
    # map sector 1 back to sector 0, undo the preparation and demand the canonical start
    prep = p1_tilde_program(D_ANC, "open2", "open1", "commit")
    st = run_program(st, p2_program(*PAIR) + invert_program(prep))
    ident = Perm.identity(n)
    st = project(st, {D_ANC: 0, "open1": ident, "commit": ident})
    # rebuild the ideal sector-1 state
    st = run_program(st, prep + p2_program(*PAIR))
    if not st.nnz:
        return PureState.zero(eta.layout)
    return reorder(discard(st, D_ANC), eta.layout.names)


def distill(s: CheatStrategy) -> DistillResult:
    """Turn the committed state into the ideal opening-1 state with probability T1."""
    if not s.is_normalized():
        raise ValueError("distill expects a normalized strategy; see normalize_strategy")
    out = distill_state(s.eta_c1())
    prob = out.norm_sq()
    if prob < DISTILL_FLOOR:
        raise DistillationError(f"opening 1 succeeds with probability {prob:.3g}; nothing to distill")
    return DistillResult(prob, out.normalized(), out)


def projector_eta_perf(s: CheatStrategy) -> PureState:
    """Reference value: the normalized ``(I (x) M_1) eta``, computed from the projector alone."""
    return apply_m(s.eta_c1(), 1).normalized()


# -- projection onto one key's sector ------------------------------------------------

def omega(n: int) -> float | None:
    k = len(enumerate_keys(n))
    if k < 2:
        return None
    return (k + 1) / (math.sqrt(2 * math.factorial(n)) * (k - 1))


def published_norm(n: int, xi_weight: float) -> float | None:
    """The stated norm of the projected state, ``(1 - w)(K+1)^2 / (2(K-1)^2)``."""
    k = len(enumerate_keys(n))
    if k < 2:
        return None
    return (1 - xi_weight) * (k + 1) ** 2 / (2 * (k - 1) ** 2)


def corrected_norm(xi_weight: float) -> float:
    """Each sigma contributes two orthogonal halves of weight 1/4, so ``(1 - w) / 2``."""
    return (1 - xi_weight) / 2


def _pair_state(n: int, rows, coeffs) -> PureState:
    lay = make_layout(*(perm_reg(nm, n) for nm in PAIR))
    return PureState.build(lay, np.stack(rows, 1), np.concatenate(coeffs))


def _assemble(eta_perf: PureState, pair_for_key) -> PureState:
    """``sum_pi |xi_{1,pi}> |1> |pi> (x) pair_for_key(pi)`` in the layout of ``eta_perf``."""
    lay = eta_perf.layout
    out = PureState.zero(lay)
    for (a, pi), xi in xi_coefficients(eta_perf).xi.items():
        if a != 1:
            continue
        pair = pair_for_key(pi)
        if pair is None or not pair.nnz:
            continue
        head = basis_state(make_layout(lay["bit"], lay["open2"]), [1, pi])
        full = tensor(tensor(xi, head), pair)
        out = out + reorder(full, lay.names)
    return out


def published_closed_form(eta_perf: PureState, pi_prime: Perm) -> PureState | None:
    """``omega_n sum_{sigma,pi} |xi_{1,pi}>|1>|pi>|phi(sigma,1,pi)>|phi(sigma,0,pi')>``."""
    n = pi_prime.n
    w = omega(n)
    if w is None:
        return None
    g = symmetric_group(n)
    sig = np.arange(g.order)
    pp = g.mult[sig, pi_prime.rank()]

    def pair(pi):
        sp = g.mult[sig, pi.rank()]
        c = np.full(g.order, w / 2)
        return _pair_state(n, (np.concatenate([sig, sig, sp, sp]), np.concatenate([sig, pp, sig, pp])),
                           [c, c, -c, -c])

    return _assemble(eta_perf, pair)


def corrected_closed_form(eta_perf: PureState, pi_prime: Perm) -> PureState:
    """``sum_{pi != pi'} |xi_{1,pi}>|1>|pi> N^-1/2 sum_sigma |sigma>(phi(sigma,0,pi') - phi(sigma pi,0,pi'))/2``."""
    n = pi_prime.n
    g = symmetric_group(n)
    sig = np.arange(g.order)
    pp = g.mult[sig, pi_prime.rank()]

    def pair(pi):
        if pi == pi_prime:
            return None
        sp = g.mult[sig, pi.rank()]
        spp = g.mult[sp, pi_prime.rank()]
        c = np.full(g.order, 1 / (2 * math.sqrt(2 * g.order)))
        return _pair_state(n, (np.concatenate([sig] * 4), np.concatenate([sig, pp, sp, spp])), [c, c, -c, -c])

    return _assemble(eta_perf, pair)


@dataclass(frozen=True)
class EtaProjection:
    pi_prime: Perm
    state: PureState
    norm_sq: float
    xi_weight: float  # ||xi_{1,pi'}||^2
    corrected_norm: float
    corrected_form_deviation: float
    published_norm: float | None
    published_form_deviation: float | None

    @property
    def published_norm_holds(self) -> bool | None:
        if self.published_norm is None:
            return None
        return abs(self.norm_sq - self.published_norm) <= ATOL

    @property
    def published_form_holds(self) -> bool | None:
        if self.published_form_deviation is None:
            return None
        return self.published_form_deviation <= ATOL

    @property
    def corrected_holds(self) -> bool:
        return abs(self.norm_sq - self.corrected_norm) <= ATOL and self.corrected_form_deviation <= ATOL

    def to_json(self) -> dict:
        return {
            "pi_prime": self.pi_prime.to_json(),
            "norm_sq": self.norm_sq,
            "xi_weight": self.xi_weight,
            "corrected_norm": self.corrected_norm,
            "corrected_form_deviation": self.corrected_form_deviation,
            "published_norm": self.published_norm,
            "published_form_deviation": self.published_form_deviation,
            "published_norm_holds": self.published_norm_holds,
            "published_form_holds": self.published_form_holds,
            "corrected_holds": self.corrected_holds,
        }


def eta_projected(eta_perf: PureState, pi_prime: Perm) -> EtaProjection:
    """Apply the sector-0 projector for ``pi'`` on ``commit`` and compare with both closed forms.

    Deviations are reported rather than raised: the published closed form and
    norm do not match the projected state (the true norm is ``(1 - w)/2``).
    """
    require_key(pi_prime)
    if pi_prime.n != eta_perf.layout["open2"].n:
        raise ValueError("pi' acts on a different number of points than the state")
    st = m_tilde(eta_perf, pi_prime)
    w = xi_coefficients(eta_perf).weights().get((1, pi_prime), 0.0)
    pub_form = published_closed_form(eta_perf, pi_prime)
    return EtaProjection(
        pi_prime=pi_prime,
        state=st,
        norm_sq=st.norm_sq(),
        xi_weight=w,
        corrected_norm=corrected_norm(w),
        corrected_form_deviation=distance(st, corrected_closed_form(eta_perf, pi_prime)),
        published_norm=published_norm(pi_prime.n, w),
        published_form_deviation=None if pub_form is None else distance(st, pub_form),
    )


__all__ = [
    "DistillationError",
    "DistillResult",
    "distill",
    "distill_state",
    "projector_eta_perf",
    "EtaProjection",
    "eta_projected",
    "omega",
    "published_norm",
    "corrected_norm",
    "published_closed_form",
    "corrected_closed_form",
]
