"""The coset-pair states and the mixtures built from them.

For a key ``pi`` (a fixed-point-free involution):

* ``phi(sigma, s, pi)``   = (|sigma> + (-1)^s |sigma pi>) / sqrt 2
* ``big_phi(s, pi)``      = N^-1/2 sum_sigma |sigma> |phi(sigma, s, pi)>,  N = n!
* ``rho(s, pi)``          = N^-1 sum_sigma |phi><phi|, the reduced state of big_phi

Right multiplication by ``pi`` acts on ``phi(sigma, s, pi)`` as the scalar
(-1)^s, so ``(I + (-1)^s R_pi) / 2`` projects onto sector ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hilbert import DensityOp, PureState, RegisterLayout, inner_product, layout, map_rows, perm_reg
from .perm import Perm, compose, enumerate_keys, is_key, rank, symmetric_group

SQRT1_2 = 1 / math.sqrt(2)


class NotAKey(ValueError):
    """The permutation is not a fixed-point-free involution."""


def require_key(pi: Perm) -> Perm:
    if not is_key(pi):
        raise NotAKey(f"{pi} is not a fixed-point-free involution")
    return pi


def _one_reg(n: int, name: str) -> RegisterLayout:
    return layout(perm_reg(name, n))


def phi(sigma: Perm, s: int, pi: Perm, name: str = "x") -> PureState:
    require_key(pi)
    lay = _one_reg(pi.n, name)
    basis = np.array([[sigma.rank()], [compose(sigma, pi).rank()]], dtype=np.int64)
    amps = np.array([SQRT1_2, (-1) ** s * SQRT1_2])
    return PureState.build(lay, basis, amps)


def big_phi(s: int, pi: Perm, names: tuple[str, str] = ("open1", "commit")) -> PureState:
    require_key(pi)
    g = symmetric_group(pi.n)
    size = g.order
    sig = np.arange(size)
    sig_pi = g.mult[sig, pi.rank()]
    basis = np.concatenate([np.stack([sig, sig], 1), np.stack([sig, sig_pi], 1)])
    c = 1 / math.sqrt(2 * size)
    amps = np.concatenate([np.full(size, c), np.full(size, (-1) ** s * c)])
    lay = layout(perm_reg(names[0], pi.n), perm_reg(names[1], pi.n))
    return PureState.build(lay, basis, amps, merge=False)


def compact_purification(s: int, pi: Perm, names: tuple[str, str] = ("open1", "commit")) -> PureState:
    """A purification of ``rho(s, pi)`` indexed by the canonical half only."""
    require_key(pi)
    g = symmetric_group(pi.n)
    sig = np.arange(g.order)
    sig_pi = g.mult[sig, pi.rank()]
    half = sig[sig < sig_pi]
    c = 1 / math.sqrt(g.order)  # sqrt(2/N) * 1/sqrt 2
    basis = np.concatenate([np.stack([half, half], 1), np.stack([half, sig_pi[half]], 1)])
    amps = np.concatenate([np.full(len(half), c), np.full(len(half), (-1) ** s * c)])
    lay = layout(perm_reg(names[0], pi.n), perm_reg(names[1], pi.n))
    return PureState.build(lay, basis, amps, merge=False)


@lru_cache(maxsize=64)
def _rho_matrix(s: int, pi: Perm) -> np.ndarray:
    g = symmetric_group(pi.n)
    size = g.order
    sig = np.arange(size)
    sp = g.mult[sig, pi.rank()]
    m = np.zeros((size, size))
    sign = (-1) ** s
    np.add.at(m, (sig, sig), 0.5)
    np.add.at(m, (sp, sp), 0.5)
    np.add.at(m, (sig, sp), 0.5 * sign)
    np.add.at(m, (sp, sig), 0.5 * sign)
    m /= size
    m.setflags(write=False)
    return m


def rho(s: int, pi: Perm) -> DensityOp:
    """Uniform mixture of the phi projectors for key ``pi`` in sector ``s``."""
    require_key(pi)
    return DensityOp(_rho_matrix(int(s), pi).astype(np.complex128))


def canonical_side(sigma: Perm, pi: Perm) -> int:
    """1 iff ``sigma`` is the lower-ranked member of its pair {sigma, sigma pi}."""
    require_key(pi)
    return int(rank(sigma) < rank(compose(sigma, pi)))


def canonical_half(pi: Perm) -> list[Perm]:
    g = symmetric_group(pi.n)
    r = pi.rank()
    return [g.perm(k) for k in range(g.order) if k < g.mult[k, r]]


def right_mult(state: PureState, reg: str, pi: Perm) -> PureState:
    """``|sigma> -> |sigma pi>`` on one register."""
    g = symmetric_group(pi.n)
    j = state.layout.index(reg)
    basis = state.basis.copy()
    basis[:, j] = g.mult[basis[:, j], pi.rank()]
    return map_rows(state, basis)


def sector_project(state: PureState, reg: str, s: int, pi: Perm) -> PureState:
    """Project one register onto span{phi(sigma, s, pi)}."""
    return (state + right_mult(state, reg, pi).scale((-1) ** s)).scale(0.5)


@dataclass(frozen=True)
class BasisDecomposition:
    """Coefficients over {phi(sigma, s, pi): sigma in the canonical half}."""

    pi: Perm
    coeffs: dict

    def norm_sq(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def reconstruct(self, name: str = "x") -> PureState:
        out = PureState.zero(_one_reg(self.pi.n, name))
        for (sig, s), c in self.coeffs.items():
            out = out + phi(sig, s, self.pi, name).scale(c)
        return out


def decompose(state: PureState, pi: Perm, atol: float = 1e-12) -> BasisDecomposition:
    require_key(pi)
    if len(state.layout) != 1 or state.layout.registers[0].kind != "perm":
        raise ValueError("decompose expects a state on a single permutation register")
    g = symmetric_group(pi.n)
    vec = np.zeros(g.order, dtype=np.complex128)
    vec[state.basis[:, 0]] = state.amps
    r = pi.rank()
    coeffs = {}
    for k in range(g.order):
        kp = int(g.mult[k, r])
        if k > kp:
            continue
        for s in (0, 1):
            c = (vec[k] + (-1) ** s * vec[kp]) * SQRT1_2
            if abs(c) > atol:
                coeffs[(g.perm(k), s)] = complex(c)
    return BasisDecomposition(pi, coeffs)


def phi_inner(sigma: Perm, s: int, pi: Perm, tau: Perm, t: int, kappa: Perm) -> complex:
    return inner_product(phi(sigma, s, pi), phi(tau, t, kappa))


# -- closed-form overlap tables ---------------------------------------------------

BASE_PHI_ITEMS = (1, 2, 3, 4, 5)


def base_phi_pair(item: int, sigma: Perm, tau: Perm, pi: Perm, kappa: Perm, s: int):
    """The two phi labels whose overlap each item of the overlap table describes."""
    sp = compose(sigma, pi)
    if item == 1:
        return (sp, s, pi), (sigma, s, pi)
    if item == 2:
        return (sigma, 0, pi), (sigma, 1, pi)
    if item == 3:
        return (sigma, s, pi), (tau, s, pi)
    if item == 4:
        return (sigma, 0, pi), (tau, 0, kappa)
    if item == 5:
        return (sigma, 1, pi), (tau, 0, kappa)
    raise ValueError(f"no overlap-table item {item}")


def base_phi_claimed(item: int, sigma: Perm, tau: Perm, pi: Perm, kappa: Perm, s: int) -> float:
    """Overlap predicted by the published case table, read literally."""
    if item == 1:
        return float((-1) ** s)
    if item == 2:
        return 0.0
    if item == 3:
        if tau == sigma:
            return 1.0
        return float((-1) ** s) if tau == compose(sigma, pi) else 0.0
    if item == 4:
        if pi == kappa:
            return 1.0 if (sigma == tau or sigma == compose(tau, pi)) else 0.0
        if sigma == tau or sigma == compose(tau, kappa) or sigma == compose(tau, pi):
            return 0.5
        return 0.0
    if item == 5:
        if pi == kappa:
            return 0.0
        if sigma == tau or sigma == compose(tau, kappa):
            return 0.5
        sp = compose(sigma, pi)
        if sp == tau or sp == compose(tau, kappa):
            return -0.5
        return 0.0
    raise ValueError(f"no overlap-table item {item}")


def base_phi_corrected(item: int, sigma: Perm, tau: Perm, pi: Perm, kappa: Perm, s: int) -> float:
    """As :func:`base_phi_claimed`, with the missing ``sigma = tau kappa pi`` branch of item 4."""
    if item == 4 and pi != kappa and sigma == compose(compose(tau, kappa), pi):
        return 0.5
    return base_phi_claimed(item, sigma, tau, pi, kappa, s)


def base_phi_actual(item: int, sigma: Perm, tau: Perm, pi: Perm, kappa: Perm, s: int) -> complex:
    a, b = base_phi_pair(item, sigma, tau, pi, kappa, s)
    return phi_inner(*a, *b)


def phi_rewritten_rhs(sigma: Perm, pi: Perm, name: str = "x") -> PureState:
    """``(|K_n| - 1)^-1 sum_kappa (phi(sigma, 0, kappa) - phi(sigma pi, 0, kappa))``."""
    keys = enumerate_keys(pi.n)
    if len(keys) < 2:
        raise ValueError(f"the key-sum identity needs |K_n| >= 2 (n={pi.n} has {len(keys)})")
    sp = compose(sigma, pi)
    acc = PureState.zero(_one_reg(pi.n, name))
    for kappa in keys:
        acc = acc + phi(sigma, 0, kappa, name) - phi(sp, 0, kappa, name)
    return acc.scale(1 / (len(keys) - 1))
