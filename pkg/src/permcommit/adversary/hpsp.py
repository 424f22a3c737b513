"""Recovering a hidden key from one copy of its sector-0 commitment state.

The solver only ever touches the instance register ``h_inst``; its purifying
partner ``h_env`` is carried along so the simulation stays a pure state.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..gates import CtrlSwap, Op, Unif, invert_program, run_program
from ..hilbert import ATOL, DensityOp, PureState, add_register, measure_analysis, project, qubit, reorder, tensor
from ..perm import Perm, enumerate_keys, symmetric_group
from ..procedures import p1_program, p2_program
from ..states import big_phi, require_key, rho
from .distill import distill_state
from .measurements import PAIR
from .strategies import CheatStrategy

REJECT = "reject"
HP_ANC = "hp_anc"
INSTANCE = ("h_env", "h_inst")


def claim1_factor(n: int) -> float:
    k = len(enumerate_keys(n))
    return 2 * (1 - 2 / (k + 1)) ** 2


@dataclass(frozen=True)
class HpspResult:
    pi_prime: Perm
    distribution: tuple  # ((label, prob), ...) with Perm labels in rank order, then "reject"

    @property
    def success(self) -> float:
        return dict(self.distribution).get(self.pi_prime, 0.0)

    def probability(self, label) -> float:
        return dict(self.distribution).get(label, 0.0)

    def to_json(self) -> dict:
        return {
            "pi_prime": self.pi_prime.to_json(),
            "success": self.success,
            "distribution": [
                {"output": lab if lab == REJECT else lab.to_json(), "probability": p} for lab, p in self.distribution
            ],
        }


def identify_instance(instance: DensityOp, n: int) -> Perm:
    """Find the key whose sector-0 mixture equals ``instance``; the simulator holds the purification."""
    for kappa in enumerate_keys(n):
        if rho(0, kappa).max_abs_diff(instance) <= ATOL:
            return kappa
    raise ValueError("instance is not a sector-0 commitment state for any key")


def hpsp_state(s: CheatStrategy, pi_prime: Perm) -> PureState:
    """The solver's final (unnormalized) state; its norm is the probability of not failing distillation."""
    n = s.n
    ident = Perm.identity(n)
    st = distill_state(s.eta_c1())  # sqrt(T1) * eta_perf
    st = add_register(st, qubit(HP_ANC), 0)
    prep = p1_program(HP_ANC, "open1", "open2", "commit")
    # relabel to sector 0, undo the preparation, and collapse the uniform sigma register to |id>
    st = run_program(st, p2_program(*PAIR) + invert_program(prep) + (Op(Unif(inverted=True), ("open1",)),))
    if st.nnz:
        if np.any(st.column("open1") != 0) or np.any(st.column("commit") != 0) or np.any(st.column(HP_ANC) != 0):
            raise AssertionError("distilled state did not return to the canonical start")
        if abs(project(st, {"open1": ident, "commit": ident}).norm_sq() - st.norm_sq()) > ATOL:
            raise AssertionError("distilled state did not return to the canonical start")
    # bring in the instance and swap its half into the sigma register
    st = tensor(st, big_phi(0, require_key(pi_prime), INSTANCE))
    st = run_program(st, (Op(CtrlSwap(), ("open1", "h_inst")),))
    st = run_program(st, prep + p2_program(*PAIR))
    return run_program(st, s.u2_0)


def hpsp_solve(s: CheatStrategy, instance: Perm | DensityOp) -> HpspResult:
    """Exact output distribution of the solver on ``rho(0, pi')``.

    ``instance`` is either the hidden key or its density operator.
    """
    if not s.is_normalized():
        raise ValueError("hpsp_solve expects a normalized strategy; see normalize_strategy")
    pi_prime = instance if isinstance(instance, Perm) else identify_instance(instance, s.n)
    require_key(pi_prime)
    g = symmetric_group(s.n)
    st = hpsp_state(s, pi_prime)
    out: dict = {}
    reject = 1.0
    for o in measure_analysis(st, ["bit", "open2"], keep_states=False):
        bit, key = o.label
        if bit == 0:
            out[g.perm(key)] = out.get(g.perm(key), 0.0) + o.probability
            reject -= o.probability
    dist = tuple(sorted(out.items(), key=lambda kv: kv[0].rank())) + ((REJECT, max(0.0, reject)),)
    return HpspResult(pi_prime, dist)


def hpsp_sweep(s: CheatStrategy, keys=None, jobs: int = 1) -> list[HpspResult]:
    """Solve for every hidden key; results come back in key order whatever ``jobs`` is."""
    keys = list(enumerate_keys(s.n) if keys is None else keys)
    if jobs > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda k: hpsp_solve(s, k), keys))
    return [hpsp_solve(s, k) for k in keys]


def mean_success(results) -> float:
    return math.fsum(r.success for r in results) / len(results)
