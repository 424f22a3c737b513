"""The binding report: success probabilities of a strategy and the inequality chain that bounds them."""

from __future__ import annotations

from dataclasses import dataclass

from ..hilbert import ATOL
from ..perm import enumerate_keys
from .hpsp import HpspResult, claim1_factor, hpsp_sweep, mean_success
from .measurements import norm_sq_term, t_value
from .strategies import CheatStrategy, normalize_strategy


def _clip(x: float, lo: float = 0.0, hi: float = 1.0) -> float:
    return min(hi, max(lo, x))


@dataclass(frozen=True)
class BindingReport:
    strategy: str
    n: int
    T0: float
    T1: float
    excess: float
    normSq: float
    claim1_bound: float
    claim2_bound: float
    hpsp: tuple[HpspResult, ...]
    hpsp_success: float  # averaged over hidden keys
    composed_bound: float
    loose_bound: float | None  # eps^2 / 8, stated for n >= 3

    @property
    def claim2_applies(self) -> bool:
        return self.excess > ATOL

    @property
    def claim2_holds(self) -> bool | None:
        return self.normSq >= self.claim2_bound - ATOL if self.claim2_applies else None

    def claim1_per_key(self) -> list[bool]:
        return [r.success >= self.claim1_bound - ATOL for r in self.hpsp]

    @property
    def claim1_holds_somewhere(self) -> bool | None:
        return any(self.claim1_per_key()) if self.claim2_applies else None

    @property
    def claim1_holds_everywhere(self) -> bool | None:
        return all(self.claim1_per_key()) if self.claim2_applies else None

    @property
    def composed_holds(self) -> bool | None:
        return self.hpsp_success >= self.composed_bound - ATOL if self.claim2_applies else None

    @property
    def loose_holds(self) -> bool | None:
        if not self.claim2_applies or self.loose_bound is None:
            return None
        return self.hpsp_success >= self.loose_bound - ATOL

    def flags(self) -> dict:
        return {
            "claim2_norm_bound": self.claim2_holds,
            "claim1_some_key": self.claim1_holds_somewhere,
            "claim1_every_key": self.claim1_holds_everywhere,
            "composed_bound": self.composed_holds,
            "loose_bound": self.loose_holds,
        }

    def passed(self) -> bool:
        """True unless an applicable inequality fails; the per-key Claim 1 reading is informational."""
        checked = [self.claim2_holds, self.claim1_holds_somewhere, self.composed_holds, self.loose_holds]
        return all(v is not False for v in checked)

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "n": self.n,
            "T0": self.T0,
            "T1": self.T1,
            "excess": self.excess,
            "normSq": self.normSq,
            "claim1_bound": self.claim1_bound,
            "claim2_bound": self.claim2_bound,
            "hpsp_success": self.hpsp_success,
            "composed_bound": self.composed_bound,
            "loose_bound": self.loose_bound,
            "hpsp_per_key": [
                {"pi_prime": r.pi_prime.to_json(), "success": r.success, "claim1_holds": ok}
                for r, ok in zip(self.hpsp, self.claim1_per_key())
            ],
            "flags": self.flags(),
            "passed": self.passed(),
        }


def binding_report(s: CheatStrategy, n: int | None = None, jobs: int = 1) -> BindingReport:
    if n is not None and n != s.n:
        raise ValueError(f"strategy is built for n={s.n}, not n={n}")
    n = s.n
    t0, t1 = _clip(t_value(s, 0)), _clip(t_value(s, 1))
    norm = normalize_strategy(s)
    for a, t in ((0, t0), (1, t1)):
        if abs(_clip(t_value(norm, a)) - t) > ATOL:
            raise AssertionError(f"normalization changed T{a}")
    excess = t0 + t1 - 1
    ns = _clip(norm_sq_term(norm)) if t1 > 0 else 0.0
    factor = claim1_factor(n)
    eps = max(excess, 0.0)
    results = tuple(hpsp_sweep(norm, enumerate_keys(n), jobs)) if t1 > 0 else ()
    return BindingReport(
        strategy=s.name,
        n=n,
        T0=t0,
        T1=t1,
        excess=excess,
        normSq=ns,
        claim1_bound=factor * ns,
        claim2_bound=eps**2 / 4,
        hpsp=results,
        hpsp_success=_clip(mean_success(results)) if results else 0.0,
        composed_bound=eps**2 * factor / 4,
        loose_bound=eps**2 / 8 if n >= 3 else None,
    )
