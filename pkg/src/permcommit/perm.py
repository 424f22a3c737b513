"""Permutations of [n], the key set K_n, and rank tables for S_n registers.

Permutations are stored in one-line notation with 1-indexed values, so
``Perm((2, 1, 3))`` is the transposition (12) in S_3.  Products follow the
convention ``(a * b)(i) == a(b(i))``.

Basis states of an S_n register are indexed by the lexicographic (Lehmer)
rank of the permutation; the identity has rank 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Perm",
    "SymmetricGroup",
    "InvalidSecurityParameter",
    "compose",
    "inverse",
    "parity",
    "rank",
    "unrank",
    "enumerate_keys",
    "is_key",
    "check_security_param",
    "symmetric_group",
    "draw_key",
]


class InvalidSecurityParameter(ValueError):
    """Raised when n is not of the form n = 2 (mod 4)."""


@dataclass(frozen=True)
class Perm:
    """A permutation of {1, ..., n} in one-line notation."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(v) for v in self.mapping)
        if sorted(mapping) != list(range(1, len(mapping) + 1)):
            raise ValueError(f"not a permutation of [1..{len(mapping)}]: {mapping}")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, n: int) -> Perm:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, n: int, *cycles: Sequence[int]) -> Perm:
        """Build a permutation from disjoint cycles, e.g. ``from_cycles(3, (1, 2, 3))``."""
        m = list(range(1, n + 1))
        for cyc in cycles:
            for a, b in zip(cyc, tuple(cyc[1:]) + (cyc[0],)):
                m[a - 1] = b
        return cls(tuple(m))

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i - 1]

    def __mul__(self, other: Perm) -> Perm:
        return compose(self, other)

    def inverse(self) -> Perm:
        return inverse(self)

    def parity(self) -> int:
        return parity(self)

    def rank(self) -> int:
        return rank(self)

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.mapping, 1))

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for start in range(1, self.n + 1):
            if start in seen or self(start) == start:
                continue
            cyc, i = [], start
            while i not in seen:
                seen.add(i)
                cyc.append(i)
                i = self(i)
            out.append(tuple(cyc))
        return out

    def to_json(self) -> list[int]:
        return list(self.mapping)

    @classmethod
    def from_json(cls, data: Iterable[int]) -> Perm:
        return cls(tuple(data))

    def __str__(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "id"
        sep = "," if self.n > 9 else ""
        return "".join("(" + sep.join(str(v) for v in c) + ")" for c in cyc)

    def __repr__(self) -> str:
        return f"Perm({list(self.mapping)})"


def compose(a: Perm, b: Perm) -> Perm:
    """Return the product ``a * b`` with ``(a * b)(i) = a(b(i))``."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: S_{a.n} vs S_{b.n}")
    return Perm(tuple(a.mapping[j - 1] for j in b.mapping))


def inverse(a: Perm) -> Perm:
    out = [0] * a.n
    for i, v in enumerate(a.mapping, 1):
        out[v - 1] = i
    return Perm(tuple(out))


def parity(a: Perm) -> int:
    """Sign bit in the convention used throughout: 1 for even, 0 for odd."""
    transpositions = sum(len(c) - 1 for c in a.cycles())
    return 1 if transpositions % 2 == 0 else 0


def rank(a: Perm) -> int:
    """Lexicographic rank of ``a`` among all permutations of [n] (Lehmer code)."""
    n = a.n
    remaining = list(range(1, n + 1))
    r = 0
    for i, v in enumerate(a.mapping):
        pos = remaining.index(v)
        r += pos * math.factorial(n - 1 - i)
        remaining.pop(pos)
    return r


def unrank(n: int, k: int) -> Perm:
    """Inverse of :func:`rank`."""
    if not 0 <= k < math.factorial(n):
        raise ValueError(f"rank {k} out of range for S_{n}")
    remaining = list(range(1, n + 1))
    out = []
    for i in range(n):
        f = math.factorial(n - 1 - i)
        pos, k = divmod(k, f)
        out.append(remaining.pop(pos))
    return Perm(tuple(out))


def check_security_param(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 2 or n % 4 != 2:
        raise InvalidSecurityParameter(
            f"security parameter must satisfy n = 2 (mod 4) (n even, n/2 odd); got {n!r}"
        )
    return int(n)


def is_key(a: Perm) -> bool:
    """True iff ``a`` is a fixed-point-free involution."""
    return all(a(a(i)) == i and a(i) != i for i in range(1, a.n + 1))


def enumerate_keys(n: int) -> list[Perm]:
    """All of K_n, in ascending rank order."""
    check_security_param(n)
    if n <= 6:
        return [symmetric_group(n).perm(r) for r in symmetric_group(n).keys]
    return sorted((_matching_perm(n, m) for m in _matchings(tuple(range(1, n + 1)))), key=rank)


def _matchings(points: tuple[int, ...]):
    if not points:
        yield ()
        return
    first, rest = points[0], points[1:]
    for j, partner in enumerate(rest):
        for m in _matchings(rest[:j] + rest[j + 1 :]):
            yield ((first, partner),) + m


def _matching_perm(n: int, pairs) -> Perm:
    img = list(range(1, n + 1))
    for a, b in pairs:
        img[a - 1], img[b - 1] = b, a
    return Perm(tuple(img))


def draw_key(n: int, rng: np.random.Generator | int | None = None) -> Perm:
    """Uniform draw from K_n using a seeded generator."""
    rng = np.random.default_rng(rng)
    keys = enumerate_keys(n)
    return keys[int(rng.integers(len(keys)))]


class SymmetricGroup:
    """Rank-indexed multiplication tables for S_n.

    ``mult[a, b]`` is the rank of ``unrank(a) * unrank(b)``; ``inv[a]`` the rank
    of the inverse; ``parity[a]`` the sign bit (1 even, 0 odd).
    """

    def __init__(self, n: int):
        if n < 1 or n > 6:
            raise ValueError(f"S_{n} tables are only built for 1 <= n <= 6")
        self.n = n
        self.order = math.factorial(n)
        # itertools yields lexicographic order, which is the Lehmer rank order
        arr = np.array(list(permutations(range(n))), dtype=np.int64).reshape(self.order, n)
        self.one_line = arr
        weights = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
        codes = arr @ weights
        lookup = np.full(n**n, -1, dtype=np.int64)
        lookup[codes] = np.arange(self.order)
        # (a*b)(i) = a[b[i]]
        prod = np.take_along_axis(
            np.broadcast_to(arr[:, None, :], (self.order, self.order, n)),
            np.broadcast_to(arr[None, :, :], (self.order, self.order, n)),
            axis=2,
        )
        self.mult = lookup[prod @ weights]
        self.inv = np.argsort(arr, axis=1) @ weights
        self.inv = lookup[self.inv]
        self.parity = self._parities(arr)
        is_inv = self.mult[np.arange(self.order), np.arange(self.order)] == 0
        no_fixed = np.all(arr != np.arange(n), axis=1)
        self.keys = tuple(int(k) for k in np.flatnonzero(is_inv & no_fixed))
        self.is_key = is_inv & no_fixed
        for t in (self.one_line, self.mult, self.inv, self.parity, self.is_key):
            t.setflags(write=False)

    @staticmethod
    def _parities(arr: np.ndarray) -> np.ndarray:
        n = arr.shape[1]
        inversions = np.zeros(arr.shape[0], dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                inversions += arr[:, i] > arr[:, j]
        return (inversions % 2 == 0).astype(np.int64)

    def perm(self, r: int) -> Perm:
        return Perm(tuple(int(v) + 1 for v in self.one_line[r]))

    def rank_of(self, p: Perm) -> int:
        if p.n != self.n:
            raise ValueError(f"expected a permutation of [{self.n}], got S_{p.n}")
        return rank(p)


@lru_cache(maxsize=None)
def symmetric_group(n: int) -> SymmetricGroup:
    return SymmetricGroup(n)
