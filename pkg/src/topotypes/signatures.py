"""Branching signatures admissible for a group order and a genus bound."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Mapping, Sequence


@dataclass(frozen=True, order=True)
class Signature:
    d: int
    m: tuple[int, ...]
    g: int

    @property
    def r(self) -> int:
        return len(self.m)

    def __str__(self) -> str:
        return f"{self.d}:({','.join(map(str, self.m))}) g={self.g}"


def genus(d: int, m: Sequence[int]) -> int | None:
    """Riemann-Hurwitz genus, or ``None`` when it is not an integer."""
    chi = Fraction(d) * (-2 + sum(1 - Fraction(1, mi) for mi in m))
    if chi.denominator != 1 or chi.numerator % 2:
        return None
    return chi.numerator // 2 + 1


def _divisors(d: int) -> list[int]:
    return [k for k in range(2, d + 1) if d % k == 0]


def max_branch_points(d: int, g_max: int) -> int:
    return (4 * (g_max - 1)) // d + 4


def is_admissible(d: int, m: Sequence[int], g_max: int, conder: Mapping[int, int] | None = None) -> bool:
    """Direct check of every defining condition (used to re-verify enumerations)."""
    r = len(m)
    if not 3 <= r <= max_branch_points(d, g_max):
        return False
    if any(d % mi or not 2 <= mi <= d for mi in m):
        return False
    if list(m) != sorted(m):
        return False
    g = genus(d, m)
    if g is None or not 2 <= g <= g_max:
        return False
    if r == 3 and conder is not None and g <= 301 and g in conder and d > conder[g]:
        return False
    return True


def enumerate_signatures(d: int, g_max: int, conder: Mapping[int, int] | None = None) -> list[Signature]:
    """All nondecreasing signatures for order ``d`` with genus in ``[2, g_max]``, sorted."""
    if d < 2 or g_max < 2:
        return []
    divs = _divisors(d)
    rmax = max_branch_points(d, g_max)
    # d * (sum(1 - 1/m_i) - 2) = 2g - 2 <= 2 g_max - 2
    budget = Fraction(2 * g_max - 2, d) + 2
    out: list[Signature] = []

    def rec(prefix: list[int], total: Fraction):
        r = len(prefix)
        if r >= 3:
            g = genus(d, prefix)
            if g is not None and 2 <= g <= g_max:
                if not (r == 3 and conder is not None and g <= 301 and g in conder and d > conder[g]):
                    out.append(Signature(d, tuple(prefix), g))
        if r == rmax:
            return
        lo = prefix[-1] if prefix else 2
        for mi in divs:
            if mi < lo:
                continue
            t = total + 1 - Fraction(1, mi)
            # every further entry adds at least 1 - 1/mi
            if t > budget:
                break
            rec(prefix + [mi], t)

    rec([], Fraction(0))
    out.sort(key=lambda s: (s.d, s.m))
    return out


def retrieval_bound_ok(d: int, r: int, g: int) -> bool:
    return d <= (84 if r == 3 else 12) * (g - 1)


class SignatureStore:
    """Signatures for every order up to ``84 (g_max - 1)``, keyed by genus.

    Persisted as JSON lines: a header ``{"g_max": ...}`` followed by one
    ``{"d": .., "m": [..], "g": ..}`` per signature.
    """

    def __init__(self, g_max: int, signatures: Sequence[Signature] | None = None,
                 conder: Mapping[int, int] | None = None):
        self.g_max = g_max
        if signatures is None:
            signatures = []
            for d in range(2, 84 * (g_max - 1) + 1):
                signatures.extend(enumerate_signatures(d, g_max, conder))
        self.signatures = sorted(signatures, key=lambda s: (s.g, s.d, s.m))

    def by_genus(self, g: int) -> list[Signature]:
        if g > self.g_max:
            raise LookupError(f"signature store not populated for genus {g} (g_max={self.g_max})")
        return [s for s in self.signatures if s.g == g and retrieval_bound_ok(s.d, s.r, g)]

    def orders(self, g: int) -> list[int]:
        return sorted({s.d for s in self.by_genus(g)})

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write(json.dumps({"g_max": self.g_max}) + "\n")
            for s in self.signatures:
                fh.write(json.dumps({"d": s.d, "m": list(s.m), "g": s.g}) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SignatureStore":
        with open(path) as fh:
            header = json.loads(fh.readline())
            sigs = []
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    sigs.append(Signature(int(rec["d"]), tuple(rec["m"]), int(rec["g"])))
                except (ValueError, KeyError) as exc:
                    raise ValueError(f"{path}:{lineno}: malformed signature record") from exc
        return cls(int(header["g_max"]), sigs)


def signatures_by_genus(store: SignatureStore | None, g: int) -> list[Signature]:
    if store is None:
        raise LookupError("signature store not populated")
    return store.by_genus(g)


def iter_signatures(g_max: int) -> Iterator[Signature]:
    for d in range(2, 84 * (g_max - 1) + 1):
        yield from enumerate_signatures(d, g_max)
