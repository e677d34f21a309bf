"""Meet-in-the-middle search for near-zero prime quintuples.

Target form: lambda1*p1^2 + ... + lambda4*p4^2 + lambda5*p5^k + eta, all p_j
PS primes drawn from per-slot tables. Left half holds the sorted pair sums
over (p1, p2); the right half (p3, p4, p5) is streamed one p5 at a time as a
constant shift of the sorted (p3, p4) array, so interval queries against the
left half are plain binary searches.

Floats locate candidates inside a guard band; every candidate is then
certified with exact rational arithmetic (the float coefficients are exact
dyadic rationals), so membership in |value| < radius is decided exactly and
the returned ordering is reproducible bit for bit across thread counts.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._io import atomic_write_text, fmt17
from .errors import CapacityExceeded, EmptyWindow, SpecMismatch
from .ps_primes import PsPrimeTable

_THEOREM_EXP = {
    2: lambda g: (71.0 - 72.0 * g) / 29.0,
    3: lambda g: (129.0 - 130.0 * g) / 58.0,
    4: lambda g: (245.0 - 246.0 * g) / 116.0,
}

# hard ceiling on certified candidates per search, independent of the
# caller's memory budget
_MAX_HITS = 10 ** 7


@dataclass(frozen=True)
class QuintetSolution:
    p: tuple[int, int, int, int, int]
    value: float
    weight: float
    max_p: int
    meets_theorem_radius: bool


@dataclass(frozen=True)
class HalfSumArray:
    """Sorted partial sums with index pairs to recover the primes."""

    sums: np.ndarray
    pairs: np.ndarray

    def __post_init__(self):
        if len(self.sums) != len(self.pairs):
            raise ValueError("sums and pairs length mismatch")

    @classmethod
    def build(cls, lam_a: float, tab_a: PsPrimeTable,
              lam_b: float, tab_b: PsPrimeTable) -> "HalfSumArray":
        a = lam_a * tab_a.primes.astype(np.float64) ** 2
        b = lam_b * tab_b.primes.astype(np.float64) ** 2
        sums = (a[:, None] + b[None, :]).ravel()
        ia, ib = np.divmod(np.arange(len(sums)), len(b))
        order = np.argsort(sums, kind="stable")
        pairs = np.stack([ia[order], ib[order]], axis=1).astype(np.int64)
        return cls(sums=sums[order], pairs=pairs)


def _check_tables(inst, tables) -> list[PsPrimeTable]:
    tables = list(tables)
    if len(tables) != 5:
        raise SpecMismatch(f"need 5 prime tables, got {len(tables)}")
    for j, tab in enumerate(tables):
        if not isinstance(tab, PsPrimeTable):
            raise SpecMismatch(f"slot {j + 1} is not a prime table")
        want_k = 2 if j < 4 else inst.k
        if tab.k != want_k:
            raise SpecMismatch(f"slot {j + 1} table built for exponent "
                               f"{tab.k}, instance needs {want_k}")
        if tab.gamma.gamma != inst.gamma.gamma:
            raise SpecMismatch(f"slot {j + 1} table gamma {tab.gamma.gamma} "
                               f"!= instance gamma {inst.gamma.gamma}")
        if len(tab) == 0:
            raise EmptyWindow(f"slot {j + 1} prime window is empty")
    return tables


def _guard(inst, tables, radius: float) -> float:
    span = sum(abs(l) * t.x_max for l, t in zip(inst.lambdas, tables))
    return 1e-6 * radius + 32.0 * np.finfo(float).eps * (span + abs(inst.eta))


def _exact_value(inst, p: tuple[int, ...]) -> Fraction:
    ks = (2, 2, 2, 2, inst.k)
    acc = Fraction(inst.eta)
    for lam, pj, kj in zip(inst.lambdas, p, ks):
        acc += Fraction(lam) * pj ** kj
    return acc


def _finalize(inst, hits, radius: float, limit: int) -> list[QuintetSolution]:
    """Certify candidates exactly, order (|value| asc, lex p), truncate."""
    rad = Fraction(radius)
    kept = []
    for p in hits:
        v = _exact_value(inst, p)
        if abs(v) < rad:
            kept.append((abs(v), p, v))
    kept.sort(key=lambda rec: (rec[0], rec[1]))
    g = inst.gamma.gamma
    exp = _THEOREM_EXP[inst.k](g) + inst.theta_exp
    out = []
    for _, p, v in kept[:limit]:
        max_p = max(p)
        weight = math.prod(pj ** (1.0 - g) * math.log(pj) for pj in p)
        meets = abs(float(v)) < float(max_p) ** exp
        out.append(QuintetSolution(p=p, value=float(v), weight=weight,
                                   max_p=max_p, meets_theorem_radius=meets))
    return out


def search_mitm(inst, tables, radius: float, limit: int = 1000, *,
                threads: int = 1, memory_mb: float = 2048.0) -> list[QuintetSolution]:
    """All quintuples with |form value| < radius, best (smallest) first.

    tables: five per-slot PS prime tables (slots 1-4 squared, slot 5 to the
    instance exponent). Returns at most `limit` solutions.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if limit <= 0:
        raise ValueError(f"limit must be positive, got {limit}")
    tables = _check_tables(inst, tables)
    n = [len(t) for t in tables]
    # pair arrays dominate: sums float64 + two int64 index columns
    est_bytes = 32 * (n[0] * n[1] + n[2] * n[3])
    if est_bytes > memory_mb * 2 ** 20:
        raise CapacityExceeded(
            f"pair arrays need ~{est_bytes / 2 ** 20:.0f} MiB, "
            f"budget is {memory_mb:.0f} MiB")

    l1, l2, l3, l4, l5 = inst.lambdas
    left = HalfSumArray.build(l1, tables[0], l2, tables[1])
    right34 = HalfSumArray.build(l3, tables[2], l4, tables[3])
    p5s = tables[4].primes
    band = radius + _guard(inst, tables, radius)

    pr1 = tables[0].primes
    pr2 = tables[1].primes
    pr3 = tables[2].primes
    pr4 = tables[3].primes

    def scan_one(i5: int) -> list[tuple[int, int, int, int, int]]:
        p5 = int(p5s[i5])
        r = right34.sums + (l5 * float(p5) ** inst.k + inst.eta)
        lo = np.searchsorted(left.sums, -r - band, side="left")
        hi = np.searchsorted(left.sums, -r + band, side="right")
        out = []
        for j in np.flatnonzero(hi > lo):
            i3, i4 = right34.pairs[j]
            for m in range(lo[j], hi[j]):
                i1, i2 = left.pairs[m]
                out.append((int(pr1[i1]), int(pr2[i2]),
                            int(pr3[i3]), int(pr4[i4]), p5))
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            blocks = list(ex.map(scan_one, range(len(p5s))))
    else:
        blocks = [scan_one(i) for i in range(len(p5s))]
    hits = [p for block in blocks for p in block]
    if len(hits) > _MAX_HITS:
        raise CapacityExceeded(f"{len(hits)} candidates exceed the "
                               f"{_MAX_HITS} certification ceiling")
    return _finalize(inst, hits, radius, limit)


def brute_oracle(inst, tables, radius: float, limit: int = 10 ** 8) -> list[QuintetSolution]:
    """Exhaustive five-loop enumeration with the same ordering contract."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    tables = _check_tables(inst, tables)
    n = [len(t) for t in tables]
    if math.prod(n) > 10 ** 8:
        raise CapacityExceeded(f"brute force over {math.prod(n)} tuples "
                               "refused (cap 1e8)")
    l1, l2, l3, l4, l5 = inst.lambdas
    sq = [t.primes.astype(np.float64) ** 2 for t in tables[:4]]
    v4 = (l1 * sq[0][:, None, None, None] + l2 * sq[1][None, :, None, None]
          + l3 * sq[2][None, None, :, None] + l4 * sq[3][None, None, None, :])
    band = radius + _guard(inst, tables, radius)
    hits = []
    for p5 in tables[4].primes:
        vals = v4 + (l5 * float(p5) ** inst.k + inst.eta)
        for i1, i2, i3, i4 in np.argwhere(np.abs(vals) < band):
            hits.append((int(tables[0].primes[i1]), int(tables[1].primes[i2]),
                         int(tables[2].primes[i3]), int(tables[3].primes[i4]),
                         int(p5)))
    return _finalize(inst, hits, radius, limit)


def solutions_to_dicts(sols) -> list[dict]:
    return [{"p": list(s.p), "value": s.value, "weight": s.weight,
             "max_p": s.max_p, "meets_theorem_radius": s.meets_theorem_radius}
            for s in sols]


def export_solutions(path: str, sols) -> int:
    """CSV p1..p5,value,max_p,meets_theorem_radius; row order preserved."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p1", "p2", "p3", "p4", "p5", "value", "max_p",
                     "meets_theorem_radius"])
    for s in sols:
        writer.writerow([*s.p, fmt17(s.value), s.max_p,
                         "true" if s.meets_theorem_radius else "false"])
    return atomic_write_text(path, buf.getvalue())
