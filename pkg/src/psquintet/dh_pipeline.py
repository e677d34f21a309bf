"""Parameter derivation and the smoothed counting integral.

A problem instance fixes the five coefficients, the shift eta, the power k
on the fifth prime, the PS exponent gamma, the small positive theta and the
window fraction lambda0. From the coefficient ratio lambda1/lambda2 the
derived parameters follow:

    X     = q0^(58/27)        q0 a convergent denominator of lambda1/lambda2
    Delta = X^(-27/29) log X
    eps   = X^(e_k(gamma) + theta)   (e_2 = (71-72g)/58, e_3 = (129-130g)/116,
                                      e_4 = (245-246g)/232)
    H     = log^2 X / eps

The smoothed count Gamma = sum over PS-prime quintuples of
theta_kernel(form value) * weight equals the integral over t of
Theta(t) * prod_j S_j(lambda_j t) * e(eta t). The integral splits at
|t| = Delta (main range A) and |t| = H (oscillatory range B); the discarded
|t| > H tail is covered by an explicit bound rather than evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    AdmissibilityError,
    BudgetExceeded,
    CapacityExceeded,
    DegenerateRatio,
)
from .numerics import (
    QuadratureSpec,
    SmoothingKernel,
    cf_convergents,
    kernel_eval,
    kernel_fourier,
    oscillatory_integral,
)
from .ps_primes import GammaParam, PsPrimeTable, build_table
from .quintet_search import search_mitm

_EPS_EXP = {
    2: lambda g: (71.0 - 72.0 * g) / 58.0,
    3: lambda g: (129.0 - 130.0 * g) / 116.0,
    4: lambda g: (245.0 - 246.0 * g) / 232.0,
}
_THEOREM_RANGE = {2: "71/72", 3: "129/130", 4: "245/246"}


@dataclass(frozen=True)
class ProblemInstance:
    lambdas: tuple[float, float, float, float, float]
    eta: float
    k: int
    gamma: GammaParam
    theta_exp: float
    lambda0: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(l) for l in self.lambdas))
        if len(self.lambdas) != 5:
            raise ValueError(f"need 5 coefficients, got {len(self.lambdas)}")
        if not all(math.isfinite(l) and l != 0 for l in self.lambdas):
            raise ValueError("coefficients must be finite and nonzero")
        if not (min(self.lambdas) < 0 < max(self.lambdas)):
            raise AdmissibilityError(
                "coefficients must be not all of the same sign; "
                "all five share one sign here")
        if not math.isfinite(self.eta):
            raise ValueError("eta must be finite")
        if self.k not in (2, 3, 4):
            raise ValueError(f"k must be 2, 3 or 4, got {self.k}")
        if not isinstance(self.gamma, GammaParam):
            raise TypeError("gamma must be a GammaParam")
        if not self.gamma.theorem_admissible(self.k):
            raise AdmissibilityError(
                f"gamma={self.gamma.gamma} < {_THEOREM_RANGE[self.k]} "
                f"for k={self.k}")
        if not (self.theta_exp > 0 and math.isfinite(self.theta_exp)):
            raise ValueError(f"theta_exp must be positive, got {self.theta_exp}")
        if not (0.0 < self.lambda0 < 1.0):
            raise ValueError(f"lambda0 must be in (0,1), got {self.lambda0}")


@dataclass(frozen=True)
class DhParams:
    q0: int
    X: float
    Delta: float
    eps: float
    H: float

    def __post_init__(self):
        if self.q0 < 1:
            raise ValueError("q0 must be a positive integer")
        for name in ("X", "Delta", "eps", "H"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite")


@dataclass(frozen=True)
class GammaDecomposition:
    A: complex
    B: complex
    C_bound: float
    total: complex
    direct: Optional[float] = None

    @property
    def rel_gap(self) -> Optional[float]:
        if self.direct is None:
            return None
        # scale by the larger magnitude so a zero direct count (no solutions
        # near the window) reads 1.0, not an artifact of a tiny denominator
        scale = max(abs(self.direct), abs(self.total))
        if scale == 0.0:
            return 0.0
        return abs(self.total - self.direct) / scale


def derive_params(inst: ProblemInstance, q0_floor="auto") -> DhParams:
    """Derived scales from the coefficient ratio.

    q0 is the smallest convergent denominator of lambda1/lambda2 at or above
    the floor ("auto" means 2); small floors keep X at desk scale.
    """
    floor = 2 if q0_floor == "auto" else int(q0_floor)
    if floor < 1:
        raise ValueError(f"q0 floor must be >= 1, got {q0_floor}")
    ratio = inst.lambdas[0] / inst.lambdas[1]
    q0 = None
    for conv in cf_convergents(ratio, 64):
        if conv.denominator >= floor:
            q0 = conv.denominator
            break
    if q0 is None:
        raise DegenerateRatio(
            f"lambda1/lambda2 = {ratio} has no convergent denominator >= "
            f"{floor}; the ratio is rational with too small a denominator")
    x = float(q0) ** (58.0 / 27.0)
    logx = math.log(x)
    delta = x ** (-27.0 / 29.0) * logx
    eps = x ** (_EPS_EXP[inst.k](inst.gamma.gamma) + inst.theta_exp)
    h = logx ** 2 / eps
    return DhParams(q0=q0, X=x, Delta=delta, eps=eps, H=h)


def instance_tables(inst: ProblemInstance, params: DhParams) -> list[PsPrimeTable]:
    """Five per-slot PS prime tables (slots 1-4 squares, slot 5 power k)."""
    sq = build_table(inst.gamma, params.X, inst.lambda0, 2)
    if inst.k == 2:
        return [sq] * 5
    return [sq] * 4 + [build_table(inst.gamma, params.X, inst.lambda0, inst.k)]


def gamma_direct(inst: ProblemInstance, params: DhParams,
                 kern: SmoothingKernel, tables, *,
                 max_solutions: int = 10 ** 7, threads: int = 1,
                 memory_mb: float = 2048.0) -> float:
    """Kernel-weighted quintuple sum, enumerated through the pair search.

    The kernel vanishes outside |value| < eps, so only near-solutions are
    enumerated (radius = kernel support); everything else contributes zero.
    """
    if any(len(t) == 0 for t in tables):
        return 0.0
    try:
        sols = search_mitm(inst, tables, kern.epsilon, limit=max_solutions,
                           threads=threads, memory_mb=memory_mb)
    except CapacityExceeded as exc:
        raise BudgetExceeded(str(exc)) from exc
    if len(sols) >= max_solutions:
        raise BudgetExceeded(
            f"solution count reached the {max_solutions} cap; "
            "the weighted sum would be truncated")
    return math.fsum(kernel_eval(kern, s.value) * s.weight for s in sols)


def _sum_caps(tables) -> list[float]:
    return [float(np.sum(t.weights)) for t in tables]


def tail_bound(params: DhParams, l: Optional[int] = None,
               sum_caps=(1.0, 1.0, 1.0, 1.0, 1.0)) -> float:
    """Bound on the discarded |t| > H integral: (prod caps)/l * (4l/(pi eps H))^l.

    l defaults to floor(log X), the choice that makes the base
    4l/(pi log^2 X) small at desk scale.
    """
    if l is None:
        l = max(1, math.floor(math.log(params.X)))
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    caps = [float(c) for c in sum_caps]
    if len(caps) != 5 or any(c < 0 for c in caps):
        raise ValueError("sum_caps must be 5 nonnegative reals")
    base = 4.0 * l / (math.pi * params.eps * params.H)
    return math.prod(caps) / l * base ** l


def _integrand(inst: ProblemInstance, kern: SmoothingKernel, tables):
    ks = (2, 2, 2, 2, inst.k)
    bases = [t.primes.astype(np.float64) ** kj for t, kj in zip(tables, ks)]
    weights = [t.weights for t in tables]
    lams = inst.lambdas
    eta = inst.eta

    def f(t: np.ndarray) -> np.ndarray:
        acc = kernel_fourier(kern, t).astype(complex)
        for lam, base, w in zip(lams, bases, weights):
            if len(base) == 0:
                return np.zeros_like(t, dtype=complex)
            u = (lam * t)[:, None] * base[None, :]
            u -= np.rint(u)
            acc = acc * (np.exp((2j * np.pi) * u) @ w)
        u = eta * t
        u -= np.rint(u)
        return acc * np.exp((2j * np.pi) * u)

    return f


def gamma_integral(inst: ProblemInstance, params: DhParams,
                   kern: SmoothingKernel, tables, grid: int = 512, *,
                   rel_tol: float = 1e-9, threads: int = 1,
                   nodes_cap: int = 1024,
                   direct: Optional[float] = None) -> GammaDecomposition:
    """Main-range A, oscillatory-range B, and the tail bound C.

    A integrates over |t| < Delta and B over Delta <= |t| <= H; both use the
    conjugate symmetry of the integrand to evaluate only t >= 0 and return
    exactly real values. grid floors the panel count per region.
    """
    if grid < 512:
        raise ValueError(f"grid must be >= 512, got {grid}")
    ks = (2, 2, 2, 2, inst.k)
    freq = sum(abs(l) * float(np.max(t.primes)) ** kj if len(t) else 0.0
               for l, t, kj in zip(inst.lambdas, tables, ks))
    freq += abs(inst.eta) + 2.0 * kern.epsilon
    f = _integrand(inst, kern, tables)

    def region(lo: float, hi: float) -> complex:
        floor_freq = grid / (4.0 * (hi - lo))
        spec = QuadratureSpec(lo, hi, max(freq, floor_freq), rel_tol)
        half = oscillatory_integral(f, spec, threads=threads,
                                    nodes_cap=nodes_cap)
        return complex(2.0 * half.real, 0.0)

    a = region(0.0, params.Delta)
    b = region(params.Delta, params.H)
    c = tail_bound(params, None, _sum_caps(tables))
    return GammaDecomposition(A=a, B=b, C_bound=c, total=a + b, direct=direct)
