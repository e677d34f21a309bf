"""Foundational numerics: smoothing kernel, continued fractions, oscillatory quadrature.

The smoothing kernel theta is the indicator of [-7e/8, 7e/8] convolved with l
normalized boxes of width e/(4l) each (e = epsilon). That makes theta l times
continuously differentiable with

    theta(y) = 1        for |y| <= 3e/4,
    0 < theta(y) < 1    for 3e/4 < |y| < e,
    theta(y) = 0        for |y| >= e,

and gives the closed-form Fourier transform

    Theta(x) = (7e/4) * sinc(7e x/4) * sinc(e x/(4l))^l,   sinc(u) = sin(pi u)/(pi u),

which obeys |Theta(x)| <= min(7e/4, 1/(pi|x|), (1/(pi|x|)) * (4l/(pi e |x|))^l)
with no slack, since |sinc(u)| <= min(1, 1/(pi|u|)).

theta itself is evaluated exactly: the sum of l boxes is an Irwin-Hall variable,
so theta(y) is a difference of Irwin-Hall CDF values. Floats are dyadic
rationals, so the CDF polynomial evaluates exactly in Fraction arithmetic; only
the final conversion back to float rounds. A cached-grid interpolation was
rejected: it cannot keep the three regimes exact nor support 1e-8 relative
agreement between the closed form and quadrature of theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from .errors import NonConvergence

# The spec'd Rational (reduced numerator/denominator pair) is exactly what
# fractions.Fraction provides; no reason to reinvent it.
Rational = Fraction

_SNAP_TOL = 1e-9          # continued-fraction integer snap (see cf_convergents)
_MAX_CF_DEN = 10 ** 15    # denominators beyond double resolution are noise

# Fixed quadrature chunking: reduction order must not depend on thread count.
_PANEL_CHUNK = 4096


@dataclass(frozen=True)
class SmoothingKernel:
    """Compactly supported bump of half-width epsilon and smoothness order l."""

    epsilon: float
    l: int

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive and finite")
        if self.l < 1:
            raise ValueError("l must be >= 1")


def _irwin_hall_cdf(s: Fraction, l: int) -> Fraction:
    # CDF of the sum of l iid U[0,1] at s, exact for rational s.
    if s <= 0:
        return Fraction(0)
    if s >= l:
        return Fraction(1)
    total = Fraction(0)
    for j in range(int(s) + 1):
        term = math.comb(l, j) * (s - j) ** l
        total += -term if j % 2 else term
    return total / math.factorial(l)


def kernel_eval(kern: SmoothingKernel, y: float) -> float:
    """theta(y): exact regime decision, value in [0, 1], even in y."""
    l = kern.l
    eps = Fraction(kern.epsilon)
    yq = Fraction(float(y))
    box = eps / (4 * l)                      # single-box width
    half = l * Fraction(1, 2)
    vp = (yq + 7 * eps / 8) / box + half
    vm = (yq - 7 * eps / 8) / box + half
    val = _irwin_hall_cdf(vp, l) - _irwin_hall_cdf(vm, l)
    if val <= 0:
        return 0.0
    if val >= 1:
        return 1.0
    out = float(val)
    # val is strictly inside (0,1); keep the float there (<= 1 ulp nudge).
    if out >= 1.0:
        out = math.nextafter(1.0, 0.0)
    elif out <= 0.0:
        out = math.nextafter(0.0, 1.0)
    return out


def kernel_fourier(kern: SmoothingKernel, x):
    """Theta(x), closed form; accepts a scalar or ndarray, value 7e/4 at x=0."""
    eps, l = kern.epsilon, kern.l
    x = np.asarray(x, dtype=float)
    out = (7 * eps / 4) * np.sinc(7 * eps * x / 4) * np.sinc(eps * x / (4 * l)) ** l
    return float(out) if out.ndim == 0 else out


def kernel_fourier_bound(kern: SmoothingKernel, x):
    """The decay envelope min(7e/4, 1/(pi|x|), (1/(pi|x|))(4l/(pi e |x|))^l)."""
    eps, l = kern.epsilon, kern.l
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    with np.errstate(divide="ignore", over="ignore"):
        inv = 1.0 / (np.pi * ax)
        out = np.minimum(7 * eps / 4, np.minimum(inv, inv * (4 * l / (np.pi * eps * ax)) ** l))
    return float(out) if out.ndim == 0 else out


def cf_convergents(alpha: float, n: int) -> list[Rational]:
    """First n continued-fraction convergents of alpha, in lowest terms.

    The walk runs in exact rational arithmetic on the binary value of alpha,
    so every emitted convergent genuinely satisfies |alpha - a/q| < 1/q^2.
    A double that encodes an intended rational (e.g. 7/3) carries rounding in
    its last ulps which would sprout garbage partial quotients; a residual
    within _SNAP_TOL of an integer is therefore snapped and the expansion
    terminated there.
    """
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    if n < 1:
        raise ValueError("n must be >= 1")
    out: list[Rational] = []
    h_prev, h_prev2 = 1, 0
    k_prev, k_prev2 = 0, 1
    x = Fraction(float(alpha))
    snap = Fraction(_SNAP_TOL)
    while len(out) < n:
        nearest = round(x)
        if abs(x - nearest) < snap * max(1, abs(nearest)):
            a = int(nearest)
            terminal = True
        else:
            a = math.floor(x)
            terminal = False
        h = a * h_prev + h_prev2
        k = a * k_prev + k_prev2
        if k > _MAX_CF_DEN:
            break
        out.append(Fraction(h, k))
        if terminal or x == a:
            break
        h_prev2, h_prev = h_prev, h
        k_prev2, k_prev = k_prev, k
        x = 1 / (x - a)
    return out


def dirichlet_approx(alpha: float, Q: int) -> Rational:
    """Best rational a/q with q <= Q in the sense |q*alpha - a|.

    Returns the last convergent with denominator <= Q. That convergent
    satisfies |alpha - a/q| <= 1/(q(Q+1)) because the next denominator
    exceeds Q. Approximants with larger q can have smaller absolute error
    |alpha - a/q| but may violate the q-scaled bound, so they are never
    preferred; among equally good q the smallest is kept (determinism).
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    best: Rational | None = None
    for conv in cf_convergents(alpha, 64):
        if conv.denominator <= Q:
            best = conv
        else:
            break
    if best is None:
        # First convergent is floor(alpha)/1, denominator 1 <= Q always.
        raise AssertionError("unreachable: denominator-1 convergent exists")
    return best


@dataclass(frozen=True)
class QuadratureSpec:
    """Panelized quadrature request for a possibly oscillatory integrand.

    max_frequency is the largest |d/dt of the phase in cycles| over [lo, hi];
    panels are kept at or below a quarter period of that frequency.
    """

    lo: float
    hi: float
    max_frequency: float
    rel_tol: float = 1e-9

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")
        if self.max_frequency < 0 or not math.isfinite(self.max_frequency):
            raise ValueError("max_frequency must be finite and >= 0")
        if not (0 < self.rel_tol <= 0.1):
            raise ValueError("rel_tol must be in (0, 0.1]")


_leggauss_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _leggauss_cache:
        _leggauss_cache[n] = np.polynomial.legendre.leggauss(n)
    return _leggauss_cache[n]


def _panel_sums(f, edges: np.ndarray, nodes: int, threads: int) -> tuple[complex, float]:
    """Gauss-Legendre over every panel; returns (total, sum of |panel| values).

    Panels are processed in fixed chunks of _PANEL_CHUNK and partial sums are
    combined in chunk-index order, so the result is bit-identical for any
    thread count.
    """
    xs, ws = _leggauss(nodes)
    n_panels = len(edges) - 1

    def one_chunk(start: int) -> tuple[complex, float]:
        stop = min(start + _PANEL_CHUNK, n_panels)
        e0, e1 = edges[start:stop], edges[start + 1:stop + 1]
        mid = (e0 + e1) / 2
        half = (e1 - e0) / 2
        t = (mid[:, None] + half[:, None] * xs[None, :]).ravel()
        vals = np.broadcast_to(np.asarray(f(t), dtype=complex), t.shape)
        panel = (vals.reshape(-1, nodes) @ ws) * half
        return complex(np.sum(panel)), float(np.sum(np.abs(panel)))

    starts = range(0, n_panels, _PANEL_CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one_chunk, starts))
    else:
        parts = [one_chunk(s) for s in starts]
    total = complex(0)
    mass = 0.0
    for part, m in parts:        # fixed order regardless of executor
        total += part
        mass += m
    return total, mass


def oscillatory_integral(f, spec: QuadratureSpec, *, threads: int = 1,
                         nodes_init: int = 8, nodes_cap: int = 1024) -> complex:
    """Integrate a vectorized complex integrand f over [spec.lo, spec.hi].

    Panel width <= 1/(4*max_frequency) (single panel when max_frequency == 0);
    the per-panel Gauss-Legendre node count doubles until two successive
    estimates agree to rel_tol. Raises NonConvergence at the node cap. The
    agreement scale has a floor proportional to the accumulated |panel| mass so
    integrals that cancel to ~0 still converge.
    """
    width = spec.hi - spec.lo
    if spec.max_frequency > 0:
        n_panels = max(1, math.ceil(width * 4 * spec.max_frequency))
    else:
        n_panels = 1
    edges = np.linspace(spec.lo, spec.hi, n_panels + 1)

    prev, prev_mass = _panel_sums(f, edges, nodes_init, threads)
    nodes = nodes_init * 2
    while nodes <= nodes_cap:
        cur, mass = _panel_sums(f, edges, nodes, threads)
        scale = max(abs(cur), 1e-3 * mass)
        if abs(cur - prev) <= spec.rel_tol * scale:
            return cur
        prev = cur
        nodes *= 2
    raise NonConvergence(
        f"no agreement to rel_tol={spec.rel_tol} within {nodes_cap} nodes/panel "
        f"({n_panels} panels on [{spec.lo}, {spec.hi}])")
