"""The G-ratio, von Neumann-Jordan constant estimation, exact values and
bounds for the builtin family, and Clarkson-inequality checking.

Estimates are refutation-oriented lower envelopes of a supremum: the
report stores the witnessing pair so every value can be recomputed
independently, and a pass at finite samples is never reported as proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .duality import comparison_constants, dual_psi
from .generators import PNormGenerator, PsiFunction, certify, require_certified
from .norms import BaseNorm, BlockVector, ProductNorm
from .simplex import SimplexGrid, default_resolution

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class GeometryError(ValueError):
    """Invalid input to a geometric-constant computation."""


def _g_arrays(N: ProductNorm, x: np.ndarray, y: np.ndarray) -> float:
    vals = N.eval_many(np.stack([x + y, x - y, x, y]))
    den = 2.0 * (vals[2] ** 2 + vals[3] ** 2)
    if den == 0.0:
        raise GeometryError("G-ratio undefined: both inputs are zero")
    return float((vals[0] ** 2 + vals[1] ** 2) / den)


def g_ratio(N: ProductNorm, x: BlockVector, y: BlockVector) -> float:
    """(|x+y|^2 + |x-y|^2) / (2(|x|^2 + |y|^2)) in the product norm."""
    return _g_arrays(N, x.as_array(), y.as_array())


def nj_exact_p(p: float) -> float:
    """The constant of the all-p norm: 2^(2/min(p,q) - 1)."""
    if p != math.inf and p < 1:
        raise GeometryError(f"exponent p={p} below 1")
    if p == math.inf:
        return 2.0
    q = math.inf if p == 1 else p / (p - 1.0)
    return 2.0 ** (2.0 / min(p, q) - 1.0)


@dataclass(frozen=True)
class NJReport:
    """Supremum estimate of the G-ratio with a reproducing witness pair."""

    estimate: float
    witness_x: BlockVector
    witness_y: BlockVector
    exact: float | None
    lower_bound: float | None
    upper_bound: float | None
    budget: int
    restarts: int
    seed: int

    def recompute(self, N: ProductNorm) -> float:
        return g_ratio(N, self.witness_x, self.witness_y)


def _canonical_starts(n: int, d: int) -> list:
    """Deterministic start pairs hitting the known extremal configurations
    of the builtin family: two unit coordinates and their sum/difference."""
    e1 = np.zeros((n, d))
    e1[0, 0] = 1.0
    e2 = np.zeros((n, d))
    if n >= 2:
        e2[1, 0] = 1.0
    else:
        e2[0, min(1, d - 1)] = 1.0
    starts = [(e1, e2), (e1 + e2, e1 - e2)]
    if d >= 2:
        u2 = np.zeros((n, d))
        u2[0, 1] = 1.0
        starts.append((e1, u2))
        starts.append((e1 + u2, e1 - u2))
    return starts


def _golden_line(f, lo: float, hi: float, iters: int = 60) -> float:
    """Golden-section maximization of ``f`` on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _polish(N: ProductNorm, x: np.ndarray, y: np.ndarray, sweeps: int = 3):
    """Per-coordinate golden-section ascent over both members of the pair."""
    z = np.concatenate([x.ravel(), y.ravel()])
    half = z.size // 2

    def val(zz):
        return _g_arrays(N, zz[:half].reshape(x.shape), zz[half:].reshape(y.shape))

    best = val(z)
    for _ in range(sweeps):
        for k in range(z.size):
            span = 1.0 + abs(z[k])

            def f(c, k=k):
                zz = z.copy()
                zz[k] = c
                xx, yy = zz[:half].reshape(x.shape), zz[half:].reshape(y.shape)
                if not (N.eval_many(xx[None])[0] or N.eval_many(yy[None])[0]):
                    return -math.inf
                return _g_arrays(N, xx, yy)

            c = _golden_line(f, z[k] - span, z[k] + span)
            v = f(c)
            if v > best:
                best = v
                z[k] = c
    return z[:half].reshape(x.shape), z[half:].reshape(y.shape), best


def nj_estimate(N: ProductNorm, budget: int = 20_000, restarts: int = 8,
                seed: int = 0, sweeps: int = 3,
                bounds: tuple | None = None) -> NJReport:
    """Supremum estimate of the G-ratio by multistart random sampling with
    per-coordinate golden-section polish."""
    if budget < 1:
        raise GeometryError("budget must be >= 1")
    rng = np.random.default_rng(seed)
    n, d = N.n, N.base.d

    X = rng.standard_normal((budget, n, d))
    Y = rng.standard_normal((budget, n, d))
    # blocks scaled to the base unit sphere, then by uniform radii
    for Z in (X, Y):
        w = N.base.eval_many(Z)
        w = np.where(w > 0, w, 1.0)
        Z /= w[:, :, None]
        Z *= rng.uniform(0.1, 1.0, size=(budget, n, 1))
    vx = N.eval_many(X)
    vy = N.eval_many(Y)
    sums = N.eval_many(X + Y)
    diffs = N.eval_many(X - Y)
    G = (sums ** 2 + diffs ** 2) / (2.0 * (vx ** 2 + vy ** 2))

    order = np.argsort(-G, kind="stable")[:restarts]
    best_val = -math.inf
    best_pair = None
    for x0, y0 in _canonical_starts(n, d):
        x1, y1, v = _polish(N, x0.copy(), y0.copy(), sweeps)
        if v > best_val:
            best_val, best_pair = v, (x1, y1)
    for k in order:
        x1, y1, v = _polish(N, X[k].copy(), Y[k].copy(), sweeps)
        if v > best_val:
            best_val, best_pair = v, (x1, y1)

    exact = None
    if isinstance(N.psi, PNormGenerator) and N.psi.p == N.base.p:
        exact = nj_exact_p(N.base.p)
    lo, hi = bounds if bounds is not None else (None, None)
    wx = BlockVector.from_array(best_pair[0])
    wy = BlockVector.from_array(best_pair[1])
    report = NJReport(estimate=g_ratio(N, wx, wy), witness_x=wx, witness_y=wy,
                      exact=exact, lower_bound=lo, upper_bound=hi,
                      budget=budget, restarts=restarts, seed=seed)
    if not (1.0 - 1e-9 <= report.estimate <= 2.0 + 1e-9):
        raise GeometryError(f"estimate {report.estimate!r} escaped [1, 2]")
    return report


@dataclass(frozen=True)
class NJBounds:
    """Two-sided bounds transported through comparison constants, with the
    order-based tightenings when they apply."""

    lower: float
    upper: float
    m: float
    M: float
    order: str  # 'ge', 'le', or 'none' between the two generators
    tightened: bool
    n2_equality_note: str | None


def nj_bounds(psi: PsiFunction, phi: PsiFunction, C_phi: float,
              K: int | None = None) -> NJBounds:
    """Bounds on the constant of the psi-norm from a phi-norm with known
    constant: (m^2/M^2) C_phi <= C_psi <= (M^2/m^2) C_phi, tightened to
    M^2 when psi >= phi with C_phi = 1, and to (1/m^2) C_phi when
    psi <= phi."""
    require_certified(psi, K)
    require_certified(phi, K)
    K = K or default_resolution(psi.n)
    cc = comparison_constants(psi, phi, K)
    m, M = cc.m, cc.M
    lower = m ** 2 / M ** 2 * C_phi
    upper = M ** 2 / m ** 2 * C_phi

    T = SimplexGrid(psi.n, K).points_array
    pv, fv = psi.eval_many(T), phi.eval_many(T)
    if np.all(pv >= fv - 1e-12):
        order = "ge"
    elif np.all(pv <= fv + 1e-12):
        order = "le"
    else:
        order = "none"

    tightened = False
    if order == "ge" and abs(C_phi - 1.0) <= 1e-12:
        upper = min(upper, M ** 2)
        tightened = True
    elif order == "le":
        upper = min(upper, C_phi / m ** 2)
        tightened = True

    note = None
    if psi.n == 2 and order != "none" and tightened:
        note = "for two blocks with an ordered pair the tightened upper bound is attained"
    return NJBounds(lower=lower, upper=upper, m=m, M=M, order=order,
                    tightened=tightened, n2_equality_note=note)


@dataclass(frozen=True)
class ClarksonParams:
    alpha: float
    beta: float

    @staticmethod
    def from_alpha(alpha: float) -> "ClarksonParams":
        if not 1.0 < alpha <= 2.0:
            raise GeometryError(f"alpha={alpha} outside (1, 2]")
        beta = alpha / (alpha - 1.0)
        assert abs(1.0 / alpha + 1.0 / beta - 1.0) <= 1e-12
        return ClarksonParams(alpha=alpha, beta=beta)


@dataclass(frozen=True)
class ClarksonReport:
    params: ClarksonParams
    samples: int
    seed: int
    violations: int
    worst_margin: float
    witness: tuple | None

    @property
    def passed(self) -> bool:
        return self.violations == 0


def clarkson_check(N: ProductNorm, alpha: float, samples: int = 10_000,
                   seed: int = 0) -> ClarksonReport:
    """Sampled check of |x+y|^b + |x-y|^b <= 2(|x|^a + |y|^a)^(b/a).

    Deterministic unit-coordinate pairs are prepended to the random batch
    so the classical counterexamples are always probed.
    """
    params = ClarksonParams.from_alpha(alpha)
    a, b = params.alpha, params.beta
    rng = np.random.default_rng(seed)
    n, d = N.n, N.base.d

    canon_x, canon_y = [], []
    for x0, y0 in _canonical_starts(n, d):
        canon_x.append(x0)
        canon_y.append(y0)
    X = np.concatenate([np.array(canon_x),
                        rng.standard_normal((samples, n, d))])
    Y = np.concatenate([np.array(canon_y),
                        rng.standard_normal((samples, n, d))])

    nx = N.eval_many(X)
    ny = N.eval_many(Y)
    ns = N.eval_many(X + Y)
    nd = N.eval_many(X - Y)
    lhs = ns ** b + nd ** b
    rhs = 2.0 * (nx ** a + ny ** a) ** (b / a)
    margin = lhs - rhs * (1.0 + 1e-9)
    k = int(np.argmax(margin))
    return ClarksonReport(params=params, samples=len(X), seed=seed,
                          violations=int(np.sum(margin > 0)),
                          worst_margin=float(margin[k]),
                          witness=(tuple(X[k].ravel()), tuple(Y[k].ravel())))


def primal_dual_experiment(psi: PsiFunction, base: BaseNorm, K: int | None = None,
                           budget: int = 20_000, restarts: int = 8,
                           seed: int = 0) -> dict:
    """Estimate the constant for a norm and for its dual norm side by side.

    Whether the two agree beyond two blocks is an open question; results
    are reported as observations, not conclusions.
    """
    require_certified(psi, K)
    K = K or default_resolution(psi.n)
    star = dual_psi(psi, K).psi_star
    certify(star, K)
    primal = nj_estimate(ProductNorm(psi, base), budget, restarts, seed)
    dual = nj_estimate(ProductNorm(star, base.dual()), budget, restarts, seed)
    return {
        "primal": primal,
        "dual": dual,
        "gap": abs(primal.estimate - dual.estimate),
        "note": "observational only; agreement beyond two blocks is unresolved",
    }
