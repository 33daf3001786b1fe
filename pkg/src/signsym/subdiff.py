"""Subgradients of base norms, of generators on the simplex, and of the
product norm at real and block vectors.

Generator subgradients are taken relative to the simplex: the supporting
inequality is only required against other simplex points.  Ambient
representatives are therefore non-unique; any representative passing the
grid verification sweep is accepted.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .generators import PNormGenerator, PsiFunction, require_certified
from .norms import BaseNorm, BlockVector, ProductNorm, pairing, real_norm
from .simplex import SimplexGrid, SimplexPoint, default_resolution, make_point

FD_STEP = 1e-6
GRID_INEQ_TOL = 1e-7
GAMMA_TOL = 1e-12
PAIRING_TOL = 1e-9
MAX_SIGN_ENUM_ZEROS = 10


class SubdifferentialError(ValueError):
    """Subgradient construction or verification failed."""


@dataclass(frozen=True)
class SetDescription:
    """Shape of a subdifferential set: a kind tag plus free-form detail."""

    kind: str  # 'singleton' | 'interval-product' | 'convex-hull' | 'dual-unit-ball'
    detail: str


def base_subgradient(base: BaseNorm, v) -> tuple:
    """One subgradient of the base norm at ``v`` plus a set description.

    For 1 < p < inf the subgradient is unique away from 0.  For p = 1 the
    canonical element puts 0 at zero coordinates; for p = inf it supports
    the lowest-index maximal coordinate.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (base.d,):
        raise SubdifferentialError(f"vector shape {v.shape}, expected ({base.d},)")
    if float(np.abs(v).max()) == 0.0:
        return np.zeros(base.d), SetDescription("dual-unit-ball", "closed unit ball of the dual norm")
    if base.p == 1:
        elem = np.sign(v)
        zeros = [i for i in range(base.d) if v[i] == 0.0]
        if zeros:
            desc = SetDescription(
                "interval-product",
                "sign(v_i) at nonzero coordinates, [-1, 1] at coordinates "
                + ",".join(map(str, zeros)),
            )
        else:
            desc = SetDescription("singleton", "coordinate signs")
        return elem, desc
    if base.p == math.inf:
        a = np.abs(v)
        peak = float(a.max())
        argmaxes = [i for i in range(base.d) if a[i] >= peak * (1 - 1e-15)]
        elem = np.zeros(base.d)
        elem[argmaxes[0]] = math.copysign(1.0, v[argmaxes[0]])
        if len(argmaxes) > 1:
            desc = SetDescription(
                "convex-hull",
                "hull of sign(v_i) e_i over maximal coordinates " + ",".join(map(str, argmaxes)),
            )
        else:
            desc = SetDescription("singleton", "signed unit coordinate at the unique maximum")
        return elem, desc
    nrm = base.eval(v)
    elem = np.sign(v) * np.abs(v) ** (base.p - 1.0) / nrm ** (base.p - 1.0)
    return elem, SetDescription("singleton", "smooth p-norm gradient")


def base_subdiff_extremes(base: BaseNorm, v) -> list:
    """Extreme points of the base-norm subdifferential at ``v`` (capped)."""
    v = np.asarray(v, dtype=float)
    canonical, desc = base_subgradient(base, v)
    if desc.kind == "singleton":
        return [canonical]
    if desc.kind == "dual-unit-ball":
        return [canonical]
    if base.p == 1:
        zeros = [i for i in range(base.d) if v[i] == 0.0]
        out = []
        for signs in itertools.product((-1.0, 1.0), repeat=min(len(zeros), MAX_SIGN_ENUM_ZEROS)):
            e = np.sign(v)
            for i, s in zip(zeros, signs):
                e[i] = s
            out.append(e)
        return out
    # p = inf with tied maxima
    a = np.abs(v)
    peak = float(a.max())
    out = []
    for i in range(base.d):
        if a[i] >= peak * (1 - 1e-15):
            e = np.zeros(base.d)
            e[i] = math.copysign(1.0, v[i])
            out.append(e)
    return out


@dataclass(frozen=True)
class PsiSubgradient:
    """A verified generator subgradient: ambient representative mu, the
    point, and the induced vertex weights gamma_i = psi(t) + <mu, e_i - t>."""

    mu: tuple
    at: SimplexPoint
    gamma: tuple
    grid_resolution: int
    worst_slack: float


def _gamma_from_mu(psi_val: float, mu: np.ndarray, t: np.ndarray) -> np.ndarray:
    return psi_val + mu - float(mu @ t)


def _grid_verify(psi: PsiFunction, t: np.ndarray, mu: np.ndarray, K: int) -> float:
    """Smallest slack of psi(t') - psi(t) - <mu, t' - t> over the grid."""
    grid = SimplexGrid(psi.n, K)
    T = grid.points_array
    slack = psi.eval_many(T) - float(psi.eval_many(t[None])[0]) - (T - t) @ mu
    return float(slack.min())


def _fallback_mu(psi: PsiFunction, t: np.ndarray, K: int) -> np.ndarray:
    """Supporting hyperplane from the grid-restricted inequality system:
    maximize the minimal slack of <mu, t' - t> <= psi(t') - psi(t) with
    the last ambient coordinate pinned to 0."""
    grid = SimplexGrid(psi.n, K)
    T = grid.points_array
    rhs = psi.eval_many(T) - float(psi.eval_many(t[None])[0])
    D = T - t  # (G, n)
    n = psi.n
    # variables: mu_1 .. mu_{n-1}, eps ; maximize eps
    A = np.hstack([D[:, : n - 1] - D[:, [n - 1]] * 0.0, np.ones((len(T), 1))])
    A[:, : n - 1] = D[:, : n - 1]
    c = np.zeros(n)
    c[-1] = -1.0
    res = linprog(c, A_ub=A, b_ub=rhs, bounds=[(None, None)] * n, method="highs")
    if not res.success:
        raise SubdifferentialError("supporting-hyperplane system infeasible")
    mu = np.zeros(n)
    mu[: n - 1] = res.x[: n - 1]
    return mu


def psi_subgradient(psi: PsiFunction, t: SimplexPoint, K: int | None = None,
                    fallback: bool = True) -> PsiSubgradient:
    """A subgradient of the generator at ``t``, relative to the simplex.

    Builtin members use analytic gradients at interior points; everything
    else uses central finite differences along the tangent directions
    e_i - e_n, verified against all grid points, with a supporting
    hyperplane solve as the nonsmooth fallback.
    """
    require_certified(psi, K)
    K = K or default_resolution(psi.n)
    ta = t.as_array()
    n = psi.n
    psi_val = float(psi.eval_many(ta[None])[0])
    mu = None
    if isinstance(psi, PNormGenerator):
        if psi.p == 1:
            mu = np.ones(n)
        elif psi.p == math.inf:
            peak = float(ta.max())
            ties = np.flatnonzero(ta >= peak * (1 - 1e-12))
            if len(ties) == 1:
                mu = np.zeros(n)
                mu[ties[0]] = 1.0
        else:
            # valid on the boundary too: zero coordinates contribute 0
            mu = ta ** (psi.p - 1.0) / psi_val ** (psi.p - 1.0)
    if mu is None:
        mu = np.zeros(n)
        h = FD_STEP
        if ta[n - 1] >= h and np.all(ta[: n - 1] + h <= 1.0):
            for i in range(n - 1):
                d = np.zeros(n)
                d[i], d[n - 1] = h, -h
                up = np.clip(ta + d, 0.0, None)
                dn = np.clip(ta - d, 0.0, None)
                vals = psi.eval_many(np.vstack([up / up.sum(), dn / dn.sum()]))
                mu[i] = float(vals[0] - vals[1]) / (2 * h)
        slack = _grid_verify(psi, ta, mu, K)
        if slack < -GRID_INEQ_TOL:
            if not fallback:
                raise SubdifferentialError(
                    f"finite-difference candidate violates the grid inequality "
                    f"(slack {slack:.3e}); nonsmooth point"
                )
            mu = _fallback_mu(psi, ta, K)
    slack = _grid_verify(psi, ta, mu, K)
    if slack < -GRID_INEQ_TOL:
        raise SubdifferentialError(f"subgradient verification failed (slack {slack:.3e})")
    gamma = _gamma_from_mu(psi_val, mu, ta)
    return PsiSubgradient(mu=tuple(mu), at=t, gamma=tuple(gamma),
                          grid_resolution=K, worst_slack=slack)


def psi_subdiff_extremes(psi: PsiFunction, t: SimplexPoint, K: int | None = None) -> list:
    """Extreme generator subgradients at ``t`` (ambient representatives).

    Builtin constant and max members have known extreme sets; everything
    else returns the single verified representative.
    """
    ta = t.as_array()
    n = psi.n
    if isinstance(psi, PNormGenerator):
        if psi.p == 1:
            zeros = np.flatnonzero(ta == 0.0)
            out = []
            for bits in itertools.product((0.0, 1.0), repeat=min(len(zeros), MAX_SIGN_ENUM_ZEROS)):
                mu = np.ones(n)
                for i, b in zip(zeros, bits):
                    mu[i] = b
                out.append(mu)
            return out
        if psi.p == math.inf:
            peak = float(ta.max())
            ties = np.flatnonzero(ta >= peak * (1 - 1e-12))
            out = []
            for i in ties:
                mu = np.zeros(n)
                mu[i] = 1.0
                out.append(mu)
            return out
    return [np.asarray(psi_subgradient(psi, t, K).mu)]


@dataclass(frozen=True)
class RealSubdiffResult:
    """Subdifferential of the generator norm on R^n at a unit vector."""

    at: tuple
    canonical: tuple
    elements: tuple  # tuple of tuples
    description: SetDescription
    gamma_rejections: int


def norm_subdiff_real(psi: PsiFunction, nu, K: int | None = None) -> RealSubdiffResult:
    """Subgradients of the generator norm at a real unit vector.

    Builds t from the absolute-value profile, obtains generator
    subgradients, converts them to vertex weights gamma, filters
    gamma_i >= 0, and applies coordinate signs (both signs enumerated at
    zero coordinates, canonical choice 0 there).
    """
    nu = np.asarray(nu, dtype=float)
    if nu.shape != (psi.n,):
        raise SubdifferentialError(f"vector shape {nu.shape}, expected ({psi.n},)")
    val = real_norm(psi, nu)
    if abs(val - 1.0) > PAIRING_TOL:
        raise SubdifferentialError(f"input not normalized: norm {val!r}")
    s = float(np.abs(nu).sum())
    t = make_point(np.abs(nu) / s)
    ta = t.as_array()
    psi_val = float(psi.eval_many(ta[None])[0])

    mus = psi_subdiff_extremes(psi, t, K)
    gammas = []
    rejections = 0
    for mu in mus:
        g = _gamma_from_mu(psi_val, mu, ta)
        if np.any(g < -GAMMA_TOL):
            rejections += 1
            continue
        gammas.append(np.clip(g, 0.0, None))
    if not gammas:
        raise SubdifferentialError("every candidate produced a negative vertex weight")

    zeros = np.flatnonzero(nu == 0.0)
    base_tau = np.sign(nu)
    canonical = base_tau * gammas[0]

    elements = []
    sign_choices = itertools.product((-1.0, 1.0), repeat=min(len(zeros), MAX_SIGN_ENUM_ZEROS))
    sign_choices = list(sign_choices)
    for g in gammas:
        for signs in sign_choices:
            tau = base_tau.copy()
            for i, sg in zip(zeros, signs):
                tau[i] = sg
            elements.append(tau * g)
    elements.append(canonical)

    kept = []
    seen = set()
    for e in elements:
        err = abs(float(e @ nu) - 1.0)
        if err > PAIRING_TOL:
            raise SubdifferentialError(f"pairing equality off by {err:.3e}")
        key = tuple(np.round(e, 12))
        if key not in seen:
            seen.add(key)
            kept.append(tuple(float(v) for v in e))

    if len(kept) == 1:
        desc = SetDescription("singleton", "unique subgradient (smooth point)")
    elif len(zeros) and len(gammas) == 1:
        desc = SetDescription(
            "interval-product",
            "fixed at nonzero coordinates, symmetric interval at zero coordinates "
            + ",".join(map(str, zeros.tolist())),
        )
    else:
        desc = SetDescription("convex-hull", f"hull of {len(kept)} extreme elements")
    return RealSubdiffResult(at=tuple(nu), canonical=tuple(float(v) for v in canonical),
                             elements=tuple(kept), description=desc,
                             gamma_rejections=rejections)


@dataclass(frozen=True)
class BlockSubdiffResult:
    """Subgradients of the product norm at a block unit vector."""

    at: BlockVector
    canonical: BlockVector
    elements: tuple  # tuple of BlockVector
    pairing_worst: float
    dual_norm_worst: float
    dual_norm_tolerance: float


def norm_subdiff_block(N: ProductNorm, x: BlockVector, K: int | None = None,
                       check_dual_norm: bool = True) -> BlockSubdiffResult:
    """Subgradients of the product norm at a unit block vector: scale a
    base-norm subgradient of each block by the corresponding real-vector
    weight."""
    val = N(x)
    if abs(val - 1.0) > PAIRING_TOL:
        raise SubdifferentialError(f"input not normalized: norm {val!r}")
    K = K or default_resolution(N.n)
    a = x.as_array()
    w = N.block_norms(x)
    real = norm_subdiff_real(N.psi, w, K)

    block_elems = []
    block_canon = []
    for i in range(N.n):
        extremes = base_subdiff_extremes(N.base, a[i])
        canon, _ = base_subgradient(N.base, a[i])
        block_elems.append(extremes)
        block_canon.append(canon)

    canonical = BlockVector.from_array(
        np.array([xi * bc for xi, bc in zip(real.canonical, block_canon)])
    )
    elements = [canonical]
    for xi in real.elements[: 2 ** MAX_SIGN_ENUM_ZEROS]:
        for combo in itertools.islice(itertools.product(*block_elems), 2 ** MAX_SIGN_ENUM_ZEROS):
            elements.append(BlockVector.from_array(
                np.array([x_i * b for x_i, b in zip(xi, combo)])
            ))

    seen = set()
    kept = []
    for e in elements:
        key = tuple(np.round(e.flat(), 12))
        if key not in seen:
            seen.add(key)
            kept.append(e)

    pairing_worst = max(abs(pairing(e, x) - 1.0) for e in kept)
    if pairing_worst > PAIRING_TOL:
        raise SubdifferentialError(f"pairing equality off by {pairing_worst:.3e}")

    dn_tol = 5.0 * max(N.n / K, 1e-9)
    dn_worst = 0.0
    if check_dual_norm:
        from .duality import dual_norm_eval

        for e in kept:
            dn_worst = max(dn_worst, abs(dual_norm_eval(N, e, K) - 1.0))
        if dn_worst > dn_tol:
            raise SubdifferentialError(
                f"dual norm of an element off by {dn_worst:.3e} (tol {dn_tol:.3e})"
            )
    return BlockSubdiffResult(at=x, canonical=canonical, elements=tuple(kept),
                              pairing_worst=pairing_worst, dual_norm_worst=dn_worst,
                              dual_norm_tolerance=dn_tol)


@dataclass(frozen=True)
class InequalityReport:
    samples: int
    seed: int
    violations: int
    worst_margin: float
    witness: tuple | None

    @property
    def passed(self) -> bool:
        return self.violations == 0


def subgradient_inequality_verify(norm_many, point, element, samples: int = 10_000,
                                  seed: int = 0) -> InequalityReport:
    """Sampled check of norm(y) >= norm(point) + <element, y - point>.

    ``norm_many`` maps a batch of flattened points to norm values; the
    tolerance scales with 1 + norm(y).
    """
    point = np.asarray(point, dtype=float).ravel()
    element = np.asarray(element, dtype=float).ravel()
    rng = np.random.default_rng(seed)
    scales = 10.0 ** rng.uniform(-2, 2, size=samples)
    Y = rng.standard_normal((samples, point.size)) * scales[:, None]
    Y[0] = point
    ny = norm_many(Y)
    npnt = float(norm_many(point[None])[0])
    margin = npnt + (Y - point) @ element - ny - 1e-8 * (1.0 + ny)
    k = int(np.argmax(margin))
    return InequalityReport(samples=samples, seed=seed,
                            violations=int(np.sum(margin > 0)),
                            worst_margin=float(margin[k]),
                            witness=tuple(Y[k]))


def real_norm_many(psi: PsiFunction):
    """Batch evaluator of the generator norm on R^n, for verification."""

    def norm_many(Y: np.ndarray) -> np.ndarray:
        A = np.abs(np.asarray(Y, dtype=float))
        s = A.sum(axis=1)
        out = np.zeros(len(A))
        nz = s > 0
        if np.any(nz):
            out[nz] = s[nz] * psi.eval_many(A[nz] / s[nz, None])
        return out

    return norm_many


def block_norm_many(N: ProductNorm):
    """Batch evaluator of the product norm on flattened block vectors."""

    def norm_many(Y: np.ndarray) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        return N.eval_many(Y.reshape(len(Y), N.n, N.base.d))

    return norm_many


def alignment_check(psi: PsiFunction, tbar: SimplexPoint, sbar, dual_result,
                    samples: int = 2000, seed: int = 0) -> bool:
    """Pairing equality <t, s> = psi(t) psi*(s); when it holds, the dual
    normalization of s must be a subgradient of the generator norm at t."""
    ta = tbar.as_array()
    sa = np.asarray(sbar, dtype=float)
    psi_val = float(psi.eval_many(ta[None])[0])
    star_val = float(dual_result.psi_star.eval_many((sa / sa.sum())[None])[0]) * float(sa.sum())
    tol = 5.0 * max(psi.n / dual_result.resolution, 1e-9)
    if abs(float(ta @ sa) - psi_val * star_val) > tol * max(1.0, psi_val * star_val):
        return False
    xi = sa / star_val
    rep = subgradient_inequality_verify(real_norm_many(psi), ta / real_norm(psi, ta),
                                        xi, samples=samples, seed=seed)
    if not rep.passed:
        raise SubdifferentialError(
            f"aligned dual vector fails the subgradient inequality "
            f"(worst margin {rep.worst_margin:.3e})"
        )
    return True
