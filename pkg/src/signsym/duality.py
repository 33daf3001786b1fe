"""Dual generators, dual norms, comparison constants, and duality checks.

Maximizations over the simplex use an exhaustive grid scan followed by
deterministic coordinate-pair transfer refinement (move mass between two
coordinates, halving the step from 1/K).  Argmax ties break toward the
lowest lexicographic grid index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .generators import (
    GeneratorError,
    PNormGenerator,
    PsiFunction,
    TabulatedGenerator,
    certify,
    psi_p,
    require_certified,
)
from .norms import BlockVector, ProductNorm, real_norm
from .simplex import SimplexGrid, SimplexPoint, default_resolution, make_point

REFINE_HALVINGS = 40


def _transfer_moves(n: int) -> np.ndarray:
    """Mass-conserving search directions: all coordinate-pair transfers
    e_i - e_j, plus transfers between one coordinate and all others
    equally (needed to escape ridges of piecewise objectives where two
    coordinates are tied)."""
    moves = []
    for i in range(n):
        for j in range(n):
            if i != j:
                m = np.zeros(n)
                m[i], m[j] = 1.0, -1.0
                moves.append(m)
    for i in range(n):
        m = np.full(n, -1.0 / (n - 1))
        m[i] = 1.0
        moves.append(m)
        moves.append(-m)
    return np.array(moves)


def _refine_simplex_max(objective, t0: np.ndarray, step0: float,
                        halvings: int = REFINE_HALVINGS, maximize: bool = True):
    """Coordinate-pair hill climbing on the simplex.

    ``objective`` maps a batch of simplex points (m, n) to values (m,).
    Transfers ``delta`` between coordinate pairs, exhausting improving
    moves at each step size before halving.  Deterministic for a fixed
    start point.
    """
    sgn = 1.0 if maximize else -1.0
    t = t0.copy()
    best = sgn * float(objective(t[None, :])[0])
    moves = _transfer_moves(t.size)
    delta = step0
    for _ in range(halvings):
        while True:
            cand = t[None, :] + delta * moves
            feas = np.all(cand >= 0.0, axis=1)
            if not feas.any():
                break
            vals = np.full(len(moves), -np.inf)
            vals[feas] = sgn * objective(cand[feas])
            k = int(np.argmax(vals))
            if vals[k] > best + 1e-16:
                best, t = float(vals[k]), cand[k]
            else:
                break
        delta *= 0.5
    return t, sgn * best


@dataclass
class DualPsiResult:
    """Dual generator: numeric grid table plus, for the builtin family,
    the attached closed form."""

    psi_star: TabulatedGenerator
    grid: SimplexGrid
    table_values: np.ndarray
    resolution: int
    refine_iterations: int

    def export_rows(self):
        """(t_1, ..., t_n, value) rows in grid order."""
        for t, v in zip(self.grid.points_array, self.table_values):
            yield tuple(t) + (float(v),)


def _pairing_objective(psi: PsiFunction, w: np.ndarray):
    """Batch objective t -> <t, w> / psi(t), renormalizing off-sum inputs."""

    def obj(Tc: np.ndarray) -> np.ndarray:
        s = Tc.sum(axis=1)
        out = np.zeros(len(Tc))
        nz = s > 0
        if np.any(nz):
            TT = Tc[nz] / s[nz, None]
            out[nz] = (TT @ w) / psi.eval_many(TT)
        return out

    return obj


def closed_form_dual(psi: PsiFunction) -> PsiFunction | None:
    """Dual of the builtin p-family: p=1 <-> max, p=inf <-> constant 1,
    otherwise the conjugate exponent member."""
    if not isinstance(psi, PNormGenerator):
        return None
    if psi.p == 1:
        return psi_p(math.inf, psi.n)
    if psi.p == math.inf:
        return psi_p(1, psi.n)
    return psi_p(psi.p / (psi.p - 1.0), psi.n)


def dual_psi(psi: PsiFunction, K: int | None = None,
             refine: int = REFINE_HALVINGS) -> DualPsiResult:
    """Tabulate max over the simplex of <t, s>/psi(t) for grid points s."""
    require_certified(psi, K)
    if K is None:
        K = default_resolution(psi.n)
    grid = SimplexGrid(psi.n, K)
    T = grid.points_array
    vals = psi.eval_many(T)
    ratios = T @ T.T / vals[:, None]  # ratios[t_index, s_index]
    best_idx = np.argmax(ratios, axis=0)
    table = np.empty(len(grid))
    for k in range(len(grid)):
        obj = _pairing_objective(psi, T[k])
        _, table[k] = _refine_simplex_max(obj, T[best_idx[k]].copy(), 1.0 / K, refine)
    star = TabulatedGenerator(grid, table, closed_form=closed_form_dual(psi))
    return DualPsiResult(psi_star=star, grid=grid, table_values=table,
                         resolution=K, refine_iterations=refine)


def _weighted_max(psi: PsiFunction, w: np.ndarray, K: int, refine: int) -> float:
    """max over the simplex of <t, w>/psi(t) for a fixed weight vector."""
    if float(np.max(np.abs(w))) == 0.0:
        return 0.0
    grid = SimplexGrid(psi.n, K)
    T = grid.points_array
    vals = psi.eval_many(T)
    scores = (T @ w) / vals
    k0 = int(np.argmax(scores))
    _, val = _refine_simplex_max(_pairing_objective(psi, w), T[k0].copy(), 1.0 / K, refine)
    return val


def dual_norm_eval(N: ProductNorm, xstar: BlockVector, K: int | None = None,
                   refine: int = REFINE_HALVINGS) -> float:
    """Dual product norm: blockwise dual base norms fed through the dual
    generator, computed as a weighted maximization against the primal
    generator."""
    K = K or default_resolution(N.n)
    w = N.base.dual().eval_many(xstar.as_array())
    return _weighted_max(N.psi, w, K, refine)


def dual_norm_eval_many(N: ProductNorm, Xstar: np.ndarray, K: int | None = None,
                        refine: int = 20) -> np.ndarray:
    """Batch dual norms: vectorized grid scan, per-sample refinement."""
    K = K or default_resolution(N.n)
    W = N.base.dual().eval_many(np.asarray(Xstar, dtype=float))  # (m, n)
    grid = SimplexGrid(N.n, K)
    T = grid.points_array
    vals = N.psi.eval_many(T)
    scores = (W @ T.T) / vals[None, :]  # (m, G)
    best = np.argmax(scores, axis=1)
    out = np.empty(W.shape[0])
    for r in range(W.shape[0]):
        w = W[r]
        if float(np.max(np.abs(w))) == 0.0:
            out[r] = 0.0
            continue
        _, out[r] = _refine_simplex_max(_pairing_objective(N.psi, w),
                                        T[best[r]].copy(), 1.0 / K, refine)
    return out


def real_dual_norm(psi: PsiFunction, xi, K: int | None = None,
                   refine: int = REFINE_HALVINGS) -> float:
    """Dual of the generator norm on R^n evaluated at a real vector."""
    K = K or default_resolution(psi.n)
    w = np.abs(np.asarray(xi, dtype=float))
    return _weighted_max(psi, w, K, refine)


@dataclass(frozen=True)
class ComparisonConstants:
    """Extremal ratios of two generators and of their duals, with the
    witnessing simplex points."""

    m: float
    M: float
    m_star: float
    M_star: float
    argmin: SimplexPoint
    argmax: SimplexPoint
    argmin_star: SimplexPoint
    argmax_star: SimplexPoint
    resolution: int


def _ratio_extrema(f_num, f_den, n: int, K: int, refine: int):
    grid = SimplexGrid(n, K)
    T = grid.points_array
    r = f_num(T) / f_den(T)
    kmin, kmax = int(np.argmin(r)), int(np.argmax(r))

    def obj(Tc):
        s = Tc.sum(axis=1)
        out = np.ones(len(Tc))
        nz = s > 0
        if np.any(nz):
            TT = Tc[nz] / s[nz, None]
            out[nz] = f_num(TT) / f_den(TT)
        return out

    tmin, vmin = _refine_simplex_max(obj, T[kmin].copy(), 1.0 / K, refine, maximize=False)
    tmax, vmax = _refine_simplex_max(obj, T[kmax].copy(), 1.0 / K, refine, maximize=True)
    return vmin, vmax, make_point(tmin), make_point(tmax)


def comparison_constants(psi: PsiFunction, phi: PsiFunction, K: int | None = None,
                         refine: int = REFINE_HALVINGS,
                         dual_results: tuple | None = None) -> ComparisonConstants:
    """min/max of psi/phi over the simplex, and of their duals.

    ``dual_results`` may supply precomputed dual tables (psi*, phi*).
    """
    if psi.n != phi.n:
        raise GeneratorError("generators have mismatched dimensions")
    require_certified(psi, K)
    require_certified(phi, K)
    K = K or default_resolution(psi.n)
    m, M, tmin, tmax = _ratio_extrema(psi.eval_many, phi.eval_many, psi.n, K, refine)
    if dual_results is None:
        dpsi = dual_psi(psi, K, refine)
        dphi = dual_psi(phi, K, refine)
    else:
        dpsi, dphi = dual_results
    ms, Ms, smin, smax = _ratio_extrema(
        dpsi.psi_star.eval_many, dphi.psi_star.eval_many, psi.n, K, refine
    )
    return ComparisonConstants(m=m, M=M, m_star=ms, M_star=Ms,
                               argmin=tmin, argmax=tmax,
                               argmin_star=smin, argmax_star=smax,
                               resolution=K)


@dataclass(frozen=True)
class DualityReport:
    constants: ComparisonConstants
    product_mMstar: float
    product_Mmstar: float
    products_pass: bool
    order_primal: str  # 'ge', 'le', 'none' on the grid
    order_dual: str
    order_pass: bool
    sandwich_worst: float
    sandwich_pass: bool
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.products_pass and self.order_pass and self.sandwich_pass


def _grid_order(a: np.ndarray, b: np.ndarray, tol: float) -> str:
    ge = bool(np.all(a >= b - tol))
    le = bool(np.all(a <= b + tol))
    if ge and le:
        return "eq"
    if ge:
        return "ge"
    if le:
        return "le"
    return "none"


def verify_duality_relations(psi: PsiFunction, phi: PsiFunction, K: int | None = None,
                             samples: int = 200, seed: int = 0, d: int = 2) -> DualityReport:
    """Product identities of the comparison constants, order reversal
    between primal and dual generators, and the norm sandwich."""
    require_certified(psi, K)
    require_certified(phi, K)
    K = K or default_resolution(psi.n)
    n = psi.n
    tol = 5.0 * max(n / K, 1e-9)
    dpsi = dual_psi(psi, K)
    dphi = dual_psi(phi, K)
    cc = comparison_constants(psi, phi, K, dual_results=(dpsi, dphi))

    p1 = cc.m * cc.M_star
    p2 = cc.M * cc.m_star
    products_pass = abs(p1 - 1.0) <= tol and abs(p2 - 1.0) <= tol

    grid = SimplexGrid(n, K)
    T = grid.points_array
    # refined dual tables are accurate to refinement precision, so ordering
    # can be decided at a tight tolerance rather than the grid-scale one
    op = _grid_order(psi.eval_many(T), phi.eval_many(T), 1e-12)
    od = _grid_order(dpsi.psi_star.eval_many(T), dphi.psi_star.eval_many(T), 1e-8)
    # order reversal: psi >= phi forces psi* <= phi* and vice versa
    order_pass = True
    if op == "ge" and od not in ("le", "eq"):
        order_pass = False
    if op == "le" and od not in ("ge", "eq"):
        order_pass = False

    from .norms import BaseNorm  # local import to avoid cycle at module load

    base = BaseNorm(2, d)
    Np = ProductNorm(psi, base)
    Nf = ProductNorm(phi, base)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((samples, n, d))
    vp = Np.eval_many(X)
    vf = Nf.eval_many(X)
    slack = 1e-10
    worst = max(
        float(np.max(cc.m * vf - vp - slack * vf)),
        float(np.max(vp - cc.M * vf - slack * vf)),
    )
    sandwich_pass = worst <= 0.0

    return DualityReport(constants=cc, product_mMstar=p1, product_Mmstar=p2,
                         products_pass=products_pass, order_primal=op, order_dual=od,
                         order_pass=order_pass, sandwich_worst=worst,
                         sandwich_pass=sandwich_pass, tolerance=tol)


@dataclass(frozen=True)
class BidualReport:
    max_deviation: float
    tolerance: float
    witness: tuple

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def bidual_check(psi: PsiFunction, K: int | None = None) -> BidualReport:
    """Apply the dual construction twice and compare with the original on
    the grid."""
    require_certified(psi, K)
    K = K or default_resolution(psi.n)
    d1 = dual_psi(psi, K)
    certify(d1.psi_star, K)
    d2 = dual_psi(d1.psi_star, K)
    T = d2.grid.points_array
    dev = np.abs(d2.table_values - psi.eval_many(T))
    k = int(np.argmax(dev))
    return BidualReport(max_deviation=float(dev[k]),
                        tolerance=4.0 * psi.n / K,
                        witness=tuple(T[k]))


@dataclass(frozen=True)
class HolderReport:
    checked: int
    violations: int
    worst_margin: float
    witness: tuple | None

    @property
    def passed(self) -> bool:
        return self.violations == 0


def holder_check(psi: PsiFunction, dual_result: DualPsiResult, samples: int = 10_000,
                 seed: int = 0) -> HolderReport:
    """Pairing bounded by the product of primal and dual generator values."""
    require_certified(psi)
    rng = np.random.default_rng(seed)
    n = psi.n
    K = dual_result.resolution
    T = rng.dirichlet(np.ones(n), size=samples)
    S = rng.dirichlet(np.ones(n), size=samples)
    lhs = np.sum(T * S, axis=1)
    rhs = psi.eval_many(T) * dual_result.psi_star.eval_many(S)
    # grid-scale slack only for numerically tabulated duals
    slack = rhs * 1e-9 + (0.0 if dual_result.psi_star.closed_form is not None else n / K)
    margin = lhs - rhs - slack
    k = int(np.argmax(margin))
    violations = int(np.sum(margin > 0))
    return HolderReport(checked=samples, violations=violations,
                        worst_margin=float(margin[k]),
                        witness=(tuple(T[k]), tuple(S[k])))
