"""Generator functions on the simplex and their certification.

A generator is a convex continuous function on the standard simplex that
equals 1 at every vertex and does not fall below its rescaled face values.
The builtin family is the p-power mean family; tabulated, convex-combination
and pointwise-max constructions round out the closure properties used by
the rest of the toolkit.

Certification is sampling-based: a passing report means "no violation was
found at resolution K", never a proof over the continuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .simplex import (
    SimplexError,
    SimplexGrid,
    SimplexPoint,
    default_resolution,
    make_point,
    vertex,
)

B1_TOL = 1e-9
B2_TOL = 1e-9
CONVEXITY_TOL = 1e-9
STRICT_GAP = 1e-9
MAX_PAIRS = 100_000
_PAIR_SAMPLE_SEED = 20260823  # certification subsample; fixed for determinism


class GeneratorError(ValueError):
    """Invalid generator construction or mismatched dimensions."""


class UncertifiedGenerator(GeneratorError):
    """Operation requires a generator carrying a passing certificate."""


@dataclass(frozen=True)
class CertificateReport:
    """Result of a grid sweep over the membership conditions.

    Worst margins are signed so that a positive value is a violation; the
    cited witness points let every margin be recomputed independently.
    """

    n: int
    resolution: int
    checked_points: int
    b1_pass: bool
    b1_worst: float
    b2_pass: bool
    b2_worst: float
    b2_witness: tuple | None
    convex_pass: bool
    convex_worst: float
    convex_witness: tuple | None
    strictly_convex_pass: bool
    strict_smallest_gap: float
    strict_witness: tuple | None
    bounds_pass: bool
    bounds_worst: float
    bounds_witness: tuple | None
    pair_count: int

    @property
    def passed(self) -> bool:
        """All non-strict checks (vertex values, face bound, convexity,
        value bounds)."""
        return self.b1_pass and self.b2_pass and self.convex_pass and self.bounds_pass


class PsiFunction:
    """Base class for generator functions on the simplex.

    Immutable apart from the certificate slot, which is attached once by
    :func:`certify`.
    """

    n: int

    def __init__(self, n: int):
        if n < 2:
            raise GeneratorError(f"generator dimension {n} < 2")
        self.n = n
        self.certificate: CertificateReport | None = None

    def eval(self, t: SimplexPoint) -> float:
        if t.n != self.n:
            raise GeneratorError(f"dimension mismatch: point has n={t.n}, generator n={self.n}")
        return float(self.eval_many(t.as_array()[None, :])[0])

    def eval_many(self, T: np.ndarray) -> np.ndarray:
        """Evaluate at each row of ``T`` (shape (m, n))."""
        raise NotImplementedError

    @property
    def certified(self) -> bool:
        return self.certificate is not None and self.certificate.passed

    @property
    def certified_strictly_convex(self) -> bool:
        return self.certified and self.certificate.strictly_convex_pass

    def describe(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<{self.describe()} (n={self.n})>"


class PNormGenerator(PsiFunction):
    """The p-family: (sum t_i^p)^(1/p), with p = inf meaning max t_i.

    Infinity is an explicit case, never a large float.
    """

    def __init__(self, p: float, n: int):
        if p != math.inf and p < 1:
            raise GeneratorError(f"exponent p={p} below 1")
        super().__init__(n)
        self.p = p

    def eval_many(self, T: np.ndarray) -> np.ndarray:
        T = np.asarray(T, dtype=float)
        if self.p == math.inf:
            return T.max(axis=1)
        if self.p == 1:
            return np.ones(T.shape[0])
        return (T ** self.p).sum(axis=1) ** (1.0 / self.p)

    def describe(self) -> str:
        return f"p={self.p}"


class TabulatedGenerator(PsiFunction):
    """Values on a lattice grid, interpolated barycentrically.

    Interpolation uses the standard triangulation of the dilated simplex
    (cells cut out by integer prefix sums); it reproduces the stored values
    exactly on grid nodes and is linear inside each cell.
    """

    def __init__(self, grid: SimplexGrid, values, closed_form: PsiFunction | None = None):
        super().__init__(grid.n)
        values = np.asarray(values, dtype=float)
        if values.shape != (len(grid),):
            raise GeneratorError(
                f"value count {values.shape} does not match grid size {len(grid)}"
            )
        self.grid = grid
        self.values = values
        self.closed_form = closed_form

    def _cell(self, t: np.ndarray):
        """Vertices (lattice tuples) and barycentric weights for ``t``."""
        K = self.grid.K
        x = np.clip(t, 0.0, None) * K
        s = np.cumsum(x)[:-1]  # prefix sums, length n-1
        a = np.floor(s)
        f = s - a
        # snap prefix sums that are integers up to round-off
        snap_hi = f > 1.0 - 1e-9
        a[snap_hi] += 1.0
        f[snap_hi] = 0.0
        f[f < 1e-9] = 0.0
        # ceil order: descending fractional part, ties broken toward the
        # larger position (keeps every intermediate vertex nonnegative)
        order = sorted(range(len(f)), key=lambda i: (-f[i], -i))
        S = a.copy()
        out = []
        w0 = 1.0 - (f[order[0]] if order else 0.0)
        weights = [w0]
        for k, idx in enumerate(order):
            S = S.copy()
            S[idx] += 1.0
            nxt = f[order[k + 1]] if k + 1 < len(order) else 0.0
            weights.append(f[idx] - nxt)
            out.append(S)
        verts = [a] + out
        cells = []
        for S, w in zip(verts, weights):
            if w <= 1e-15:
                continue
            q = np.empty(self.n)
            q[0] = S[0]
            q[1:-1] = np.diff(S)
            q[-1] = K - S[-1]
            cells.append((tuple(int(round(v)) for v in q), w))
        return cells

    def eval_many(self, T: np.ndarray) -> np.ndarray:
        T = np.asarray(T, dtype=float)
        if self.closed_form is not None:
            return self.closed_form.eval_many(T)
        idx = self.grid.index
        out = np.empty(T.shape[0])
        for r, t in enumerate(T):
            acc = 0.0
            for q, w in self._cell(t):
                acc += w * self.values[idx[q]]
            out[r] = acc
        return out

    def table_eval_many(self, T: np.ndarray) -> np.ndarray:
        """Interpolate from the stored table, ignoring any closed form."""
        cf, self.closed_form = self.closed_form, None
        try:
            return self.eval_many(T)
        finally:
            self.closed_form = cf

    def describe(self) -> str:
        base = f"table(K={self.grid.K})"
        if self.closed_form is not None:
            base += f"~{self.closed_form.describe()}"
        return base


class ConvexCombination(PsiFunction):
    def __init__(self, terms, weights):
        terms = list(terms)
        if not terms:
            raise GeneratorError("empty term list")
        n = terms[0].n
        if any(t.n != n for t in terms):
            raise GeneratorError("terms have mismatched dimensions")
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(terms),) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise GeneratorError("weights must be nonnegative and sum to 1")
        super().__init__(n)
        self.terms = tuple(terms)
        self.weights = w

    def eval_many(self, T: np.ndarray) -> np.ndarray:
        return sum(w * term.eval_many(T) for w, term in zip(self.weights, self.terms))

    def describe(self) -> str:
        inner = ";".join(f"{w:g},{t.describe()}" for w, t in zip(self.weights, self.terms))
        return f"mix({inner})"


class PointwiseMax(PsiFunction):
    def __init__(self, terms):
        terms = list(terms)
        if not terms:
            raise GeneratorError("empty term list")
        n = terms[0].n
        if any(t.n != n for t in terms):
            raise GeneratorError("terms have mismatched dimensions")
        super().__init__(n)
        self.terms = tuple(terms)

    def eval_many(self, T: np.ndarray) -> np.ndarray:
        return np.max([term.eval_many(T) for term in self.terms], axis=0)

    def describe(self) -> str:
        return "max(" + ";".join(t.describe() for t in self.terms) + ")"


class FaceRestriction(PsiFunction):
    """Restriction of an n-dimensional generator to the face t_n = 0."""

    def __init__(self, parent: PsiFunction):
        if parent.n < 3:
            raise GeneratorError("cannot restrict below dimension 2")
        super().__init__(parent.n - 1)
        self.parent = parent

    def eval_many(self, T: np.ndarray) -> np.ndarray:
        T = np.asarray(T, dtype=float)
        padded = np.concatenate([T, np.zeros((T.shape[0], 1))], axis=1)
        return self.parent.eval_many(padded)

    def describe(self) -> str:
        return f"face({self.parent.describe()})"


def psi_p(p: float, n: int) -> PNormGenerator:
    return PNormGenerator(p, n)


def eval_psi(psi: PsiFunction, t: SimplexPoint) -> float:
    return psi.eval(t)


def combine(kind: str, terms, weights=None) -> PsiFunction:
    if kind == "convex-combination":
        if weights is None:
            raise GeneratorError("convex-combination requires weights")
        return ConvexCombination(terms, weights)
    if kind == "pointwise-max":
        return PointwiseMax(terms)
    raise GeneratorError(f"unknown combination kind {kind!r}")


def tabulate(psi: PsiFunction, K: int) -> TabulatedGenerator:
    """Sample ``psi`` on the K-grid."""
    grid = SimplexGrid(psi.n, K)
    return TabulatedGenerator(grid, psi.eval_many(grid.points_array))


def restrict_to_face(phi: PsiFunction) -> FaceRestriction:
    return FaceRestriction(phi)


def certify(psi: PsiFunction, K: int, attach: bool = True) -> CertificateReport:
    """Sweep the membership conditions on the K-grid.

    Failures are reported, never raised.  With ``attach`` the report is
    stored on the generator so downstream operations can require it.
    """
    if K < 2:
        raise GeneratorError(f"certification resolution {K} < 2")
    n = psi.n
    grid = SimplexGrid(n, K)
    T = grid.points_array
    vals = psi.eval_many(T)

    # vertex normalization
    V = np.eye(n)
    vvals = psi.eval_many(V)
    b1_worst = float(np.abs(vvals - 1.0).max())
    b1_pass = b1_worst <= B1_TOL

    # face bound on interior-with-respect-to-each-face points
    b2_worst = -math.inf
    b2_witness = None
    for i in range(n):
        mask = T[:, i] < 1.0 - 1e-12
        Ti = T[mask]
        proj = Ti / (1.0 - Ti[:, i])[:, None]
        proj[:, i] = 0.0
        pvals = psi.eval_many(proj)
        margin = (1.0 - Ti[:, i]) * pvals - vals[mask]  # >0 is a violation
        k = int(np.argmax(margin))
        if margin[k] > b2_worst:
            b2_worst = float(margin[k])
            b2_witness = (tuple(Ti[k]), i + 1)
    b2_pass = b2_worst <= B2_TOL

    # midpoint convexity over grid pairs (subsampled past the cap)
    G = len(grid)
    total_pairs = G * (G - 1) // 2
    if total_pairs <= MAX_PAIRS:
        ii, jj = np.triu_indices(G, k=1)
    else:
        rng = np.random.default_rng(_PAIR_SAMPLE_SEED)
        ii = rng.integers(0, G, size=MAX_PAIRS)
        jj = rng.integers(0, G, size=MAX_PAIRS)
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
    mids = 0.5 * (T[ii] + T[jj])
    mvals = psi.eval_many(mids)
    avg = 0.5 * (vals[ii] + vals[jj])
    gap = avg - mvals  # >=0 for convex samples
    k = int(np.argmin(gap))
    convex_worst = float(-gap[k])  # positive is a violation
    convex_witness = (tuple(T[ii[k]]), tuple(T[jj[k]]))
    convex_pass = convex_worst <= CONVEXITY_TOL
    strict_smallest = float(gap.min())
    strict_witness = convex_witness
    strictly_convex_pass = strict_smallest >= STRICT_GAP

    # value bounds: max coordinate <= psi <= 1
    lower_margin = T.max(axis=1) - vals
    upper_margin = vals - (1.0 + B1_TOL)
    worst = np.maximum(lower_margin, upper_margin)
    k = int(np.argmax(worst))
    bounds_worst = float(worst[k])
    bounds_witness = tuple(T[k])
    bounds_pass = bounds_worst <= B1_TOL

    report = CertificateReport(
        n=n,
        resolution=K,
        checked_points=G,
        b1_pass=b1_pass,
        b1_worst=b1_worst,
        b2_pass=b2_pass,
        b2_worst=b2_worst,
        b2_witness=b2_witness,
        convex_pass=convex_pass,
        convex_worst=convex_worst,
        convex_witness=convex_witness,
        strictly_convex_pass=strictly_convex_pass,
        strict_smallest_gap=strict_smallest,
        strict_witness=strict_witness,
        bounds_pass=bounds_pass,
        bounds_worst=bounds_worst,
        bounds_witness=bounds_witness,
        pair_count=len(ii),
    )
    if attach:
        psi.certificate = report
    return report


def require_certified(psi: PsiFunction, K: int | None = None):
    """Certify on demand at the default resolution when no certificate is
    attached; raise if the generator fails."""
    if psi.certificate is None:
        certify(psi, K or default_resolution(psi.n))
    if not psi.certificate.passed:
        raise UncertifiedGenerator(f"{psi!r} fails certification")


@dataclass(frozen=True)
class SweepReport:
    """Outcome of an inequality sweep: worst signed margin (positive =
    violation) plus the witnessing instance."""

    checked: int
    violations: int
    worst_margin: float
    witness: tuple | None

    @property
    def passed(self) -> bool:
        return self.violations == 0


def sample_ratio_pairs(n: int, count: int, seed: int):
    """Instances (t, t', i, gamma) satisfying the proportional-stretch
    relation: t'_j = gamma*t_j off coordinate i, 1-t'_i = gamma*(1-t_i)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        t = rng.dirichlet(np.ones(n))
        i = int(rng.integers(0, n))
        if t[i] < 1e-6 or 1.0 - t[i] < 1e-6:
            continue
        gamma = float(rng.uniform(1.0, 1.0 / (1.0 - t[i])))
        tp = gamma * t
        tp[i] = 1.0 - gamma * (1.0 - t[i])
        if tp[i] < 0:
            continue
        out.append((make_point(t), make_point(tp), i + 1, gamma))
    return out


def ratio_monotonicity_check(psi: PsiFunction, pairs) -> SweepReport:
    """Check the two ratio inequalities on proportional-stretch pairs."""
    tol = 1e-9
    worst = -math.inf
    witness = None
    violations = 0
    for t, tp, i, gamma in pairs:
        i0 = i - 1
        ta, tpa = t.as_array(), tp.as_array()
        # precondition: proportionality within 1e-10
        ref = np.delete(tpa - gamma * ta, i0)
        if np.abs(ref).max() > 1e-10 or abs((1.0 - tpa[i0]) - gamma * (1.0 - ta[i0])) > 1e-10:
            raise GeneratorError(f"pair violates the proportional-stretch precondition: {t}, {tp}")
        ft, ftp = psi.eval(t), psi.eval(tp)
        margins = [ftp / (1.0 - tpa[i0]) - ft / (1.0 - ta[i0])]
        for j in range(psi.n):
            if j == i0 or ta[j] <= 1e-12:
                continue
            margins.append(ftp / tpa[j] - ft / ta[j])
        m = max(margins)
        if m > worst:
            worst, witness = m, (t.coords, tp.coords, i, gamma)
        if m > tol:
            violations += 1
    return SweepReport(checked=len(pairs), violations=violations, worst_margin=worst, witness=witness)


def superadditivity_check(psi: PsiFunction, alpha, beta) -> SweepReport:
    """Scaled-value monotonicity under coordinatewise growth."""
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if a.shape != (psi.n,) or b.shape != (psi.n,):
        raise GeneratorError("alpha/beta length must match generator dimension")
    if np.any(a <= 0) or np.any(a > b + 1e-15):
        raise GeneratorError("need 0 < alpha_i <= beta_i")
    asum, bsum = float(a.sum()), float(b.sum())
    lhs = asum * psi.eval(make_point(a / asum))
    rhs = bsum * psi.eval(make_point(b / bsum))
    margin = lhs - rhs
    violations = int(margin > 1e-9)
    if psi.certified_strictly_convex and np.any(a < b - 1e-12):
        # strictness expected
        if rhs - lhs <= 0:
            violations += 1
            margin = max(margin, lhs - rhs)
    return SweepReport(checked=1, violations=violations, worst_margin=margin,
                       witness=(tuple(a), tuple(b)))
