"""Base p-norms, block vectors, and the generator-built product norm.

The product norm of a nonzero block vector is the sum of the block norms
scaled by the generator evaluated at the normalized block-norm profile;
the zero vector maps to 0 without touching the generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .generators import GeneratorError, PsiFunction, require_certified
from .simplex import SimplexPoint, make_point


class DimensionMismatch(ValueError):
    """Vector shape does not match the declared dimensions."""


def dual_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class BaseNorm:
    """The p-norm on R^d."""

    p: float
    d: int

    def __post_init__(self):
        if self.p != math.inf and self.p < 1:
            raise DimensionMismatch(f"exponent p={self.p} below 1")
        if self.d < 1:
            raise DimensionMismatch(f"dimension d={self.d} below 1")

    @property
    def q(self) -> float:
        return dual_exponent(self.p)

    @property
    def strictly_convex(self) -> bool:
        return 1 < self.p < math.inf

    def eval(self, v) -> float:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.d,):
            raise DimensionMismatch(f"vector shape {v.shape}, expected ({self.d},)")
        return float(self.eval_many(v[None, :])[0])

    def eval_many(self, V: np.ndarray) -> np.ndarray:
        """Norms of the rows of ``V`` (shape (m, d))."""
        V = np.asarray(V, dtype=float)
        if self.p == math.inf:
            return np.abs(V).max(axis=-1)
        if self.p == 1:
            return np.abs(V).sum(axis=-1)
        if self.p == 2:
            return np.sqrt((V * V).sum(axis=-1))
        return (np.abs(V) ** self.p).sum(axis=-1) ** (1.0 / self.p)

    def dual(self) -> "BaseNorm":
        return BaseNorm(self.q, self.d)


def base_eval(base: BaseNorm, v) -> float:
    return base.eval(v)


@dataclass(frozen=True)
class BlockVector:
    """n blocks of d coordinates; also carries dual vectors."""

    blocks: tuple  # tuple of tuples, shape (n, d)

    @staticmethod
    def from_array(a) -> "BlockVector":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise DimensionMismatch(f"expected a (n, d) array, got shape {a.shape}")
        return BlockVector(tuple(tuple(float(v) for v in row) for row in a))

    @staticmethod
    def from_flat(flat, n: int, d: int) -> "BlockVector":
        a = np.asarray(flat, dtype=float)
        if a.size != n * d:
            raise DimensionMismatch(f"flat length {a.size} != n*d = {n * d}")
        return BlockVector.from_array(a.reshape(n, d))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.blocks, dtype=float)

    def flat(self) -> np.ndarray:
        return self.as_array().ravel()

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def d(self) -> int:
        return len(self.blocks[0])


def pairing(xstar: BlockVector, x: BlockVector) -> float:
    """Standard coordinate pairing: sum of blockwise dot products."""
    return float(np.sum(xstar.as_array() * x.as_array()))


class ProductNorm:
    """Sign-symmetric norm on (R^d)^n built from a certified generator."""

    def __init__(self, psi: PsiFunction, base: BaseNorm, require_certificate: bool = True):
        if require_certificate:
            require_certified(psi)
        self.psi = psi
        self.base = base
        self.n = psi.n

    def block_norms(self, x: BlockVector) -> np.ndarray:
        a = x.as_array()
        if a.shape != (self.n, self.base.d):
            raise DimensionMismatch(
                f"block vector shape {a.shape}, expected ({self.n}, {self.base.d})"
            )
        return self.base.eval_many(a)

    def __call__(self, x: BlockVector) -> float:
        return float(self.eval_many(x.as_array()[None, :, :])[0])

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """Norms of a batch of block vectors (shape (m, n, d))."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 3 or X.shape[1] != self.n or X.shape[2] != self.base.d:
            raise DimensionMismatch(
                f"batch shape {X.shape}, expected (m, {self.n}, {self.base.d})"
            )
        W = self.base.eval_many(X)  # (m, n)
        s = W.sum(axis=1)
        out = np.zeros(X.shape[0])
        nz = s > 0
        if np.any(nz):
            profile = W[nz] / s[nz, None]
            out[nz] = s[nz] * self.psi.eval_many(profile)
        return out

    def eval_real(self, nu) -> float:
        """The norm applied to a real vector (d = 1 block layout)."""
        nu = np.asarray(nu, dtype=float)
        if nu.shape != (self.n,):
            raise DimensionMismatch(f"real vector shape {nu.shape}, expected ({self.n},)")
        s = float(np.abs(nu).sum())
        if s == 0.0:
            return 0.0
        return s * float(self.psi.eval_many((np.abs(nu) / s)[None, :])[0])

    def describe(self) -> str:
        return f"psi[{self.psi.describe()}] over l{self.base.p:g}^{self.base.d} x{self.n}"


def norm_eval(N: ProductNorm, x: BlockVector) -> float:
    return N(x)


def real_norm(psi: PsiFunction, nu) -> float:
    """Generator norm on R^n (absolute values as block norms)."""
    nu = np.asarray(nu, dtype=float)
    s = float(np.abs(nu).sum())
    if s == 0.0:
        return 0.0
    return s * float(psi.eval_many((np.abs(nu) / s)[None, :])[0])


@dataclass(frozen=True)
class AxiomReport:
    samples: int
    seed: int
    homogeneity_worst: float
    triangle_worst: float
    sign_symmetry_worst: float
    single_block_worst: float
    witness: tuple | None

    @property
    def passed(self) -> bool:
        return (
            self.homogeneity_worst <= 1e-10
            and self.triangle_worst <= 1e-10
            and self.sign_symmetry_worst <= 1e-12
            and self.single_block_worst <= 1e-12
        )


def _sign_patterns(n: int) -> np.ndarray:
    patterns = np.array(
        [[1.0 if (k >> i) & 1 == 0 else -1.0 for i in range(n)] for k in range(2 ** n)]
    )
    return patterns


def axiom_suite(N: ProductNorm, samples: int = 1000, seed: int = 0) -> AxiomReport:
    """Sampled verification of homogeneity, the triangle inequality,
    sign symmetry, and the single-block compatibility identity."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    n, d = N.n, N.base.d
    X = rng.standard_normal((samples, n, d))
    Y = rng.standard_normal((samples, n, d))
    lam = rng.uniform(-3.0, 3.0, size=samples)
    nx = N.eval_many(X)
    ny = N.eval_many(Y)

    # absolute homogeneity, relative
    nlx = N.eval_many(lam[:, None, None] * X)
    hom = np.abs(nlx - np.abs(lam) * nx) / np.maximum(nx, 1e-300)
    hom_worst = float(hom.max())

    # triangle inequality, relative
    nxy = N.eval_many(X + Y)
    tri = (nxy - nx - ny) / np.maximum(nx + ny, 1e-300)
    tri_worst = float(tri.max())

    # sign symmetry under every block sign pattern
    sign_worst = 0.0
    for sigma in _sign_patterns(n):
        ns = N.eval_many(X * sigma[None, :, None])
        sign_worst = max(sign_worst, float(np.abs(ns - nx).max() / max(nx.max(), 1e-300)))

    # single-block value equals the base norm
    single_worst = 0.0
    V = rng.standard_normal((min(samples, 200), d))
    for i in range(n):
        E = np.zeros((V.shape[0], n, d))
        E[:, i, :] = V
        nv = N.eval_many(E)
        bv = N.base.eval_many(V)
        single_worst = max(
            single_worst, float(np.abs(nv - bv).max() / max(float(bv.max()), 1e-300))
        )

    k = int(np.argmax(tri))
    return AxiomReport(
        samples=samples,
        seed=seed,
        homogeneity_worst=hom_worst,
        triangle_worst=tri_worst,
        sign_symmetry_worst=sign_worst,
        single_block_worst=single_worst,
        witness=(tuple(X[k].ravel()), tuple(Y[k].ravel())),
    )


@dataclass(frozen=True)
class SandwichReport:
    chain: tuple  # (max-norm, product norm, sum-norm, n * max-norm)
    monotone_worst: float

    @property
    def passed(self) -> bool:
        lo, v, hi, cap = self.chain
        slack = 1e-10 * max(1.0, cap)
        return lo <= v + slack and v <= hi + slack and hi <= cap + slack and self.monotone_worst <= slack


def sandwich_check(N: ProductNorm, x: BlockVector) -> SandwichReport:
    """Max/sum-norm sandwich plus the zero-a-block monotonicity chain."""
    w = N.block_norms(x)
    v = N(x)
    lo, hi = float(w.max()), float(w.sum())
    a = x.as_array()
    monotone_worst = -math.inf
    # zeroing any single block must not increase the norm
    for i in range(N.n):
        b = a.copy()
        b[i] = 0.0
        monotone_worst = max(monotone_worst, float(N.eval_many(b[None])[0]) - v)
    # prefix chain: progressively zeroing trailing blocks is nonincreasing
    prev = v
    for i in range(N.n - 1, 0, -1):
        b = a.copy()
        b[i:] = 0.0
        cur = float(N.eval_many(b[None])[0])
        monotone_worst = max(monotone_worst, cur - prev)
        prev = cur
    return SandwichReport(chain=(lo, v, hi, N.n * lo), monotone_worst=monotone_worst)


def psi_recovery(N: ProductNorm, s: SimplexPoint, units) -> float:
    """Norm of the block vector with the i-th unit direction scaled by s_i;
    must reproduce the generator value at s."""
    units = [np.asarray(u, dtype=float) for u in units]
    if len(units) != N.n:
        raise DimensionMismatch(f"need {N.n} unit vectors, got {len(units)}")
    for u in units:
        if abs(N.base.eval(u) - 1.0) > 1e-12:
            raise DimensionMismatch(f"vector {u} is not base-unit (norm {N.base.eval(u)!r})")
    x = np.array([si * u for si, u in zip(s.coords, units)])
    return float(N.eval_many(x[None])[0])
