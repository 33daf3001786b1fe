"""Sampled verification of the seven product-space compatibility
inequalities and of the combined mixed-generator bound.

The (n-1)-block space carries the norm built from the face restriction
of the second generator; the n-block space carries the norm built from
the first.  With a single generator in both roles every inequality holds
with its stated constant; with two different generators the combined
bound applies instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .duality import _ratio_extrema, dual_norm_eval_many
from .generators import GeneratorError, PsiFunction, require_certified, restrict_to_face
from .norms import BaseNorm, ProductNorm
from .simplex import default_resolution

RATIO_SLACK = 1e-10

CLAIMED_KAPPA = {
    "C1": lambda n: n - 1.0,
    "C2": lambda n: 1.0,
    "C3": lambda n: 1.0,
    "C4": lambda n: float(n),
    "C5": lambda n: float(n),
    "C6": lambda n: float(n),
    "C7": lambda n: 1.0,
}


@dataclass(frozen=True)
class CompatRow:
    condition: str
    kappa: float
    worst_ratio: float
    passed: bool
    witness_index: int
    skipped: bool = False


@dataclass(frozen=True)
class CompatReport:
    n: int
    samples: int
    seed: int
    rows: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows if not r.skipped)

    def row(self, condition: str) -> CompatRow:
        for r in self.rows:
            if r.condition == condition:
                return r
        raise KeyError(condition)


def _sample_blocks(rng, samples: int, n: int, d: int, base: BaseNorm) -> np.ndarray:
    """Standard-normal block vectors in three variants: raw, blocks
    normalized to the base unit sphere, and sparse with half the blocks
    zeroed — the last two exercise the tightness cases."""
    third = max(samples // 3, 1)
    raw = rng.standard_normal((third, n, d))
    normed = rng.standard_normal((third, n, d))
    w = base.eval_many(normed)
    normed /= np.where(w > 0, w, 1.0)[:, :, None]
    sparse = rng.standard_normal((samples - 2 * third, n, d))
    mask = rng.random((len(sparse), n)) < 0.5
    sparse[mask] = 0.0
    keep = sparse.reshape(len(sparse), -1).any(axis=1)
    sparse = sparse[keep] if keep.any() else raw[:1]
    return np.concatenate([raw, normed, sparse])


def _worst(ratios: np.ndarray, kappa: float, condition: str) -> CompatRow:
    k = int(np.argmax(ratios))
    worst = float(ratios[k])
    return CompatRow(condition=condition, kappa=kappa, worst_ratio=worst,
                     passed=worst <= kappa * (1.0 + RATIO_SLACK), witness_index=k)


def check_all(psi: PsiFunction, phi: PsiFunction, base: BaseNorm,
              samples: int = 1000, seed: int = 0, K: int | None = None) -> CompatReport:
    """Verify the seven inequalities with their stated constants.

    For two blocks the conditions involving the smaller product space are
    reported as skipped.
    """
    if psi.n != phi.n:
        raise GeneratorError("generators have mismatched dimensions")
    require_certified(psi, K)
    require_certified(phi, K)
    n, d = psi.n, base.d
    K = K or default_resolution(n)
    rng = np.random.default_rng(seed)
    N = ProductNorm(psi, base)

    X = _sample_blocks(rng, samples, n, d, base)
    full = N.eval_many(X)
    nz = full > 0
    X, full = X[nz], full[nz]
    W = base.eval_many(X)  # (m, n) block norms

    rows = []
    if n >= 3:
        bar = restrict_to_face(phi)
        require_certified(bar, K)
        Nbar = ProductNorm(bar, base)
        head = Nbar.eval_many(X[:, : n - 1, :])
        rep = np.repeat(X[:, n - 1 : n, :], n - 1, axis=1)
        repeated = Nbar.eval_many(rep)
        last = W[:, n - 1]
        rows.append(_worst(np.maximum(head, repeated) / full, CLAIMED_KAPPA["C1"](n), "C1"))
        rows.append(_worst(np.maximum(head, last) / full, CLAIMED_KAPPA["C2"](n), "C2"))
    else:
        rows.append(CompatRow("C1", CLAIMED_KAPPA["C1"](n), 0.0, True, -1, skipped=True))
        rows.append(CompatRow("C2", CLAIMED_KAPPA["C2"](n), 0.0, True, -1, skipped=True))

    wmax = W.max(axis=1)
    rows.append(_worst(wmax / full, CLAIMED_KAPPA["C3"](n), "C3"))
    rows.append(_worst(full / wmax, CLAIMED_KAPPA["C4"](n), "C4"))

    U = rng.standard_normal((max(samples // 4, 1), d))
    uw = base.eval_many(U)
    keep = uw > 0
    U, uw = U[keep], uw[keep]
    diag = N.eval_many(np.repeat(U[:, None, :], n, axis=1))
    rows.append(_worst(diag / uw, CLAIMED_KAPPA["C5"](n), "C5"))

    m_dual = min(len(X), max(samples // 4, 1))
    Xstar = X[:m_dual]
    dual_vals = dual_norm_eval_many(N, Xstar, K)
    qsum = base.dual().eval_many(Xstar).sum(axis=1)
    rows.append(_worst(qsum / dual_vals, CLAIMED_KAPPA["C6"](n), "C6"))
    rows.append(_worst(dual_vals / qsum, CLAIMED_KAPPA["C7"](n), "C7"))

    return CompatReport(n=n, samples=len(X), seed=seed, rows=tuple(rows))


def c5_tightness(psi: PsiFunction, base: BaseNorm, u=None) -> float:
    """Ratio of the diagonal block vector (u, ..., u) to its base norm;
    equals n exactly for the constant generator."""
    require_certified(psi)
    if u is None:
        u = np.zeros(base.d)
        u[0] = 1.0
    u = np.asarray(u, dtype=float)
    N = ProductNorm(psi, base)
    return float(N.eval_many(np.repeat(u[None, None, :], psi.n, axis=1))[0] / base.eval(u))


@dataclass(frozen=True)
class CombinedBoundReport:
    kappa: float
    M: float
    worst_ratio: float
    witness_index: int
    samples: int
    seed: int

    @property
    def passed(self) -> bool:
        return self.worst_ratio <= self.kappa * (1.0 + RATIO_SLACK)


def combined_bound(psi: PsiFunction, phi: PsiFunction, base: BaseNorm,
                   samples: int = 1000, seed: int = 0,
                   K: int | None = None) -> CombinedBoundReport:
    """Mixed-generator bound: the face-restricted phi-norm of the leading
    blocks, of the repeated last block, and the last block's base norm
    are all at most kappa = max(M, n-1) times the psi-norm, where M is
    the largest phi/psi ratio."""
    if psi.n != phi.n:
        raise GeneratorError("generators have mismatched dimensions")
    if psi.n < 3:
        raise GeneratorError("combined bound needs at least 3 blocks")
    require_certified(psi, K)
    require_certified(phi, K)
    n, d = psi.n, base.d
    K = K or default_resolution(n)
    _, M, _, _ = _ratio_extrema(phi.eval_many, psi.eval_many, n, K, 40)
    kappa = max(M, n - 1.0)

    rng = np.random.default_rng(seed)
    N = ProductNorm(psi, base)
    bar = restrict_to_face(phi)
    require_certified(bar, K)
    Nbar = ProductNorm(bar, base)

    X = _sample_blocks(rng, samples, n, d, base)
    full = N.eval_many(X)
    nz = full > 0
    X, full = X[nz], full[nz]
    head = Nbar.eval_many(X[:, : n - 1, :])
    repeated = Nbar.eval_many(np.repeat(X[:, n - 1 : n, :], n - 1, axis=1))
    last = base.eval_many(X[:, n - 1, :])
    lhs = np.maximum(np.maximum(head, repeated), last)
    ratios = lhs / full
    k = int(np.argmax(ratios))
    return CombinedBoundReport(kappa=kappa, M=M, worst_ratio=float(ratios[k]),
                               witness_index=k, samples=len(X), seed=seed)
