"""Lowest eigenpairs of Hermitian operators.

Small operators are diagonalized densely.  Large sparse ones go through a
thick-restart Lanczos iteration with full reorthogonalization, optionally
in shift-invert mode.  Either way the returned states follow one phase
convention: the largest-magnitude entry of each state is real and positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BadK, NoConvergence
from .operators import DENSE_LIMIT, BasisSpec, HermitianOperator

DENSE_TOL = 1e-10
ITERATIVE_TOL = 1e-8
RESTARTS_PER_LEVEL = 50
# Relative energy window inside which levels are treated as one subspace
# when fixing the gauge of the returned vectors.
_GAUGE_GROUP_RTOL = 1e-10
_PHASE_TIE_RTOL = 1e-9
_SEED = 20220329


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Lowest levels of an operator.

    ``states[:, i]`` is normalized with the basis quadrature weight, i.e.
    ``sum(|psi|^2) * basis.weight == 1``.
    """

    energies: np.ndarray
    states: np.ndarray
    basis: BasisSpec
    residual_bound: float
    potential: np.ndarray | None = field(default=None, repr=False)
    method: str = "dense"

    def __len__(self) -> int:
        return len(self.energies)

    @property
    def count(self) -> int:
        return len(self.energies)

    def state(self, i: int) -> np.ndarray:
        return self.states[:, i]


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude entry is real and positive.

    Entries within a relative 1e-9 of the maximum count as tied; the lowest
    index among them wins.
    """
    mag = np.abs(v)
    peak = mag.max()
    if peak == 0.0:
        return v
    i = int(np.flatnonzero(mag >= peak * (1.0 - _PHASE_TIE_RTOL))[0])
    return v * (np.conj(v[i]) / mag[i])


def _gauge_fix(energies: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    vecs = vecs.copy()
    scale = 1.0 + np.max(np.abs(energies))
    start = 0
    for stop in range(1, len(energies) + 1):
        if stop < len(energies) and energies[stop] - energies[stop - 1] <= _GAUGE_GROUP_RTOL * scale:
            continue
        for i in range(start, stop):
            v = vecs[:, i]
            for j in range(start, i):
                v = v - vecs[:, j] * np.vdot(vecs[:, j], v)
            vecs[:, i] = fix_phase(v / np.linalg.norm(v))
        start = stop
    return vecs


def _dense(op: HermitianOperator, k: int):
    mat = op.toarray()
    energies, vecs = sla.eigh(mat, subset_by_index=[0, k - 1], driver="evr")
    return energies, vecs


def lanczos(
    matvec,
    dim: int,
    k: int,
    tol: float,
    *,
    dtype=float,
    largest: bool = False,
    max_restarts: int | None = None,
    basis_size: int | None = None,
    seed: int = _SEED,
):
    """Thick-restart Lanczos for ``k`` extremal eigenpairs of a Hermitian map.

    Every new Krylov vector is orthogonalized twice against the whole basis,
    so the projected matrix is formed column by column as V^H A V.  After
    each cycle the ``keep`` best Ritz vectors plus the last residual
    direction seed the next cycle.

    Returns Ritz values (ascending, or descending if ``largest``) and the
    matching orthonormal Ritz vectors as columns.
    """
    if max_restarts is None:
        max_restarts = RESTARTS_PER_LEVEL * k
    m = basis_size or min(dim - 1, max(2 * k + 20, k + 40))
    if m <= k:
        raise BadK(f"basis size {m} too small for k={k} in dimension {dim}")
    keep = min(m - 1, k + (m - k) // 2)
    complex_ = np.issubdtype(np.dtype(dtype), np.complexfloating)
    rng = np.random.default_rng(seed)

    def random_vector():
        v = rng.standard_normal(dim)
        if complex_:
            v = v + 1j * rng.standard_normal(dim)
        return v

    basis = np.zeros((dim, m + 1), dtype=complex if complex_ else float)
    proj = np.zeros((m, m), dtype=basis.dtype)
    v0 = random_vector()
    basis[:, 0] = v0 / np.linalg.norm(v0)
    start = 0
    scale = 0.0
    for _ in range(max_restarts + 1):
        beta = 0.0
        for j in range(start, m):
            w = matvec(basis[:, j])
            block = basis[:, : j + 1]
            coef = block.conj().T @ w
            w = w - block @ coef
            corr = block.conj().T @ w
            w = w - block @ corr
            coef = coef + corr
            proj[: j + 1, j] = coef
            proj[j, : j + 1] = np.conj(coef)
            scale = max(scale, abs(coef[j]))
            beta = np.linalg.norm(w)
            if beta <= 1e-14 * max(scale, 1.0):
                # invariant subspace found; continue with a fresh direction
                w = random_vector()
                for _ in range(2):
                    w = w - block @ (block.conj().T @ w)
                basis[:, j + 1] = w / np.linalg.norm(w)
                beta = 0.0
            else:
                basis[:, j + 1] = w / beta
            if j + 1 < m:
                proj[j + 1, j] = beta
                proj[j, j + 1] = beta
        theta, y = np.linalg.eigh(0.5 * (proj + proj.conj().T))
        order = np.argsort(-theta) if largest else np.arange(m)
        theta, y = theta[order], y[:, order]
        resid = np.abs(beta * y[m - 1, :])
        if np.all(resid[:k] <= tol * (1.0 + np.abs(theta[:k]))):
            return theta[:k], basis[:, :m] @ y[:, :k]
        ritz = basis[:, :m] @ y[:, :keep]
        basis[:, :keep] = ritz
        basis[:, keep] = basis[:, m]
        basis[:, keep + 1 :] = 0.0
        proj[:] = 0.0
        proj[np.arange(keep), np.arange(keep)] = theta[:keep]
        start = keep
    raise NoConvergence(f"Lanczos did not converge {k} pairs within {max_restarts} restarts")


def _iterative(op: HermitianOperator, k: int, tol: float, sigma: float | None):
    dtype = float if op.is_real else complex
    if sigma is None:
        ritz, vecs = lanczos(op.matvec, op.dim, k, tol, dtype=dtype)
    else:
        shifted = sp.csc_matrix(op.matrix) - sigma * sp.identity(op.dim, format="csc")
        lu = spla.splu(shifted)
        # Lanczos on (H - sigma)^-1: its largest eigenvalues are the levels
        # of H closest to sigma from above.
        _, vecs = lanczos(lu.solve, op.dim, k, tol * 1e-2, dtype=dtype, largest=True)
    hv = op.matrix @ vecs
    energies = np.real(np.einsum("ij,ij->j", vecs.conj(), hv))
    order = np.argsort(energies, kind="stable")
    return energies[order], vecs[:, order]


def _shift_below(op: HermitianOperator) -> float:
    """A shift just under the lowest level, from a short unrestarted Lanczos run."""
    dtype = float if op.is_real else complex
    theta, _ = lanczos(op.matvec, op.dim, 1, 1e-3, dtype=dtype, basis_size=min(op.dim - 1, 80))
    return float(theta[0]) - max(1.0, 0.05 * abs(theta[0]))


def lowest_eigenpairs(
    op: HermitianOperator,
    k: int,
    tol: float | None = None,
    *,
    method: str = "auto",
    sigma: float | str | None = None,
) -> Spectrum:
    """Lowest ``k`` eigenpairs of ``op``.

    Parameters
    ----------
    op:
        Operator to diagonalize.
    k:
        Number of levels, ``1 <= k <= op.dim``.
    tol:
        Relative residual target; defaults to 1e-10 (dense) or 1e-8 (Lanczos).
    method:
        ``"dense"``, ``"lanczos"`` or ``"auto"`` (dense up to dimension 4096).
    sigma:
        Shift for shift-invert Lanczos.  ``"auto"`` places it just below the
        ground level; ``None`` runs Lanczos on the operator itself.

    Raises
    ------
    BadK
        If ``k`` is out of range or ``tol`` is not positive.
    NoConvergence
        If the iteration budget is exhausted or the returned residuals
        exceed ``tol * (1 + max|E|)``.
    """
    if int(k) != k or not 1 <= k <= op.dim:
        raise BadK(f"k must lie in [1, {op.dim}], got {k}")
    if method == "auto":
        method = "dense" if op.dim <= DENSE_LIMIT else "lanczos"
    if method == "lanczos" and k >= op.dim - 1:
        method = "dense"
    if tol is None:
        tol = DENSE_TOL if method == "dense" else ITERATIVE_TOL
    if not tol > 0:
        raise BadK(f"tol must be > 0, got {tol}")

    if method == "dense":
        energies, vecs = _dense(op, k)
    elif method == "lanczos":
        if sigma == "auto":
            sigma = _shift_below(op)
        energies, vecs = _iterative(op, k, tol, sigma)
    else:
        raise ValueError(f"unknown method {method!r}")

    vecs = _gauge_fix(energies, vecs)
    states = vecs / math.sqrt(op.basis.weight)
    unit = states * math.sqrt(op.basis.weight)
    residual = op.matrix @ unit - unit * energies
    # Headroom for round-off when a caller recomputes the residual.
    slack = 2.0 * np.finfo(float).eps * (op.max_abs() + float(np.max(np.abs(energies))))
    bound = float(np.max(np.linalg.norm(residual, axis=0))) + slack
    limit = tol * (1.0 + float(np.max(np.abs(energies))))
    if bound > limit:
        raise NoConvergence(f"residual {bound:.3e} exceeds {limit:.3e} ({method})")
    return Spectrum(
        energies=np.asarray(energies, dtype=float),
        states=states,
        basis=op.basis,
        residual_bound=bound,
        potential=op.potential,
        method=method,
    )


def degeneracy_groups(spectrum: Spectrum | np.ndarray, rel_gap: float) -> list[list[int]]:
    """Partition consecutive levels whose spacing is at most ``rel_gap * spread``.

    ``spread`` is the difference between the highest and lowest energy.
    """
    energies = np.asarray(spectrum.energies if isinstance(spectrum, Spectrum) else spectrum, dtype=float)
    if not rel_gap > 0:
        raise ValueError(f"rel_gap must be > 0, got {rel_gap}")
    if energies.size == 0:
        return []
    threshold = rel_gap * (energies.max() - energies.min())
    groups = [[0]]
    for i in range(1, energies.size):
        if energies[i] - energies[i - 1] <= threshold:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups
