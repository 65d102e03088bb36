"""Dense linear-algebra kernel with deterministic conventions.

Everything downstream leans on the conventions fixed here, so they are spelled
out once:

Vectorization is column stacking. ``vec(X)`` concatenates the columns of
``X``, which is ``X.reshape(-1, order="F")``, and satisfies

    vec(A @ X @ B) == kron(B.T, A) @ vec(X).

Superoperators are therefore represented as ``k**2 x k**2`` matrices acting on
column-stacked ``k x k`` matrices, built by :func:`map_superop`.

Hermitian eigensystems are returned with eigenvalues ascending (LAPACK order)
and each eigenvector's phase fixed so that its first component of significant
modulus is real and positive. General eigenvector phases and peripheral
eigenmatrices follow the same rule via :func:`phase_fix`.

Peripheral spectra, polar factors, and PSD powers all take their tolerances
explicitly; policy defaults live in :mod:`spt_z2.config`, not here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, RankDeficient


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(x: np.ndarray, k: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`; square target unless k is given."""
    x = np.asarray(x)
    if k is None:
        k = round(x.size ** 0.5)
        if k * k != x.size:
            raise ValueError(f"cannot unvec length {x.size} into a square matrix")
    return x.reshape(k, -1, order="F")


def map_superop(pairs) -> np.ndarray:
    """Matrix of X -> sum_i A_i X B_i in the vec convention.

    ``pairs`` iterates over (A_i, B_i). The result is sum_i kron(B_i.T, A_i).
    """
    out = None
    for a, b in pairs:
        term = np.kron(np.asarray(b).T, np.asarray(a))
        out = term if out is None else out + term
    if out is None:
        raise ValueError("map_superop needs at least one (A, B) pair")
    return out


def phase_fix(v: np.ndarray, axis: int = 0) -> np.ndarray:
    """Rotate each column (vectors along ``axis``) to the canonical phase.

    The first entry whose modulus is within a factor 0.5 of the column's
    largest modulus is made real and positive. Deterministic under small
    perturbations because the pivot is modulus-gated, not exactly-first-
    nonzero.
    """
    v = np.array(v, dtype=complex, copy=True)
    moved = np.moveaxis(v, axis, 0)
    flat = moved.reshape(moved.shape[0], -1)
    mags = np.abs(flat)
    top = mags.max(axis=0)
    for j in range(flat.shape[1]):
        if top[j] == 0.0:
            continue
        pivots = np.nonzero(mags[:, j] >= 0.5 * top[j])[0]
        p = flat[pivots[0], j]
        flat[:, j] *= np.conj(p) / abs(p)
    return v


@dataclass(frozen=True)
class HermEig:
    values: np.ndarray   # real, ascending
    vectors: np.ndarray  # columns, orthonormal, phase-fixed


def herm_eig(h: np.ndarray, *, eps_herm: float = 1e-8) -> HermEig:
    """Eigensystem of a Hermitian matrix with the module's conventions.

    Rejects inputs whose anti-Hermitian part exceeds ``eps_herm`` relative to
    the norm; the symmetrized matrix is what gets diagonalized, so the
    returned system is exactly Hermitian-consistent.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"herm_eig expects a square matrix, got {h.shape}")
    scale = np.linalg.norm(h)
    skew = np.linalg.norm(h - h.conj().T)
    if scale > 0 and skew > eps_herm * max(scale, 1.0):
        raise NotHermitian(
            "matrix is not Hermitian within tolerance",
            skew_residual=float(skew / max(scale, 1.0)),
            tolerance=eps_herm,
        )
    hh = 0.5 * (h + h.conj().T)
    w, u = np.linalg.eigh(hh)
    return HermEig(values=w, vectors=phase_fix(u, axis=0))


def eig_sort_key(values: np.ndarray):
    """Sort key: modulus descending, then phase angle ascending."""
    return np.lexsort((np.angle(values), -np.abs(values)))


def peripheral_eigs(mat: np.ndarray, tol: float) -> list[tuple[complex, np.ndarray]]:
    """Eigenpairs of a superoperator matrix on the peripheral circle.

    Returns (eigenvalue, eigenmatrix) pairs for every eigenvalue within
    ``tol * r`` of the spectral radius r, ordered by modulus descending then
    angle ascending. Eigenmatrices are unit Frobenius norm with the canonical
    phase. ``tol`` must lie in (0, 0.5) so the window cannot wrap past the
    origin.
    """
    if not 0.0 < tol < 0.5:
        raise ValueError(f"peripheral tolerance must be in (0, 0.5), got {tol}")
    mat = np.asarray(mat, dtype=complex)
    w, v = np.linalg.eig(mat)
    r = np.abs(w).max() if w.size else 0.0
    keep = np.nonzero(np.abs(w) >= r - tol * r)[0] if r > 0 else np.arange(w.size)
    order = eig_sort_key(w[keep])
    out = []
    for idx in keep[order]:
        m = unvec(v[:, idx])
        m = m / np.linalg.norm(m)
        m = phase_fix(m.reshape(-1, 1), axis=0).reshape(m.shape)
        out.append((complex(w[idx]), m))
    return out


def psd_power(rho: np.ndarray, power: float, *, rank_tol: float = 1e-12,
              eps_herm: float = 1e-8) -> np.ndarray:
    """Real power of a PSD matrix on its support.

    Eigenvalues below ``rank_tol`` times the largest are treated as exact
    zeros: for negative powers they are pseudo-inverted to zero, for positive
    powers they contribute nothing. Negative eigenvalues beyond that window
    are rejected.
    """
    sys = herm_eig(rho, eps_herm=eps_herm)
    w, u = sys.values, sys.vectors
    top = float(w.max(initial=0.0))
    if top <= 0.0:
        if power < 0:
            raise RankDeficient("psd_power of the zero matrix with negative exponent")
        return np.zeros_like(np.asarray(rho, dtype=complex))
    cut = rank_tol * top
    if float(w.min()) < -cut:
        raise NotHermitian(
            "matrix has a significantly negative eigenvalue; not PSD",
            min_eigenvalue=float(w.min()),
            cutoff=float(cut),
        )
    wp = np.zeros_like(w)
    on = w > cut
    wp[on] = w[on] ** power
    return (u * wp) @ u.conj().T


@dataclass(frozen=True)
class PolarFactor:
    unitary: np.ndarray
    scale: float       # mean singular value, the best c in X ~ c U
    deviation: float   # ||X - c U||_F / ||X||_F


def polar_unitary(x: np.ndarray, *, tol: float = 1e-9) -> PolarFactor:
    """Unitary polar factor U = X (X^dagger X)^{-1/2} plus proximity data.

    Raises :class:`RankDeficient` when the smallest singular value is below
    ``tol`` times the largest, since the factor is then not determined.
    The deviation measures how far X is from an exact scalar multiple of a
    unitary: zero iff all singular values coincide.
    """
    x = np.asarray(x, dtype=complex)
    u, s, vh = np.linalg.svd(x)
    if s[0] == 0.0 or s[-1] < tol * s[0]:
        raise RankDeficient(
            "matrix is numerically singular; polar unitary undefined",
            sigma_min=float(s[-1]),
            sigma_max=float(s[0]),
            tolerance=tol,
        )
    c = float(s.mean())
    # ||X - cU||_F^2 = sum_i (s_i - c)^2 in the shared singular frame
    dev = float(np.linalg.norm(s - c) / np.linalg.norm(s))
    return PolarFactor(unitary=u @ vh, scale=c, deviation=dev)


def frob(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))
