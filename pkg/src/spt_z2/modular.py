"""Finite-dimensional modular data of a bipartite vector.

A unit vector Omega on C^m (x) C^m is identified with its m x m coefficient
matrix M through Omega = sum_ab M_ab e_a (x) e_b, so that
(A (x) B) Omega has coefficient matrix A M B^T.

SVD M = Xi diag(s) Z^T gives the Schmidt form Omega =
sum_k s_k xi_k (x) zeta_k with lambda_k = s_k^2, left vectors xi_k (columns
of Xi) and right vectors zeta_k (columns of Z). On the compressed space
span(xi) (x) span(zeta), identified with r x r coefficient matrices C through
the embedding C -> Xi C Z^T, the modular objects of the left factor algebra
have closed forms:

    S(C)       = D^{-1} C^dagger D        (D = diag(sqrt(lambda)))
    Delta(C)   = D^2 C D^{-2}
    J(C)       = C^dagger

together with the partial isometry u = Z Xi^T satisfying
u conj(xi_k) = zeta_k. Everything here is verified against independent
ambient-coordinate routes (reduced-state powers via psd_power, the literal
u-conjugation formulas) over a seeded panel; the reported residuals are the
worst cases.

The square of the antiunitary built from u decides kappa: on the Schmidt
support, u conj(u) is +1 or -1 (or neither, for vectors without the matching
symmetry, in which case kappa is None).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Config, resolve
from .errors import DegenerateSupport, Inconclusive, InvalidInput, ZeroVector
from .linalg import frob, herm_eig, psd_power


@dataclass(frozen=True)
class BipartiteVector:
    m: int
    M: np.ndarray  # unit Frobenius norm


def as_bipartite(matrix, normalized: bool = False) -> BipartiteVector:
    """Wrap a coefficient matrix; ``normalized=True`` rescales to unit norm."""
    m_arr = np.asarray(matrix, dtype=complex)
    if m_arr.ndim != 2 or m_arr.shape[0] != m_arr.shape[1]:
        raise InvalidInput("coefficient matrix must be square", shape=list(m_arr.shape))
    if m_arr.shape[0] < 1:
        raise InvalidInput("coefficient matrix must be nonempty")
    if not np.all(np.isfinite(m_arr.view(float))):
        raise InvalidInput("coefficient entries must be finite")
    norm = float(np.linalg.norm(m_arr))
    if norm < 1e-12:
        raise ZeroVector("bipartite vector has numerically zero norm", norm=norm)
    if normalized:
        m_arr = m_arr / norm
    elif abs(norm - 1.0) > 1e-10:
        raise InvalidInput("bipartite vector must have unit norm within 1e-10",
                           norm=norm)
    return BipartiteVector(m=m_arr.shape[0], M=m_arr)


@dataclass(frozen=True)
class SchmidtData:
    lam: np.ndarray      # Schmidt weights, descending, summing to 1
    left: np.ndarray     # m x r, columns xi_k
    right: np.ndarray    # m x r, columns zeta_k
    u: np.ndarray        # m x m partial isometry, u conj(xi_k) = zeta_k
    support_dim: int


def schmidt(omega: BipartiteVector, rank_tol: float | None = None,
            config: Config | None = None) -> SchmidtData:
    """Schmidt decomposition with deterministic column phases.

    The right vectors get the canonical phase of :func:`spt_z2.linalg.phase_fix`
    and the left vectors absorb the compensating factor, which keeps
    M = Xi diag(s) Z^T exact.
    """
    cfg = resolve(config)
    if rank_tol is None:
        rank_tol = cfg.rank_tol
    mat = omega.M
    xi_full, s, vh = np.linalg.svd(mat)
    if s[0] <= 0:
        raise DegenerateSupport("coefficient matrix has no singular values above zero")
    r = int(np.sum(s > rank_tol * s[0]))
    if r == 0:
        raise DegenerateSupport("Schmidt support is empty at this rank tolerance",
                                rank_tol=rank_tol)
    xi = xi_full[:, :r].copy()
    z = vh[:r, :].T.copy()
    for j in range(r):
        col = z[:, j]
        mags = np.abs(col)
        pivot = col[np.nonzero(mags >= 0.5 * mags.max())[0][0]]
        c = np.conj(pivot) / abs(pivot)
        z[:, j] = col * c
        xi[:, j] = xi[:, j] * np.conj(c)
    lam = (s[:r] ** 2).astype(float)
    recon = frob(mat - xi @ (s[:r, None] * z.T))
    if recon > 1e-9:
        raise Inconclusive("Schmidt reconstruction residual above tolerance",
                           residual=float(recon))
    u = z @ xi.T
    return SchmidtData(lam=lam, left=xi, right=z, u=u, support_dim=r)


def swap_sign(omega: BipartiteVector, tol: float | None = None,
              config: Config | None = None) -> int | None:
    """+1 for symmetric, -1 for antisymmetric coefficient matrix, else None."""
    cfg = resolve(config)
    if tol is None:
        tol = cfg.swap_tol
    mat = omega.M
    if frob(mat - mat.T) <= tol:
        return 1
    if frob(mat + mat.T) <= tol:
        return -1
    return None


@dataclass(frozen=True)
class ModularReport:
    kappa: int | None
    sigma: int | None
    support_dim: int
    support_match_residual: float
    residuals: dict
    schmidt: SchmidtData


def modular_data(omega: BipartiteVector, config: Config | None = None,
                 seed: int | None = None) -> ModularReport:
    """Modular operators of the left algebra with dual-route verification.

    Each identity is exercised on a seeded random panel; the compressed
    closed forms on one side are compared against independent ambient
    computations on the other (reduced-state powers from M M^dagger, the
    literal u-formulas). ``kappa`` is the sign of u conj(u) on the support
    when that is a sign, and None otherwise; ``sigma`` is the swap sign of
    the coefficient matrix. When both are defined they must agree.
    """
    cfg = resolve(config)
    sch = schmidt(omega, config=cfg)
    r = sch.support_dim
    xi, z, lam = sch.left, sch.right, sch.lam
    dvec = np.sqrt(lam)
    rng = np.random.default_rng(0 if seed is None else seed)

    p_left = xi @ xi.conj().T
    p_right = z @ z.conj().T
    rho_left = omega.M @ omega.M.conj().T
    root = psd_power(rho_left, 0.5, rank_tol=cfg.rank_tol, eps_herm=cfg.eps_herm)
    root_inv = psd_power(rho_left, -0.5, rank_tol=cfg.rank_tol, eps_herm=cfg.eps_herm)

    def embed(c):
        return xi @ c @ z.T

    def compress(w):
        return xi.conj().T @ w @ z.conj()

    def j_ambient(w):
        # uses the reported isometry; w is any ambient coefficient matrix
        return sch.u.T @ w.conj().T @ sch.u.T

    def half_delta(c):
        return (dvec[:, None] * c) / dvec[None, :]

    def rand_c(n):
        return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))

    omega_c = np.diag(dvec)

    res_delta_formula = 0.0
    res_s_action = 0.0
    res_j_formula = 0.0
    res_j_square = 0.0
    for _ in range(cfg.panel_size):
        # (a) Delta^{1/2} against the reduced-state power formula, ambient route
        x_c = rand_c(r)
        x_amb = xi @ x_c @ xi.conj().T
        lhs = embed(half_delta(x_c @ omega_c))
        rhs = (root @ x_amb @ root_inv) @ omega.M
        res_delta_formula = max(res_delta_formula, frob(lhs - rhs) / max(frob(lhs), 1e-300))

        # (c) S = J Delta^{1/2} sends (x (x) 1) Omega to (x^dagger (x) 1) Omega
        lhs = j_ambient(embed(half_delta(x_c @ omega_c)))
        rhs = (xi @ x_c.conj().T @ xi.conj().T) @ omega.M
        res_s_action = max(res_s_action, frob(lhs - rhs) / max(frob(rhs), 1e-300))

        # (b) J (P (x) y) J = (w conj(y) w^dagger) (x) P with w = u^T
        y = rand_c(omega.m)
        y = p_right @ y @ p_right
        w_any = rand_c(omega.m)
        lhs = j_ambient(p_left @ j_ambient(w_any) @ y.T)
        wmat = sch.u.T
        rhs = (wmat @ y.conj() @ wmat.conj().T) @ w_any @ p_right.T
        res_j_formula = max(res_j_formula, frob(lhs - rhs) / max(frob(w_any), 1e-300))

        # J^2 is the support projector on both factors
        lhs = j_ambient(j_ambient(w_any))
        rhs = p_left @ w_any @ p_right.T
        res_j_square = max(res_j_square, frob(lhs - rhs) / max(frob(w_any), 1e-300))

    # Delta and J fix Omega
    res_fix = frob(embed(half_delta(half_delta(omega_c))) - omega.M)
    res_fix = max(res_fix, frob(j_ambient(omega.M) - omega.M))

    residuals = {
        "S_action": float(res_s_action),
        "J_square": float(res_j_square),
        "delta_fix": float(res_fix),
        "delta_formula": float(res_delta_formula),
        "J_formula": float(res_j_formula),
    }
    worst = max(residuals.values())
    if worst > cfg.modular_tol:
        raise Inconclusive("modular identities exceed tolerance", **residuals)

    support_match = frob(xi - p_right @ xi)
    kappa: int | None = None
    if support_match <= cfg.modular_tol:
        g = z.conj().T @ xi
        t2 = g @ g.conj()
        scale = max(1.0, r ** 0.5)
        if frob(t2 - np.eye(r)) <= cfg.modular_tol * scale:
            kappa = 1
        elif frob(t2 + np.eye(r)) <= cfg.modular_tol * scale:
            kappa = -1

    sigma = swap_sign(omega, config=cfg)
    if kappa is not None and sigma is not None and kappa != sigma:
        raise Inconclusive(
            "antiunitary square and swap sign disagree",
            kappa=kappa,
            sigma=sigma,
            support_match_residual=float(support_match),
        )
    return ModularReport(
        kappa=kappa,
        sigma=sigma,
        support_dim=r,
        support_match_residual=float(support_match),
        residuals=residuals,
        schmidt=sch,
    )


def bond_vector(report, rho) -> BipartiteVector:
    """Bipartite vector U^dagger rho^{1/2} of an index report, in the rho eigenbasis.

    ``rho`` may be the :class:`spt_z2.mps.InvariantState` or its matrix; its
    descending eigenvalues must match the report's. The swap sign of the
    result reproduces the reflection index.
    """
    rho_mat = getattr(rho, "rho", rho)
    sys = herm_eig(np.asarray(rho_mat, dtype=complex))
    diag = sys.values[::-1]
    if diag.shape != report.rho_diag.shape or frob(diag - report.rho_diag) > 1e-8:
        raise InvalidInput(
            "invariant state does not match the report's spectral data",
            spectrum=[float(x) for x in diag],
            report_spectrum=[float(x) for x in report.rho_diag],
        )
    mat = report.U.conj().T @ np.diag(np.sqrt(report.rho_diag))
    return as_bipartite(mat, normalized=True)
