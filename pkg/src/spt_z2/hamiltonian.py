"""Parent interactions and dense chain diagnostics.

The canonical m-site interaction of a primitive tuple is the complement of
the marginal's support: h = 1 - P where P projects onto the range of the
m-site reduced state. It is a projector, translation-covariant chains built
from it are frustration free, and for m at least one more than the
injectivity length the open-chain kernel is spanned by the tuple's boundary
states (dimension k^2).

Everything here is dense and capped; these are verification tools, not a
simulation engine.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .config import Config, resolve
from .errors import ConvergenceFailure, DimensionCap, InvalidInput
from .linalg import frob, herm_eig
from .mps import MpsTuple, invariant_state, marginal, primitivity, require_normalized
from .reflection import reverse_word_index


@dataclass(frozen=True)
class ParentInteraction:
    m: int
    h: np.ndarray
    rank: int
    support_rank: int
    range_warning: bool
    d: int


def parent_interaction(t: MpsTuple, m: int | None = None,
                       config: Config | None = None) -> ParentInteraction:
    """Projector onto the orthogonal complement of the m-site marginal support.

    Default window is injectivity length + 1. A shorter window still yields a
    valid frustration-free interaction but its chain kernel can exceed the
    boundary-state count; that case sets ``range_warning`` and emits a
    :class:`UserWarning`.
    """
    cfg = resolve(config)
    require_normalized(t, cfg)
    cert = primitivity(t, config=cfg)
    inv = invariant_state(t, cfg)
    if m is None:
        m = (cert.injectivity_length or 1) + 1
    if m < 1:
        raise InvalidInput("window must span at least one site", m=m)
    marg = marginal(t, inv.rho, m, cfg)
    dim = marg.matrix.shape[0]
    sys = herm_eig(marg.matrix, eps_herm=cfg.eps_herm)
    top = float(sys.values.max())
    keep = sys.values > cfg.rank_tol * max(top, 1e-300)
    basis = sys.vectors[:, keep]
    proj = basis @ basis.conj().T
    h = np.eye(dim) - proj
    h = 0.5 * (h + h.conj().T)
    idem = frob(h @ h - h)
    if idem > 1e-9:
        raise ConvergenceFailure("interaction is not a projector within tolerance",
                                 residual=float(idem))
    warn = m < (cert.injectivity_length or 1) + 1
    if warn:
        warnings.warn(
            "interaction window is shorter than injectivity length + 1; "
            "chain kernels may exceed the boundary-state count",
            UserWarning,
            stacklevel=2,
        )
    return ParentInteraction(m=m, h=h, rank=dim - marg.rank,
                             support_rank=marg.rank, range_warning=warn, d=t.d)


def embed_sites(op: np.ndarray, sites: list[int], n: int, d: int) -> np.ndarray:
    """Embed an operator on the given sites into the n-site chain.

    ``op`` acts on len(sites) factors in the listed order; remaining sites
    get the identity. Sites may wrap in any order (used for periodic terms).
    """
    m = len(sites)
    if sorted(set(sites)) != sorted(sites) or any(not 0 <= s < n for s in sites):
        raise InvalidInput("sites must be distinct chain positions", sites=sites, n=n)
    if op.shape != (d ** m, d ** m):
        raise InvalidInput("operator does not match the site count",
                           shape=list(op.shape), sites=sites)
    rest = d ** (n - m)
    big = np.kron(op, np.eye(rest))
    # slot j of the kron order holds sites[j], then the others ascending
    others = [s for s in range(n) if s not in sites]
    slot_of_site = {s: j for j, s in enumerate(list(sites) + others)}
    perm = [slot_of_site[s] for s in range(n)]
    tensor = big.reshape((d,) * (2 * n))
    tensor = tensor.transpose(perm + [n + p for p in perm])
    return tensor.reshape(d ** n, d ** n)


@dataclass(frozen=True)
class ChainSpec:
    n: int
    boundary: str  # "open" or "periodic"


def chain_hamiltonian(hint: ParentInteraction, spec: ChainSpec,
                      config: Config | None = None) -> np.ndarray:
    """Dense translation sum of the interaction over an n-site chain."""
    cfg = resolve(config)
    n, d, m = spec.n, hint.d, hint.m
    if spec.boundary not in ("open", "periodic"):
        raise InvalidInput("boundary must be open or periodic", boundary=spec.boundary)
    if n < m:
        raise InvalidInput("chain shorter than the interaction window", n=n, m=m)
    dim = d ** n
    if dim > cfg.ed_cap:
        raise DimensionCap("chain dimension exceeds the dense cap",
                           dimension=dim, cap=cfg.ed_cap)
    h_total = np.zeros((dim, dim), dtype=complex)
    last = n - m + 1 if spec.boundary == "open" else n
    for p in range(last):
        sites = [(p + j) % n for j in range(m)]
        h_total += embed_sites(hint.h, sites, n, d)
    return 0.5 * (h_total + h_total.conj().T)


@dataclass(frozen=True)
class EdReport:
    ground_energy: float
    kernel_dim: int
    gap: float
    spectrum_head: np.ndarray


def ed_report(h_total: np.ndarray, kernel_tol: float | None = None,
              config: Config | None = None) -> EdReport:
    """Dense spectrum summary: ground energy, kernel count, gap above it."""
    cfg = resolve(config)
    h_arr = np.asarray(h_total)
    if h_arr.shape[0] > cfg.ed_cap:
        raise DimensionCap("matrix exceeds the dense diagonalization cap",
                           dimension=int(h_arr.shape[0]), cap=cfg.ed_cap)
    evals = herm_eig(h_arr, eps_herm=cfg.eps_herm).values
    if kernel_tol is None:
        kernel_tol = 1e-8 * (float(evals.max(initial=0.0)) + 1.0)
    kernel = int(np.sum(evals < kernel_tol))
    above = evals[evals >= kernel_tol]
    gap = float(above.min()) if above.size else 0.0
    return EdReport(
        ground_energy=float(evals[0]),
        kernel_dim=kernel,
        gap=gap,
        spectrum_head=evals[: min(10, evals.size)].copy(),
    )


def reflection_check(hint: ParentInteraction) -> float:
    """Frobenius distance between the interaction and its factor reversal."""
    idx = reverse_word_index(hint.d, hint.m, np.arange(hint.d))
    rev = hint.h[np.ix_(idx, idx)]
    return frob(rev - hint.h)
