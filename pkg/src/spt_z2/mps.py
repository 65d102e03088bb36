"""Matrix product tuples: normalization, primitivity, marginals, blocking.

A tuple is ``d`` matrices of size ``k x k`` satisfying the channel condition
``sum_mu v_mu v_mu^dagger = 1``. The transfer channel is
``E(x) = sum_mu v_mu x v_mu^dagger``; its adjoint acts on states. All
superoperator matrices follow the column-stacking convention of
:mod:`spt_z2.linalg`.

Multi-site index convention is big-endian: the word ``(mu_0, .., mu_{l-1})``
maps to the flat index ``mu_0 * d**(l-1) + .. + mu_{l-1}``, so site 0 is the
most significant digit. Blocking and marginals share this convention.

A tuple may carry ``reflect_perm``, an involution of the physical alphabet
that spatial reflection applies on-site. Plain models have none (identity);
blocking b sites makes the chain of blocks reflect by reversing block order
*and* the sites inside each block, and the intra-block reversal is exactly
this involution on the blocked alphabet. Reflection machinery downstream
honors it; with ``reflect_perm`` unset everything reduces to plain
transposition formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Config, resolve
from .errors import (
    ConvergenceFailure,
    Inconclusive,
    InvalidInput,
    NormalizationBroken,
    NotFaithful,
    NotNormalizable,
    NotPrimitive,
    WindowTooLarge,
)
from .linalg import eig_sort_key, frob, herm_eig, map_superop, peripheral_eigs, unvec, vec


@dataclass(frozen=True)
class MpsTuple:
    """Validated tuple of Kraus matrices, shape (d, k, k).

    Build through :func:`as_mps`; direct construction skips validation.
    ``reflect_perm`` is either None (identity) or an involutive permutation of
    ``range(d)`` stored as an integer array.
    """

    v: np.ndarray
    reflect_perm: np.ndarray | None = None

    @property
    def d(self) -> int:
        return self.v.shape[0]

    @property
    def k(self) -> int:
        return self.v.shape[1]

    def perm(self) -> np.ndarray:
        """Reflection involution as a concrete array (identity if unset)."""
        if self.reflect_perm is None:
            return np.arange(self.d)
        return self.reflect_perm


def as_mps(obj, reflect_perm=None) -> MpsTuple:
    """Validate and wrap raw matrices as an :class:`MpsTuple`."""
    if isinstance(obj, MpsTuple):
        if reflect_perm is not None:
            raise InvalidInput("cannot override reflect_perm of an existing tuple")
        return obj
    v = np.asarray(obj, dtype=complex)
    if v.ndim != 3 or v.shape[1] != v.shape[2]:
        raise InvalidInput("tuple must have shape (d, k, k)", shape=list(v.shape))
    d, k = v.shape[0], v.shape[1]
    if d < 2:
        raise InvalidInput("physical dimension d must be at least 2", d=d)
    if k < 1:
        raise InvalidInput("bond dimension k must be at least 1", k=k)
    if not np.all(np.isfinite(v.view(float))):
        raise InvalidInput("tuple entries must be finite")
    perm = _validate_perm(reflect_perm, d)
    return MpsTuple(v=v, reflect_perm=perm)


def _validate_perm(perm, d: int) -> np.ndarray | None:
    if perm is None:
        return None
    p = np.asarray(perm, dtype=int)
    if p.shape != (d,) or sorted(p.tolist()) != list(range(d)):
        raise InvalidInput("reflect_perm must be a permutation of range(d)", d=d)
    if not np.array_equal(p[p], np.arange(d)):
        raise InvalidInput("reflect_perm must be an involution")
    return p


def channel_residual(t: MpsTuple) -> float:
    s = np.einsum("mab,mcb->ac", t.v, t.v.conj())
    return frob(s - np.eye(t.k))


def require_normalized(t: MpsTuple, config: Config | None = None) -> None:
    cfg = resolve(config)
    r = channel_residual(t)
    # small slack over eps_norm: blocked tuples accumulate a few ulps per site
    if r > 10 * cfg.eps_norm:
        raise NormalizationBroken(
            "tuple does not satisfy the channel condition",
            residual=r,
            tolerance=cfg.eps_norm,
        )


def apply_channel(t: MpsTuple, x: np.ndarray) -> np.ndarray:
    return np.einsum("mab,bc,mdc->ad", t.v, x, t.v.conj())


def apply_adjoint(t: MpsTuple, y: np.ndarray) -> np.ndarray:
    return np.einsum("mba,bc,mcd->ad", t.v.conj(), y, t.v)


def transfer_matrix(t: MpsTuple) -> np.ndarray:
    return map_superop((m, m.conj().T) for m in t.v)


def transfer_spectrum(t: MpsTuple) -> np.ndarray:
    """Transfer eigenvalues, modulus descending then angle ascending."""
    w = np.linalg.eigvals(transfer_matrix(t))
    return w[eig_sort_key(w)]


def normalize(raw, config: Config | None = None) -> MpsTuple:
    """Rescale a raw tuple into channel form.

    Leaves an already-normalized tuple untouched. Otherwise finds a positive
    definite fixed point ``e`` of the transfer map at its spectral radius
    ``r`` and returns ``w_mu = r**-0.5 e**-0.5 v_mu e**0.5``. The dominant
    eigenvalue may be degenerate (e.g. reducible tuples); the identity's
    projection onto the full dominant eigenspace decides whether a positive
    choice of ``e`` exists, and :class:`NotNormalizable` is raised when it
    does not.
    """
    cfg = resolve(config)
    t = as_mps(raw)
    if channel_residual(t) <= cfg.eps_norm:
        return t

    k = t.k
    tm = transfer_matrix(t)
    w, vs = np.linalg.eig(tm)
    r = float(np.abs(w).max())
    if r <= 1e-300:
        raise NotNormalizable("tuple is numerically zero", spectral_radius=r)
    # fixed points at eigenvalue r itself (positive real), not just modulus r
    dom = np.nonzero(np.abs(w - r) <= 1e-9 * r)[0]
    if dom.size == 0:
        raise NotNormalizable(
            "no transfer eigenvalue at the spectral radius on the positive axis",
            spectral_radius=r,
        )
    basis = vs[:, dom]
    coeff, *_ = np.linalg.lstsq(basis, vec(np.eye(k)), rcond=None)
    e = unvec(basis @ coeff, k)
    eh = 0.5 * (e + e.conj().T)
    if frob(eh) < 1e-8 * frob(e):
        eh = (e - e.conj().T) / 2j
    e = eh
    ev_res = frob(unvec(tm @ vec(e), k) - r * e) / max(frob(e), 1e-300)
    if ev_res > 1e-7:
        raise NotNormalizable(
            "identity has no component along a positive fixed point",
            eigen_residual=float(ev_res),
        )
    sys = herm_eig(e, eps_herm=cfg.eps_herm)
    lo, hi = float(sys.values.min()), float(sys.values.max())
    if hi <= 0 or lo <= cfg.pos_def_tol * hi:
        raise NotNormalizable(
            "dominant fixed point is not positive definite",
            min_eigenvalue=lo,
            max_eigenvalue=hi,
        )
    root = (sys.vectors * np.sqrt(sys.values)) @ sys.vectors.conj().T
    root_inv = (sys.vectors * (1.0 / np.sqrt(sys.values))) @ sys.vectors.conj().T
    out = as_mps(
        np.einsum("ab,mbc,cd->mad", root_inv, t.v, root) / np.sqrt(r),
        reflect_perm=None if t.reflect_perm is None else t.reflect_perm.copy(),
    )
    res = channel_residual(out)
    if res > cfg.eps_norm:
        raise ConvergenceFailure(
            "normalization residual above tolerance after rescaling",
            residual=res,
            tolerance=cfg.eps_norm,
        )
    return out


@dataclass(frozen=True)
class PrimitivityCertificate:
    is_primitive: bool
    injectivity_length: int | None
    peripheral_count: int
    spectral_gap: float


def _word_space_step(v: np.ndarray, basis: np.ndarray, rank_tol: float) -> np.ndarray:
    """Orthonormal basis (rows) of span{ v_mu X : X in span(basis rows) }."""
    d = v.shape[0]
    k = v.shape[1]
    mats = basis.reshape(-1, k, k)
    prod = np.einsum("mab,rbc->mrac", v, mats).reshape(d * mats.shape[0], k * k)
    norms = np.linalg.norm(prod, axis=1)
    top = norms.max(initial=0.0)
    keep = norms > 1e-14 * max(top, 1.0)
    prod = prod[keep] / norms[keep, None]
    if prod.shape[0] == 0:
        return np.zeros((0, k * k), dtype=complex)
    _, s, vh = np.linalg.svd(prod, full_matrices=False)
    rank = int(np.sum(s > max(rank_tol, 1e-13) * s[0]))
    return vh[:rank]


def primitivity(t: MpsTuple, l_max: int | None = None,
                config: Config | None = None) -> PrimitivityCertificate:
    """Dual-route primitivity certificate.

    The word-space route grows span{products of length l} until it fills the
    matrix algebra (primitive; the length is the injectivity length) or
    stalls (K_{l+1} inside K_l can never grow again: conclusively not
    primitive). The spectral route demands a unique peripheral transfer
    eigenvalue *and* a faithful invariant state; peripheral uniqueness alone
    is not sufficient. The two routes must agree or :class:`Inconclusive`
    is raised.
    """
    cfg = resolve(config)
    require_normalized(t, cfg)
    k = t.k
    cap = l_max if l_max is not None else (cfg.l_max if cfg.l_max is not None else k ** 4)
    if cap < 1:
        raise InvalidInput("l_max must be positive", l_max=cap)

    full = k * k
    inj: int | None = None
    verdict: bool | None = None
    basis = _word_space_step(t.v, _identity_row(k), cfg.rank_tol)
    length = 1
    if basis.shape[0] == full:
        inj, verdict = 1, True
    while verdict is None and length < cap:
        nxt = _word_space_step(t.v, basis, cfg.rank_tol)
        length += 1
        if nxt.shape[0] == full:
            inj, verdict = length, True
            break
        # containment check: once K_{l+1} is inside K_l the chain is frozen
        resid = nxt - (nxt @ basis.conj().T) @ basis
        if resid.shape[0] == 0 or np.abs(resid).max() <= 1e-10:
            verdict = False
            break
        basis = nxt
    if verdict is None:
        raise Inconclusive(
            "word-space search hit the length cap without a verdict",
            l_max=cap,
            last_dimension=int(basis.shape[0]),
            full_dimension=full,
        )

    spectrum = transfer_spectrum(t)
    radius = float(np.abs(spectrum[0]))
    mods = np.abs(spectrum)
    periph = int(np.sum(mods >= radius - cfg.peripheral_tol * radius))
    below = mods[mods < radius - cfg.peripheral_tol * radius]
    gap = float(radius - (below.max() if below.size else 0.0))

    spectral_ok = periph == 1
    if spectral_ok:
        rho, _ = _adjoint_fixed_point(t)
        evals = herm_eig(rho, eps_herm=cfg.eps_herm).values
        spectral_ok = float(evals.min()) > cfg.pos_def_tol * max(float(evals.max()), 1e-300)

    if spectral_ok != verdict:
        raise Inconclusive(
            "word-space and spectral primitivity certificates disagree",
            word_space_primitive=verdict,
            spectral_primitive=spectral_ok,
            peripheral_count=periph,
            injectivity_length=inj,
        )
    # cross-check the peripheral window against the eigenmatrix route
    pairs = peripheral_eigs(transfer_matrix(t), cfg.peripheral_tol)
    if len(pairs) != periph:
        raise Inconclusive(
            "peripheral eigenvalue counts disagree between routes",
            from_spectrum=periph,
            from_eigenmatrices=len(pairs),
        )
    return PrimitivityCertificate(
        is_primitive=bool(verdict),
        injectivity_length=inj,
        peripheral_count=periph,
        spectral_gap=gap,
    )


def _identity_row(k: int) -> np.ndarray:
    # row-flattened, matching _word_space_step's internal layout
    row = np.eye(k, dtype=complex).reshape(1, k * k)
    return row / np.linalg.norm(row)


def _adjoint_fixed_point(t: MpsTuple) -> tuple[np.ndarray, float]:
    """Trace-one Hermitian fixed point of the adjoint channel, with residual."""
    k = t.k
    am = transfer_matrix(t).conj().T
    w, vs = np.linalg.eig(am)
    idx = int(np.argmin(np.abs(w - 1.0)))
    if abs(w[idx] - 1.0) > 1e-8:
        raise ConvergenceFailure(
            "adjoint transfer map has no eigenvalue at 1",
            closest=complex(w[idx]),
        )
    x = unvec(vs[:, idx], k)
    tr = np.trace(x)
    if abs(tr) < 1e-12:
        raise NotFaithful("adjoint fixed point is traceless; state undefined",
                          trace=abs(complex(tr)))
    x = x / tr
    rho = 0.5 * (x + x.conj().T)
    rho = rho / np.real(np.trace(rho))
    res = frob(apply_adjoint(t, rho) - rho)
    return rho, float(res)


@dataclass(frozen=True)
class InvariantState:
    rho: np.ndarray
    residual: float
    min_eigenvalue: float


def invariant_state(t: MpsTuple, config: Config | None = None) -> InvariantState:
    """Faithful invariant state of a primitive tuple's adjoint channel."""
    cfg = resolve(config)
    require_normalized(t, cfg)
    spectrum = transfer_spectrum(t)
    radius = float(np.abs(spectrum[0]))
    periph = int(np.sum(np.abs(spectrum) >= radius - cfg.peripheral_tol * radius))
    if periph != 1:
        raise NotPrimitive(
            "dominant transfer eigenvalue is not simple",
            peripheral_count=periph,
        )
    rho, res = _adjoint_fixed_point(t)
    if res > 1e-8:
        raise ConvergenceFailure("invariant state residual above tolerance",
                                 residual=res)
    sys = herm_eig(rho, eps_herm=cfg.eps_herm)
    lo, hi = float(sys.values.min()), float(sys.values.max())
    if lo <= cfg.pos_def_tol * hi:
        raise NotFaithful(
            "invariant state is singular within tolerance",
            min_eigenvalue=lo,
            max_eigenvalue=hi,
        )
    return InvariantState(rho=rho, residual=res, min_eigenvalue=lo)


@dataclass(frozen=True)
class Marginal:
    l: int
    matrix: np.ndarray
    rank: int


def marginal(t: MpsTuple, rho: np.ndarray, l: int,
             config: Config | None = None) -> Marginal:
    """Dense l-site reduced state, entries Tr(rho V_mu V_nu^dagger).

    Built by iterated contraction, one site per step, never forming the
    exponentially many explicit word products. Indices are big-endian words.
    """
    cfg = resolve(config)
    if l < 1:
        raise InvalidInput("marginal needs l >= 1", l=l)
    dim = t.d ** l
    if dim > cfg.marginal_cap:
        raise WindowTooLarge(
            "marginal dimension exceeds the dense cap",
            dimension=dim,
            cap=cfg.marginal_cap,
        )
    v = t.v
    g = np.asarray(rho, dtype=complex)[None, None, :, :]
    for _ in range(l - 1):
        big = g.shape[0]
        g = np.einsum("nba,MNbc,mcd->MmNnad", v.conj(), g, v, optimize=True)
        g = g.reshape(big * t.d, big * t.d, t.k, t.k)
    big = g.shape[0]
    m = np.einsum("nba,MNbc,mca->MmNn", v.conj(), g, v, optimize=True)
    m = m.reshape(big * t.d, big * t.d)
    m = 0.5 * (m + m.conj().T)
    tr = float(np.real(np.trace(m)))
    if abs(tr - 1.0) > 1e-7:
        raise ConvergenceFailure("marginal trace drifted from 1", trace=tr, l=l)
    evals = herm_eig(m, eps_herm=cfg.eps_herm).values
    if float(evals.min()) < -1e-8:
        raise ConvergenceFailure(
            "marginal has a significantly negative eigenvalue",
            min_eigenvalue=float(evals.min()),
        )
    rank = int(np.sum(evals > cfg.rank_tol * max(float(evals.max()), 1e-300)))
    return Marginal(l=l, matrix=m, rank=rank)


def block(t: MpsTuple, b: int, config: Config | None = None) -> MpsTuple:
    """Group b consecutive sites into one, composing the reflection involution.

    The blocked alphabet is big-endian words of length b. Reflection of the
    blocked chain reverses sites inside each block, so the new involution
    sends the word (mu_0..mu_{b-1}) to (pi(mu_{b-1})..pi(mu_0)) where pi is
    the old involution. Blocking preserves the channel condition exactly.
    """
    cfg = resolve(config)
    if b < 1:
        raise InvalidInput("block size must be at least 1", b=b)
    if b == 1:
        return t
    require_normalized(t, cfg)
    dim = t.d ** b
    if dim > cfg.marginal_cap:
        raise WindowTooLarge(
            "blocked alphabet exceeds the dense cap",
            dimension=dim,
            cap=cfg.marginal_cap,
        )
    w = t.v
    for _ in range(b - 1):
        w = np.einsum("Mab,mbc->Mmac", w, t.v).reshape(-1, t.k, t.k)
    digits = np.unravel_index(np.arange(dim), (t.d,) * b)
    pi = t.perm()
    new_perm = np.ravel_multi_index(tuple(pi[digits[b - 1 - j]] for j in range(b)),
                                    (t.d,) * b)
    out = MpsTuple(v=w, reflect_perm=new_perm.astype(int))
    require_normalized(out, cfg)
    return out
