"""Shared helpers for the test suite: random ensembles and independent oracles.

Oracles here deliberately avoid the package's batched implementations so the
tests compare two different routes to the same quantity.
"""

from __future__ import annotations

import itertools

import numpy as np

import spt_z2 as sz


def haar_unitary(rng: np.random.Generator, k: int) -> np.ndarray:
    z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r)
    return q * (ph / np.abs(ph))


def random_channel_tuple(rng: np.random.Generator, d: int, k: int) -> sz.MpsTuple:
    """Random normalized tuple; generically primitive."""
    raw = rng.standard_normal((d, k, k)) + 1j * rng.standard_normal((d, k, k))
    return sz.normalize(raw)


def marginal_oracle(t: sz.MpsTuple, rho: np.ndarray, l: int) -> np.ndarray:
    """Brute-force l-site marginal from explicit word products."""
    d, k = t.d, t.k
    words = list(itertools.product(range(d), repeat=l))
    prods = []
    for word in words:
        mat = np.eye(k, dtype=complex)
        for mu in word:
            mat = mat @ t.v[mu]
        prods.append(mat)
    dim = d ** l
    out = np.zeros((dim, dim), dtype=complex)
    for a, wa in enumerate(prods):
        for b, wb in enumerate(prods):
            out[a, b] = np.trace(rho @ wa @ wb.conj().T)
    return out


def word_index(word, d: int) -> int:
    """Big-endian flat index of a word, matching the package convention."""
    idx = 0
    for mu in word:
        idx = idx * d + mu
    return idx


def random_bipartite(rng: np.random.Generator, m: int,
                     symmetry: str = "none") -> sz.BipartiteVector:
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    if symmetry == "sym":
        a = a + a.T
    elif symmetry == "antisym":
        a = a - a.T
    return sz.as_bipartite(a, normalized=True)
