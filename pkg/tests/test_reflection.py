import numpy as np
import pytest

import spt_z2 as sz
from spt_z2.linalg import frob
from spt_z2.mps import channel_residual
from spt_z2.reflection import reverse_word_index, reversed_marginal
from util import haar_unitary, random_channel_tuple


# -- reflected tuple ----------------------------------------------------------

def test_reflected_tuple_is_channel(aklt, aklt_rho):
    refl = sz.reflected_tuple(aklt, aklt_rho.rho)
    assert channel_residual(refl.tilde_v) < 1e-12
    assert np.allclose(refl.basis.conj().T @ refl.basis, np.eye(2), atol=1e-12)
    assert np.allclose(refl.rho_diag, [0.5, 0.5], atol=1e-12)


def test_reflected_tuple_involution(rng, aklt, aklt_rho):
    for t, rho in [(aklt, aklt_rho.rho), (random_channel_tuple(rng, 2, 3), None)]:
        if rho is None:
            rho = sz.invariant_state(t).rho
        once = sz.reflected_tuple(t, rho)
        twice = sz.reflected_tuple(once.tilde_v, rho)
        assert frob(twice.tilde_v.v - t.v) < 1e-9


def test_reflected_tuple_singular_rho(aklt):
    with pytest.raises(sz.NotFaithful):
        sz.reflected_tuple(aklt, np.diag([1.0, 0.0]))


def test_marginal_reversal_identity(rng, aklt, aklt_rho):
    # the reflected tuple's marginal is the index-reversed marginal, for any
    # primitive tuple, reflection invariant or not
    for t, rho in [(aklt, aklt_rho.rho), (random_channel_tuple(rng, 2, 2), None)]:
        if rho is None:
            rho = sz.invariant_state(t).rho
        refl = sz.reflected_tuple(t, rho)
        for l in (1, 2):
            orig = sz.marginal(t, rho, l)
            tilde = sz.marginal(refl.tilde_v, rho, l)
            assert frob(tilde.matrix - reversed_marginal(orig, t)) < 1e-10


def test_reverse_word_index():
    ident = reverse_word_index(2, 2, np.arange(2))
    assert ident.tolist() == [0, 2, 1, 3]
    twisted = reverse_word_index(2, 2, np.array([1, 0]))
    assert twisted.tolist() == [3, 1, 2, 0]


# -- gauge relation -----------------------------------------------------------

def test_gauge_solve_conjugated(rng, aklt):
    q = haar_unitary(rng, 2)
    s = sz.MpsTuple(v=np.einsum("ab,mbc,cd->mad", q, aklt.v, q.conj().T))
    sol = sz.gauge_solve(aklt, s)
    assert abs(sol.phase - 1.0) < 1e-8
    assert sol.relation_residual < 1e-10
    assert abs(sol.mixed_radius - 1.0) < 1e-10
    assert frob(sol.U.conj().T @ sol.U - np.eye(2)) < 1e-12
    # U recovers q up to the fixed global phase
    assert abs(abs(np.trace(sol.U.conj().T @ q)) - 2.0) < 1e-8


def test_gauge_solve_global_phase(aklt):
    s = sz.MpsTuple(v=np.exp(0.3j) * aklt.v)
    sol = sz.gauge_solve(aklt, s)
    assert abs(sol.phase - np.exp(-0.3j)) < 1e-8
    assert sol.relation_residual < 1e-10


def test_gauge_solve_different_states(aklt):
    other = sz.normalize(sz.zoo("deformed-aklt:0.7"))
    with pytest.raises(sz.NotSameState):
        sz.gauge_solve(aklt, other)


def test_gauge_solve_shape_mismatch(aklt):
    with pytest.raises(sz.InvalidInput):
        sz.gauge_solve(aklt, sz.normalize(sz.zoo("ghz")))


# -- invariance evidence ------------------------------------------------------

@pytest.mark.parametrize("name", ["aklt", "product:1,0", "deformed-aklt:0.5"])
def test_reflection_invariant_positive(name):
    ev = sz.reflection_invariant(sz.zoo(name))
    assert ev.invariant and ev.via_gauge and ev.via_marginals
    assert ev.gauge_residual < 1e-8
    assert ev.marginal_residual < 1e-8
    assert abs(ev.mixed_radius - 1.0) < 1e-8


def test_reflection_invariant_breaker():
    ev = sz.reflection_invariant(sz.zoo("aklt-breaker:0.05"))
    assert not ev.invariant
    assert not ev.via_gauge and not ev.via_marginals
    assert abs(ev.mixed_radius - 0.992542) < 1e-5
    assert abs(ev.marginal_residual - 0.199808) < 1e-5


# -- the index ----------------------------------------------------------------

def test_z2_index_aklt(aklt_report):
    rep = aklt_report
    assert rep.zeta == -1
    assert np.allclose(rep.U, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-10)
    assert abs(rep.phase + 1.0) < 1e-10
    assert rep.antisym_residual < 1e-12
    assert abs(rep.sym_residual - 2.0 * np.sqrt(2.0)) < 1e-10
    assert rep.phase_sq_residual < 1e-12
    assert rep.rho_commute_residual < 1e-12
    assert np.allclose(rep.rho_diag, [0.5, 0.5], atol=1e-12)
    assert rep.certificates.primitivity.injectivity_length == 2
    assert rep.certificates.evidence.invariant
    assert rep.d == 3 and rep.k == 2


def test_z2_index_product_state():
    rep = sz.z2_index(sz.zoo("product:1,0"))
    assert rep.zeta == 1
    assert rep.U.shape == (1, 1)
    assert abs(rep.U[0, 0] - 1.0) < 1e-12


def test_z2_index_ghz_not_primitive():
    with pytest.raises(sz.NotPrimitive):
        sz.z2_index(sz.zoo("ghz"))


def test_z2_index_breaker_not_invariant():
    with pytest.raises(sz.NotReflectionInvariant):
        sz.z2_index(sz.zoo("aklt-breaker:0.2"))


def test_z2_index_gauge_panel(rng, aklt):
    # unitary conjugation plus a global phase never moves the index
    for _ in range(10):
        q = haar_unitary(rng, 2)
        theta = rng.uniform(0, 2 * np.pi)
        w = np.exp(1j * theta) * np.einsum("ab,mbc,cd->mad", q, aklt.v, q.conj().T)
        assert sz.z2_index(w).zeta == -1


def test_z2_index_blocked(aklt):
    two = sz.z2_index(sz.block(aklt, 2))
    assert two.zeta == -1
    assert abs(two.phase - 1.0) < 1e-8
    three = sz.z2_index(sz.block(aklt, 3))
    assert three.zeta == -1
    assert abs(three.phase + 1.0) < 1e-8


@pytest.mark.parametrize("s,gap", [(0.0, 2 / 3), (0.5, 0.5), (1.0, 1 / 3)])
def test_z2_index_deformed_family(s, gap):
    rep = sz.z2_index(sz.zoo(f"deformed-aklt:{s}"))
    assert rep.zeta == -1
    assert abs(rep.certificates.primitivity.spectral_gap - gap) < 1e-9


def test_z2_index_ambiguous_tolerance(aklt_raw):
    with pytest.raises(sz.AmbiguousSymmetry):
        sz.z2_index(aklt_raw, config=sz.Config(eps_index=-1.0))
