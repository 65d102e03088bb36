import numpy as np
import pytest

from spt_z2 import errors
from spt_z2.linalg import (
    frob,
    herm_eig,
    map_superop,
    peripheral_eigs,
    phase_fix,
    polar_unitary,
    psd_power,
    unvec,
    vec,
)


def test_vec_unvec_roundtrip(rng):
    x = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    assert np.array_equal(unvec(vec(x)), x)
    # column stacking: first k entries are the first column
    assert np.array_equal(vec(x)[:5], x[:, 0])


def test_vec_convention_kron_identity(rng):
    # vec(A X B) == kron(B.T, A) vec(X), checked against direct products
    for _ in range(10):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        lhs = vec(a @ x @ b)
        rhs = np.kron(b.T, a) @ vec(x)
        assert frob(lhs - rhs) < 1e-12 * max(frob(lhs), 1.0)


def test_map_superop_matches_sum(rng):
    pairs = [(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)),
              rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
             for _ in range(4)]
    mat = map_superop(pairs)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    direct = sum(a @ x @ b for a, b in pairs)
    assert frob(unvec(mat @ vec(x)) - direct) < 1e-12


def test_map_superop_empty():
    with pytest.raises(ValueError):
        map_superop([])


def test_herm_eig_contract(rng):
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    h = a + a.conj().T
    sys = herm_eig(h)
    # ascending eigenvalues
    assert np.all(np.diff(sys.values) >= 0)
    # reconstruction
    recon = (sys.vectors * sys.values) @ sys.vectors.conj().T
    assert frob(recon - h) < 1e-10 * frob(h)
    # orthonormal columns
    gram = sys.vectors.conj().T @ sys.vectors
    assert frob(gram - np.eye(6)) < 1e-12
    # canonical phase: pivot entries real positive
    for j in range(6):
        col = sys.vectors[:, j]
        piv = col[np.abs(col) >= 0.5 * np.abs(col).max()][0]
        assert abs(piv.imag) < 1e-12 and piv.real > 0


def test_herm_eig_rejects_skew(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    with pytest.raises(errors.NotHermitian):
        herm_eig(a + 2j * np.eye(4))


def test_phase_fix_determinism():
    v = np.array([[0.0], [1j], [0.0]])
    fixed = phase_fix(v, axis=0)
    assert np.allclose(fixed, [[0.0], [1.0], [0.0]])


def test_peripheral_eigs_known_spectrum():
    # diagonal superoperator: eigenvalues on the diagonal, eigenmatrices are units
    diag = np.diag([1.0, -1.0, 1j, 0.1])
    pairs = peripheral_eigs(diag, tol=1e-6)
    vals = [p[0] for p in pairs]
    # modulus descending then angle ascending: 1 (angle 0), 1j (pi/2), -1 (pi)
    assert np.allclose(vals, [1.0, 1j, -1.0])
    for lam, mat in pairs:
        assert abs(frob(mat) - 1.0) < 1e-12
        assert frob(diag @ vec(mat) - lam * vec(mat)) < 1e-10


def test_peripheral_eigs_window():
    diag = np.diag([1.0, 1.0 - 1e-9, 0.5, 0.1])
    assert len(peripheral_eigs(diag, tol=1e-6)) == 2
    assert len(peripheral_eigs(diag, tol=1e-12)) == 1


def test_peripheral_eigs_tol_range():
    with pytest.raises(ValueError):
        peripheral_eigs(np.eye(4), tol=0.7)
    with pytest.raises(ValueError):
        peripheral_eigs(np.eye(4), tol=0.0)


def test_psd_power_square_root(rng):
    b = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    a = b @ b.conj().T
    root = psd_power(a, 0.5)
    assert frob(root @ root - a) < 1e-10 * frob(a)


def test_psd_power_pseudo_inverse():
    a = np.diag([2.0, 0.0])
    inv = psd_power(a, -1.0)
    assert np.allclose(inv, np.diag([0.5, 0.0]))


def test_psd_power_rejects_negative():
    with pytest.raises(errors.NotHermitian):
        psd_power(np.diag([1.0, -0.5]), 0.5)


def test_psd_power_zero_matrix():
    assert np.allclose(psd_power(np.zeros((3, 3)), 0.5), 0.0)
    with pytest.raises(errors.RankDeficient):
        psd_power(np.zeros((3, 3)), -0.5)


def test_polar_unitary_exact_multiple(rng):
    from util import haar_unitary

    u = haar_unitary(rng, 4)
    res = polar_unitary(3.0 * u)
    assert res.deviation < 1e-12
    assert abs(res.scale - 3.0) < 1e-10
    assert frob(res.unitary - u) < 1e-10


def test_polar_unitary_generic(rng):
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    res = polar_unitary(x)
    assert frob(res.unitary.conj().T @ res.unitary - np.eye(4)) < 1e-12
    # deviation definition: ||x - scale * unitary||_F / ||x||_F
    direct = frob(x - res.scale * res.unitary) / frob(x)
    assert abs(res.deviation - direct) < 1e-10


def test_polar_unitary_singular():
    with pytest.raises(errors.RankDeficient):
        polar_unitary(np.diag([1.0, 0.0]))
