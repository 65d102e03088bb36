import numpy as np
import pytest

import spt_z2 as sz
from spt_z2.linalg import frob
from spt_z2.mps import channel_residual


# -- zoo ----------------------------------------------------------------------

def test_zoo_aklt_is_normalized():
    raw = sz.zoo("aklt")
    assert raw.shape == (3, 2, 2)
    assert channel_residual(sz.as_mps(raw)) < 1e-12


def test_zoo_product_normalizes_amplitudes():
    raw = sz.zoo("product:3,4")
    assert raw.shape == (2, 1, 1)
    assert abs(raw[0, 0, 0] - 0.6) < 1e-12
    assert abs(raw[1, 0, 0] - 0.8) < 1e-12


def test_zoo_product_rejections():
    with pytest.raises(sz.UnknownModel):
        sz.zoo("product:1")
    with pytest.raises(sz.UnknownModel):
        sz.zoo("product:0,0")


def test_zoo_breaker_is_renormalized(aklt_raw):
    raw = sz.zoo("aklt-breaker:0.05")
    assert channel_residual(sz.as_mps(raw)) < 1e-9
    assert frob(raw - aklt_raw) > 0.01
    assert np.allclose(sz.zoo("aklt-breaker:0"), aklt_raw, atol=1e-12)


def test_zoo_name_errors():
    with pytest.raises(sz.UnknownModel):
        sz.zoo("nope")
    with pytest.raises(sz.UnknownModel):
        sz.zoo("aklt:1")
    with pytest.raises(sz.UnknownModel):
        sz.zoo("deformed-aklt")
    with pytest.raises(sz.UnknownModel):
        sz.zoo("deformed-aklt:1+2i")
    with pytest.raises(sz.UnknownModel):
        sz.zoo("deformed-aklt:")


def test_complex_literal_arguments():
    raw = sz.zoo("product:1+2i,0.8i")
    amps = np.array([1.0 + 2.0j, 0.8j])
    amps = amps / np.linalg.norm(amps)
    assert np.allclose(raw[:, 0, 0], amps, atol=1e-12)


def test_models_registry():
    assert set(sz.MODELS) == {
        "aklt", "ghz", "product", "deformed-aklt", "aklt-breaker",
    }
    for meta in sz.MODELS.values():
        assert isinstance(meta["description"], str)


# -- families -----------------------------------------------------------------

def test_family_default_ranges():
    deformed = sz.family("deformed-aklt")
    assert (deformed.s0, deformed.s1, deformed.grid) == (0.0, 1.0, 11)
    breaker = sz.family("aklt-breaker")
    assert (breaker.s0, breaker.s1) == (0.0, 0.5)
    assert frob(deformed.generator(0.0) - sz.zoo("aklt")) < 1e-12


def test_family_constant_from_point_model():
    fam = sz.family("product:1,0")
    assert frob(fam.generator(0.3) - fam.generator(0.9)) == 0.0
    pinned = sz.family("deformed-aklt:0.5")
    assert frob(pinned.generator(0.1) - sz.zoo("deformed-aklt:0.5")) < 1e-12


def test_family_validation():
    with pytest.raises(sz.UnknownModel):
        sz.family("nope")
    with pytest.raises(sz.UnknownModel):
        sz.family("aklt", grid=1)


# -- scans --------------------------------------------------------------------

def test_scan_breaker_first_failure():
    rep = sz.scan(sz.family("aklt-breaker", 0.0, 0.2, 5))
    assert [round(p.s, 4) for p in rep.points] == [0.0, 0.05, 0.1, 0.15, 0.2]
    first = rep.points[0]
    assert first.primitive and first.reflection_invariant and first.zeta == -1
    for p in rep.points[1:]:
        assert p.primitive
        assert not p.reflection_invariant
        assert p.zeta is None
    assert rep.first_failure == 0.05
    assert not rep.constant_index
    for p in rep.points:
        assert (p.zeta is not None) == (p.primitive and p.reflection_invariant)


def test_scan_deformed_constant():
    rep = sz.scan(sz.family("deformed-aklt", grid=5))
    assert rep.constant_index
    assert rep.first_failure is None
    assert all(p.zeta == -1 for p in rep.points)
    assert abs(rep.points[0].transfer_gap - 2 / 3) < 1e-9
    assert abs(rep.points[-1].transfer_gap - 1 / 3) < 1e-9


def test_scan_ghz_never_certifies():
    rep = sz.scan(sz.family("ghz", grid=3))
    assert all(not p.primitive and p.zeta is None for p in rep.points)
    assert rep.first_failure == 0.0
    assert not rep.constant_index


def test_scan_jobs_deterministic():
    spec = sz.family("aklt-breaker", 0.0, 0.2, 5)
    serial = sz.scan(spec, jobs=1)
    threaded = sz.scan(spec, jobs=2)
    assert serial.points == threaded.points
    assert serial.constant_index == threaded.constant_index
    assert serial.first_failure == threaded.first_failure
