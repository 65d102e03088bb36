import numpy as np
import pytest

import spt_z2 as sz


@pytest.fixture(scope="session")
def aklt_raw():
    return sz.zoo("aklt")


@pytest.fixture(scope="session")
def aklt():
    return sz.normalize(sz.zoo("aklt"))


@pytest.fixture(scope="session")
def aklt_report():
    return sz.z2_index(sz.zoo("aklt"))


@pytest.fixture(scope="session")
def aklt_rho(aklt):
    return sz.invariant_state(aklt)


@pytest.fixture
def rng():
    return np.random.default_rng(20260821)
