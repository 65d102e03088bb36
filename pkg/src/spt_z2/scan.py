"""Model zoo and parameter scans.

Model names follow ``name:arg,arg`` with real or complex literal arguments
(``0.5``, ``1+2i``, ``0.707i``). Point models double as constant families so
a scan over, say, ``product:1,0`` evaluates the same tuple at every grid
point.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import Config, resolve
from .errors import (
    AmbiguousSymmetry,
    Inconclusive,
    NotNormalizable,
    NotPrimitive,
    NotReflectionInvariant,
    SptError,
    UnknownModel,
)
from .mps import normalize, transfer_spectrum
from .reflection import z2_index

def _deformed(s: float) -> np.ndarray:
    alpha = np.sqrt((2.0 - s) / 3.0 + 0j)
    beta = np.sqrt((1.0 + s) / 3.0 + 0j)
    up = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    dn = up.T.copy()
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    return np.stack([alpha * up, beta * sz, -alpha * dn])


def _aklt() -> np.ndarray:
    return _deformed(0.0)


def _ghz() -> np.ndarray:
    v0 = np.diag([1.0, 0.0]).astype(complex)
    v1 = np.diag([0.0, 1.0]).astype(complex)
    return np.stack([v0, v1])


def _product(amps: list[complex]) -> np.ndarray:
    vec_arr = np.asarray(amps, dtype=complex)
    if vec_arr.size < 2:
        raise UnknownModel("product model needs at least two amplitudes",
                           count=int(vec_arr.size))
    norm = np.linalg.norm(vec_arr)
    if norm < 1e-12:
        raise UnknownModel("product amplitudes are all zero")
    vec_arr = vec_arr / norm
    return vec_arr.reshape(-1, 1, 1)


def _breaker(s: float) -> np.ndarray:
    raw = _aklt()
    raw[1] = raw[1] + s * np.eye(2)
    return normalize(raw).v


MODELS = {
    "aklt": {
        "parameters": 0,
        "description": "spin-1 valence bond chain, bond dimension 2, index -1",
    },
    "ghz": {
        "parameters": 0,
        "description": "two-block reducible tuple; fails primitivity",
    },
    "product": {
        "parameters": -1,
        "description": "product state from >= 2 amplitudes (normalized), index +1",
    },
    "deformed-aklt": {
        "parameters": 1,
        "description": "one-parameter deformation of aklt; primitive and "
                       "reflection invariant with index -1 on [0, 1]",
    },
    "aklt-breaker": {
        "parameters": 1,
        "description": "aklt with s * identity added to the middle matrix, "
                       "renormalized; breaks reflection invariance for s > 0",
    },
}


def _parse_scalar(text: str) -> complex:
    text = text.strip().replace("I", "i")
    if not text:
        raise UnknownModel("empty model argument")
    try:
        return complex(float(text))
    except ValueError:
        pass
    try:
        return complex(text.replace("i", "j"))
    except ValueError as exc:
        raise UnknownModel(f"cannot parse model argument {text!r}") from exc


def parse_model(name: str) -> tuple[str, list[complex]]:
    base, _, argstr = name.partition(":")
    base = base.strip()
    if base not in MODELS:
        raise UnknownModel(f"unknown model {base!r}", known=sorted(MODELS))
    args = [_parse_scalar(a) for a in argstr.split(",")] if argstr else []
    spec = MODELS[base]["parameters"]
    if spec >= 0 and len(args) != spec:
        raise UnknownModel(
            f"model {base!r} takes {spec} argument(s), got {len(args)}",
        )
    return base, args


def _real_arg(value: complex, base: str) -> float:
    if abs(value.imag) > 0:
        raise UnknownModel(f"model {base!r} takes a real argument")
    return float(value.real)


def zoo(name: str) -> np.ndarray:
    """Raw tuple for a point model; normalization is the caller's job."""
    base, args = parse_model(name)
    if base == "aklt":
        return _aklt()
    if base == "ghz":
        return _ghz()
    if base == "product":
        return _product(args)
    if base == "deformed-aklt":
        return _deformed(_real_arg(args[0], base))
    if base == "aklt-breaker":
        return _breaker(_real_arg(args[0], base))
    raise UnknownModel(f"unknown model {base!r}")  # unreachable after parse


@dataclass(frozen=True)
class FamilySpec:
    name: str
    s0: float
    s1: float
    grid: int
    generator: Callable[[float], np.ndarray]


_FAMILY_RANGES = {
    "deformed-aklt": (0.0, 1.0),
    "aklt-breaker": (0.0, 0.5),
}


def family(name: str, s0: float | None = None, s1: float | None = None,
           grid: int | None = None) -> FamilySpec:
    """Family from a model name: parameterized if the model takes s, else constant."""
    base = name.partition(":")[0].strip()
    if base in _FAMILY_RANGES and ":" not in name:
        lo, hi = _FAMILY_RANGES[base]
        gen = _deformed if base == "deformed-aklt" else _breaker
        generator: Callable[[float], np.ndarray] = lambda s: gen(float(s))
    else:
        parse_model(name)
        generator = lambda s, _name=name: zoo(_name)
        lo, hi = 0.0, 1.0
    s0 = lo if s0 is None else float(s0)
    s1 = hi if s1 is None else float(s1)
    grid = 11 if grid is None else int(grid)
    if grid < 2:
        raise UnknownModel("family grid needs at least two points", grid=grid)
    return FamilySpec(name=name, s0=s0, s1=s1, grid=grid, generator=generator)


@dataclass(frozen=True)
class ScanPoint:
    s: float
    primitive: bool
    reflection_invariant: bool
    zeta: int | None
    transfer_gap: float | None


@dataclass(frozen=True)
class ScanReport:
    points: list
    constant_index: bool
    first_failure: float | None


def _transfer_gap(raw, cfg: Config) -> float | None:
    try:
        spec = transfer_spectrum(normalize(raw, cfg))
    except SptError:
        return None
    mods = np.abs(spec)
    radius = float(mods[0])
    below = mods[mods < radius - cfg.peripheral_tol * radius]
    return float(radius - (below.max() if below.size else 0.0))


def _scan_point(spec: FamilySpec, s: float, cfg: Config) -> ScanPoint:
    raw = spec.generator(s)
    try:
        rep = z2_index(raw, cfg)
        return ScanPoint(s=s, primitive=True, reflection_invariant=True,
                         zeta=rep.zeta,
                         transfer_gap=rep.certificates.primitivity.spectral_gap)
    except NotNormalizable:
        return ScanPoint(s=s, primitive=False, reflection_invariant=False,
                         zeta=None, transfer_gap=None)
    except NotPrimitive as exc:
        gap = exc.payload.get("spectral_gap")
        if gap is None:
            gap = _transfer_gap(raw, cfg)
        return ScanPoint(s=s, primitive=False, reflection_invariant=False,
                         zeta=None, transfer_gap=gap)
    except NotReflectionInvariant:
        return ScanPoint(s=s, primitive=True, reflection_invariant=False,
                         zeta=None, transfer_gap=_transfer_gap(raw, cfg))
    except AmbiguousSymmetry:
        # both certificates passed; only the classification failed
        return ScanPoint(s=s, primitive=True, reflection_invariant=True,
                         zeta=None, transfer_gap=_transfer_gap(raw, cfg))
    except Inconclusive:
        return ScanPoint(s=s, primitive=False, reflection_invariant=False,
                         zeta=None, transfer_gap=_transfer_gap(raw, cfg))


def scan(spec: FamilySpec, config: Config | None = None, jobs: int = 1) -> ScanReport:
    """Evaluate the index across the family grid; failures become flags.

    A point contributes ``zeta`` only when both certificates hold there.
    ``constant_index`` means every point has the same defined index;
    ``first_failure`` is the smallest grid value where certification failed.
    """
    cfg = resolve(config)
    values = np.linspace(spec.s0, spec.s1, spec.grid)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(lambda s: _scan_point(spec, float(s), cfg), values))
    else:
        points = [_scan_point(spec, float(s), cfg) for s in values]
    zetas = [p.zeta for p in points]
    constant = all(z is not None for z in zetas) and len(set(zetas)) == 1
    first_failure = None
    for p in points:
        if not (p.primitive and p.reflection_invariant):
            first_failure = p.s
            break
    return ScanReport(points=points, constant_index=constant,
                      first_failure=first_failure)
