"""Closed-form L^p spectral regions of the Dirac operator on H_c^{k+1} x N.

A region is the set of complex ``mu`` with ``mu**2 = lambda0**2 + kappa**2``
and ``|Im kappa| <= t(p)`` where ``t(p) = c * k * |1/p - 1/2|``.  Its image
under squaring is a closed parabolic region; the analogous region for the
scalar Laplacian differs from it by a real shift of ``k**2 / 4``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

DEFAULT_TOL = 1e-9
_EPS = np.finfo(float).eps

PLike = Union[float, int, str]


def parse_p(p: PLike) -> float:
    """Normalise a Lebesgue exponent; ``"inf"``/``math.inf`` both map to ``math.inf``."""
    if isinstance(p, str):
        text = p.strip().lower()
        if text in ("inf", "infinity", "oo"):
            return math.inf
        p = float(text)
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"Lebesgue exponent must lie in [1, inf], got {p!r}")
    return p


def inverse_p(p: float) -> float:
    """``1/p`` with ``p = inf`` mapped to exactly 0."""
    return 0.0 if math.isinf(p) else 1.0 / p


def dual_exponent(p: float) -> float:
    """Hoelder conjugate ``p*`` with ``1/p + 1/p* = 1``."""
    p = parse_p(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def format_p(p: float) -> Union[float, str]:
    return "inf" if math.isinf(p) else p


@dataclass(frozen=True)
class SpectralRegion:
    c: float
    k: int
    lambda0: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", parse_p(self.p))
        if self.c < 0 or not math.isfinite(self.c):
            raise ValueError(f"curvature scale c must be finite and >= 0, got {self.c!r}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if self.lambda0 < 0 or not math.isfinite(self.lambda0):
            raise ValueError(f"lambda0 must be finite and >= 0, got {self.lambda0!r}")

    @property
    def threshold(self) -> float:
        return threshold(self.c, self.k, self.p)

    def with_p(self, p: PLike) -> "SpectralRegion":
        return SpectralRegion(self.c, self.k, self.lambda0, parse_p(p))


@dataclass(frozen=True)
class RegionCase:
    tag: str  # "L", "M" or "R"
    landmark: float

    @property
    def invertible(self) -> bool:
        """``D`` has a bounded inverse on L^p exactly in case R."""
        return self.tag == "R"


def threshold(c: float, k: int, p: PLike) -> float:
    return c * k * abs(inverse_p(parse_p(p)) - 0.5)


def kappa_of(region: SpectralRegion, mu: complex) -> complex:
    """Principal root of ``mu**2 - lambda0**2``; the other root is its negative."""
    mu = complex(mu)
    lam = region.lambda0
    # factored form keeps mu**2 - lambda0**2 accurate near mu = +-lambda0
    return cmath.sqrt((mu - lam) * (mu + lam))


def _roundoff(kappa_abs, mu_abs2, lam2):
    """Size of ``Im kappa`` attributable to rounding ``mu`` and ``mu**2 - lambda0**2``.

    Near the branch points ``mu = +-lambda0`` one ulp in ``mu`` moves ``kappa``
    by about ``sqrt(eps)``; elsewhere the allowance is of order ``eps |mu|``.
    """
    dw = 4.0 * _EPS * (np.asarray(mu_abs2) + lam2)
    denom = kappa_abs + np.sqrt(dw)
    return np.divide(dw, denom, out=np.zeros_like(denom, dtype=float), where=denom > 0)


def contains(region: SpectralRegion, mu: complex, tol: float = DEFAULT_TOL) -> bool:
    mu = complex(mu)
    if mu.imag == 0.0 and abs(mu.real) >= region.lambda0:
        # kappa is real: admissible for every threshold
        return region.threshold + tol >= 0.0
    kap = kappa_of(region, mu)
    slack = float(_roundoff(abs(kap), abs(mu) ** 2, region.lambda0 ** 2))
    return abs(kap.imag) <= region.threshold + tol + slack


def contains_many(region: SpectralRegion, mus, tol: float = DEFAULT_TOL) -> np.ndarray:
    mus = np.asarray(mus, dtype=complex)
    lam = region.lambda0
    kap = np.sqrt((mus - lam) * (mus + lam))
    slack = _roundoff(np.abs(kap), np.abs(mus) ** 2, lam * lam)
    inside = np.abs(kap.imag) <= region.threshold + tol + slack
    real_ray = (mus.imag == 0.0) & (np.abs(mus.real) >= lam)
    return np.where(real_ray, region.threshold + tol >= 0.0, inside)


def upper_envelope(region: SpectralRegion, x) -> np.ndarray:
    """Largest ``|Im mu|`` inside the region above ``Re mu = x``; NaN where the
    vertical line misses the region.

    From ``kappa = sigma + i t`` one gets ``y**2 = t**2 (x**2 - lambda0**2 + t**2) / (x**2 + t**2)``.
    """
    x = np.asarray(x, dtype=float)
    t = region.threshold
    lam2 = region.lambda0 ** 2
    if t == 0.0:
        return np.where(np.abs(x) >= region.lambda0, 0.0, np.nan)
    if lam2 == 0.0:
        return np.full_like(x, t)
    num = x * x - lam2 + t * t
    with np.errstate(invalid="ignore"):
        # hypot keeps tiny thresholds from underflowing to 0/0
        y = t * np.sqrt(num) / np.hypot(x, t)
    return np.where(num >= 0.0, y, np.nan)


def boundary_branches(region: SpectralRegion, s_min: float, s_max: float, samples: int):
    """Four boundary branches ``(root, -root, conj(root), -conj(root))`` of
    ``mu**2 = lambda0**2 + (s + i t)**2`` over the ``s`` grid."""
    if samples < 2:
        raise ValueError("need at least two samples")
    if not s_min < s_max:
        raise ValueError("s_min must be smaller than s_max")
    s = np.linspace(s_min, s_max, samples)
    t = region.threshold
    if t == 0.0:
        # exact for s = 0: hypot(lambda0, 0) == lambda0, never rounds below the ray start
        root = np.hypot(region.lambda0, s).astype(complex)
    else:
        kap = s + 1j * t
        root = np.sqrt(region.lambda0 ** 2 + kap * kap)
    return s, (root, -root, np.conj(root), -np.conj(root))


def boundary(region: SpectralRegion, s_min: float = -5.0, s_max: float = 5.0,
             samples: int = 201) -> np.ndarray:
    _, branches = boundary_branches(region, s_min, s_max, samples)
    return np.concatenate(branches)


def classify(region: SpectralRegion) -> RegionCase:
    t = region.threshold
    lam = region.lambda0
    if lam == 0.0:
        return RegionCase("L", t)
    if lam <= t:
        return RegionCase("M", math.sqrt(max(t * t - lam * lam, 0.0)))
    return RegionCase("R", math.sqrt(lam * lam - t * t))


def d_squared_boundary(region: SpectralRegion, s_grid) -> np.ndarray:
    """Boundary parabola of the L^p spectrum of ``D**2``."""
    s = np.asarray(s_grid, dtype=float)
    t = region.threshold
    return region.lambda0 ** 2 - t * t + s * s + 2j * s * t


def d_squared_contains(region: SpectralRegion, w: complex, tol: float = DEFAULT_TOL) -> bool:
    """Membership of ``w`` in the spectrum of ``D**2`` (the filled parabola)."""
    w = complex(w)
    shifted = w - region.lambda0 ** 2
    if shifted.imag == 0.0 and shifted.real >= 0.0:
        return region.threshold + tol >= 0.0
    return abs(cmath.sqrt(shifted).imag) <= region.threshold + tol


def laplacian_boundary(k: int, p: PLike, s_grid) -> np.ndarray:
    """Boundary parabola of the L^p spectrum of the Laplacian on functions of
    H^{k+1} (unit curvature)."""
    ip = inverse_p(parse_p(p))
    s = np.asarray(s_grid, dtype=float)
    return k * k * ip * (1.0 - ip) + s * s + 2j * s * k * (0.5 - ip)


def hyperbolic_d_squared_boundary(k: int, p: PLike, s_grid) -> np.ndarray:
    """``D**2`` parabola on H^{k+1} (``c = 1``, ``lambda0 = 0``) with the same
    orientation convention as :func:`laplacian_boundary`."""
    ip = inverse_p(parse_p(p))
    s = np.asarray(s_grid, dtype=float)
    return -k * k * (ip - 0.5) ** 2 + s * s + 2j * s * k * (0.5 - ip)


def laplacian_shift(k: int, p: PLike) -> float:
    """Real offset between the Laplacian and ``D**2`` parabola vertices."""
    ip = inverse_p(parse_p(p))
    return k * k * ip * (1.0 - ip) + k * k * (ip - 0.5) ** 2


@dataclass(frozen=True)
class SymmetryReport:
    mu: complex
    contains_mu: bool
    contains_neg: bool
    contains_conj: bool
    contains_dual: bool
    square_in_d_squared: bool

    @property
    def point_symmetric(self) -> bool:
        return self.contains_mu == self.contains_neg

    @property
    def conjugation_symmetric(self) -> bool:
        return self.contains_mu == self.contains_conj

    @property
    def dual_symmetric(self) -> bool:
        return self.contains_mu == self.contains_dual

    @property
    def square_consistent(self) -> bool:
        return self.square_in_d_squared == (self.contains_mu or self.contains_neg)

    @property
    def holds(self) -> bool:
        return (self.point_symmetric and self.conjugation_symmetric
                and self.dual_symmetric and self.square_consistent)


def symmetry_transforms(region: SpectralRegion, mu: complex,
                        tol: float = DEFAULT_TOL) -> SymmetryReport:
    mu = complex(mu)
    dual = region.with_p(dual_exponent(region.p))
    return SymmetryReport(
        mu=mu,
        contains_mu=contains(region, mu, tol),
        contains_neg=contains(region, -mu, tol),
        contains_conj=contains(region, mu.conjugate(), tol),
        contains_dual=contains(dual, mu, tol),
        square_in_d_squared=d_squared_contains(region, mu * mu, tol),
    )


def is_nested(inner: SpectralRegion, outer: SpectralRegion, mus: Iterable[complex],
              tol: float = DEFAULT_TOL) -> bool:
    """Sampled check that every sample inside ``inner`` is inside ``outer``."""
    mus = np.asarray(list(mus), dtype=complex)
    a = contains_many(inner, mus, tol)
    b = contains_many(outer, mus, tol)
    return bool(np.all(~a | b))


def region_to_dict(region: SpectralRegion, s_min: float = -5.0, s_max: float = 5.0,
                   samples: int = 201) -> dict:
    case = classify(region)
    pts = boundary(region, s_min, s_max, samples)
    return {
        "c": region.c,
        "k": region.k,
        "lambda0": region.lambda0,
        "p": format_p(region.p),
        "case": case.tag,
        "landmark": case.landmark,
        "boundary": [[float(z.real), float(z.imag)] for z in pts],
    }


def region_from_dict(data: dict) -> SpectralRegion:
    return SpectralRegion(c=float(data["c"]), k=int(data["k"]),
                          lambda0=float(data["lambda0"]), p=parse_p(data["p"]))
