"""Weyl sequences for the Dirac operator on the half-space model of H^{k+1}.

Coordinates are ``x`` in R^k and ``y > 0`` with metric ``y**-2 (dx**2 + dy**2)``;
``z = log y``.  The test spinors are

    phi_n(x, y) = b(x) c_n(log y) y**alpha psi0,      e_y . psi0 = sign * i * psi0,

with ``mu = s + sign * i * k (1/p - 1/2)`` and ``alpha = k/p - sign * i * s``,
so that ``p Re(alpha) = k`` and the zeroth-order part of ``(D - mu) phi_n``
cancels.  ``b`` is a product of C^3 bumps with plateau ``[-1/2, 1/2]`` and
``c_n`` is a C^2 cutoff equal to 1 on ``[-3n, -2n]``.

Residual norms are computed in two independent ways: the exact pointwise
norm of the full residual integrated on a tensor Gauss-Legendre grid, and
the sum of norms of its separable pieces (adaptive QUADPACK in ``z``).  The
first must never exceed the second, and both must sit under the closed-form
bound ``C1 exp(-n) + C2 / n``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize, special
from scipy.spatial import ConvexHull, QhullError

from .clifford import CliffordRep, build_rep, eigenspinor
from .spectral_region import format_p, inverse_p, parse_p

MAX_K = 6

# bump plateau half-width and support half-width
_PLATEAU = 0.5


class NonIntegrableError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# profiles


def smoothstep5(u):
    """Degree-5 smoothstep on [0, 1] with value, first and second derivative."""
    u = np.clip(u, 0.0, 1.0)
    v = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    d1 = 30.0 * u * u * (1.0 - u) ** 2
    d2 = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
    return v, d1, d2


def smoothstep7(u):
    u = np.clip(u, 0.0, 1.0)
    v = u ** 4 * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u ** 3)
    d1 = 140.0 * u ** 3 * (1.0 - u) ** 3
    d2 = 420.0 * u * u * (1.0 - u) ** 2 * (1.0 - 2.0 * u)
    return v, d1, d2


def bump1d(x):
    """``q(x)``: 1 on ``|x| <= 1/2``, degree-7 smoothstep down to 0 at ``|x| = 1``."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    u = 2.0 * (1.0 - ax)
    v, d1, d2 = smoothstep7(u)
    sgn = np.sign(x)
    return v, -2.0 * sgn * d1, 4.0 * d2


def bump_features(points: np.ndarray) -> dict:
    """``b``, ``|grad b|**2`` and ``Laplacian b`` at points of shape ``(N, k)``."""
    points = np.atleast_2d(points)
    q, dq, ddq = bump1d(points)
    k = points.shape[1]
    b = np.prod(q, axis=1)
    grad = np.empty_like(points)
    lap = np.zeros(points.shape[0])
    for i in range(k):
        others = np.prod(np.delete(q, i, axis=1), axis=1) if k > 1 else np.ones(points.shape[0])
        grad[:, i] = dq[:, i] * others
        lap += ddq[:, i] * others
    return {"b": b, "grad": grad, "grad2": np.sum(grad * grad, axis=1), "lap_b": lap}


@dataclass(frozen=True)
class Cutoff:
    """C^2 cutoff: 1 on ``[-3n, -2n]``, support inside ``(-4n, -n)``.

    Each ramp is a degree-5 smoothstep of width ``31n/32``, which gives
    ``|c'| <= (15/8)(32/31)/n < 2/n`` and ``|c''| <= 6.16/n**2 < 8/n**2``.
    """
    n: float

    @property
    def width(self) -> float:
        return self.n * 31.0 / 32.0

    @property
    def support(self) -> tuple[float, float]:
        gap = self.n / 32.0
        return (-4.0 * self.n + gap, -self.n - gap)

    @property
    def breakpoints(self) -> tuple[float, float, float, float]:
        lo, hi = self.support
        return (lo, -3.0 * self.n, -2.0 * self.n, hi)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        lo, a, b, hi = self.breakpoints
        w = self.width
        c = np.zeros_like(z)
        c1 = np.zeros_like(z)
        c2 = np.zeros_like(z)
        rise = (z > lo) & (z < a)
        v, d1, d2 = smoothstep5((z[rise] - lo) / w)
        c[rise], c1[rise], c2[rise] = v, d1 / w, d2 / (w * w)
        flat = (z >= a) & (z <= b)
        c[flat] = 1.0
        fall = (z > b) & (z < hi)
        v, d1, d2 = smoothstep5((hi - z[fall]) / w)
        c[fall], c1[fall], c2[fall] = v, -d1 / w, d2 / (w * w)
        return c, c1, c2


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class WeylConfig:
    k: int
    p: float
    s: float = 0.0
    sign: int = 1
    n: float = 1.0
    x_nodes: int = 12
    rtol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "p", parse_p(self.p))
        if int(self.k) != self.k or not 1 <= self.k <= MAX_K:
            raise ValueError(f"k must be an integer in [1, {MAX_K}]")
        object.__setattr__(self, "k", int(self.k))
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.n <= 0:
            raise ValueError("cutoff scale n must be positive")

    @property
    def inv_p(self) -> float:
        return inverse_p(self.p)

    @property
    def mu(self) -> complex:
        return complex(self.s, self.sign * self.k * (self.inv_p - 0.5))

    @property
    def alpha(self) -> complex:
        return complex(self.k * self.inv_p, -self.sign * self.s)

    @property
    def cutoff(self) -> Cutoff:
        return Cutoff(self.n)

    @cached_property
    def rep(self) -> CliffordRep:
        return build_rep(self.k + 1)

    @cached_property
    def psi0(self) -> np.ndarray:
        # e_y is the first generator, e_i the following k
        return eigenspinor(self.rep, 1, self.sign)

    def with_n(self, n: float) -> "WeylConfig":
        return WeylConfig(self.k, self.p, self.s, self.sign, n,
                          self.x_nodes, self.rtol)

    def phi(self, x, y) -> np.ndarray:
        """The test spinor ``phi_n`` at a single point."""
        x = np.asarray(x, dtype=float)
        feats = bump_features(x[None, :])
        c, _, _ = self.cutoff(np.array([math.log(y)]))
        return feats["b"][0] * c[0] * y ** self.alpha * self.psi0


# ---------------------------------------------------------------------------
# residuals


@dataclass(frozen=True)
class ResidualDecomposition:
    """``(D - mu) phi_n`` split into its three separable pieces:

    ``gradient_coeff * y**(alpha+1) c_n sum_i d_i b e_i.psi0``
    ``+ cutoff_coeff * y**alpha b c_n' psi0``
    ``+ eigen_coeff * y**alpha b c_n psi0``.
    """
    config: WeylConfig
    gradient_coeff: complex
    cutoff_coeff: complex
    eigen_coeff: complex

    def evaluate(self, x, y) -> np.ndarray:
        cfg = self.config
        x = np.asarray(x, dtype=float)
        feats = bump_features(x[None, :])
        c, c1, _ = cfg.cutoff(np.array([math.log(y)]))
        ya = y ** cfg.alpha
        grad_psi = sum(g * (cfg.rep[i + 2] @ cfg.psi0) for i, g in enumerate(feats["grad"][0]))
        b = feats["b"][0]
        return (self.gradient_coeff * y * ya * c[0] * grad_psi
                + (self.cutoff_coeff * c1[0] + self.eigen_coeff * c[0]) * ya * b * cfg.psi0)

    def psi0_terms(self):
        cut, eig = self.cutoff_coeff, self.eigen_coeff
        return [("b", 0, lambda c, c1, c2: cut * c1 + eig * c)]

    def grad_term(self):
        g = self.gradient_coeff
        return 1, lambda c, c1, c2: g * c


@dataclass(frozen=True)
class SquaredResidualDecomposition:
    """``(D**2 - mu**2) phi_n`` as

    ``laplacian_coeff * y**(alpha+2) c_n (Lap b) psi0``
    ``+ gradient_coeff * y**(alpha+1) c_n sum_i d_i b e_i.psi0``
    ``+ y**alpha b (second_coeff c_n'' + first_coeff c_n' + zeroth_coeff c_n) psi0``.
    """
    config: WeylConfig
    laplacian_coeff: complex
    gradient_coeff: complex
    second_coeff: complex
    first_coeff: complex
    zeroth_coeff: complex

    def evaluate(self, x, y) -> np.ndarray:
        cfg = self.config
        x = np.asarray(x, dtype=float)
        feats = bump_features(x[None, :])
        c, c1, c2 = cfg.cutoff(np.array([math.log(y)]))
        ya = y ** cfg.alpha
        grad_psi = sum(g * (cfg.rep[i + 2] @ cfg.psi0) for i, g in enumerate(feats["grad"][0]))
        radial = self.second_coeff * c2[0] + self.first_coeff * c1[0] + self.zeroth_coeff * c[0]
        return (self.laplacian_coeff * y * y * ya * c[0] * feats["lap_b"][0] * cfg.psi0
                + self.gradient_coeff * y * ya * c[0] * grad_psi
                + radial * ya * feats["b"][0] * cfg.psi0)

    def psi0_terms(self):
        L = self.laplacian_coeff
        u, v, w = self.second_coeff, self.first_coeff, self.zeroth_coeff
        return [("lap_b", 2, lambda c, c1, c2: L * c),
                ("b", 0, lambda c, c1, c2: u * c2 + v * c1 + w * c)]

    def grad_term(self):
        g = self.gradient_coeff
        return 1, lambda c, c1, c2: g * c


def dirac_residual(config: WeylConfig) -> ResidualDecomposition:
    sg, alpha, mu, k = config.sign, config.alpha, config.mu, config.k
    return ResidualDecomposition(
        config=config,
        gradient_coeff=1.0 + 0j,
        cutoff_coeff=sg * 1j,
        eigen_coeff=sg * 1j * alpha - sg * 1j * k / 2 - mu,
    )


def squared_zeroth_coefficient(alpha: complex, k: int, mu: complex) -> complex:
    return alpha * (alpha - 1) - (k - 1) * alpha + k * k / 4 + mu * mu


def dirac_squared_residual(config: WeylConfig) -> SquaredResidualDecomposition:
    """From ``D**2 = -y**2 Lap_x - y**2 d_y**2 + (k-1) y d_y + y sum_i e_y e_i d_i - k**2/4``."""
    sg, alpha, mu, k = config.sign, config.alpha, config.mu, config.k
    return SquaredResidualDecomposition(
        config=config,
        laplacian_coeff=-1.0 + 0j,
        gradient_coeff=-sg * 1j,
        second_coeff=-1.0 + 0j,
        first_coeff=-(2 * alpha - k),
        zeroth_coeff=-squared_zeroth_coefficient(alpha, k, mu),
    )


# ---------------------------------------------------------------------------
# quadrature helpers


def _x_grid(k: int, nodes: int, panels: int = 1):
    """Tensor grid on the octant [0, 1]^k.

    On [0, 1/2] the bump and its derivatives are constant in that coordinate,
    so one node of weight 1/2 is exact; [1/2, 1] is split into ``panels``
    pieces with ``nodes`` Gauss-Legendre nodes each.
    """
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(_PLATEAU, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    xs = np.concatenate([[0.25], *(0.5 * (a + b) + h * gx
                                   for a, b, h in zip(edges[:-1], edges[1:], half))])
    ws = np.concatenate([[0.5], *(h * gw for h in half)])
    mesh = np.stack(np.meshgrid(*([xs] * k), indexing="ij"), axis=-1).reshape(-1, k)
    wmesh = np.prod(np.stack(np.meshgrid(*([ws] * k), indexing="ij"), axis=-1).reshape(-1, k), axis=1)
    return mesh, wmesh * 2.0 ** k


def _x_features(residual, points: np.ndarray) -> np.ndarray:
    feats = bump_features(points)
    names = [name for name, _, _ in residual.psi0_terms()]
    cols = [feats[a] * feats[b] for i, a in enumerate(names) for b in names[i:]]
    cols.append(feats["grad2"])
    return np.column_stack(cols)


def _z_features(residual, z: np.ndarray) -> np.ndarray:
    c, c1, c2 = residual.config.cutoff(z)
    zvals = [np.exp(power * z) * fn(c, c1, c2) for _, power, fn in residual.psi0_terms()]
    cols = []
    for i, zi in enumerate(zvals):
        for j, zj in enumerate(zvals[i:], start=i):
            factor = 1.0 if i == j else 2.0
            cols.append(factor * np.real(zi * np.conj(zj)))
    power, fn = residual.grad_term()
    cols.append(np.abs(np.exp(power * z) * fn(c, c1, c2)) ** 2)
    return np.column_stack(cols)


def _combined_integral(residual, x_nodes: int, epsrel: float = 1e-9) -> float:
    """``int int Q**(p/2) exp(z (p Re alpha - k)) dx dz`` with
    ``Q(x, z) = |residual|**2 / |y**alpha|**2 = X(x) . Z(z)``.

    Tensor Gauss-Legendre in ``x``; adaptive QUADPACK in ``z``, which copes
    with the kinks of ``Q**(p/2)`` where a real radial profile changes sign.
    """
    cfg = residual.config
    p = cfg.p
    points, wx = _x_grid(cfg.k, x_nodes)
    X = _x_features(residual, points)
    expo = p * cfg.alpha.real - cfg.k

    def f(z):
        Z = _z_features(residual, np.array([z]))[0]
        Q = np.clip(X @ Z, 0.0, None)
        return float(wx @ Q ** (0.5 * p)) * math.exp(expo * z)

    bps = residual.config.cutoff.breakpoints
    total = 0.0
    for lo, hi in zip(bps[:-1], bps[1:]):
        val, _ = integrate.quad(f, lo, hi, epsrel=epsrel, epsabs=0.0, limit=500)
        total += val
    return total


def _hull_points(X: np.ndarray, mesh: np.ndarray):
    """Rows of ``X`` that can maximise a positive linear functional (hull
    vertices), with the matching ``mesh`` rows."""
    uniq, idx = np.unique(np.round(X, 15), axis=0, return_index=True)
    if uniq.shape[0] > X.shape[1] + 1:
        try:
            hull = ConvexHull(uniq, qhull_options="QJ")
            uniq, idx = uniq[hull.vertices], idx[hull.vertices]
        except (QhullError, ValueError):
            pass
    return X[idx], mesh[idx]


def _pointwise_sup_value(residual, xz: np.ndarray) -> float:
    k = residual.config.k
    x = np.clip(np.abs(xz[:k]), 0.0, 1.0)[None, :]
    z = np.array([xz[k]])
    q = float(_x_features(residual, x)[0] @ _z_features(residual, z)[0])
    return math.sqrt(max(q, 0.0)) * math.exp(z[0] * residual.config.alpha.real)


def _sup_grid(residual, x_points: int, z_points: int, top: int = 0):
    """Grid maximum of ``|residual|``; with ``top > 0`` also the best ``top``
    grid locations as rows ``(x_1, ..., x_k, z)``."""
    cfg = residual.config
    xs = np.concatenate([[0.0], np.linspace(_PLATEAU, 1.0, x_points)])
    mesh = np.stack(np.meshgrid(*([xs] * cfg.k), indexing="ij"), axis=-1).reshape(-1, cfg.k)
    lo, hi = cfg.cutoff.support
    z = np.linspace(lo, hi, z_points)
    X = _x_features(residual, mesh)
    Z = _z_features(residual, z)
    cand, rows = _hull_points(X, mesh)
    Q = np.clip(cand @ Z.T, 0.0, None)
    vals = np.sqrt(Q) * np.exp(z * cfg.alpha.real)[None, :]
    best = float(vals.max())
    if not top:
        return best
    flat = np.argsort(vals, axis=None)[::-1][:top]
    xi, zi = np.unravel_index(flat, vals.shape)
    return best, np.column_stack([rows[xi], z[zi]])


@dataclass(frozen=True)
class SupEstimate:
    value: float
    grid: float
    coarse: float


def _sup_norm(residual, rtol: float = 1e-3) -> SupEstimate:
    """Supremum of ``|residual|``: grid maxima at two resolutions, then local
    polishing from the best grid points.  The coarse grid must already be
    within ``rtol`` of the polished value."""
    coarse = _sup_grid(residual, 17, 1025)
    grid, starts = _sup_grid(residual, 33, 2049, top=4)
    cfg = residual.config
    lo, hi = cfg.cutoff.support
    bounds = [(0.0, 1.0)] * cfg.k + [(lo, hi)]
    best = max(grid, _polish_max(lambda v: _pointwise_sup_value(residual, v), starts, bounds))
    if best - coarse > rtol * best:
        warnings.warn("sup-norm grid and polished maximum disagree", RuntimeWarning, stacklevel=2)
    return SupEstimate(best, grid, coarse)


def _converged(fn: Callable[[int], float], nodes: int, rtol: float,
               max_doublings: int = 3) -> float:
    prev = fn(nodes)
    for _ in range(max_doublings):
        nodes *= 2
        cur = fn(nodes)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    warnings.warn("tensor quadrature did not reach the requested tolerance",
                  RuntimeWarning, stacklevel=2)
    return prev


# ---------------------------------------------------------------------------
# separable norms


X_KINDS = ("b", "grad_b", "lap_b")


@dataclass(frozen=True)
class SeparableField:
    """Spinor field whose pointwise norm is ``|X(x)| |Z(z)| |y**(alpha + y_power)|``."""
    x_kind: str
    z_profile: Callable[[np.ndarray], np.ndarray]
    y_power: int = 0

    def __post_init__(self):
        if self.x_kind not in X_KINDS:
            raise ValueError(f"x_kind must be one of {X_KINDS}")


def _x_values(kind: str, points: np.ndarray) -> np.ndarray:
    feats = bump_features(points)
    if kind == "b":
        return np.abs(feats["b"])
    if kind == "grad_b":
        return np.sqrt(feats["grad2"])
    return np.abs(feats["lap_b"])


# |Lap b| changes sign inside the ramp cells; composite panels converge
# only algebraically there, so its tolerance is looser
X_RTOL = {"b": 1e-12, "grad_b": 1e-6, "lap_b": 1e-4}


@lru_cache(maxsize=None)
def x_integral(kind: str, k: int, p: float, rtol: Optional[float] = None) -> float:
    """``int_{R^k} |X(x)|**p dx`` for the bump-derived profiles."""
    if kind == "b":
        one_d, _ = integrate.quad(lambda t: bump1d(t)[0] ** p, -1.0, 1.0,
                                  points=[-_PLATEAU, _PLATEAU], epsrel=1e-12, epsabs=0.0)
        return one_d ** k
    rtol = X_RTOL[kind] if rtol is None else rtol
    # panels double, six nodes each, capped near 2e6 grid points
    max_doublings = max(1, int(math.log2((2e6 ** (1.0 / k) - 1) / 6.0)))

    def at(panels):
        pts, w = _x_grid(k, 6, panels)
        return float(w @ _x_values(kind, pts) ** p)

    return _converged(at, 2, rtol, max_doublings=max_doublings)


def _polish_max(func: Callable[[np.ndarray], float], starts, bounds) -> float:
    """Largest local maximum of ``func`` reached from the given start points."""
    best = -math.inf
    for start in starts:
        res = optimize.minimize(lambda v: -func(v), np.asarray(start, dtype=float),
                                method="L-BFGS-B", bounds=bounds,
                                options={"ftol": 1e-15, "gtol": 1e-12})
        best = max(best, -float(res.fun), func(np.asarray(start, dtype=float)))
    return best


@lru_cache(maxsize=None)
def x_sup(kind: str, k: int) -> float:
    """``sup |X(x)|`` from a grid on the octant, polished locally."""
    xs = np.concatenate([[0.0], np.linspace(_PLATEAU, 1.0, 33 if k <= 3 else 9)])
    mesh = np.stack(np.meshgrid(*([xs] * k), indexing="ij"), axis=-1).reshape(-1, k)
    vals = _x_values(kind, mesh)
    starts = mesh[np.argsort(vals)[::-1][:4]]
    return _polish_max(lambda v: float(_x_values(kind, v[None, :])[0]), starts,
                       [(0.0, 1.0)] * k)


def z_sup(config: WeylConfig, profile: Callable[[np.ndarray], np.ndarray],
          y_power: int = 0) -> float:
    """``sup |Z(z)| exp(z (Re alpha + y_power))`` over the cutoff support."""
    lo, hi = config.cutoff.support
    expo = config.alpha.real + y_power

    def f(z):
        z = np.atleast_1d(z)
        return np.abs(profile(z)) * np.exp(expo * z)

    grid = np.linspace(lo, hi, 4097)
    vals = f(grid)
    starts = grid[np.argsort(vals)[::-1][:4]][:, None]
    return _polish_max(lambda v: float(f(v)[0]), starts, [(lo, hi)])


def z_integral(config: WeylConfig, profile: Callable[[np.ndarray], np.ndarray],
               y_power: int = 0) -> float:
    """``int |Z(z)|**p exp(z (p (Re alpha + y_power) - k)) dz`` by adaptive quadrature."""
    p = config.p
    expo = p * (config.alpha.real + y_power) - config.k
    lo, a, b, hi = config.cutoff.breakpoints

    def f(z):
        return float(np.abs(profile(np.array([z]))[0]) ** p * math.exp(expo * z))

    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            for u, v in ((lo, a), (a, b), (b, hi)):
                val, _ = integrate.quad(f, u, v, epsrel=1e-10, epsabs=0.0, limit=200)
                total += val
        except integrate.IntegrationWarning as exc:
            raise NonIntegrableError(str(exc)) from exc
    if not math.isfinite(total):
        raise NonIntegrableError("z-integral is not finite")
    return total


def lp_norm(config: WeylConfig, field: SeparableField) -> float:
    p = config.p
    if math.isinf(p):
        return x_sup(field.x_kind, config.k) * z_sup(config, field.z_profile, field.y_power)
    xi = x_integral(field.x_kind, config.k, p)
    zi = z_integral(config, field.z_profile, field.y_power)
    return (xi * zi) ** (1.0 / p)


def weyl_spinor_field(config: WeylConfig) -> SeparableField:
    cut = config.cutoff
    return SeparableField("b", lambda z: cut(z)[0], 0)


def _separable_pieces(residual):
    """The residual written as separable fields (for the triangle-inequality route)."""
    cut = residual.config.cutoff
    pieces = []
    for name, power, fn in residual.psi0_terms():
        kind = "b" if name == "b" else "lap_b"
        pieces.append(SeparableField(kind, (lambda fn: lambda z: fn(*cut(z)))(fn), power))
    power, fn = residual.grad_term()
    pieces.append(SeparableField("grad_b", lambda z: fn(*cut(z)), power))
    return pieces


# ---------------------------------------------------------------------------
# ratios


@dataclass(frozen=True)
class WeylRatio:
    n: float
    ratio: float
    triangle: float
    analytic_bound: float
    constants: dict = field(default_factory=dict)


def phi_norm(config: WeylConfig) -> float:
    return lp_norm(config, weyl_spinor_field(config))


def _exact_residual_norm(residual) -> float:
    cfg = residual.config
    if math.isinf(cfg.p):
        return _sup_norm(residual).value
    integral = _converged(lambda xn: _combined_integral(residual, xn), cfg.x_nodes, cfg.rtol)
    return integral ** (1.0 / cfg.p)


def _bump_ratio(kind: str, k: int, p: float) -> float:
    if math.isinf(p):
        return x_sup(kind, k) / x_sup("b", k)
    return (x_integral(kind, k, p) / x_integral("b", k, p)) ** (1.0 / p)


def analytic_bound(config: WeylConfig, squared: bool = False):
    """Closed-form bound from ``c_n <= 1``, ``c_n = 1`` on a length-n plateau,
    ``|c_n'| <= 2/n`` and ``|c_n''| <= 8/n**2`` on ramps of total length ``<= 2n``,
    and ``y = e^z <= e^{-n}`` on the support."""
    k, p, n = config.k, config.p, config.n
    ramp = 1.0 if math.isinf(p) else 2.0 ** (1.0 / p)
    grad_c = _bump_ratio("grad_b", k, p)
    if not squared:
        res = dirac_residual(config)
        consts = {"C1": grad_c, "C2": 2.0 * ramp, "eigen": abs(res.eigen_coeff)}
        bound = grad_c * math.exp(-n) + 2.0 * ramp / n + abs(res.eigen_coeff)
        return bound, consts
    res = dirac_squared_residual(config)
    lap_c = _bump_ratio("lap_b", k, p)
    first = abs(res.first_coeff)
    consts = {"C_lap": lap_c, "C1": grad_c, "C_second": 8.0 * ramp,
              "C2": 2.0 * ramp * first, "zeroth": abs(res.zeroth_coeff)}
    bound = (lap_c * math.exp(-2 * n) + grad_c * math.exp(-n)
             + 8.0 * ramp / n ** 2 + 2.0 * ramp * first / n + abs(res.zeroth_coeff))
    return bound, consts


def _ratio(config: WeylConfig, residual, squared: bool) -> WeylRatio:
    denom = phi_norm(config)
    exact = _exact_residual_norm(residual)
    triangle = sum(lp_norm(config, piece) for piece in _separable_pieces(residual))
    bound, consts = analytic_bound(config, squared)
    return WeylRatio(n=config.n, ratio=exact / denom, triangle=triangle / denom,
                     analytic_bound=bound, constants=consts)


def weyl_ratio(config: WeylConfig) -> WeylRatio:
    """``||(D - mu) Phi_n||_p / ||Phi_n||_p`` with its bounds."""
    return _ratio(config, dirac_residual(config), squared=False)


def weyl_ratio_squared(config: WeylConfig) -> WeylRatio:
    """``||(D**2 - mu**2) Phi_n||_p / ||Phi_n||_p`` with its bounds."""
    return _ratio(config, dirac_squared_residual(config), squared=True)


# ---------------------------------------------------------------------------
# L^p harmonic spinors in the ball model


@dataclass(frozen=True)
class BallIntegral:
    k: int
    p: float
    exponent: float
    divergent: bool
    value: Optional[float]
    endpoint_exponent: float
    history: tuple = ()

    def to_dict(self) -> dict:
        return {"k": self.k, "p": format_p(self.p), "exponent": self.exponent,
                "classification": "DIVERGENT" if self.divergent else "FINITE",
                "value": self.value, "endpoint_exponent": self.endpoint_exponent}


def ball_exponent(k: int, p: float) -> float:
    return -k - 1 + 0.5 * k * p


def ball_integral_exact(k: int, p: float) -> float:
    """Beta-function value of ``int_0^1 (1 - r**2)**e r**k dr`` for ``e > -1``."""
    e = ball_exponent(k, p)
    if e <= -1:
        return math.inf
    return 0.5 * special.beta((k + 1) / 2.0, e + 1.0)


def ball_harmonic_integral(k: int, p: float, refinement: int = 6) -> BallIntegral:
    """Classify ``int_0^1 (1 - r**2)**(-k-1+kp/2) r**k dr`` as finite or divergent.

    The endpoint behaviour at ``r = 1`` is detected numerically from the
    integrand on a geometric sequence approaching 1.  Finite integrals are
    evaluated with QUADPACK's algebraic endpoint weight and re-evaluated at
    a finer setting (must agree to 1%); divergent ones are confirmed by three
    successive truncations ``int_0^{1 - 10**-2j}`` that each grow by more than 5%.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p = parse_p(p)
    if math.isinf(p):
        raise ValueError("p must be finite")
    e = ball_exponent(k, p)

    def f(r):
        return (1.0 - r * r) ** e * r ** k

    deltas = np.array([1e-4, 1e-6, 1e-8])
    vals = np.array([f(1.0 - d) for d in deltas])
    slope = float(np.polyfit(np.log(deltas), np.log(vals), 1)[0])

    if slope > -1.0 + 1e-3:
        # remaining factor (1 + r)**e r**k is smooth on [0, 1]
        def g(r):
            return (1.0 + r) ** e * r ** k

        coarse, _ = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(0.0, e),
                                   epsrel=1e-8, limit=50)
        history = [coarse]
        fine = coarse
        for level in range(1, refinement + 1):
            fine, _ = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(0.0, e),
                                     epsrel=1e-8 / 2 ** level, epsabs=0.0, limit=50 * 2 ** level)
            history.append(fine)
            if abs(fine - history[-2]) <= 0.01 * abs(fine):
                return BallIntegral(k, p, e, False, float(fine), slope, tuple(history))
        return BallIntegral(k, p, e, False, float(fine), slope, tuple(history))

    def shell(v):
        # w = 1 - r = e^v, dr = w dv; 1 - r**2 = w (2 - w) without cancellation
        w = math.exp(v)
        return (w * (2.0 - w)) ** e * (1.0 - w) ** k * w

    history = []
    growth = 0
    val = 0.0
    for j in range(1, refinement + 1):
        # shell 1 - 10**(2-2j) <= r <= 1 - 10**(-2j)
        a, b = -2 * j * math.log(10.0), (2 - 2 * j) * math.log(10.0)
        piece, _ = integrate.quad(shell, a, b, limit=200, epsrel=1e-10, epsabs=0.0)
        val += piece
        if history and val > 1.05 * history[-1]:
            growth += 1
        else:
            growth = 0
        history.append(val)
        if growth >= 3:
            return BallIntegral(k, p, e, True, None, slope, tuple(history))
    raise RuntimeError(f"ball integral for k={k}, p={p}: endpoint looks singular "
                       f"but truncations did not grow; history {history}")


def ball_classification_json(ks, ps, refinement: int = 6) -> str:
    rows = [ball_harmonic_integral(k, p, refinement).to_dict() for k in ks for p in ps]
    return json.dumps({"ball_integrals": rows}, indent=2, sort_keys=True) + "\n"
