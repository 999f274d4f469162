"""Radial ODE of a single spinor mode on H_c^{k+1} x N and its decay rates.

A mode with ``D^N``-eigenvalue ``lam`` and spherical eigenvalue ``rho`` solves

    Phi'(r) = (A - (k/2) coth_c(r) I + rho / sinh_c(r) B) Phi(r)

with the 4x4 matrices of :func:`build_system`.  ``A`` has eigenvalues
``+-kappa``, ``kappa**2 = lam**2 - mu**2``, and ``B`` anticommutes with ``A``.

Two integration routes are provided.  :func:`integrate` works directly in
``r``.  :func:`integrate_hat` substitutes ``t = exp(-c r)`` and integrates the
renormalised field ``Phi_hat = exp(-h(t)) t**(A/c) Phi``, which is almost
constant near the regular singular point ``t = 0``; it is the stable way to
obtain the decaying solution.  :func:`integrate_hat_flat` is the ``c = 0``
counterpart with ``Phi_hat = r**(k/2) exp(-A r) Phi``.

The transformed equations are solved in eigen-coordinates of ``A``.  The
component along the ``+kappa`` eigenspace is stored rescaled by the factor
that would otherwise overflow, so no step multiplies round-off by
``t**(-2 kappa / c)``.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

DEFAULT_RTOL = 1e-10
# pure relative control; solutions decay by many orders of magnitude
_TINY_ATOL = 1e-300
_ATOL_FACTOR = 1e-6
HAT_START = 1e-8
DEGENERATE_KAPPA = 1e-12
_CLEAN_FACTOR = 1e-13


class DegenerateModeError(ValueError):
    """Raised when ``A`` is defective (``kappa = 0``)."""


def sinh_c(r, c: float):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("sinh_c requires r > 0")
    if c == 0:
        out = r.copy()
    else:
        out = np.sinh(c * r) / c
    return out if out.ndim else float(out)


def coth_c(r, c: float):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("coth_c requires r > 0")
    if c == 0:
        out = 1.0 / r
    else:
        out = c / np.tanh(c * r)
    return out if out.ndim else float(out)


def h_func(t, k: int):
    """``h(t) = (k/2)(log t - log(1+t) - log(1-t))`` and its derivative
    ``k (1 + t**2) / (2 (t - t**3))``."""
    t = np.asarray(t, dtype=float)
    if np.any((t <= 0) | (t >= 1)):
        raise ValueError("h_func is defined for t in (0, 1)")
    value = 0.5 * k * (np.log(t) - np.log1p(t) - np.log1p(-t))
    deriv = k * (1.0 + t * t) / (2.0 * (t - t ** 3))
    if value.ndim == 0:
        return float(value), float(deriv)
    return value, deriv


def _h_of_log(s: np.ndarray, k: int) -> np.ndarray:
    # h(e^s) without cancellation when t = e^s is close to 1
    t = np.exp(s)
    return 0.5 * k * (s - np.log1p(t) - np.log(-np.expm1(s)))


@dataclass(frozen=True)
class ModeSystem:
    lam: complex
    mu: complex
    rho: float
    c: float
    k: int
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    kappa: complex
    degenerate: bool

    def eigen(self):
        """Closed-form eigendecomposition of ``A``.

        Returns ``(values, V, V_inv)`` with eigenvalue order
        ``(-kappa, -kappa, +kappa, +kappa)``: first and third columns live in
        the upper 2x2 block, second and fourth in the lower block.
        """
        if self.degenerate:
            raise DegenerateModeError("A is defective for kappa = 0 (lam**2 == mu**2)")
        kap = self.kappa
        a1, b1 = self.lam + self.mu, self.lam - self.mu
        a2, b2 = -self.lam + self.mu, -self.lam - self.mu
        V = np.zeros((4, 4), dtype=complex)
        for col, (e, blk) in enumerate([(-kap, 0), (-kap, 1), (kap, 0), (kap, 1)]):
            a, b = (a1, b1) if blk == 0 else (a2, b2)
            # [[0, a], [b, 0]] v = e v; pick the better conditioned of two equivalent forms
            vec = np.array([a, e]) if abs(a) >= abs(b) else np.array([e, b])
            vec = vec / np.linalg.norm(vec)
            V[2 * blk:2 * blk + 2, col] = vec
        values = np.array([-kap, -kap, kap, kap])
        return values, V, np.linalg.inv(V)

    def matrix_function(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """``f(A)`` through the eigendecomposition, e.g. ``exp(A r)`` or ``t**(A/c)``."""
        values, V, V_inv = self.eigen()
        return V @ np.diag(func(values)) @ V_inv

    def expm(self, r: float) -> np.ndarray:
        if self.degenerate and np.allclose(self.A, 0):
            return np.eye(4, dtype=complex)
        return self.matrix_function(lambda e: np.exp(e * r))

    def power(self, t: float, scale: Optional[float] = None) -> np.ndarray:
        """``t**(A/scale)``, default scale ``c``."""
        scale = self.c if scale is None else scale
        return self.matrix_function(lambda e: np.exp(e * math.log(t) / scale))

    def coupling(self) -> np.ndarray:
        """``V^{-1} B V`` with the same-eigenvalue blocks set to their exact value 0."""
        _, V, V_inv = self.eigen()
        C = V_inv @ self.B @ V
        C[:2, :2] = 0.0
        C[2:, 2:] = 0.0
        return C

    def rhs_matrix(self, r: float) -> np.ndarray:
        return (self.A - 0.5 * self.k * coth_c(r, self.c) * np.eye(4)
                + self.rho / sinh_c(r, self.c) * self.B)


def mode_matrices(lam: complex, mu: complex):
    A = np.array([
        [0, lam + mu, 0, 0],
        [lam - mu, 0, 0, 0],
        [0, 0, 0, -lam + mu],
        [0, 0, -lam - mu, 0],
    ], dtype=complex)
    B = np.fliplr(np.eye(4)).astype(complex)
    return A, B


def build_system(lam: complex, mu: complex, rho: Optional[float] = None,
                 c: float = 1.0, k: int = 2) -> ModeSystem:
    """Mode system; ``rho`` defaults to the spherical mode ``k/2``."""
    if c < 0:
        raise ValueError("c must be >= 0")
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    k = int(k)
    if rho is None:
        rho = k / 2
    offset = rho - k / 2
    if offset < -1e-12 or abs(offset - round(offset)) > 1e-12:
        warnings.warn(f"rho={rho} is not of the form k/2 + non-negative integer", stacklevel=2)
    lam, mu = complex(lam), complex(mu)
    A, B = mode_matrices(lam, mu)
    kappa = cmath.sqrt(lam * lam - mu * mu)  # principal root has Re >= 0
    scale = max(1.0, abs(lam), abs(mu))
    degenerate = abs(kappa) <= DEGENERATE_KAPPA * scale
    A.setflags(write=False)
    B.setflags(write=False)
    return ModeSystem(lam=lam, mu=mu, rho=float(rho), c=float(c), k=k, A=A, B=B,
                      kappa=kappa, degenerate=degenerate)


@dataclass
class Trajectory:
    r: np.ndarray
    phi: np.ndarray  # shape (len(r), 4)
    log_norm: np.ndarray
    c: float
    k: int
    t: Optional[np.ndarray] = None
    phi_hat: Optional[np.ndarray] = None

    def __post_init__(self):
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("trajectory grid must be strictly increasing")
        if not np.all(np.isfinite(self.log_norm)):
            raise ValueError("trajectory contains non-finite values")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["r"]
        for j in range(1, 5):
            header += [f"re_phi{j}", f"im_phi{j}"]
        writer.writerow(header + ["log_abs_phi"])
        for r, row, ln in zip(self.r, self.phi, self.log_norm):
            vals = [repr(float(r))]
            for z in row:
                vals += [repr(float(z.real)), repr(float(z.imag))]
            writer.writerow(vals + [repr(float(ln))])
        return buf.getvalue()


def _solve(fun, span, y0, t_eval, rtol, method):
    y0 = np.asarray(y0, dtype=complex)
    # absolute floor tied to the initial size; a bare 1e-300 breaks step selection
    atol = max(_ATOL_FACTOR * rtol * float(np.max(np.abs(y0))), _TINY_ATOL)
    if method == "Radau":
        # Radau is real-only: integrate (Re y, Im y) and reassemble
        n = y0.size

        def real_fun(x, u):
            z = fun(x, u[:n] + 1j * u[n:])
            return np.concatenate([z.real, z.imag])

        sol = solve_ivp(real_fun, span, np.concatenate([y0.real, y0.imag]), method=method,
                        t_eval=t_eval, rtol=rtol, atol=atol)
        if sol.success:
            sol.y = sol.y[:n] + 1j * sol.y[n:]
    else:
        sol = solve_ivp(fun, span, y0, method=method, t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol


def integrate(system: ModeSystem, r0: float, r1: float, phi0: Sequence[complex],
              steps: int = 401, rtol: float = DEFAULT_RTOL,
              method: str = "DOP853", r_eval: Optional[Sequence[float]] = None) -> Trajectory:
    """Integrate the radial ODE directly in ``r`` from ``r0`` to ``r1``.

    ``r_eval`` overrides the uniform output grid of ``steps`` points.
    """
    if not 0 < r0 < r1:
        raise ValueError("need 0 < r0 < r1")
    if system.c != 0 and system.c * r0 < 1:
        warnings.warn("c * r0 < 1; the asymptotic regime starts later", stacklevel=2)
    grid = np.linspace(r0, r1, steps) if r_eval is None else np.asarray(r_eval, dtype=float)

    def rhs(r, y):
        return system.rhs_matrix(r) @ y

    sol = _solve(rhs, (r0, r1), phi0, grid, rtol, method)
    phi = sol.y.T
    return Trajectory(r=sol.t, phi=phi, log_norm=np.log(np.linalg.norm(phi, axis=1)),
                      c=system.c, k=system.k)


def integrate_hat(system: ModeSystem, t0: float, phi_hat0: Sequence[complex],
                  steps: int = 401, t_start: float = HAT_START,
                  rtol: float = DEFAULT_RTOL, method: Optional[str] = None) -> Trajectory:
    """Integrate ``Phi_hat`` outward from ``t = t_start`` (standing in for 0) to ``t0``.

    The returned trajectory is indexed by increasing ``r = -log(t)/c``; it
    carries both the back-transformed ``Phi`` and ``Phi_hat``.
    """
    if system.c == 0:
        raise ValueError("integrate_hat needs c != 0; use integrate_hat_flat")
    if not 0 < t_start < t0 < 1:
        raise ValueError("need 0 < t_start < t0 < 1")
    if system.kappa.real <= 0:
        raise DegenerateModeError("integrate_hat requires Re kappa > 0")
    c, rho, kap = system.c, system.rho, system.kappa
    _, V, V_inv = system.eigen()
    C = system.coupling()
    Cmp, Cpm = C[:2, 2:], C[2:, :2]
    w0 = V_inv @ np.asarray(phi_hat0, dtype=complex)
    # roundoff in the +kappa slots would be amplified by t_start**(-2 kappa/c)
    w0[np.abs(w0) <= _CLEAN_FACTOR * np.max(np.abs(w0))] = 0.0
    s_start, s_end = math.log(t_start), math.log(t0)
    ratio = 2.0 * kap / c
    # w_hat = t^{-2 kappa/c} w_plus
    w_plus = w0[2:]
    if np.any(w_plus != 0):
        w_plus = w_plus * cmath.exp(-ratio * s_start)
    y0 = np.concatenate([w0[:2], w_plus])

    def rhs(s, y):
        t = math.exp(s)
        g = 2.0 * rho * t / (1.0 - t * t)
        wm, wh = y[:2], y[2:]
        return np.concatenate([-g * (Cmp @ wh), -ratio * wh - g * (Cpm @ wm)])

    if method is None:
        method = "Radau" if abs(ratio) > 200 else "DOP853"
    s_grid = np.linspace(s_start, s_end, steps)
    sol = _solve(rhs, (s_start, s_end), y0, s_grid, rtol, method)
    s = sol.t[::-1]
    Y = sol.y.T[::-1]
    t = np.exp(s)
    wm, wh = Y[:, :2], Y[:, 2:]
    # Phi_hat = V [w_minus; t^{2kappa/c} w_hat]
    lift = np.exp(ratio * s)[:, None]
    phi_hat = np.concatenate([wm, wh * lift], axis=1) @ V.T
    # Phi = e^{h} t^{kappa/c} V [w_minus; w_hat]
    core = np.concatenate([wm, wh], axis=1) @ V.T
    h = _h_of_log(s, system.k)
    log_norm = h + (kap.real / c) * s + np.log(np.linalg.norm(core, axis=1))
    phase = np.exp(h + (kap / c) * s)[:, None]
    phi = core * phase
    return Trajectory(r=-s / c, phi=phi, log_norm=log_norm, c=c, k=system.k,
                      t=t, phi_hat=phi_hat)


def integrate_hat_flat(system: ModeSystem, r_near: float, r_far: float,
                       phi_hat_far: Sequence[complex], steps: int = 401,
                       rtol: float = DEFAULT_RTOL) -> Trajectory:
    """``c = 0`` branch: integrate ``Phi_hat = r**(k/2) exp(-A r) Phi`` inward
    from ``r_far`` to ``r_near``.

    ``Phi_hat' = (rho/r) exp(-2 A r) B Phi_hat``.  The ``+kappa`` part is
    initialised at its quasi-static value so the start at finite ``r_far``
    adds no growing component.
    """
    if system.c != 0:
        raise ValueError("integrate_hat_flat is the c = 0 branch")
    if not 0 < r_near < r_far:
        raise ValueError("need 0 < r_near < r_far")
    if system.kappa.real <= 0:
        raise DegenerateModeError("integrate_hat_flat requires Re kappa > 0")
    rho, kap = system.rho, system.kappa
    _, V, V_inv = system.eigen()
    C = system.coupling()
    Cmp, Cpm = C[:2, 2:], C[2:, :2]
    w0 = V_inv @ np.asarray(phi_hat_far, dtype=complex)
    wm0 = w0[:2]
    wh0 = -(rho / (2.0 * kap * r_far)) * (Cpm @ wm0)
    y0 = np.concatenate([wm0, wh0])

    def rhs(r, y):
        wm, wh = y[:2], y[2:]
        g = rho / r
        return np.concatenate([g * (Cmp @ wh), 2.0 * kap * wh + g * (Cpm @ wm)])

    r_grid = np.linspace(r_far, r_near, steps)
    sol = _solve(rhs, (r_far, r_near), y0, r_grid, rtol, "DOP853")
    r = sol.t[::-1]
    Y = sol.y.T[::-1]
    wm, wh = Y[:, :2], Y[:, 2:]
    phi_hat = np.concatenate([wm, wh * np.exp(-2.0 * kap * r)[:, None]], axis=1) @ V.T
    core = np.concatenate([wm, wh], axis=1) @ V.T
    log_norm = -0.5 * system.k * np.log(r) - kap.real * r + np.log(np.linalg.norm(core, axis=1))
    phi = core * (r ** (-0.5 * system.k) * np.exp(-kap * r))[:, None]
    return Trajectory(r=r, phi=phi, log_norm=log_norm, c=0.0, k=system.k, phi_hat=phi_hat)


def eigenvector(system: ModeSystem, sign: int) -> np.ndarray:
    """Unit eigenvector of ``A`` to ``sign * kappa`` (upper block)."""
    _, V, _ = system.eigen()
    return V[:, 0] if sign < 0 else V[:, 2]


def decaying_solution(system: ModeSystem, r_start: float, r_end: float,
                      steps: int = 401, rtol: float = DEFAULT_RTOL) -> Trajectory:
    """Solution with ``Phi_hat`` tending to a ``-kappa`` eigenvector at infinity."""
    v = eigenvector(system, -1)
    if system.c == 0:
        return integrate_hat_flat(system, r_start, r_end, v, steps=steps, rtol=rtol)
    t0 = math.exp(-system.c * r_start)
    t_start = min(HAT_START, math.exp(-system.c * r_end))
    return integrate_hat(system, t0, v, steps=steps, t_start=t_start, rtol=rtol)


def growing_solution(system: ModeSystem, r_start: float, r_end: float,
                     steps: int = 401, rtol: float = DEFAULT_RTOL) -> Trajectory:
    """Forward integration from a ``+kappa`` eigenvector; forward integration
    is stable for the dominant (growing) solution."""
    return integrate(system, r_start, r_end, eigenvector(system, +1), steps=steps, rtol=rtol)


def decay_exponent(trajectory: Trajectory, window: Optional[Sequence[float]] = None):
    """Least-squares decay rate of ``log|Phi|`` on ``window``.

    For ``c != 0`` returns the slope of ``log|Phi|`` against ``r``.  For
    ``c = 0`` fits ``beta log r + gamma r + const`` and returns ``(beta, gamma)``.
    """
    r = trajectory.r
    if window is None:
        window = (0.5 * r[-1], r[-1])
    ra, rb = window
    if ra < r[0] - 1e-12 or rb > r[-1] + 1e-12 or not ra < rb:
        raise ValueError(f"window {window} outside trajectory grid [{r[0]}, {r[-1]}]")
    mask = (r >= ra) & (r <= rb)
    if mask.sum() < 3:
        raise ValueError("window holds fewer than three grid points")
    rr, ln = r[mask], trajectory.log_norm[mask]
    if trajectory.c != 0:
        design = np.column_stack([rr, np.ones_like(rr)])
        coef, *_ = np.linalg.lstsq(design, ln, rcond=None)
        return float(coef[0])
    return flat_fit(rr, ln)


def flat_fit(r: np.ndarray, log_norm: np.ndarray):
    design = np.column_stack([np.log(r), r, np.ones_like(r)])
    coef, *_ = np.linalg.lstsq(design, log_norm, rcond=None)
    return float(coef[0]), float(coef[1])


def predicted_exponent(system: ModeSystem, sign: int) -> float:
    """``-c k/2 + sign * Re kappa``."""
    return -0.5 * system.c * system.k + sign * system.kappa.real


def sandwich_bounds(system: ModeSystem, t):
    """Lower/upper factors ``exp(-+3 rho t**(2 Re kappa / c))`` for ``|Phi_hat(t)|/|Phi_hat(0)|``."""
    t = np.asarray(t, dtype=float)
    expo = 3.0 * system.rho * t ** (2.0 * abs(system.kappa.real) / system.c)
    return np.exp(-expo), np.exp(expo)


def l2_weight_factor(abs_re_kappa, distance):
    """``(-2 Re kappa) exp(2 Re kappa d)`` for ``Re kappa = -abs_re_kappa < 0``."""
    a = np.asarray(abs_re_kappa, dtype=float)
    return 2.0 * a * np.exp(-2.0 * a * distance)
