"""Complex Clifford-algebra representations with skew gamma matrices.

Gamma matrices are built with a Jordan-Wigner style tensor recursion from the
Pauli matrices.  For ``m = 2n`` the Hermitian generators are

    g_{2j-1} = Z x ... x Z x X x I x ... x I
    g_{2j}   = Z x ... x Z x Y x I x ... x I

(``j - 1`` leading ``Z`` factors, ``n`` factors in total) and the skew
convention used throughout is ``gamma_i = i * g_i`` so that ``gamma_i**2 = -I``.
For ``m = 2n + 1`` the extra generator is ``+-i * Z x ... x Z``; the sign is
fixed so that the volume element acts as ``+I``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_DIM = 12

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class CliffordRep:
    dim: int
    gammas: tuple[np.ndarray, ...]

    @property
    def spinor_dim(self) -> int:
        return 2 ** (self.dim // 2)

    def __getitem__(self, index: int) -> np.ndarray:
        """1-based access, ``rep[1]`` is the first generator."""
        if not 1 <= index <= self.dim:
            raise IndexError(f"gamma index {index} outside [1, {self.dim}]")
        return self.gammas[index - 1]

    def clifford_multiply(self, vector, spinor) -> np.ndarray:
        """Clifford product ``X . psi`` for a real vector ``X`` of length ``dim``."""
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (self.dim,):
            raise ValueError(f"vector must have shape ({self.dim},)")
        mat = sum(v * g for v, g in zip(vector, self.gammas))
        return mat @ np.asarray(spinor, dtype=complex)


def _kron_all(factors) -> np.ndarray:
    return reduce(np.kron, factors, np.eye(1, dtype=complex))


def build_rep(m: int) -> CliffordRep:
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= MAX_DIM:
        raise ValueError(f"Clifford dimension must be an integer in [1, {MAX_DIM}], got {m!r}")
    m = int(m)
    n = m // 2
    gammas = []
    for j in range(n):
        for pauli in (_X, _Y):
            factors = [_Z] * j + [pauli] + [_I2] * (n - j - 1)
            gammas.append(1j * _kron_all(factors))
    if m % 2:
        last = 1j * _kron_all([_Z] * n)
        gammas.append(last)
        omega = _volume(gammas)
        # omega is +-I here; flipping the last generator flips omega
        if omega[0, 0].real < 0:
            gammas[-1] = -last
    for g in gammas:
        g.setflags(write=False)
    return CliffordRep(dim=m, gammas=tuple(gammas))


def _volume(gammas) -> np.ndarray:
    m = len(gammas)
    phase = 1j ** ((m + 1) // 2)
    return phase * reduce(np.matmul, gammas)


def volume_element(rep: CliffordRep) -> np.ndarray:
    """``omega = i**floor((m+1)/2) gamma_1 ... gamma_m``."""
    return _volume(rep.gammas)


def eigenspinor(rep: CliffordRep, direction_index: int, sign: int) -> np.ndarray:
    """Unit spinor with ``gamma_index psi = sign * i * psi``.

    Deterministic: the projector onto the eigenspace is applied to the
    standard basis vectors in order and the first non-negligible image is
    normalised.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    gamma = rep[direction_index]
    size = rep.spinor_dim
    proj = 0.5 * (np.eye(size) - sign * 1j * gamma)
    for col in range(size):
        candidate = proj[:, col]
        norm = np.linalg.norm(candidate)
        if norm > 1e-6:
            return candidate / norm
    # only reachable for m = 1, where gamma_1 is a scalar
    raise ValueError(
        f"gamma_{direction_index} has no eigenvalue {'+' if sign > 0 else '-'}i "
        f"in the chosen dimension-{rep.dim} representation"
    )


def anticommutator_defect(rep: CliffordRep) -> float:
    """Largest entry of ``gamma_i gamma_j + gamma_j gamma_i + 2 delta_ij I``."""
    size = rep.spinor_dim
    worst = 0.0
    for i, gi in enumerate(rep.gammas):
        for j, gj in enumerate(rep.gammas[i:], start=i):
            target = -2.0 * np.eye(size) if i == j else 0.0
            worst = max(worst, float(np.max(np.abs(gi @ gj + gj @ gi - target))))
    return worst
