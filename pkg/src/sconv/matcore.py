"""Dense Hermitian linear algebra used by every other module.

Matrices are plain complex ``numpy`` arrays.  Subsystems of a composite
space are addressed by position in a ``layout`` tuple of dimensions,
big-endian as in :func:`numpy.kron`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

TAU_HERM = 1e-10
TAU_EIG = 1e-9
TAU_NULL = 1e-12
TAU_FUNC = 1e-9


class DimensionError(ValueError):
    """Raised when matrix shapes disagree with a subsystem layout."""


class NotHermitianError(ValueError):
    """Raised when a Hermitian matrix is required but not supplied."""


@dataclass(frozen=True, eq=False)
class HermitianEig:
    """Ascending eigenvalues ``w`` and unitary eigenvector columns ``v``."""

    w: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.v * self.w) @ self.v.conj().T


def as_array(m) -> np.ndarray:
    """Return the complex matrix behind ``m`` (accepts anything with ``.mat``)."""
    m = getattr(m, "mat", m)
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(m, tol: float = TAU_HERM) -> np.ndarray:
    m = as_array(m)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |m - m^dag| = {defect:.3e})")
    return m


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(mats: Iterable) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m)
    return out


def _check_layout(m: np.ndarray, layout: Sequence[int]) -> tuple[int, ...]:
    layout = tuple(int(d) for d in layout)
    if any(d < 1 for d in layout):
        raise DimensionError(f"layout dims must be positive, got {layout}")
    if int(np.prod(layout)) != m.shape[0]:
        raise DimensionError(f"layout {layout} does not match matrix dimension {m.shape[0]}")
    return layout


def partial_trace(m, layout: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Kept subsystems stay in their original relative order.
    """
    m = as_array(m)
    layout = _check_layout(m, layout)
    keep = sorted(set(int(k) for k in keep))
    n = len(layout)
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise DimensionError(f"keep must be a nonempty subset of range({n}), got {keep}")
    drop = [i for i in range(n) if i not in keep]
    dk = int(np.prod([layout[i] for i in keep]))
    dd = int(np.prod([layout[i] for i in drop])) if drop else 1
    t = m.reshape(layout + layout)
    perm = keep + drop
    t = t.transpose(perm + [n + i for i in perm]).reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def permute_systems(m, layout: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new factor ``i`` is old factor ``order[i]``."""
    m = as_array(m)
    layout = _check_layout(m, layout)
    n = len(layout)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise DimensionError(f"order {order} is not a permutation of range({n})")
    t = m.reshape(layout + layout).transpose(order + [n + i for i in order])
    return t.reshape(m.shape)


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # first component above the noise floor made real positive, per column
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            z = col[idx[0]]
            v[:, j] = col * (np.conj(z) / abs(z))
    return v


def eigh(m, tol: float = TAU_HERM) -> HermitianEig:
    """Spectral decomposition of a Hermitian matrix with deterministic phases."""
    m = check_hermitian(m, tol)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return HermitianEig(w=w, v=_fix_phases(v))


def mat_func(
    m,
    f: Callable[[np.ndarray], np.ndarray],
    null_policy: str | None = None,
    tau_null: float = TAU_NULL,
) -> np.ndarray:
    """Apply the scalar function ``f`` to the spectrum of Hermitian ``m``.

    ``null_policy`` decides what happens to eigenvalues below ``tau_null``
    (the kernel, for PSD inputs): ``None`` applies ``f`` everywhere,
    ``"zero"`` maps them to 0 (so ``0 log 0 = 0`` and ``0**-a = 0``),
    ``"error"`` raises.
    """
    e = eigh(m)
    w = e.w
    if null_policy is None:
        fw = np.asarray(f(w), dtype=float)
    elif null_policy in ("zero", "error"):
        support = w >= tau_null
        if null_policy == "error" and not support.all():
            raise ValueError(f"matrix has {np.count_nonzero(~support)} eigenvalue(s) below {tau_null}")
        fw = np.zeros_like(w)
        if support.any():
            fw[support] = f(w[support])
    else:
        raise ValueError(f"unknown null_policy {null_policy!r}")
    return (e.v * fw) @ e.v.conj().T


def mat_power(m, a: float) -> np.ndarray:
    """``m**a`` for PSD ``m`` on its support (``a = 0`` gives the support projector)."""
    return mat_func(m, lambda w: w**a, null_policy="zero")


def mat_log(m) -> np.ndarray:
    """Natural log of a PSD matrix restricted to its support."""
    return mat_func(m, np.log, null_policy="zero")


def support_projector(m, tau_null: float = TAU_NULL) -> np.ndarray:
    return mat_func(m, np.ones_like, null_policy="zero", tau_null=tau_null)


def positive_part(m) -> tuple[np.ndarray, float]:
    """Jordan positive part of Hermitian ``m`` and its trace."""
    e = eigh(m)
    wp = np.clip(e.w, 0.0, None)
    return (e.v * wp) @ e.v.conj().T, float(np.sum(wp))


def positive_projector(m, tau: float = TAU_NULL) -> np.ndarray:
    """Projector onto eigenvectors of ``m`` with eigenvalue above ``tau``.

    A zero matrix yields the zero projector.
    """
    e = eigh(m)
    cols = e.v[:, e.w > tau]
    return cols @ cols.conj().T


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(vec, vec.conj())
